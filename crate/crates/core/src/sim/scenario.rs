use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::channel::{ChannelConfig, Tap};
use crate::handshake::MessageKind;
use crate::ofdm::{Modulation, DEFAULT_THRESHOLD};
use crate::sponge::{Key, Scheme};

/// A run description, written as TOML: top-level keys plus `[channel]`,
/// `[handshake]`, `[data]` and `[report]` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scheme: Scheme,
    pub modulation: Modulation,
    /// 128-bit PMK as 32 hex digits.
    pub pmk: String,
    #[serde(default = "default_ap_mac")]
    pub ap_mac: String,
    #[serde(default = "default_sta_mac")]
    pub sta_mac: String,
    /// Root of every derived seed: nonces, noise, record payloads.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub handshake: HandshakeSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub report: ReportSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Absent means noiseless.
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub cfo_fraction: f64,
    /// `[delay, re, im]` triples; defaults to a single unit tap.
    #[serde(default = "default_taps")]
    pub taps: Vec<(usize, f64, f64)>,
    #[serde(default = "default_threshold")]
    pub sync_threshold: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            snr_db: None,
            cfo_fraction: 0.0,
            taps: default_taps(),
            sync_threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandshakeSection {
    /// Counter r the authenticator starts with.
    #[serde(default = "default_counter")]
    pub replay_counter: u64,
    /// Simulated seconds a sender waits before its single retransmission.
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    pub tamper: Option<Tamper>,
}

impl Default for HandshakeSection {
    fn default() -> Self {
        Self {
            replay_counter: default_counter(),
            timeout_s: default_timeout(),
            tamper: None,
        }
    }
}

/// Man-in-the-middle hook: flip one bit of one frame before it is modulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tamper {
    pub kind: MessageKind,
    /// Bit index into the 96-byte frame, LSB of byte 0 first.
    pub bit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Associated-data blocks per record, 0 or 2.
    #[serde(default)]
    pub l_ad: usize,
    #[serde(default = "default_records")]
    pub n_records: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            l_ad: 0,
            n_records: default_records(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub transcript: Option<PathBuf>,
    pub iq_out: Option<PathBuf>,
    pub timing_fixture: Option<PathBuf>,
    pub timing_report: Option<PathBuf>,
    pub ber_report: Option<PathBuf>,
}

fn default_ap_mac() -> String {
    "02:00:00:00:00:01".into()
}
fn default_sta_mac() -> String {
    "02:00:00:00:00:02".into()
}
fn default_gain() -> f64 {
    0.02
}
fn default_taps() -> Vec<(usize, f64, f64)> {
    vec![(0, 1.0, 0.0)]
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_counter() -> u64 {
    1
}
fn default_timeout() -> f64 {
    0.5
}
fn default_records() -> usize {
    100
}

fn config(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

fn parse_mac(s: &str) -> Result<[u8; 6], SimError> {
    let bytes = s
        .split(':')
        .map(|p| u8::from_str_radix(p, 16))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| config(format!("MAC {s:?}: {e}")))?;
    bytes.try_into().map_err(|_| config(format!("MAC {s:?} needs six octets")))
}

impl Scenario {
    /// A noiseless run with every default.
    pub fn new(scheme: Scheme, modulation: Modulation, pmk: Key, seed: u64) -> Self {
        Self {
            scheme,
            modulation,
            pmk: hex::encode(pmk),
            ap_mac: default_ap_mac(),
            sta_mac: default_sta_mac(),
            seed,
            gain: default_gain(),
            channel: ChannelSection::default(),
            handshake: HandshakeSection::default(),
            data: DataSection::default(),
            report: ReportSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let s: Scenario = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.pmk_bytes()?;
        self.macs()?;
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(config(format!("gain must be positive, got {}", self.gain)));
        }
        if self.channel.taps.is_empty() {
            return Err(config("channel needs at least one tap"));
        }
        if !(self.channel.sync_threshold > 0.0 && self.channel.sync_threshold < 1.0) {
            return Err(config("sync_threshold must lie in (0, 1)"));
        }
        if !(self.handshake.timeout_s > 0.0) {
            return Err(config("timeout_s must be positive"));
        }
        if let Some(t) = self.handshake.tamper {
            if t.bit >= 96 * 8 {
                return Err(config(format!("tamper bit {} outside the 768-bit frame", t.bit)));
            }
        }
        if !matches!(self.data.l_ad, 0 | 2) {
            return Err(config(format!("l_ad must be 0 or 2, got {}", self.data.l_ad)));
        }
        Ok(())
    }

    pub fn pmk_bytes(&self) -> Result<Key, SimError> {
        let v = hex::decode(&self.pmk).map_err(|e| config(format!("pmk: {e}")))?;
        v.try_into().map_err(|_| config("pmk must be 16 bytes"))
    }

    /// `(ap, sta)`.
    pub fn macs(&self) -> Result<([u8; 6], [u8; 6]), SimError> {
        Ok((parse_mac(&self.ap_mac)?, parse_mac(&self.sta_mac)?))
    }

    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            snr_db: self.channel.snr_db.unwrap_or(f64::INFINITY),
            cfo_fraction: self.channel.cfo_fraction,
            taps: self
                .channel
                .taps
                .iter()
                .map(|&(d, re, im)| Tap::new(d, Complex64::new(re, im)))
                .collect(),
            seed: self.seed,
        }
    }

    /// Gains outside the usual transmit range still work but are unusual.
    pub fn gain_warning(&self) -> Option<String> {
        (!(0.01..=0.03).contains(&self.gain))
            .then(|| format!("gain {} is outside the usual 0.01..0.03 range", self.gain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
scheme = "WAGE"
modulation = "BPSK"
pmk = "000102030405060708090a0b0c0d0e0f"
seed = 7

[channel]
snr_db = 25.0
taps = [[0, 1.0, 0.0], [4, 0.3, -0.1]]

[handshake]
tamper = { kind = "Msg3ANonceMicS", bit = 140 }

[data]
l_ad = 2
n_records = 5
"#;

    #[test]
    fn parses_and_roundtrips() {
        let s = Scenario::from_toml(TEXT).unwrap();
        assert_eq!(s.scheme, Scheme::Wage);
        assert_eq!(s.modulation, Modulation::Bpsk);
        assert_eq!(s.pmk_bytes().unwrap()[15], 0x0f);
        assert_eq!(s.channel_config().taps[1].delay, 4);
        assert_eq!(s.handshake.tamper.unwrap().bit, 140);
        assert_eq!(s.gain, 0.02);
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for (from, to) in [
            ("seed = 7", "seed = 7\nbogus = 1"),
            ("0f\"", "0\""),
            ("l_ad = 2", "l_ad = 1"),
            ("bit = 140", "bit = 768"),
        ] {
            let text = TEXT.replace(from, to);
            assert!(matches!(Scenario::from_toml(&text), Err(SimError::Config(_))), "{to}");
        }
    }

    #[test]
    fn gain_warning_range() {
        let mut s = Scenario::new(Scheme::Ace, Modulation::Qpsk, [0; 16], 1);
        assert!(s.gain_warning().is_none());
        s.gain = 0.5;
        assert!(s.gain_warning().is_some());
    }
}
