//! 802.11a-style OFDM modem: transmit chain, Schmidl synchronization and the
//! pilot-aided receive chain.

mod fft;
mod header;
mod iq;
mod plan;
mod rx;
mod sync;
mod tx;

pub use fft::{fft64, ifft64};
pub use header::{crc8, generate_header, parse_header, HeaderFields, HEADER_LEN};
pub use iq::IqBuffer;
pub use plan::{
    bin, label, sync_word_1, sync_word_2, Carrier, CarrierPlan, CP_LEN, FFT_SIZE, N_DATA,
    N_PILOT, SYMBOL_LEN, SYNC1_AMPLITUDE,
};
pub use rx::{
    compute_ber, demap, demodulate_frame, equalize, receive_frame, receive_frame_with, remove_cp,
    unpack_bits, ChannelEstimate, RxFrame,
};
pub use sync::{schmidl_sync, SyncResult, DEFAULT_THRESHOLD};
pub use tx::{
    add_cp, allocate_carriers, apply_gain, map_bpsk, map_qpsk, modulate_payload, mux,
    repack_bits, tag_stream, transmit_frame, TaggedPayload, PAYLOAD_LEN,
};

use thiserror::Error;

/// Baseband sample rate of the 20 MHz 802.11a channel.
pub const SAMPLE_RATE_HZ: f64 = 20e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Modulation {
    #[serde(rename = "BPSK")]
    Bpsk,
    #[serde(rename = "QPSK")]
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }

    /// Constellation order M.
    pub fn order(self) -> u32 {
        1 << self.bits_per_symbol()
    }

    /// Mapped symbols carrying one 96-byte payload.
    pub fn payload_symbols(self) -> usize {
        PAYLOAD_LEN * 8 / self.bits_per_symbol()
    }

    /// Header plus payload symbols leaving the MUX.
    pub fn frame_symbols(self) -> usize {
        HEADER_LEN + self.payload_symbols()
    }

    /// OFDM vectors per frame, the two sync words included.
    pub fn frame_vectors(self) -> usize {
        2 + self.frame_symbols() / N_DATA
    }

    pub fn frame_samples(self) -> usize {
        self.frame_vectors() * SYMBOL_LEN
    }
}

impl std::str::FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BPSK" => Ok(Modulation::Bpsk),
            "QPSK" => Ok(Modulation::Qpsk),
            other => Err(format!("unknown modulation {other:?}")),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OfdmError {
    #[error("{what}: expected {expected} items, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("byte {0:#04x} is not a valid symbol")]
    InvalidSymbol(u8),
    #[error("gain must be positive, got {0}")]
    NonPositiveGain(f64),
    #[error("no frame detected")]
    NoFrame,
    #[error("pilot at label {0} is zero")]
    ZeroPilot(i32),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), OfdmError> {
    if expected == got {
        Ok(())
    } else {
        Err(OfdmError::LengthMismatch { what, expected, got })
    }
}
