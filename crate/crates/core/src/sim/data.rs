use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::link::Link;
use super::scenario::Scenario;
use super::SimError;
use crate::channel::derive_seed;
use crate::handshake::{
    protect, unprotect, HandshakeError, PartyState, ProtectedRecord, MAX_RECORD_MSG,
};
use crate::ofdm::tag_stream;

/// Counters from one data phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DataStats {
    pub records_sent: usize,
    pub delivered: usize,
    pub auth_failures: usize,
    /// Records with at least one frame the receiver could not find or whose
    /// header failed.
    pub decode_failures: usize,
    /// Delivered records whose plaintext differs from what was sent. Must
    /// stay zero.
    pub corrupted_plaintext: usize,
    pub frames_sent: usize,
    pub bits: u64,
    pub bit_errors: u64,
}

impl DataStats {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

/// Sends `n_records` 1024-bit messages from authenticator to supplicant over
/// the scenario's link. Returns the updated parties along with the counts.
pub fn run_data_phase(
    s: &Scenario,
    authenticator: &PartyState,
    supplicant: &PartyState,
) -> Result<(PartyState, PartyState, DataStats), SimError> {
    let link = Link::new(s.modulation, s.gain, s.channel_config(), s.channel.sync_threshold);
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(s.seed, 0xda7a));
    let mut a = authenticator.clone();
    let mut b = supplicant.clone();
    let mut stats = DataStats::default();
    let ad_len = 8 * s.data.l_ad;

    for _ in 0..s.data.n_records {
        let mut msg = [0u8; MAX_RECORD_MSG];
        rng.fill_bytes(&mut msg);
        let mut ad = vec![0u8; ad_len];
        rng.fill_bytes(&mut ad);
        let (next, rec) = protect(&a, &ad, &msg).map_err(SimError::Handshake)?;
        a = next;
        stats.records_sent += 1;

        let wire = rec.to_bytes();
        let mut received = Vec::with_capacity(wire.len() + 96);
        let mut lost = false;
        for p in tag_stream(&wire) {
            let stream = (3u64 << 32) + stats.frames_sent as u64;
            stats.frames_sent += 1;
            let rx = link.send(&p, stream)?;
            match link.demodulate(&rx) {
                Ok(frame) => {
                    stats.bits += 8 * p.bytes.len() as u64;
                    stats.bit_errors += p
                        .bytes
                        .iter()
                        .zip(&frame.payload)
                        .map(|(x, y)| (x ^ y).count_ones() as u64)
                        .sum::<u64>();
                    lost |= !frame.header_ok;
                    received.extend_from_slice(&frame.payload);
                }
                Err(_) => {
                    stats.bits += 8 * p.bytes.len() as u64;
                    stats.bit_errors += p.bytes.iter().map(|x| x.count_ones() as u64).sum::<u64>();
                    lost = true;
                }
            }
        }
        if lost {
            stats.decode_failures += 1;
            continue;
        }
        received.truncate(wire.len());
        let outcome = ProtectedRecord::from_bytes(&received).and_then(|r| unprotect(&b, &r));
        match outcome {
            Ok((next, plain)) => {
                b = next;
                stats.delivered += 1;
                if plain != msg {
                    stats.corrupted_plaintext += 1;
                }
            }
            Err(HandshakeError::NotInstalled) => return Err(SimError::Handshake(HandshakeError::NotInstalled)),
            Err(_) => stats.auth_failures += 1,
        }
    }
    Ok((a, b, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::Modulation;
    use crate::sim::run_handshake_scenario;
    use crate::sponge::Scheme;

    fn installed(s: &Scenario) -> (PartyState, PartyState) {
        let mut clean = s.clone();
        clean.channel = Default::default();
        run_handshake_scenario(&clean).unwrap().parties.unwrap()
    }

    #[test]
    fn clean_channel_delivers_everything() {
        let mut s = Scenario::new(Scheme::Spix, Modulation::Qpsk, [3; 16], 5);
        s.data.n_records = 20;
        s.data.l_ad = 2;
        let (a, b) = installed(&s);
        let (_, _, st) = run_data_phase(&s, &a, &b).unwrap();
        assert_eq!((st.delivered, st.auth_failures, st.decode_failures), (20, 0, 0));
        assert_eq!(st.frames_sent, 40);
        assert_eq!(st.bit_errors, 0);
    }

    #[test]
    fn requires_installed_keys() {
        let s = Scenario::new(Scheme::Ace, Modulation::Bpsk, [3; 16], 5);
        let (ap, sta) = s.macs().unwrap();
        let a = PartyState::new(crate::handshake::Role::Authenticator, [3; 16], ap, sta, 1, Scheme::Ace);
        let b = PartyState::new(crate::handshake::Role::Supplicant, [3; 16], sta, ap, 0, Scheme::Ace);
        assert_eq!(
            run_data_phase(&s, &a, &b).unwrap_err(),
            SimError::Handshake(HandshakeError::NotInstalled)
        );
    }

    #[test]
    fn noise_never_yields_wrong_plaintext() {
        let mut s = Scenario::new(Scheme::Wage, Modulation::Qpsk, [9; 16], 21);
        s.data.n_records = 60;
        let (a, b) = installed(&s);
        s.channel.snr_db = Some(7.0);
        s.channel.sync_threshold = 0.5;
        let (_, _, st) = run_data_phase(&s, &a, &b).unwrap();
        assert!(st.bit_errors > 0);
        assert!(st.auth_failures + st.decode_failures > 0, "{st:?}");
        assert_eq!(st.corrupted_plaintext, 0);
        assert_eq!(st.delivered + st.auth_failures + st.decode_failures, 60);
    }
}
