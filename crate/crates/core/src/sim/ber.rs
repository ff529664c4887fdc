use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::link::Link;
use crate::channel::{derive_seed, theoretical_ber_mpsk, ChannelConfig};
use crate::ofdm::{transmit_frame, CarrierPlan, Modulation, TaggedPayload, PAYLOAD_LEN};

/// Sync threshold for sweeps; the default 0.8 starts missing frames near
/// the BER 1e-3 region.
pub const SWEEP_THRESHOLD: f64 = 0.5;
pub const SWEEP_GAIN: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub sim_ber: f64,
    pub theory_ber: f64,
}

/// `10·log10(P / (k·g²))`: SNR minus Eb/N0 for this modulation, where P is
/// the transmitted sample power and g the gain. Data carriers have unit
/// energy per bin, so k·g² is the energy of k bits.
pub fn snr_offset_db(modulation: Modulation) -> f64 {
    let mut bytes = [0u8; PAYLOAD_LEN];
    ChaCha20Rng::seed_from_u64(0x0ff5e7).fill_bytes(&mut bytes);
    let tx = transmit_frame(
        &TaggedPayload::new(bytes, 0),
        modulation,
        &CarrierPlan::ieee80211a(),
        SWEEP_GAIN,
    )
    .expect("reference frame");
    let k = modulation.bits_per_symbol() as f64;
    10.0 * (tx.occupied_power() / (k * SWEEP_GAIN * SWEEP_GAIN)).log10()
}

pub fn ebn0_to_snr_db(modulation: Modulation, ebn0_db: f64) -> f64 {
    ebn0_db + snr_offset_db(modulation)
}

/// Monte Carlo BER of the full modem (sync, estimation, equalisation) over
/// AWGN at each SNR. A missed frame is scored as an all-zero payload.
pub fn run_ber_sweep(
    modulation: Modulation,
    snr_list: &[f64],
    bits_per_point: u64,
    seed: u64,
) -> Vec<BerPoint> {
    let offset = snr_offset_db(modulation);
    let frame_bits = 8 * PAYLOAD_LEN as u64;
    let trials = bits_per_point.div_ceil(frame_bits).max(1);
    snr_list
        .iter()
        .enumerate()
        .map(|(pi, &snr_db)| {
            let point_seed = derive_seed(seed, pi as u64);
            let link = Link::new(
                modulation,
                SWEEP_GAIN,
                ChannelConfig::awgn(snr_db, point_seed),
                SWEEP_THRESHOLD,
            );
            let bit_errors: u64 = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut bytes = [0u8; PAYLOAD_LEN];
                    ChaCha20Rng::seed_from_u64(derive_seed(point_seed, t | 1 << 40))
                        .fill_bytes(&mut bytes);
                    let p = TaggedPayload::new(bytes, t as u32);
                    let rx = link.send(&p, t).expect("valid link");
                    let got = link.demodulate(&rx).map(|f| f.payload).unwrap_or([0; PAYLOAD_LEN]);
                    bytes.iter().zip(&got).map(|(a, b)| (a ^ b).count_ones() as u64).sum::<u64>()
                })
                .sum();
            let ebn0_db = snr_db - offset;
            let bits = trials * frame_bits;
            BerPoint {
                snr_db,
                ebn0_db,
                trials,
                bits,
                bit_errors,
                sim_ber: bit_errors as f64 / bits as f64,
                theory_ber: theoretical_ber_mpsk(modulation.order(), ebn0_db).expect("M is 2 or 4"),
            }
        })
        .collect()
}

pub fn write_ber_csv(points: &[BerPoint], w: impl Write) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for p in points {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Eb/N0 at which a log-BER curve crosses `target`, by linear interpolation
/// of log10(BER) between the bracketing points.
pub fn crossing_db(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let lt = target.log10();
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 <= 0.0 || y1 <= 0.0 {
            return None;
        }
        let (l0, l1) = (y0.log10(), y1.log10());
        ((l0 - lt) * (l1 - lt) <= 0.0 && l0 != l1).then(|| x0 + (lt - l0) * (x1 - x0) / (l1 - l0))
    })
}
