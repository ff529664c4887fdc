//! Receive chain: sync, CFO correction, fine timing, FFT, equalization,
//! demapping and header check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{
    bin, check_len, fft64, ifft64, map_bpsk, map_qpsk, parse_header, schmidl_sync, sync_word_1,
    sync_word_2, Carrier, CarrierPlan, HeaderFields, IqBuffer, Modulation, OfdmError, SyncResult,
    CP_LEN, DEFAULT_THRESHOLD, FFT_SIZE, HEADER_LEN, N_DATA, N_PILOT, PAYLOAD_LEN, SYMBOL_LEN,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Channel impulse response length assumed by the estimator: anything the
/// cyclic prefix can absorb.
const CHANNEL_TAPS: usize = CP_LEN + 1;
const DD_ROUNDS: usize = 2;
const ZERO_PILOT_LIMIT: f64 = 1e-12;
/// Half-width of the fine timing search around the coarse estimate.
const FINE_SEARCH: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Per-bin gain; entries at null labels are zero and unused.
    pub gains: [Complex64; FFT_SIZE],
    pub source_pilots: [Complex64; N_PILOT],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxFrame {
    pub payload: [u8; PAYLOAD_LEN],
    pub header_ok: bool,
    pub header: Option<HeaderFields>,
    pub sync: SyncResult,
    /// Sample index of the first sync word after fine timing.
    pub start: usize,
}

pub fn remove_cp(sym80: &[Complex64]) -> Result<[Complex64; FFT_SIZE], OfdmError> {
    check_len("symbol with prefix", SYMBOL_LEN, sym80.len())?;
    Ok(sym80[CP_LEN..].try_into().unwrap())
}

/// Pilot least-squares estimate, linearly interpolated across labels and held
/// flat beyond the outer pilots. Returns the 48 equalized data symbols in fill
/// order.
pub fn equalize(
    sym_freq: &[Complex64],
    plan: &CarrierPlan,
) -> Result<(Vec<Complex64>, ChannelEstimate), OfdmError> {
    check_len("frequency symbol", FFT_SIZE, sym_freq.len())?;
    let mut source_pilots = [ZERO; N_PILOT];
    for (i, (&l, &v)) in plan.pilot_labels.iter().zip(&plan.pilot_values).enumerate() {
        let y = sym_freq[bin(l)];
        if y.norm() < ZERO_PILOT_LIMIT {
            return Err(OfdmError::ZeroPilot(l));
        }
        source_pilots[i] = y / v;
    }
    let mut pilots: Vec<(i32, Complex64)> = plan
        .pilot_labels
        .iter()
        .copied()
        .zip(source_pilots)
        .collect();
    pilots.sort_by_key(|p| p.0);
    let interp = |l: i32| -> Complex64 {
        let (first, last) = (pilots[0], pilots[pilots.len() - 1]);
        if l <= first.0 {
            return first.1;
        }
        if l >= last.0 {
            return last.1;
        }
        let w = pilots.windows(2).find(|w| l <= w[1].0).unwrap();
        let t = (l - w[0].0) as f64 / (w[1].0 - w[0].0) as f64;
        w[0].1 * (1.0 - t) + w[1].1 * t
    };
    let mut gains = [ZERO; FFT_SIZE];
    for l in -32..32 {
        if plan.classify(l) != Carrier::Null {
            gains[bin(l)] = interp(l);
        }
    }
    let data = plan
        .data_labels
        .iter()
        .map(|&l| sym_freq[bin(l)] / gains[bin(l)])
        .collect();
    Ok((data, ChannelEstimate { gains, source_pilots }))
}

/// Hard decision to the nearest constellation point; ties go to the lower byte.
pub fn demap(sym: Complex64, modulation: Modulation) -> u8 {
    match modulation {
        Modulation::Bpsk => (sym.re > 0.0) as u8,
        Modulation::Qpsk => (sym.re > 0.0) as u8 | ((sym.im > 0.0) as u8) << 1,
    }
}

/// Inverse of `repack_bits`.
pub fn unpack_bits(quads: &[u8]) -> Result<u8, OfdmError> {
    check_len("quads", 4, quads.len())?;
    quads.iter().rev().try_fold(0u8, |acc, &q| {
        if q > 3 {
            Err(OfdmError::InvalidSymbol(q))
        } else {
            Ok(acc << 2 | q)
        }
    })
}

/// Fraction of differing bits.
pub fn compute_ber(sent: &[u8], received: &[u8]) -> Result<f64, OfdmError> {
    check_len("received bytes", sent.len(), received.len())?;
    if sent.is_empty() {
        return Ok(0.0);
    }
    let errors: u32 = sent.iter().zip(received).map(|(a, b)| (a ^ b).count_ones()).sum();
    Ok(errors as f64 / (8 * sent.len()) as f64)
}

/// Returns the decoded frame; fails if no frame is found or its header is bad.
pub fn receive_frame(
    rx: &IqBuffer,
    modulation: Modulation,
    plan: &CarrierPlan,
) -> Result<RxFrame, OfdmError> {
    receive_frame_with(rx, modulation, plan, DEFAULT_THRESHOLD)
}

pub fn receive_frame_with(
    rx: &IqBuffer,
    modulation: Modulation,
    plan: &CarrierPlan,
    threshold: f64,
) -> Result<RxFrame, OfdmError> {
    let frame = demodulate_frame(rx, modulation, plan, threshold)?;
    if !frame.header_ok {
        return Err(OfdmError::DecodeFailure("header CRC mismatch".into()));
    }
    Ok(frame)
}

fn decide(z: Complex64, m: Modulation) -> Complex64 {
    match m {
        Modulation::Bpsk => map_bpsk(demap(z, m)).unwrap(),
        Modulation::Qpsk => map_qpsk(demap(z, m)).unwrap(),
    }
}

/// Earliest strong correlation peak against the second sync word, so that
/// the FFT window lines up with the first channel path.
fn fine_timing(x: &[Complex64], coarse: usize) -> Option<usize> {
    let body = ifft64(&sync_word_2()).unwrap();
    let nominal = coarse + SYMBOL_LEN + CP_LEN;
    let lo = nominal.saturating_sub(FINE_SEARCH).max(SYMBOL_LEN + CP_LEN);
    let hi = (nominal + FINE_SEARCH).min(x.len().checked_sub(FFT_SIZE)?);
    if lo > hi {
        return None;
    }
    let corr: Vec<f64> = (lo..=hi)
        .map(|p| {
            x[p..p + FFT_SIZE]
                .iter()
                .zip(&body)
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    let max = corr.iter().cloned().fold(0.0, f64::max);
    let is_peak = |i: usize| {
        corr[i] >= 0.5 * max
            && (i == 0 || corr[i] >= corr[i - 1])
            && (i + 1 == corr.len() || corr[i] >= corr[i + 1])
    };
    let i = (0..corr.len()).find(|&i| is_peak(i))?;
    Some(lo + i - SYMBOL_LEN - CP_LEN)
}

/// Least-squares fit of a `CHANNEL_TAPS`-long impulse response to the known
/// symbols `x` observed as `y`, each symbol de-rotated by its common phase.
/// Returns the frequency response on the active bins.
fn fit_channel(
    y: &[[Complex64; FFT_SIZE]],
    x: &[[Complex64; FFT_SIZE]],
    phase: &[Complex64],
    active: &[i32],
) -> [Complex64; FFT_SIZE] {
    let basis = |k: usize, d: usize| {
        Complex64::from_polar(1.0, -2.0 * PI * (k * d) as f64 / FFT_SIZE as f64)
    };
    let mut a = DMatrix::<Complex64>::zeros(CHANNEL_TAPS, CHANNEL_TAPS);
    let mut b = DVector::<Complex64>::zeros(CHANNEL_TAPS);
    let mut ls = [ZERO; FFT_SIZE];
    for &l in active {
        let k = bin(l);
        let (mut num, mut den) = (ZERO, 0.0);
        for ((ys, xs), p) in y.iter().zip(x).zip(phase) {
            num += ys[k] * p.conj() * xs[k].conj();
            den += xs[k].norm_sqr();
        }
        ls[k] = num / den;
        for d in 0..CHANNEL_TAPS {
            b[d] += basis(k, d).conj() * num;
            for e in 0..CHANNEL_TAPS {
                a[(d, e)] += basis(k, d).conj() * basis(k, e) * den;
            }
        }
    }
    let Some(taps) = a.lu().solve(&b) else {
        return ls;
    };
    let mut h = [ZERO; FFT_SIZE];
    for &l in active {
        let k = bin(l);
        h[k] = (0..CHANNEL_TAPS).map(|d| taps[d] * basis(k, d)).sum();
    }
    h
}

/// Unit-modulus rotation best aligning `y` with `h·x`.
fn common_phase(
    y: &[Complex64; FFT_SIZE],
    h: &[Complex64; FFT_SIZE],
    x: &[Complex64; FFT_SIZE],
    active: &[i32],
) -> Complex64 {
    let c: Complex64 = active
        .iter()
        .map(|&l| y[bin(l)] * (h[bin(l)] * x[bin(l)]).conj())
        .sum();
    if c.norm() > 0.0 {
        c / c.norm()
    } else {
        ONE
    }
}

/// Full receive chain. The payload is returned even when the header check
/// fails, so bit errors can still be counted.
///
/// The channel is first fitted from the two sync words and each data symbol
/// goes through `equalize` for a first set of decisions. Those decisions are
/// then fed back: the impulse response is refitted from every carrier of the
/// frame and each symbol gets its own common phase.
pub fn demodulate_frame(
    rx: &IqBuffer,
    modulation: Modulation,
    plan: &CarrierPlan,
    threshold: f64,
) -> Result<RxFrame, OfdmError> {
    let sync = schmidl_sync(rx, threshold)
        .map_err(|_| OfdmError::DecodeFailure("no frame detected".into()))?;
    let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * sync.cfo_estimate / 64.0);
    let mut rot = Complex64::new(1.0, 0.0);
    let x: Vec<Complex64> = rx
        .to_c64()
        .into_iter()
        .map(|s| {
            let v = s * rot;
            rot *= step;
            v
        })
        .collect();

    let start = fine_timing(&x, sync.frame_start)
        .ok_or_else(|| OfdmError::DecodeFailure("truncated frame".into()))?;
    let n_vec = modulation.frame_vectors();
    if start + n_vec * SYMBOL_LEN > x.len() {
        return Err(OfdmError::DecodeFailure("truncated frame".into()));
    }
    let y: Vec<[Complex64; FFT_SIZE]> = (0..n_vec)
        .map(|s| {
            let at = start + s * SYMBOL_LEN;
            fft64(&remove_cp(&x[at..at + SYMBOL_LEN]).unwrap()).unwrap()
        })
        .collect();

    let active = plan.active_labels();
    let n_data = n_vec - 2;
    let data_mod = |i: usize| if i < HEADER_LEN { Modulation::Bpsk } else { modulation };
    let mut known = vec![sync_word_1(), sync_word_2()];
    let mut phase = vec![ONE; n_vec];
    let h_sync = fit_channel(&y[..2], &known, &phase[..2], &active);

    for s in 0..n_data {
        let mut z = [ZERO; FFT_SIZE];
        for &l in &active {
            let k = bin(l);
            z[k] = y[s + 2][k] / h_sync[k];
        }
        let data = match equalize(&z, plan) {
            Ok((d, _)) => d,
            Err(_) => plan.data_labels.iter().map(|&l| z[bin(l)]).collect(),
        };
        let mut v = [ZERO; FFT_SIZE];
        for (&l, &pv) in plan.pilot_labels.iter().zip(&plan.pilot_values) {
            v[bin(l)] = Complex64::new(pv, 0.0);
        }
        for (j, (&l, d)) in plan.data_labels.iter().zip(data).enumerate() {
            v[bin(l)] = decide(d, data_mod(s * N_DATA + j));
        }
        known.push(v);
    }

    let mut h = h_sync;
    for _ in 0..DD_ROUNDS {
        for s in 2..n_vec {
            phase[s] = common_phase(&y[s], &h, &known[s], &active);
        }
        h = fit_channel(&y, &known, &phase, &active);
        for s in 2..n_vec {
            phase[s] = common_phase(&y[s], &h, &known[s], &active);
            for (j, &l) in plan.data_labels.iter().enumerate() {
                let k = bin(l);
                let z = y[s][k] * phase[s].conj() / h[k];
                known[s][k] = decide(z, data_mod((s - 2) * N_DATA + j));
            }
        }
    }

    let mut bits = Vec::with_capacity(modulation.frame_symbols());
    for (s, v) in known[2..].iter().enumerate() {
        for (j, &l) in plan.data_labels.iter().enumerate() {
            bits.push(demap(v[bin(l)], data_mod(s * N_DATA + j)));
        }
    }

    let header_bits: [u8; HEADER_LEN] = bits[..HEADER_LEN].try_into().unwrap();
    let header = parse_header(&header_bits);
    let body = &bits[HEADER_LEN..];
    let mut payload = [0u8; PAYLOAD_LEN];
    match modulation {
        Modulation::Bpsk => {
            for (byte, chunk) in payload.iter_mut().zip(body.chunks(8)) {
                *byte = chunk.iter().rev().fold(0, |acc, &b| acc << 1 | b);
            }
        }
        Modulation::Qpsk => {
            for (byte, chunk) in payload.iter_mut().zip(body.chunks(4)) {
                *byte = unpack_bits(chunk)?;
            }
        }
    }
    Ok(RxFrame {
        payload,
        header_ok: header.is_some(),
        header,
        sync,
        start,
    })
}
