//! Baseband impairments between transmitter and receiver, and the analytic
//! M-PSK bit error rate.

use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::ofdm::{IqBuffer, FFT_SIZE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("buffer is empty")]
    EmptyBuffer,
    #[error("tap delay {delay} is not shorter than the {len}-sample buffer")]
    DelayTooLarge { delay: usize, len: usize },
    #[error("channel needs at least one tap")]
    NoTaps,
    #[error("M = {0} is not a power of two >= 2")]
    InvalidM(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay: usize,
    pub gain: Complex64,
}

impl Tap {
    pub fn new(delay: usize, gain: Complex64) -> Self {
        Self { delay, gain }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub cfo_fraction: f64,
    pub taps: Vec<Tap>,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self::identity()
    }
}

impl ChannelConfig {
    pub fn identity() -> Self {
        Self {
            snr_db: f64::INFINITY,
            cfo_fraction: 0.0,
            taps: vec![Tap::new(0, Complex64::new(1.0, 0.0))],
            seed: 0,
        }
    }

    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db,
            seed,
            ..Self::identity()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Multipath, then carrier offset, then noise. The SNR is referenced to the
    /// occupied power of the input, i.e. the transmitter output.
    pub fn apply(&self, buf: &IqBuffer) -> Result<IqBuffer, ChannelError> {
        if buf.is_empty() {
            return Err(ChannelError::EmptyBuffer);
        }
        let reference = buf.occupied_power();
        let faded = multipath(buf, &self.taps)?;
        let shifted = apply_cfo(&faded, self.cfo_fraction);
        Ok(add_noise(&shifted, noise_power(reference, self.snr_db), self.seed))
    }
}

fn noise_power(signal_power: f64, snr_db: f64) -> f64 {
    signal_power / 10f64.powf(snr_db / 10.0)
}

/// Adds circular complex Gaussian noise of total variance `noise_power`.
pub fn add_noise(buf: &IqBuffer, noise_power: f64, seed: u64) -> IqBuffer {
    if noise_power == 0.0 {
        return buf.clone();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sigma = (noise_power / 2.0).sqrt();
    let samples = buf
        .samples
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex32::new((re * sigma) as f32, (im * sigma) as f32)
        })
        .collect();
    IqBuffer {
        samples,
        sample_rate_hz: buf.sample_rate_hz,
    }
}

/// Noise sized against the buffer's own occupied power.
pub fn awgn(buf: &IqBuffer, snr_db: f64, seed: u64) -> Result<IqBuffer, ChannelError> {
    if buf.is_empty() {
        return Err(ChannelError::EmptyBuffer);
    }
    Ok(add_noise(buf, noise_power(buf.occupied_power(), snr_db), seed))
}

/// Rotates sample n by `e^{j2π·frac·n/64}`.
pub fn apply_cfo(buf: &IqBuffer, frac: f64) -> IqBuffer {
    if frac == 0.0 {
        return buf.clone();
    }
    let w = 2.0 * std::f64::consts::PI * frac / FFT_SIZE as f64;
    IqBuffer::from_c64(
        buf.to_c64()
            .into_iter()
            .enumerate()
            .map(|(n, s)| s * Complex64::from_polar(1.0, w * n as f64)),
    )
}

/// Sparse linear convolution, truncated to the input length.
pub fn multipath(buf: &IqBuffer, taps: &[Tap]) -> Result<IqBuffer, ChannelError> {
    if taps.is_empty() {
        return Err(ChannelError::NoTaps);
    }
    let x = buf.to_c64();
    if let Some(t) = taps.iter().find(|t| t.delay >= x.len()) {
        return Err(ChannelError::DelayTooLarge {
            delay: t.delay,
            len: x.len(),
        });
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for t in taps {
        for (out, s) in y[t.delay..].iter_mut().zip(&x) {
            *out += s * t.gain;
        }
    }
    let mut out = IqBuffer::from_c64(y);
    out.sample_rate_hz = buf.sample_rate_hz;
    Ok(out)
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Bit error probability of Gray-coded M-PSK at the given Eb/N0.
///
/// BPSK uses the exact `Q(√(2γ))`; higher orders use the nearest-neighbour
/// approximation `(2/k)·Q(√(2kγ)·sin(π/M))` with `k = log2 M`.
pub fn theoretical_ber_mpsk(m: u32, ebn0_db: f64) -> Result<f64, ChannelError> {
    if m < 2 || !m.is_power_of_two() {
        return Err(ChannelError::InvalidM(m));
    }
    let gamma = 10f64.powf(ebn0_db / 10.0);
    if m == 2 {
        return Ok(q_function((2.0 * gamma).sqrt()));
    }
    let k = m.trailing_zeros() as f64;
    let arg = (2.0 * k * gamma).sqrt() * (std::f64::consts::PI / m as f64).sin();
    Ok(2.0 / k * q_function(arg))
}

/// SplitMix64 step, used to derive independent per-trial seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
