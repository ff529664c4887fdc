//! Schmidl timing and fractional-CFO acquisition on the first sync word.

use num_complex::Complex64;

use super::{IqBuffer, OfdmError, FFT_SIZE};

/// Fraction of the ideal plateau the timing metric must reach.
pub const DEFAULT_THRESHOLD: f64 = 0.8;

const HALF: usize = FFT_SIZE / 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    pub frame_start: usize,
    /// Carrier offset as a fraction of the subcarrier spacing.
    pub cfo_estimate: f64,
    pub metric_peak: f64,
}

/// Timing metric `M(d) = |P(d)|^2 / R(d)^2` with
/// `P(d) = Σ_{m<32} conj(r[d+m]) r[d+m+32]` and `R(d) = ½ Σ_{m<64} |r[d+m]|^2`,
/// together with `P(d)` itself.
fn metric(x: &[Complex64]) -> (Vec<f64>, Vec<Complex64>) {
    if x.len() < FFT_SIZE {
        return (Vec::new(), Vec::new());
    }
    let n = x.len() - FFT_SIZE + 1;
    let mut prod = vec![Complex64::new(0.0, 0.0); x.len() - HALF + 1];
    for i in 0..x.len() - HALF {
        prod[i + 1] = prod[i] + x[i].conj() * x[i + HALF];
    }
    let mut energy = vec![0.0; x.len() + 1];
    for i in 0..x.len() {
        energy[i + 1] = energy[i] + x[i].norm_sqr();
    }
    let mut m = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for d in 0..n {
        let pd = prod[d + HALF] - prod[d];
        let r = 0.5 * (energy[d + FFT_SIZE] - energy[d]);
        m.push(if r > 1e-30 { pd.norm_sqr() / (r * r) } else { 0.0 });
        p.push(pd);
    }
    (m, p)
}

/// Finds the first frame whose timing metric crosses `threshold`.
///
/// The metric holds a plateau while the correlation window sits inside the
/// periodic part of the first sync word (cyclic prefix included), so the frame
/// start is taken as the plateau centre minus half the prefix.
pub fn schmidl_sync(rx: &IqBuffer, threshold: f64) -> Result<SyncResult, OfdmError> {
    let x = rx.to_c64();
    let (m, p) = metric(&x);
    let first = m.iter().position(|&v| v >= threshold).ok_or(OfdmError::NoFrame)?;
    let end = (first + 48).min(m.len());
    let peak = m[first..end].iter().cloned().fold(0.0, f64::max);
    let level = threshold.max(0.9 * peak);
    let lo = first + m[first..end].iter().position(|&v| v >= level).unwrap();
    let hi = first + m[first..end].iter().rposition(|&v| v >= level).unwrap();
    let centre = (lo + hi) / 2;
    let core = &p[centre.saturating_sub(4)..(centre + 5).min(p.len())];
    let acc: Complex64 = core.iter().sum();
    Ok(SyncResult {
        frame_start: centre.saturating_sub(8),
        cfo_estimate: acc.arg() / std::f64::consts::PI,
        metric_peak: peak,
    })
}
