use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{check_len, OfdmError, FFT_SIZE};

fn plans() -> &'static (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static PLANS: OnceLock<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)> = OnceLock::new();
    PLANS.get_or_init(|| {
        let mut planner = FftPlanner::new();
        (
            planner.plan_fft_forward(FFT_SIZE),
            planner.plan_fft_inverse(FFT_SIZE),
        )
    })
}

fn run(plan: &Arc<dyn Fft<f64>>, x: &[Complex64]) -> Result<[Complex64; FFT_SIZE], OfdmError> {
    check_len("fft input", FFT_SIZE, x.len())?;
    let mut buf: [Complex64; FFT_SIZE] = x.try_into().unwrap();
    plan.process(&mut buf);
    let scale = 1.0 / (FFT_SIZE as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(buf)
}

/// Unitary inverse DFT: `s_i = 1/8 Σ_k S_k e^{j2πik/64}`.
pub fn ifft64(freq: &[Complex64]) -> Result<[Complex64; FFT_SIZE], OfdmError> {
    run(&plans().1, freq)
}

/// Unitary forward DFT: `S_i = 1/8 Σ_k s_k e^{-j2πik/64}`.
pub fn fft64(time: &[Complex64]) -> Result<[Complex64; FFT_SIZE], OfdmError> {
    run(&plans().0, time)
}
