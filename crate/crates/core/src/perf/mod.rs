//! Timing arithmetic over cycle-count fixtures: throughput, generation
//! time, handshake authentication time and transmit-rate scaling.

mod report;
mod table;

pub use report::{
    build_report, FunctionRow, HandshakeRow, Mismatch, ReportOptions, TimingReport, TxTimeSource,
    HANDSHAKE_ROWS,
};
pub use table::{CycleCostEntry, CycleCostTable, DEFAULT_FIXTURE};

use thiserror::Error;

/// Clock frequency behind every fixture row.
pub const F_HZ: f64 = 16e6;
/// Average frame rate of the measured radio link, bits per second.
pub const MEASURED_FRAME_RATE_BPS: f64 = 16.82e3;

/// Byte-times one 96-byte handshake frame occupies before calibration:
/// payload plus header, stretched by the sync and CP expansion 880/432.
pub const FRAME_BYTE_TIMES: f64 = (96.0 + 48.0) * 880.0 / 432.0;
/// Fixed once so four frames at 16.82 Kbps take 0.700 s.
pub const FRAME_CALIBRATION: f64 = 368.0 / FRAME_BYTE_TIMES;
pub const HANDSHAKE_FRAMES: u64 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerfError {
    #[error("{what} must be positive, got {value}")]
    NonPositiveInput { what: &'static str, value: f64 },
    #[error("fixture has no row for {scheme} / {platform} / {function}")]
    MissingEntry {
        scheme: String,
        platform: String,
        function: String,
    },
    #[error("fixture: {0}")]
    Fixture(String),
}

fn positive(what: &'static str, value: f64) -> Result<f64, PerfError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(PerfError::NonPositiveInput { what, value })
    }
}

/// Kbps for `m_bits` processed in `cycles` at `f_hz`.
pub fn throughput_kbps(m_bits: u64, cycles: u64, f_hz: f64) -> Result<f64, PerfError> {
    let m = positive("m_bits", m_bits as f64)?;
    let c = positive("cycles", cycles as f64)?;
    let f = positive("f_hz", f_hz)?;
    Ok(m / (c / f) / 1000.0)
}

pub fn gen_time_ms(cycles: u64, f_hz: f64) -> Result<f64, PerfError> {
    let c = positive("cycles", cycles as f64)?;
    Ok(1000.0 * c / positive("f_hz", f_hz)?)
}

/// `1000 * T_tx + 2 * T_KDF + 3 * T_MIC`, in ms.
pub fn auth_time_ms(t_4way_tx_s: f64, t_kdf_ms: f64, t_mic_ms: f64) -> Result<f64, PerfError> {
    let tx = positive("t_4way_tx_s", t_4way_tx_s)?;
    let kdf = positive("t_kdf_ms", t_kdf_ms)?;
    let mic = positive("t_mic_ms", t_mic_ms)?;
    Ok(1000.0 * tx + 2.0 * kdf + 3.0 * mic)
}

/// Rescales a transmit time measured at one link rate to another. Units of
/// the result follow `t_s`.
pub fn scale_tx_time(t_s: f64, measured_rate_bps: f64, target_rate_bps: f64) -> Result<f64, PerfError> {
    let t = positive("t_s", t_s)?;
    let from = positive("measured_rate_bps", measured_rate_bps)?;
    let to = positive("target_rate_bps", target_rate_bps)?;
    Ok(t * from / to)
}

/// Seconds to move `bytes` at `frame_rate_bps`.
pub fn simulated_tx_time(bytes: u64, frame_rate_bps: f64) -> Result<f64, PerfError> {
    let b = positive("bytes", bytes as f64)?;
    Ok(8.0 * b / positive("frame_rate_bps", frame_rate_bps)?)
}

/// Wire bytes of one handshake frame after framing overhead.
pub fn frame_wire_bytes() -> u64 {
    (FRAME_BYTE_TIMES * FRAME_CALIBRATION).round() as u64
}

/// Modeled 4-way transmit time in seconds.
pub fn handshake_tx_time_s(frame_rate_bps: f64) -> Result<f64, PerfError> {
    simulated_tx_time(HANDSHAKE_FRAMES * frame_wire_bytes(), frame_rate_bps)
}
