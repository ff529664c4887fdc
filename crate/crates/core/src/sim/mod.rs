//! End-to-end runs: handshake over the simulated link, the protected data
//! phase, and BER sweeps.

mod ber;
mod data;
mod handshake;
mod link;
mod scenario;

pub use ber::{
    crossing_db, ebn0_to_snr_db, run_ber_sweep, snr_offset_db, write_ber_csv, BerPoint,
    SWEEP_GAIN, SWEEP_THRESHOLD,
};
pub use data::{run_data_phase, DataStats};
pub use handshake::{run_handshake_scenario, HandshakeRun, MAX_ATTEMPTS};
pub use link::{Link, LEAD_IN, TAIL};
pub use scenario::{
    ChannelSection, DataSection, HandshakeSection, ReportSection, Scenario, Tamper,
};

use thiserror::Error;

use crate::handshake::HandshakeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("handshake failed at {step}: {reason}")]
    HandshakeFailed { step: String, reason: String },
    #[error("decode failure: {0}")]
    Decode(String),
    #[error(transparent)]
    Handshake(#[from] HandshakeError),
}
