//! Supplicant and authenticator state machines for the 4-way handshake, and
//! the protected-data records that follow it.

mod message;
mod party;
mod record;
mod transcript;

pub use message::{HandshakeMessage, MessageKind, FRAME_LEN};
pub use party::{
    auth_start, authenticator_on_msg2, authenticator_on_msg4, protect, suite_field,
    supplicant_on_msg1, supplicant_on_msg3, unprotect, HandshakePhase, PartyState, Role,
};
pub use record::{ProtectedRecord, MAX_RECORD_AD, MAX_RECORD_MSG};
pub use transcript::{Direction, TranscriptEntry};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HandshakeError {
    #[error("operation needs the {expected:?} role")]
    WrongRole { expected: Role },
    #[error("operation not allowed in phase {got:?}")]
    WrongPhase { got: HandshakePhase },
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("MIC verification failed")]
    MicMismatch,
    #[error("stale or unexpected replay counter")]
    ReplayDetected,
    #[error("echoed nonce does not match")]
    NonceMismatch,
    #[error("temporal key not installed")]
    NotInstalled,
    #[error("{what} is {len} bytes, limit {max}")]
    OversizeInput {
        what: &'static str,
        len: usize,
        max: usize,
    },
    #[error("record authentication failed")]
    AuthFailure,
}
