use serde::{Deserialize, Serialize};

use super::{HandshakeMessage, MessageKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AuthToSupp,
    SuppToAuth,
}

/// One line of a handshake transcript, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub kind: MessageKind,
    pub replay_counter: u128,
    /// Full 96-byte frame as hex.
    pub frame: String,
    pub attempt: u32,
    pub sent_at_s: f64,
    pub received_at_s: Option<f64>,
    pub accepted: bool,
}

impl TranscriptEntry {
    pub fn new(direction: Direction, msg: &HandshakeMessage, attempt: u32, sent_at_s: f64) -> Self {
        Self {
            direction,
            kind: msg.kind,
            replay_counter: msg.replay_counter,
            frame: hex::encode(msg.padded_frame()),
            attempt,
            sent_at_s,
            received_at_s: None,
            accepted: false,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript entries always serialize")
    }
}
