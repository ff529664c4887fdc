//! The four handshake frames and their fixed 96-byte layout:
//! kind (1) ‖ nonce (16) ‖ MIC (16) ‖ replay counter (16, big endian) ‖ zeros.

use crate::sponge::{Nonce, Tag};

use super::HandshakeError;

pub const FRAME_LEN: usize = 96;

const NONCE_AT: usize = 1;
const MIC_AT: usize = 17;
const COUNTER_AT: usize = 33;
const USED: usize = 49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MessageKind {
    Msg1ANonce = 1,
    Msg2SNonceMicA = 2,
    Msg3ANonceMicS = 3,
    Msg4MicAll = 4,
}

impl MessageKind {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(Self::Msg1ANonce),
            2 => Some(Self::Msg2SNonceMicA),
            3 => Some(Self::Msg3ANonceMicS),
            4 => Some(Self::Msg4MicAll),
            _ => None,
        }
    }

    pub fn has_nonce(self) -> bool {
        self != Self::Msg4MicAll
    }

    pub fn has_mic(self) -> bool {
        self != Self::Msg1ANonce
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandshakeMessage {
    pub kind: MessageKind,
    pub nonce: Option<Nonce>,
    pub mic: Option<Tag>,
    pub replay_counter: u128,
}

impl HandshakeMessage {
    pub fn padded_frame(&self) -> [u8; FRAME_LEN] {
        let mut f = [0u8; FRAME_LEN];
        f[0] = self.kind as u8;
        if let Some(n) = self.nonce {
            f[NONCE_AT..MIC_AT].copy_from_slice(&n);
        }
        if let Some(m) = self.mic {
            f[MIC_AT..COUNTER_AT].copy_from_slice(&m);
        }
        f[COUNTER_AT..USED].copy_from_slice(&self.replay_counter.to_be_bytes());
        f
    }

    /// Strict parse: wrong length, unknown kind, bytes in a field the kind does
    /// not carry, or non-zero padding all reject the frame.
    pub fn parse(frame: &[u8]) -> Result<Self, HandshakeError> {
        let bad = |why: String| Err(HandshakeError::MalformedFrame(why));
        if frame.len() != FRAME_LEN {
            return bad(format!("length {} instead of {FRAME_LEN}", frame.len()));
        }
        let Some(kind) = MessageKind::from_byte(frame[0]) else {
            return bad(format!("unknown kind {}", frame[0]));
        };
        let field = |at: usize, present: bool, name: &str| -> Result<Option<[u8; 16]>, HandshakeError> {
            let bytes: [u8; 16] = frame[at..at + 16].try_into().unwrap();
            if present {
                Ok(Some(bytes))
            } else if bytes.iter().any(|&b| b != 0) {
                Err(HandshakeError::MalformedFrame(format!("unexpected {name} field")))
            } else {
                Ok(None)
            }
        };
        let nonce = field(NONCE_AT, kind.has_nonce(), "nonce")?;
        let mic = field(MIC_AT, kind.has_mic(), "MIC")?;
        if frame[USED..].iter().any(|&b| b != 0) {
            return bad("non-zero padding".into());
        }
        Ok(Self {
            kind,
            nonce,
            mic,
            replay_counter: u128::from_be_bytes(frame[COUNTER_AT..USED].try_into().unwrap()),
        })
    }
}
