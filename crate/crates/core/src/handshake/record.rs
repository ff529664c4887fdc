use crate::sponge::Tag;

use super::HandshakeError;

/// Largest record payload: 16 blocks of 64 bits.
pub const MAX_RECORD_MSG: usize = 128;
/// Largest associated data per record: 2 blocks.
pub const MAX_RECORD_AD: usize = 16;

/// One encrypted data record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectedRecord {
    pub ad: Vec<u8>,
    pub ciphertext: Vec<u8>,
    pub tag: Tag,
    pub seq: u64,
}

impl ProtectedRecord {
    /// `seq (8, BE) | ad_len (1) | ct_len (1) | ad | ct | tag (16)`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.ad.len() + self.ciphertext.len() + 16);
        out.extend_from_slice(&self.seq.to_be_bytes());
        out.push(self.ad.len() as u8);
        out.push(self.ciphertext.len() as u8);
        out.extend_from_slice(&self.ad);
        out.extend_from_slice(&self.ciphertext);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HandshakeError> {
        let bad = |why: &str| HandshakeError::MalformedFrame(format!("record: {why}"));
        if bytes.len() < 10 + 16 {
            return Err(bad("too short"));
        }
        let seq = u64::from_be_bytes(bytes[..8].try_into().unwrap());
        let ad_len = bytes[8] as usize;
        let ct_len = bytes[9] as usize;
        if ad_len > MAX_RECORD_AD || ct_len > MAX_RECORD_MSG {
            return Err(bad("length field over limit"));
        }
        if bytes.len() != 10 + ad_len + ct_len + 16 {
            return Err(bad("length fields disagree with size"));
        }
        let ad = bytes[10..10 + ad_len].to_vec();
        let ciphertext = bytes[10 + ad_len..10 + ad_len + ct_len].to_vec();
        let tag = bytes[bytes.len() - 16..].try_into().unwrap();
        Ok(Self { ad, ciphertext, tag, seq })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_roundtrip() {
        let rec = ProtectedRecord {
            ad: vec![1, 2, 3],
            ciphertext: vec![9; 128],
            tag: [7; 16],
            seq: 0x0102_0304,
        };
        let bytes = rec.to_bytes();
        assert_eq!(bytes.len(), 10 + 3 + 128 + 16);
        assert_eq!(&bytes[..8], &[0, 0, 0, 0, 1, 2, 3, 4]);
        assert_eq!(ProtectedRecord::from_bytes(&bytes).unwrap(), rec);
    }

    #[test]
    fn bad_lengths_rejected() {
        let rec = ProtectedRecord { ad: vec![], ciphertext: vec![0; 4], tag: [0; 16], seq: 1 };
        let mut bytes = rec.to_bytes();
        bytes.push(0);
        assert!(ProtectedRecord::from_bytes(&bytes).is_err());
        bytes.pop();
        bytes[9] = 200;
        assert!(ProtectedRecord::from_bytes(&bytes).is_err());
        assert!(ProtectedRecord::from_bytes(&[0; 5]).is_err());
    }
}
