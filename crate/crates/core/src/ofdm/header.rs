//! Frame header: one bit per byte so it maps straight onto BPSK.
//!
//! Layout, most significant bit first: payload length (12 bits), frame index
//! mod 4096 (12 bits), CRC-8 over those 24 bits (8 bits), then zeros.

use super::TaggedPayload;

pub const HEADER_LEN: usize = 48;
const FIELD_BITS: usize = 24;
const CRC_POLY: u8 = 0x07;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderFields {
    pub length: u16,
    pub frame_index: u16,
}

/// CRC-8 (poly x^8+x^2+x+1, zero init, no reflection) over a bit sequence.
pub fn crc8(bits: &[u8]) -> u8 {
    bits.iter().fold(0u8, |crc, &b| {
        let feedback = (crc >> 7) ^ (b & 1);
        let shifted = crc << 1;
        if feedback == 1 {
            shifted ^ CRC_POLY
        } else {
            shifted
        }
    })
}

fn push_bits(out: &mut Vec<u8>, value: u32, n: usize) {
    out.extend((0..n).rev().map(|i| ((value >> i) & 1) as u8));
}

fn read_bits(bits: &[u8]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u32)
}

pub fn generate_header(p: &TaggedPayload) -> [u8; HEADER_LEN] {
    let mut bits = Vec::with_capacity(HEADER_LEN);
    push_bits(&mut bits, p.bytes.len() as u32 & 0xfff, 12);
    push_bits(&mut bits, p.frame_index & 0xfff, 12);
    let crc = crc8(&bits);
    push_bits(&mut bits, crc as u32, 8);
    bits.resize(HEADER_LEN, 0);
    bits.try_into().unwrap()
}

/// Decoded fields, or `None` if the CRC or the zero fill does not check out.
pub fn parse_header(bits: &[u8; HEADER_LEN]) -> Option<HeaderFields> {
    if bits.iter().any(|&b| b > 1) || bits[FIELD_BITS + 8..].iter().any(|&b| b != 0) {
        return None;
    }
    let crc = read_bits(&bits[FIELD_BITS..FIELD_BITS + 8]) as u8;
    if crc != crc8(&bits[..FIELD_BITS]) {
        return None;
    }
    Some(HeaderFields {
        length: read_bits(&bits[..12]) as u16,
        frame_index: read_bits(&bits[12..24]) as u16,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Byte-wise table CRC, built independently of the bit-serial version.
    fn table_crc(bytes: &[u8]) -> u8 {
        let table: Vec<u8> = (0..=255u8)
            .map(|mut c| {
                for _ in 0..8 {
                    c = if c & 0x80 != 0 { (c << 1) ^ 0x07 } else { c << 1 };
                }
                c
            })
            .collect();
        bytes.iter().fold(0, |crc, &b| table[(crc ^ b) as usize])
    }

    #[test]
    fn crc_matches_table_oracle() {
        assert_eq!(table_crc(b"123456789"), 0xf4);
        for idx in [0u32, 1, 77, 4095, 5000] {
            let p = TaggedPayload::new([0; 96], idx);
            let h = generate_header(&p);
            let fields = read_bits(&h[..24]);
            let packed = [(fields >> 16) as u8, (fields >> 8) as u8, fields as u8];
            assert_eq!(read_bits(&h[24..32]) as u8, table_crc(&packed));
        }
    }

    #[test]
    fn header_roundtrips_and_is_binary() {
        let h = generate_header(&TaggedPayload::new([7; 96], 4097));
        assert_eq!(h.len(), 48);
        assert!(h.iter().all(|&b| b <= 1));
        assert_eq!(
            parse_header(&h),
            Some(HeaderFields { length: 96, frame_index: 1 })
        );
    }

    #[test]
    fn any_single_flip_is_caught() {
        let h = generate_header(&TaggedPayload::new([0; 96], 42));
        for i in 0..HEADER_LEN {
            let mut bad = h;
            bad[i] ^= 1;
            assert_eq!(parse_header(&bad), None, "bit {i}");
        }
    }
}
