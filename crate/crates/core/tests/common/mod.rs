#![allow(dead_code)]

use lwcwifi::handshake::{
    auth_start, authenticator_on_msg2, authenticator_on_msg4, supplicant_on_msg1,
    supplicant_on_msg3, HandshakeError, HandshakeMessage, PartyState, Role, FRAME_LEN,
};
use lwcwifi::sponge::{round_constant, Scheme, StateBits, REFERENCE_ROUNDS};
use num_complex::Complex64;

pub const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

pub fn data_file(name: &str) -> String {
    std::fs::read_to_string(format!("{DATA}/{name}")).expect("test data present")
}

/// Direct O(N²) DFT with 1/√N scaling.
pub fn naive_dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| {
                    let ang = sign * 2.0 * std::f64::consts::PI * (i * k) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, ang)
                })
                .sum::<Complex64>()
                / (n as f64).sqrt()
        })
        .collect()
}

fn mask(w: u32) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1 << w) - 1
    }
}

fn rotr(x: u64, r: u32, w: u32) -> u64 {
    let r = r % w;
    if r == 0 {
        x
    } else {
        ((x >> r) | (x << (w - r))) & mask(w)
    }
}

/// Undoes the reference permutation lane by lane, last round first.
pub fn inverse_reference(state: &StateBits) -> StateBits {
    let mut s = state.clone();
    let n = s.lanes().len();
    for j in (0..REFERENCE_ROUNDS).rev() {
        for i in (0..n).rev() {
            let w = s.lane_width(i);
            let next = s.lanes()[(i + 1) % n] & mask(w);
            let v = s.lanes()[i] ^ next ^ round_constant(j, i, w);
            s.lanes_mut()[i] = rotr(v, (7 * i as u32 + j) % w, w);
        }
    }
    s
}

/// Bit-serial CRC-8, polynomial x^8+x^2+x+1, from a lookup table built here.
pub fn crc8_table(bits: &[u8]) -> u8 {
    let table: Vec<u8> = (0..256u16)
        .map(|b| {
            let mut c = b as u8;
            for _ in 0..8 {
                c = if c & 0x80 != 0 { (c << 1) ^ 0x07 } else { c << 1 };
            }
            c
        })
        .collect();
    let bytes: Vec<u8> = bits.chunks(8).map(|ch| ch.iter().fold(0, |a, &b| (a << 1) | b)).collect();
    bytes.iter().fold(0u8, |c, &b| table[(c ^ b) as usize])
}

pub const AP: [u8; 6] = [2, 0, 0, 0, 0, 1];
pub const STA: [u8; 6] = [2, 0, 0, 0, 0, 2];
pub const PMK: [u8; 16] = [0x5c; 16];

pub type Frames = Vec<[u8; FRAME_LEN]>;

/// Runs the exchange, letting `hook` rewrite frame `i` (0-based) on the wire.
pub fn run(
    a: PartyState,
    s: PartyState,
    seed: u8,
    mut hook: impl FnMut(usize, [u8; FRAME_LEN]) -> [u8; FRAME_LEN],
) -> (Result<(PartyState, PartyState), HandshakeError>, Frames) {
    let mut seen = Vec::new();
    let mut wire = |i: usize, m: &HandshakeMessage| {
        let f = hook(i, m.padded_frame());
        seen.push(f);
        HandshakeMessage::parse(&f)
    };
    let res = (|| {
        let (a, m1) = auth_start(&a, [seed; 32])?;
        let (s, m2) = supplicant_on_msg1(&s, &wire(0, &m1)?, [seed ^ 0xff; 32])?;
        let (a, m3) = authenticator_on_msg2(&a, &wire(1, &m2)?)?;
        let (s, m4) = supplicant_on_msg3(&s, &wire(2, &m3)?)?;
        let a = authenticator_on_msg4(&a, &wire(3, &m4)?)?;
        Ok((a, s))
    })();
    (res, seen)
}

pub fn parties(scheme: Scheme, r: u128, last_seen: u128) -> (PartyState, PartyState) {
    (
        PartyState::new(Role::Authenticator, PMK, AP, STA, r, scheme),
        PartyState::new(Role::Supplicant, PMK, STA, AP, last_seen, scheme),
    )
}

/// Nonce bytes 1..17, MIC bytes 17..33, for the kinds that carry them.
pub fn field_bits(frame: usize) -> Vec<usize> {
    let nonce = 8..17 * 8;
    let mic = 17 * 8..33 * 8;
    match frame {
        0 => nonce.collect(),
        1 | 2 => nonce.chain(mic).collect(),
        _ => mic.collect(),
    }
}
