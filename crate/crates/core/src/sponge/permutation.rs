//! Permutation plug-in interface and the shipped reference permutation.

use std::fmt;
use std::sync::Arc;

use super::SpongeError;

/// Fixed-width bit vector holding a sponge state.
///
/// Bit `k` lives in `lanes[k / 64]` at bit position `k % 64`. The final lane
/// may be narrower than 64 bits; its unused high bits are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateBits {
    lanes: Vec<u64>,
    width: usize,
}

impl StateBits {
    pub fn zero(width: usize) -> Self {
        Self {
            lanes: vec![0; width.div_ceil(64)],
            width,
        }
    }

    /// Builds a state from little-endian bytes. Bits beyond `width` must be zero.
    pub fn from_bytes(width: usize, bytes: &[u8]) -> Result<Self, SpongeError> {
        if bytes.len() != width.div_ceil(8) {
            return Err(SpongeError::StateLength {
                expected: width.div_ceil(8),
                got: bytes.len(),
            });
        }
        let mut state = Self::zero(width);
        for (i, b) in bytes.iter().enumerate() {
            state.lanes[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        if state.lanes != state.masked_lanes() {
            return Err(SpongeError::StrayHighBits);
        }
        Ok(state)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.width.div_ceil(8))
            .map(|i| (self.lanes[i / 8] >> (8 * (i % 8))) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn lanes(&self) -> &[u64] {
        &self.lanes
    }

    pub fn lanes_mut(&mut self) -> &mut [u64] {
        &mut self.lanes
    }

    /// Width in bits of lane `i`.
    pub fn lane_width(&self, i: usize) -> u32 {
        let full = self.width / 64;
        if i < full {
            64
        } else {
            (self.width - 64 * full) as u32
        }
    }

    pub fn bit(&self, k: usize) -> bool {
        (self.lanes[k / 64] >> (k % 64)) & 1 == 1
    }

    pub fn flip_bit(&mut self, k: usize) {
        assert!(k < self.width, "bit {k} outside {}-bit state", self.width);
        self.lanes[k / 64] ^= 1 << (k % 64);
    }

    fn masked_lanes(&self) -> Vec<u64> {
        self.lanes
            .iter()
            .enumerate()
            .map(|(i, l)| l & lane_mask(self.lane_width(i)))
            .collect()
    }
}

impl fmt::Debug for StateBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateBits({}b, {})", self.width, hex::encode(self.to_bytes()))
    }
}

pub(crate) fn lane_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Rotate left within a lane of `width` bits.
pub(crate) fn rotl_lane(x: u64, r: u32, width: u32) -> u64 {
    if width == 64 {
        return x.rotate_left(r);
    }
    let r = r % width;
    if r == 0 {
        return x;
    }
    ((x << r) | (x >> (width - r))) & lane_mask(width)
}

/// A keyless permutation over a fixed-width state.
pub trait Permutation: Send + Sync + fmt::Debug {
    fn rounds(&self) -> u32;
    fn permute(&self, state: &mut StateBits);
}

/// Reference permutation used wherever a real round function is not plugged in.
///
/// The state is split into 64-bit lanes (the last one truncated). Each of the
/// 12 rounds updates the lanes in place, in index order:
/// `lane[i] = rotl(lane[i], (7i + j) mod w_i) ^ lane[(i + 1) mod n] ^ rc(j, i)`
/// where `rc(j, i)` repeats the byte `(17j + 29i + 1) mod 256` across the lane.
/// Because every step rewrites a single lane from the others, the round is
/// invertible by undoing the steps in reverse order.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferencePermutation;

pub const REFERENCE_ROUNDS: u32 = 12;
pub const SUPPORTED_WIDTHS: [usize; 3] = [256, 259, 320];

/// Round constant for round `round`, lane `lane`, truncated to `width` bits.
pub fn round_constant(round: u32, lane: usize, width: u32) -> u64 {
    let byte = (17 * round as u64 + 29 * lane as u64 + 1) % 256;
    (byte * 0x0101_0101_0101_0101) & lane_mask(width)
}

impl Permutation for ReferencePermutation {
    fn rounds(&self) -> u32 {
        REFERENCE_ROUNDS
    }

    fn permute(&self, state: &mut StateBits) {
        let n = state.lanes.len();
        for j in 0..REFERENCE_ROUNDS {
            for i in 0..n {
                let w = state.lane_width(i);
                let rot = (7 * i as u32 + j) % w;
                let next = state.lanes[(i + 1) % n] & lane_mask(w);
                state.lanes[i] =
                    rotl_lane(state.lanes[i], rot, w) ^ next ^ round_constant(j, i, w);
            }
        }
    }
}

/// Applies the reference permutation to a state of one of the supported widths.
pub fn reference_permutation(state: &StateBits) -> Result<StateBits, SpongeError> {
    if !SUPPORTED_WIDTHS.contains(&state.width()) {
        return Err(SpongeError::UnsupportedWidth(state.width()));
    }
    let mut out = state.clone();
    ReferencePermutation.permute(&mut out);
    Ok(out)
}

/// Parameters of one sponge instance: widths, data limit and the permutation.
#[derive(Clone, Debug)]
pub struct PermutationSpec {
    pub name: String,
    pub state_bits: usize,
    pub rate_bits: usize,
    /// log2 of the number of blocks that may be processed under one key.
    pub data_limit_log2: u32,
    permutation: Arc<dyn Permutation>,
}

impl PermutationSpec {
    pub fn new(
        name: impl Into<String>,
        state_bits: usize,
        data_limit_log2: u32,
        permutation: Arc<dyn Permutation>,
    ) -> Result<Self, SpongeError> {
        // 128-bit key and 128-bit nonce are loaded side by side.
        if state_bits < 256 {
            return Err(SpongeError::UnsupportedWidth(state_bits));
        }
        Ok(Self {
            name: name.into(),
            state_bits,
            rate_bits: 64,
            data_limit_log2,
            permutation,
        })
    }

    /// ACE parameter set: n = 320, r = 64, log2(d) = 124.
    pub fn ace() -> Self {
        Self::builtin("ACE", 320, 124)
    }

    /// SPIX parameter set: n = 256, r = 64, log2(d) = 60.
    pub fn spix() -> Self {
        Self::builtin("SPIX", 256, 60)
    }

    /// WAGE parameter set: n = 259, r = 64, log2(d) = 60.
    pub fn wage() -> Self {
        Self::builtin("WAGE", 259, 60)
    }

    /// The bare reference permutation at 256 bits.
    pub fn reference() -> Self {
        Self::builtin("Reference", 256, 60)
    }

    fn builtin(name: &str, state_bits: usize, data_limit_log2: u32) -> Self {
        Self::new(name, state_bits, data_limit_log2, Arc::new(ReferencePermutation))
            .expect("built-in widths are valid")
    }

    /// Swaps in another round function, keeping the parameter set.
    pub fn with_permutation(mut self, permutation: Arc<dyn Permutation>) -> Self {
        self.permutation = permutation;
        self
    }

    pub fn with_data_limit_log2(mut self, data_limit_log2: u32) -> Self {
        self.data_limit_log2 = data_limit_log2;
        self
    }

    pub fn rounds(&self) -> u32 {
        self.permutation.rounds()
    }

    pub fn permute(&self, state: &mut StateBits) {
        debug_assert_eq!(state.width(), self.state_bits);
        self.permutation.permute(state);
    }
}
