//! Running duplex sponge with an enforced phase order.

use super::{Key, Nonce, PermutationSpec, SpongeError, StateBits, Tag, RATE_BYTES};

/// Progress of a sponge. Calls may only move forward through this list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Init,
    AbsorbAD,
    AbsorbMsg,
    Squeeze,
    Finalized,
}

/// Two-bit domain code XORed into the two highest capacity bits before a call
/// to the permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    AssociatedData = 1,
    Message = 2,
    Final = 3,
}

/// Lane holding the rate: bits 64..127 of the state.
pub const RATE_LANE: usize = 1;

/// Offset from the top of the state of the bit marking a 10*-padded block.
pub const PADDED_FLAG_BIT: usize = 3;

#[derive(Debug, Clone)]
pub struct SpongeState {
    spec: PermutationSpec,
    bits: StateBits,
    phase: Phase,
    blocks: u128,
}

impl SpongeState {
    /// Loads `key ‖ nonce` into the low 256 bits and runs the permutation once.
    pub fn init(spec: &PermutationSpec, key: &Key, nonce: &Nonce) -> Self {
        let mut bits = StateBits::zero(spec.state_bits);
        let lanes = bits.lanes_mut();
        for (i, chunk) in key.chunks(8).chain(nonce.chunks(8)).enumerate() {
            lanes[i] = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        spec.permute(&mut bits);
        Self {
            spec: spec.clone(),
            bits,
            phase: Phase::Init,
            blocks: 0,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn bits(&self) -> &StateBits {
        &self.bits
    }

    pub fn spec(&self) -> &PermutationSpec {
        &self.spec
    }

    /// Absorbs associated data; an empty slice leaves the state untouched.
    pub fn absorb_ad(&mut self, ad: &[u8]) -> Result<(), SpongeError> {
        self.enter(Phase::AbsorbAD, |p| p == Phase::Init)?;
        self.charge(ad.len())?;
        for chunk in ad.chunks(RATE_BYTES) {
            self.xor_rate(&pad_block(chunk));
            self.call(Domain::AssociatedData, chunk.len() < RATE_BYTES);
        }
        Ok(())
    }

    /// Absorbs key material without producing output (KDF input path).
    pub fn absorb_msg(&mut self, msg: &[u8]) -> Result<(), SpongeError> {
        self.enter_msg()?;
        self.charge(msg.len())?;
        for chunk in msg.chunks(RATE_BYTES) {
            self.xor_rate(&pad_block(chunk));
            self.call(Domain::Message, chunk.len() < RATE_BYTES);
        }
        Ok(())
    }

    pub fn encrypt(&mut self, msg: &[u8]) -> Result<Vec<u8>, SpongeError> {
        self.enter_msg()?;
        self.charge(msg.len())?;
        let mut out = Vec::with_capacity(msg.len());
        for chunk in msg.chunks(RATE_BYTES) {
            let ks = self.rate_bytes();
            out.extend(chunk.iter().zip(ks).map(|(m, k)| m ^ k));
            self.xor_rate(&pad_block(chunk));
            self.call(Domain::Message, chunk.len() < RATE_BYTES);
        }
        Ok(out)
    }

    pub fn decrypt(&mut self, ct: &[u8]) -> Result<Vec<u8>, SpongeError> {
        self.enter_msg()?;
        self.charge(ct.len())?;
        let mut out = Vec::with_capacity(ct.len());
        for chunk in ct.chunks(RATE_BYTES) {
            let ks = self.rate_bytes();
            let plain: Vec<u8> = chunk.iter().zip(ks).map(|(c, k)| c ^ k).collect();
            self.xor_rate(&pad_block(&plain));
            self.call(Domain::Message, plain.len() < RATE_BYTES);
            out.extend(plain);
        }
        Ok(out)
    }

    /// Squeezes `n_blocks` rate blocks, running the permutation before each.
    pub fn squeeze(&mut self, n_blocks: usize) -> Result<Vec<u8>, SpongeError> {
        self.enter(Phase::Squeeze, |p| p <= Phase::Squeeze)?;
        let mut out = Vec::with_capacity(n_blocks * RATE_BYTES);
        for _ in 0..n_blocks {
            self.call(Domain::Final, false);
            out.extend(self.rate_bytes());
        }
        Ok(out)
    }

    /// Domain-separated permutation call, then the low 128 bits become the tag.
    pub fn finalize(&mut self) -> Result<Tag, SpongeError> {
        self.enter(Phase::Finalized, |p| p < Phase::Finalized)?;
        self.call(Domain::Final, false);
        let mut tag = [0u8; 16];
        tag[..8].copy_from_slice(&self.bits.lanes()[0].to_le_bytes());
        tag[8..].copy_from_slice(&self.bits.lanes()[1].to_le_bytes());
        Ok(tag)
    }

    fn enter_msg(&mut self) -> Result<(), SpongeError> {
        self.enter(Phase::AbsorbMsg, |p| p <= Phase::AbsorbAD)
    }

    fn enter(&mut self, next: Phase, allowed: impl Fn(Phase) -> bool) -> Result<(), SpongeError> {
        if !allowed(self.phase) {
            return Err(SpongeError::PhaseOrder {
                current: self.phase,
                requested: next,
            });
        }
        self.phase = next;
        Ok(())
    }

    fn charge(&mut self, len: usize) -> Result<(), SpongeError> {
        let total = self.blocks + len.div_ceil(RATE_BYTES) as u128;
        let limit_log2 = self.spec.data_limit_log2;
        if limit_log2 < 128 && total >= 1u128 << limit_log2 {
            return Err(SpongeError::DataLimitExceeded { limit_log2 });
        }
        self.blocks = total;
        Ok(())
    }

    fn rate_bytes(&self) -> [u8; RATE_BYTES] {
        self.bits.lanes()[RATE_LANE].to_le_bytes()
    }

    fn xor_rate(&mut self, block: &[u8; RATE_BYTES]) {
        self.bits.lanes_mut()[RATE_LANE] ^= u64::from_le_bytes(*block);
    }

    fn call(&mut self, domain: Domain, padded: bool) {
        let top = self.bits.width() - 1;
        let code = domain as u8;
        if code & 0b10 != 0 {
            self.bits.flip_bit(top);
        }
        if code & 0b01 != 0 {
            self.bits.flip_bit(top - 1);
        }
        if padded {
            self.bits.flip_bit(self.bits.width() - PADDED_FLAG_BIT);
        }
        self.spec.permute(&mut self.bits);
    }
}

/// Pads a partial block with a single 1 bit followed by zeros.
fn pad_block(chunk: &[u8]) -> [u8; RATE_BYTES] {
    let mut block = [0u8; RATE_BYTES];
    block[..chunk.len()].copy_from_slice(chunk);
    if chunk.len() < RATE_BYTES {
        block[chunk.len()] = 0x01;
    }
    block
}
