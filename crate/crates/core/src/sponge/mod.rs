//! Duplex-sponge AEAD with pluggable permutations, and the KDF and MIC built on it.

mod aead;
mod kat;
mod kdf;
mod permutation;
mod state;

pub use aead::{aead_decrypt, aead_encrypt, AeadParams};
pub use kat::{generate_kat, parse_kat, render_kat, verify_kat, KatRecord};
pub use kdf::{kdf, mic, SessionKeys, KDF_MESSAGE_BLOCKS, KDF_OUTPUT_BYTES, MIC_AD_BLOCKS};
pub use permutation::{
    reference_permutation, round_constant, Permutation, PermutationSpec, ReferencePermutation,
    StateBits, REFERENCE_ROUNDS, SUPPORTED_WIDTHS,
};
pub use state::{Domain, Phase, SpongeState, PADDED_FLAG_BIT, RATE_LANE};

use thiserror::Error;

pub type Key = [u8; 16];
pub type Nonce = [u8; 16];
pub type Tag = [u8; 16];

/// Bytes per rate block.
pub const RATE_BYTES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpongeError {
    #[error("unsupported state width {0} bits")]
    UnsupportedWidth(usize),
    #[error("state needs {expected} bytes, got {got}")]
    StateLength { expected: usize, got: usize },
    #[error("bits set above the state width")]
    StrayHighBits,
    #[error("{requested:?} not allowed in phase {current:?}")]
    PhaseOrder { current: Phase, requested: Phase },
    #[error("data limit of 2^{limit_log2} blocks exceeded")]
    DataLimitExceeded { limit_log2: u32 },
    #[error("{what} is {len} bytes, more than the {max} the parameters allow")]
    InputExceedsParams { what: &'static str, len: usize, max: usize },
    #[error("authentication failed")]
    AuthFailure,
    #[error("malformed test vector on line {line}: {reason}")]
    MalformedKat { line: usize, reason: String },
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    #[serde(rename = "ACE")]
    Ace,
    #[serde(rename = "SPIX")]
    Spix,
    #[serde(rename = "WAGE")]
    Wage,
    Reference,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ace, Scheme::Spix, Scheme::Wage, Scheme::Reference];

    pub fn spec(self) -> PermutationSpec {
        match self {
            Scheme::Ace => PermutationSpec::ace(),
            Scheme::Spix => PermutationSpec::spix(),
            Scheme::Wage => PermutationSpec::wage(),
            Scheme::Reference => PermutationSpec::reference(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ace => "ACE",
            Scheme::Spix => "SPIX",
            Scheme::Wage => "WAGE",
            Scheme::Reference => "Reference",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}
