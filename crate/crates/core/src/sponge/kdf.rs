//! Pairwise key derivation and handshake MICs on top of the AE mode.

use serde::{Deserialize, Serialize};

use super::{aead_encrypt, AeadParams, Key, Nonce, PermutationSpec, SpongeState, Tag, RATE_BYTES};

/// Message blocks absorbed by the KDF: both MACs and both nonces, zero padded.
pub const KDF_MESSAGE_BLOCKS: usize = 6;
pub const KDF_OUTPUT_BYTES: usize = 48;
/// AD blocks covered by a MIC: 128-bit nonce and 128-bit replay counter.
pub const MIC_AD_BLOCKS: usize = 4;

/// KCK ‖ KEK ‖ TK, in that order.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionKeys {
    pub kck: Key,
    pub kek: Key,
    pub tk: Key,
}

impl SessionKeys {
    pub fn from_ptk(ptk: &[u8; KDF_OUTPUT_BYTES]) -> Self {
        let mut keys = Self {
            kck: [0; 16],
            kek: [0; 16],
            tk: [0; 16],
        };
        keys.kck.copy_from_slice(&ptk[..16]);
        keys.kek.copy_from_slice(&ptk[16..32]);
        keys.tk.copy_from_slice(&ptk[32..]);
        keys
    }

    pub fn to_ptk(&self) -> [u8; KDF_OUTPUT_BYTES] {
        let mut out = [0; KDF_OUTPUT_BYTES];
        out[..16].copy_from_slice(&self.kck);
        out[16..32].copy_from_slice(&self.kek);
        out[32..].copy_from_slice(&self.tk);
        out
    }
}

impl std::fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SessionKeys(..)")
    }
}

/// PTK = KDF(PMK, ANonce ‖ SNonce ‖ AP MAC ‖ STA MAC).
///
/// The sponge is keyed with the PMK and an IV made of the last 64 bits of
/// each nonce. The two MAC addresses and both full nonces are absorbed as six
/// zero-padded message blocks, and the 384-bit PTK is squeezed out without a
/// finalization call.
pub fn kdf(
    pmk: &Key,
    anonce: &Nonce,
    snonce: &Nonce,
    ap_mac: &[u8; 6],
    sta_mac: &[u8; 6],
    spec: &PermutationSpec,
) -> SessionKeys {
    let mut iv = [0u8; 16];
    iv[..8].copy_from_slice(&anonce[8..]);
    iv[8..].copy_from_slice(&snonce[8..]);

    let mut input = [0u8; KDF_MESSAGE_BLOCKS * RATE_BYTES];
    input[..6].copy_from_slice(ap_mac);
    input[6..12].copy_from_slice(sta_mac);
    input[12..28].copy_from_slice(anonce);
    input[28..44].copy_from_slice(snonce);

    let mut sponge = SpongeState::init(spec, pmk, &iv);
    sponge
        .absorb_msg(&input)
        .expect("fresh sponge accepts six blocks");
    let ptk = sponge
        .squeeze(KDF_OUTPUT_BYTES / RATE_BYTES)
        .expect("squeeze follows absorption");
    SessionKeys::from_ptk(&ptk.try_into().unwrap())
}

/// MIC(KCK, nonce, r): AE mode with four AD blocks `nonce ‖ r` and no message.
pub fn mic(kck: &Key, nonce: &Nonce, replay_counter: u128, spec: &PermutationSpec) -> Tag {
    let mut ad = [0u8; MIC_AD_BLOCKS * RATE_BYTES];
    ad[..16].copy_from_slice(nonce);
    ad[16..].copy_from_slice(&replay_counter.to_be_bytes());
    let params = AeadParams::new(MIC_AD_BLOCKS, 0, *kck, [0; 16]);
    let (_, tag) = aead_encrypt(&params, &ad, &[], spec).expect("MIC input fits its parameters");
    tag
}

#[cfg(test)]
mod tests {
    use super::*;

    const PMK: Key = [0x11; 16];
    const AN: Nonce = [0x22; 16];
    const SN: Nonce = [0x33; 16];
    const AP: [u8; 6] = [0x02, 0, 0, 0, 0, 0x01];
    const STA: [u8; 6] = [0x02, 0, 0, 0, 0, 0x02];

    fn differs_everywhere(a: &SessionKeys, b: &SessionKeys) -> bool {
        a.kck != b.kck && a.kek != b.kek && a.tk != b.tk
    }

    #[test]
    fn kdf_is_deterministic_and_384_bits() {
        let spec = PermutationSpec::ace();
        let a = kdf(&PMK, &AN, &SN, &AP, &STA, &spec);
        let b = kdf(&PMK, &AN, &SN, &AP, &STA, &PermutationSpec::ace());
        assert!(a == b);
        assert_eq!(a.to_ptk().len() * 8, 384);
        assert!(SessionKeys::from_ptk(&a.to_ptk()) == a);
    }

    #[test]
    fn kdf_single_bit_sweep() {
        let spec = PermutationSpec::spix();
        let base = kdf(&PMK, &AN, &SN, &AP, &STA, &spec);
        for bit in 0..128 {
            let flip16 = |x: &[u8; 16]| {
                let mut y = *x;
                y[bit / 8] ^= 1 << (bit % 8);
                y
            };
            assert!(differs_everywhere(&base, &kdf(&flip16(&PMK), &AN, &SN, &AP, &STA, &spec)));
            assert!(differs_everywhere(&base, &kdf(&PMK, &flip16(&AN), &SN, &AP, &STA, &spec)));
            assert!(differs_everywhere(&base, &kdf(&PMK, &AN, &flip16(&SN), &AP, &STA, &spec)));
        }
        for bit in 0..48 {
            let flip6 = |x: &[u8; 6]| {
                let mut y = *x;
                y[bit / 8] ^= 1 << (bit % 8);
                y
            };
            assert!(differs_everywhere(&base, &kdf(&PMK, &AN, &SN, &flip6(&AP), &STA, &spec)));
            assert!(differs_everywhere(&base, &kdf(&PMK, &AN, &SN, &AP, &flip6(&STA), &spec)));
        }
    }

    #[test]
    fn mic_depends_on_counter_and_key() {
        let spec = PermutationSpec::wage();
        let k = [0x5a; 16];
        let t = mic(&k, &AN, 7, &spec);
        assert_eq!(t, mic(&k, &AN, 7, &spec));
        assert_ne!(t, mic(&k, &AN, 8, &spec));
        for bit in 0..128 {
            let mut k2 = k;
            k2[bit / 8] ^= 1 << (bit % 8);
            assert_ne!(t, mic(&k2, &AN, 7, &spec));
        }
    }
}
