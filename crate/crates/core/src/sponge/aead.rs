use subtle::ConstantTimeEq;

use super::{Key, Nonce, PermutationSpec, SpongeError, SpongeState, Tag, RATE_BYTES};

/// Block budget and secrets for one AEAD call.
///
/// `l_ad` and `l_m` are the number of 64-bit blocks of associated data and
/// message the caller has provisioned; shorter inputs are padded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AeadParams {
    pub l_ad: usize,
    pub l_m: usize,
    pub key: Key,
    pub nonce: Nonce,
}

impl AeadParams {
    pub const TAG_BITS: usize = 128;

    pub fn new(l_ad: usize, l_m: usize, key: Key, nonce: Nonce) -> Self {
        Self { l_ad, l_m, key, nonce }
    }

    fn check(&self, ad: &[u8], body: &[u8]) -> Result<(), SpongeError> {
        if ad.len() > RATE_BYTES * self.l_ad {
            return Err(SpongeError::InputExceedsParams {
                what: "associated data",
                len: ad.len(),
                max: RATE_BYTES * self.l_ad,
            });
        }
        if body.len() > RATE_BYTES * self.l_m {
            return Err(SpongeError::InputExceedsParams {
                what: "message",
                len: body.len(),
                max: RATE_BYTES * self.l_m,
            });
        }
        Ok(())
    }
}

pub fn aead_encrypt(
    params: &AeadParams,
    ad: &[u8],
    msg: &[u8],
    spec: &PermutationSpec,
) -> Result<(Vec<u8>, Tag), SpongeError> {
    params.check(ad, msg)?;
    let mut sponge = SpongeState::init(spec, &params.key, &params.nonce);
    sponge.absorb_ad(ad)?;
    let ct = sponge.encrypt(msg)?;
    let tag = sponge.finalize()?;
    Ok((ct, tag))
}

/// Returns the plaintext only if the tag verifies; otherwise nothing is released.
pub fn aead_decrypt(
    params: &AeadParams,
    ad: &[u8],
    ct: &[u8],
    tag: &Tag,
    spec: &PermutationSpec,
) -> Result<Vec<u8>, SpongeError> {
    params.check(ad, ct)?;
    let mut sponge = SpongeState::init(spec, &params.key, &params.nonce);
    sponge.absorb_ad(ad)?;
    let plain = sponge.decrypt(ct)?;
    let expected = sponge.finalize()?;
    if bool::from(expected.ct_eq(tag)) {
        Ok(plain)
    } else {
        Err(SpongeError::AuthFailure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l_ad: usize, l_m: usize) -> AeadParams {
        AeadParams::new(l_ad, l_m, *b"0123456789abcdef", *b"fedcba9876543210")
    }

    #[test]
    fn empty_inputs_give_tag_only() {
        let (ct, tag) = aead_encrypt(&params(0, 0), &[], &[], &PermutationSpec::ace()).unwrap();
        assert!(ct.is_empty());
        assert_eq!(tag.len() * 8, AeadParams::TAG_BITS);
        assert_ne!(tag, [0; 16]);
    }

    #[test]
    fn roundtrip_1024_bit_message() {
        let p = params(0, 16);
        let msg: Vec<u8> = (0..128u8).collect();
        for spec in [PermutationSpec::ace(), PermutationSpec::spix(), PermutationSpec::wage()] {
            let (ct, tag) = aead_encrypt(&p, &[], &msg, &spec).unwrap();
            assert_eq!(ct.len(), msg.len());
            assert_ne!(ct, msg);
            assert_eq!(aead_decrypt(&p, &[], &ct, &tag, &spec).unwrap(), msg);
        }
    }

    #[test]
    fn every_single_bit_flip_of_64_bit_ciphertext_fails() {
        let p = params(0, 1);
        let spec = PermutationSpec::spix();
        let (ct, tag) = aead_encrypt(&p, &[], b"8 bytes!", &spec).unwrap();
        for bit in 0..64 {
            let mut bad = ct.clone();
            bad[bit / 8] ^= 1 << (bit % 8);
            assert_eq!(
                aead_decrypt(&p, &[], &bad, &tag, &spec).unwrap_err(),
                SpongeError::AuthFailure,
                "bit {bit}"
            );
        }
    }

    #[test]
    fn tampered_tag_and_ad_fail() {
        let p = params(2, 16);
        let spec = PermutationSpec::wage();
        let ad = [0x42u8; 16];
        let (ct, tag) = aead_encrypt(&p, &ad, &[1; 128], &spec).unwrap();

        let mut bad_tag = tag;
        bad_tag[15] ^= 0x80;
        assert!(aead_decrypt(&p, &ad, &ct, &bad_tag, &spec).is_err());

        let mut bad_ad = ad;
        bad_ad[9] ^= 0x01;
        assert!(aead_decrypt(&p, &bad_ad, &ct, &tag, &spec).is_err());
    }

    #[test]
    fn oversize_inputs_rejected() {
        let spec = PermutationSpec::spix();
        assert!(matches!(
            aead_encrypt(&params(0, 1), &[], &[0; 9], &spec),
            Err(SpongeError::InputExceedsParams { what: "message", .. })
        ));
        assert!(matches!(
            aead_encrypt(&params(1, 1), &[0; 9], &[], &spec),
            Err(SpongeError::InputExceedsParams { what: "associated data", .. })
        ));
    }

    #[test]
    fn data_limit_surfaces_from_encrypt() {
        let spec = PermutationSpec::spix().with_data_limit_log2(4);
        let err = aead_encrypt(&params(2, 16), &[0; 16], &[0; 128], &spec).unwrap_err();
        assert_eq!(err, SpongeError::DataLimitExceeded { limit_log2: 4 });
    }
}
