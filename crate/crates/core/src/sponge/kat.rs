//! Known-answer test vectors: `key,nonce,ad,msg,ct,tag`, hex, one record per line.

use std::fmt::Write as _;

use super::{aead_decrypt, aead_encrypt, AeadParams, Key, Nonce, PermutationSpec, SpongeError, Tag, RATE_BYTES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatRecord {
    pub key: Key,
    pub nonce: Nonce,
    pub ad: Vec<u8>,
    pub msg: Vec<u8>,
    pub ct: Vec<u8>,
    pub tag: Tag,
}

impl KatRecord {
    pub fn params(&self) -> AeadParams {
        AeadParams::new(
            self.ad.len().div_ceil(RATE_BYTES),
            self.msg.len().div_ceil(RATE_BYTES),
            self.key,
            self.nonce,
        )
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            hex::encode(self.key),
            hex::encode(self.nonce),
            hex::encode(&self.ad),
            hex::encode(&self.msg),
            hex::encode(&self.ct),
            hex::encode(self.tag)
        )
    }
}

/// NIST-style sweep: key and nonce `00 01 .. 0f`, every ad length up to
/// `max_ad` crossed with every message length up to `max_msg`, contents counting
/// up from zero.
pub fn generate_kat(spec: &PermutationSpec, max_ad: usize, max_msg: usize) -> Vec<KatRecord> {
    let key: Key = std::array::from_fn(|i| i as u8);
    let nonce: Nonce = std::array::from_fn(|i| i as u8);
    let mut out = Vec::new();
    for msg_len in 0..=max_msg {
        for ad_len in 0..=max_ad {
            let ad: Vec<u8> = (0..ad_len).map(|i| i as u8).collect();
            let msg: Vec<u8> = (0..msg_len).map(|i| i as u8).collect();
            let mut rec = KatRecord {
                key,
                nonce,
                ad,
                msg,
                ct: Vec::new(),
                tag: [0; 16],
            };
            let (ct, tag) = aead_encrypt(&rec.params(), &rec.ad, &rec.msg, spec)
                .expect("sizes derived from inputs");
            rec.ct = ct;
            rec.tag = tag;
            out.push(rec);
        }
    }
    out
}

pub fn render_kat(records: &[KatRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(s, "{}", r.to_line());
    }
    s
}

pub fn parse_kat(text: &str) -> Result<Vec<KatRecord>, SpongeError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| SpongeError::MalformedKat {
            line: idx + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let decoded = fields
            .iter()
            .map(|f| hex::decode(f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let fixed = |v: &Vec<u8>, name: &str| -> Result<[u8; 16], SpongeError> {
            v.as_slice()
                .try_into()
                .map_err(|_| bad(format!("{name} must be 16 bytes")))
        };
        out.push(KatRecord {
            key: fixed(&decoded[0], "key")?,
            nonce: fixed(&decoded[1], "nonce")?,
            ad: decoded[2].clone(),
            msg: decoded[3].clone(),
            ct: decoded[4].clone(),
            tag: fixed(&decoded[5], "tag")?,
        });
    }
    Ok(out)
}

/// Checks every record in both directions. Returns the indices that fail.
pub fn verify_kat(records: &[KatRecord], spec: &PermutationSpec) -> Vec<usize> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            let params = r.params();
            let enc_ok = matches!(
                aead_encrypt(&params, &r.ad, &r.msg, spec),
                Ok((ct, tag)) if ct == r.ct && tag == r.tag
            );
            let dec_ok = matches!(
                aead_decrypt(&params, &r.ad, &r.ct, &r.tag, spec),
                Ok(m) if m == r.msg
            );
            !(enc_ok && dec_ok)
        })
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_vectors_parse_and_verify() {
        let spec = PermutationSpec::spix();
        let recs = generate_kat(&spec, 3, 9);
        assert_eq!(recs.len(), 4 * 10);
        let parsed = parse_kat(&format!("# header\n\n{}", render_kat(&recs))).unwrap();
        assert_eq!(parsed, recs);
        assert!(verify_kat(&parsed, &spec).is_empty());
    }

    #[test]
    fn wrong_scheme_fails_every_record() {
        let recs = generate_kat(&PermutationSpec::spix(), 1, 1);
        assert_eq!(verify_kat(&recs, &PermutationSpec::ace()).len(), recs.len());
    }

    #[test]
    fn malformed_lines_report_position() {
        let err = parse_kat("# c\n00,11\n").unwrap_err();
        assert!(matches!(err, SpongeError::MalformedKat { line: 2, .. }));
        let err = parse_kat(&format!("{},{},,,,{}", "00", "00".repeat(16), "00".repeat(16)))
            .unwrap_err();
        assert!(matches!(err, SpongeError::MalformedKat { line: 1, .. }));
    }
}
