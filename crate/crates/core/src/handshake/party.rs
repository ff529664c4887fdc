use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use subtle::ConstantTimeEq;

use crate::sponge::{
    aead_decrypt, aead_encrypt, kdf, mic, AeadParams, Key, Nonce, PermutationSpec, Scheme,
    SessionKeys, SpongeError, Tag,
};

use super::record::{ProtectedRecord, MAX_RECORD_AD, MAX_RECORD_MSG};
use super::{HandshakeError, HandshakeMessage, MessageKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Role {
    Supplicant,
    Authenticator,
}

impl Role {
    /// First byte of the record nonce for traffic this role sends.
    fn direction_byte(self) -> u8 {
        match self {
            Role::Authenticator => 0x01,
            Role::Supplicant => 0x02,
        }
    }

    fn peer(self) -> Role {
        match self {
            Role::Authenticator => Role::Supplicant,
            Role::Supplicant => Role::Authenticator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum HandshakePhase {
    Idle,
    SentNonce,
    Derived,
    Installed,
}

/// 128-bit cipher-suite field D: tag `LWCS`, scheme id, rate, tag, key and
/// state sizes, and the record block budget.
pub fn suite_field(scheme: Scheme) -> [u8; 16] {
    let spec = scheme.spec();
    let id = match scheme {
        Scheme::Ace => 1,
        Scheme::Spix => 2,
        Scheme::Wage => 3,
        Scheme::Reference => 0xff,
    };
    let mut d = [0u8; 16];
    d[..4].copy_from_slice(b"LWCS");
    d[4] = id;
    d[5] = (spec.rate_bits / 8) as u8;
    d[6] = (AeadParams::TAG_BITS / 8) as u8;
    d[7] = 16;
    d[8..10].copy_from_slice(&(spec.state_bits as u16).to_be_bytes());
    d[10] = (MAX_RECORD_AD / 8) as u8;
    d[11] = (MAX_RECORD_MSG / 8) as u8;
    d
}

/// One side of the handshake. Operations return an updated copy and leave
/// `self` untouched on error.
#[derive(Debug, Clone)]
pub struct PartyState {
    pub role: Role,
    pmk: Key,
    pub my_mac: [u8; 6],
    pub peer_mac: [u8; 6],
    pub replay_counter: u128,
    pub phase: HandshakePhase,
    keys: Option<SessionKeys>,
    pub d: [u8; 16],
    spec: PermutationSpec,
    anonce: Option<Nonce>,
    snonce: Option<Nonce>,
    tx_seq: u64,
    rx_seq: Option<u64>,
}

impl PartyState {
    /// `replay_counter` is the first counter the authenticator will use, or the
    /// last counter the supplicant has seen (0 for none).
    pub fn new(
        role: Role,
        pmk: Key,
        my_mac: [u8; 6],
        peer_mac: [u8; 6],
        replay_counter: u128,
        scheme: Scheme,
    ) -> Self {
        Self {
            role,
            pmk,
            my_mac,
            peer_mac,
            replay_counter,
            phase: HandshakePhase::Idle,
            keys: None,
            d: suite_field(scheme),
            spec: scheme.spec(),
            anonce: None,
            snonce: None,
            tx_seq: 0,
            rx_seq: None,
        }
    }

    pub fn with_suite_field(mut self, d: [u8; 16]) -> Self {
        self.d = d;
        self
    }

    pub fn spec(&self) -> &PermutationSpec {
        &self.spec
    }

    /// Session keys, available from phase `Derived` on.
    pub fn keys(&self) -> Option<&SessionKeys> {
        if self.phase >= HandshakePhase::Derived {
            self.keys.as_ref()
        } else {
            None
        }
    }

    pub fn anonce(&self) -> Option<Nonce> {
        self.anonce
    }

    pub fn snonce(&self) -> Option<Nonce> {
        self.snonce
    }

    fn expect(&self, role: Role, phase: HandshakePhase) -> Result<(), HandshakeError> {
        if self.role != role {
            return Err(HandshakeError::WrongRole { expected: role });
        }
        if self.phase != phase {
            return Err(HandshakeError::WrongPhase { got: self.phase });
        }
        Ok(())
    }

    fn kck(&self) -> &Key {
        &self.keys.as_ref().expect("keys set in Derived").kck
    }

    fn mic(&self, nonce: &Nonce, counter: u128) -> Tag {
        mic(self.kck(), nonce, counter, &self.spec)
    }
}

fn fresh_nonce(seed: [u8; 32]) -> Nonce {
    let mut n = [0u8; 16];
    ChaCha20Rng::from_seed(seed).fill_bytes(&mut n);
    n
}

fn check_kind(m: &HandshakeMessage, kind: MessageKind) -> Result<(), HandshakeError> {
    if m.kind == kind {
        Ok(())
    } else {
        Err(HandshakeError::MalformedFrame(format!("expected {kind:?}, got {:?}", m.kind)))
    }
}

fn field(v: Option<[u8; 16]>, name: &str) -> Result<[u8; 16], HandshakeError> {
    v.ok_or_else(|| HandshakeError::MalformedFrame(format!("missing {name}")))
}

fn verify(expected: &Tag, got: &Tag) -> Result<(), HandshakeError> {
    if bool::from(expected.ct_eq(got)) {
        Ok(())
    } else {
        Err(HandshakeError::MicMismatch)
    }
}

/// Authenticator draws ANonce and sends message 1.
pub fn auth_start(
    a: &PartyState,
    rng_seed: [u8; 32],
) -> Result<(PartyState, HandshakeMessage), HandshakeError> {
    a.expect(Role::Authenticator, HandshakePhase::Idle)?;
    let anonce = fresh_nonce(rng_seed);
    let mut next = a.clone();
    next.anonce = Some(anonce);
    next.phase = HandshakePhase::SentNonce;
    let msg = HandshakeMessage {
        kind: MessageKind::Msg1ANonce,
        nonce: Some(anonce),
        mic: None,
        replay_counter: a.replay_counter,
    };
    Ok((next, msg))
}

/// Supplicant draws SNonce, derives the PTK and answers with MIC_A over
/// (ANonce, r).
pub fn supplicant_on_msg1(
    s: &PartyState,
    m: &HandshakeMessage,
    rng_seed: [u8; 32],
) -> Result<(PartyState, HandshakeMessage), HandshakeError> {
    s.expect(Role::Supplicant, HandshakePhase::Idle)?;
    check_kind(m, MessageKind::Msg1ANonce)?;
    let anonce = field(m.nonce, "ANonce")?;
    let r = m.replay_counter;
    if r <= s.replay_counter {
        return Err(HandshakeError::ReplayDetected);
    }
    let snonce = fresh_nonce(rng_seed);
    let keys = kdf(&s.pmk, &anonce, &snonce, &s.peer_mac, &s.my_mac, &s.spec);
    let mut next = s.clone();
    next.keys = Some(keys);
    next.anonce = Some(anonce);
    next.snonce = Some(snonce);
    next.replay_counter = r;
    next.phase = HandshakePhase::Derived;
    let msg = HandshakeMessage {
        kind: MessageKind::Msg2SNonceMicA,
        nonce: Some(snonce),
        mic: Some(next.mic(&anonce, r)),
        replay_counter: r,
    };
    Ok((next, msg))
}

/// Authenticator derives the PTK, checks MIC_A and sends MIC_S over (SNonce, r).
pub fn authenticator_on_msg2(
    a: &PartyState,
    m: &HandshakeMessage,
) -> Result<(PartyState, HandshakeMessage), HandshakeError> {
    a.expect(Role::Authenticator, HandshakePhase::SentNonce)?;
    check_kind(m, MessageKind::Msg2SNonceMicA)?;
    let snonce = field(m.nonce, "SNonce")?;
    let mic_a = field(m.mic, "MIC")?;
    let r = a.replay_counter;
    if m.replay_counter != r {
        return Err(HandshakeError::ReplayDetected);
    }
    let anonce = a.anonce.expect("set by auth_start");
    let mut next = a.clone();
    next.keys = Some(kdf(&a.pmk, &anonce, &snonce, &a.my_mac, &a.peer_mac, &a.spec));
    verify(&next.mic(&anonce, r), &mic_a)?;
    next.snonce = Some(snonce);
    next.phase = HandshakePhase::Derived;
    let msg = HandshakeMessage {
        kind: MessageKind::Msg3ANonceMicS,
        nonce: Some(anonce),
        mic: Some(next.mic(&snonce, r)),
        replay_counter: r,
    };
    Ok((next, msg))
}

/// Supplicant checks the ANonce echo and MIC_S, installs TK and confirms with
/// MIC_all over (D, r+1).
pub fn supplicant_on_msg3(
    s: &PartyState,
    m: &HandshakeMessage,
) -> Result<(PartyState, HandshakeMessage), HandshakeError> {
    s.expect(Role::Supplicant, HandshakePhase::Derived)?;
    check_kind(m, MessageKind::Msg3ANonceMicS)?;
    let anonce = field(m.nonce, "ANonce")?;
    let mic_s = field(m.mic, "MIC")?;
    if m.replay_counter != s.replay_counter {
        return Err(HandshakeError::ReplayDetected);
    }
    if !bool::from(anonce.ct_eq(&s.anonce.expect("set in Derived"))) {
        return Err(HandshakeError::NonceMismatch);
    }
    let r = s.replay_counter;
    verify(&s.mic(&s.snonce.expect("set in Derived"), r), &mic_s)?;
    let mut next = s.clone();
    next.replay_counter = r + 1;
    next.phase = HandshakePhase::Installed;
    let msg = HandshakeMessage {
        kind: MessageKind::Msg4MicAll,
        nonce: None,
        mic: Some(s.mic(&s.d, r + 1)),
        replay_counter: r + 1,
    };
    Ok((next, msg))
}

/// Authenticator checks MIC_all over (D, r+1) and installs TK.
pub fn authenticator_on_msg4(
    a: &PartyState,
    m: &HandshakeMessage,
) -> Result<PartyState, HandshakeError> {
    a.expect(Role::Authenticator, HandshakePhase::Derived)?;
    check_kind(m, MessageKind::Msg4MicAll)?;
    let mic_all = field(m.mic, "MIC")?;
    let r1 = a.replay_counter + 1;
    if m.replay_counter != r1 {
        return Err(HandshakeError::ReplayDetected);
    }
    verify(&a.mic(&a.d, r1), &mic_all)?;
    let mut next = a.clone();
    next.replay_counter = r1;
    next.phase = HandshakePhase::Installed;
    Ok(next)
}

fn record_nonce(role: Role, seq: u64) -> Nonce {
    let mut n = [0u8; 16];
    n[0] = role.direction_byte();
    n[8..].copy_from_slice(&seq.to_be_bytes());
    n
}

fn record_params(s: &PartyState, sender: Role, seq: u64) -> AeadParams {
    let tk = s.keys.as_ref().expect("installed").tk;
    AeadParams::new(MAX_RECORD_AD / 8, MAX_RECORD_MSG / 8, tk, record_nonce(sender, seq))
}

/// Encrypts one record under TK with the next sequence number.
pub fn protect(
    s: &PartyState,
    ad: &[u8],
    msg: &[u8],
) -> Result<(PartyState, ProtectedRecord), HandshakeError> {
    if s.phase != HandshakePhase::Installed {
        return Err(HandshakeError::NotInstalled);
    }
    for (what, len, max) in [("ad", ad.len(), MAX_RECORD_AD), ("message", msg.len(), MAX_RECORD_MSG)] {
        if len > max {
            return Err(HandshakeError::OversizeInput { what, len, max });
        }
    }
    let seq = s.tx_seq;
    let (ciphertext, tag) = aead_encrypt(&record_params(s, s.role, seq), ad, msg, &s.spec)
        .expect("sizes checked above");
    let mut next = s.clone();
    next.tx_seq += 1;
    Ok((
        next,
        ProtectedRecord {
            ad: ad.to_vec(),
            ciphertext,
            tag,
            seq,
        },
    ))
}

/// Verifies and decrypts a record from the peer; sequence numbers must
/// strictly increase.
pub fn unprotect(
    s: &PartyState,
    rec: &ProtectedRecord,
) -> Result<(PartyState, Vec<u8>), HandshakeError> {
    if s.phase != HandshakePhase::Installed {
        return Err(HandshakeError::NotInstalled);
    }
    if s.rx_seq.is_some_and(|last| rec.seq <= last) {
        return Err(HandshakeError::ReplayDetected);
    }
    let params = record_params(s, s.role.peer(), rec.seq);
    let plain = aead_decrypt(&params, &rec.ad, &rec.ciphertext, &rec.tag, &s.spec).map_err(
        |e| match e {
            SpongeError::InputExceedsParams { what, len, max } => {
                HandshakeError::OversizeInput { what, len, max }
            }
            _ => HandshakeError::AuthFailure,
        },
    )?;
    let mut next = s.clone();
    next.rx_seq = Some(rec.seq);
    Ok((next, plain))
}
