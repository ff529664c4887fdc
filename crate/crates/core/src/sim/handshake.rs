use std::sync::mpsc::{channel, Receiver, Sender};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::link::Link;
use super::scenario::{Scenario, Tamper};
use super::SimError;
use crate::channel::derive_seed;
use crate::handshake::{
    auth_start, authenticator_on_msg2, authenticator_on_msg4, supplicant_on_msg1,
    supplicant_on_msg3, Direction, HandshakeMessage, HandshakePhase, PartyState, Role,
    TranscriptEntry, FRAME_LEN,
};
use crate::ofdm::{IqBuffer, TaggedPayload};
use crate::perf::{frame_wire_bytes, simulated_tx_time, MEASURED_FRAME_RATE_BPS};

/// Sends per frame before giving up: the original and one retransmission.
pub const MAX_ATTEMPTS: u32 = 2;

/// Result of one handshake run. The transcript and captured IQ are kept
/// whether or not the run succeeded.
#[derive(Debug, Clone)]
pub struct HandshakeRun {
    /// `(authenticator, supplicant)`, both `Installed`, on success.
    pub parties: Option<(PartyState, PartyState)>,
    pub failure: Option<SimError>,
    pub transcript: Vec<TranscriptEntry>,
    /// Every burst as it left the channel, in send order.
    pub iq: IqBuffer,
    pub frames_sent: usize,
    /// Handshake payload bytes presented to the modem, retransmissions included.
    pub payload_bytes: usize,
    /// Simulated seconds from the first send to the last event.
    pub elapsed_s: f64,
}

impl HandshakeRun {
    pub fn succeeded(&self) -> bool {
        self.parties.is_some()
    }

    pub fn transcript_jsonl(&self) -> String {
        self.transcript.iter().map(|e| e.to_json_line() + "\n").collect()
    }
}

enum Wire {
    Frame { iq: IqBuffer, sent_at: f64 },
    /// The peer could not decode the last frame; its timer fired at `at`.
    Timeout { at: f64 },
    Abort,
    Done { at: f64 },
}

fn party_seed(seed: u64, stream: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    ChaCha20Rng::seed_from_u64(derive_seed(seed, stream)).fill_bytes(&mut out);
    out
}

fn failed(step: &str, reason: impl ToString) -> SimError {
    SimError::HandshakeFailed {
        step: step.to_string(),
        reason: reason.to_string(),
    }
}

fn peer_gone() -> SimError {
    failed("peer", "peer aborted")
}

fn is_peer_gone(e: &SimError) -> bool {
    *e == peer_gone()
}

struct Agent<'a> {
    role: Role,
    link: &'a Link,
    tx: Sender<Wire>,
    rx: Receiver<Wire>,
    clock: f64,
    airtime: f64,
    timeout: f64,
    tamper: Option<Tamper>,
    sent: u64,
    last: Option<HandshakeMessage>,
    attempt: u32,
    log: Vec<TranscriptEntry>,
    bursts: Vec<(f64, IqBuffer)>,
}

enum Step {
    Reply(PartyState, HandshakeMessage),
    Finished(PartyState),
}

impl Agent<'_> {
    fn direction(&self) -> Direction {
        match self.role {
            Role::Authenticator => Direction::AuthToSupp,
            Role::Supplicant => Direction::SuppToAuth,
        }
    }

    fn stream(&self) -> u64 {
        let base = match self.role {
            Role::Authenticator => 1u64 << 32,
            Role::Supplicant => 2u64 << 32,
        };
        base + self.sent
    }

    fn transmit(&mut self, msg: HandshakeMessage, attempt: u32) -> Result<(), SimError> {
        let mut frame = msg.padded_frame();
        if let Some(t) = self.tamper.filter(|t| t.kind == msg.kind && attempt == 1) {
            frame[t.bit / 8] ^= 1 << (t.bit % 8);
        }
        let iq = self.link.send(&TaggedPayload::new(frame, msg.kind as u32), self.stream())?;
        self.sent += 1;
        self.log.push(TranscriptEntry::new(self.direction(), &msg, attempt, self.clock));
        self.bursts.push((self.clock, iq.clone()));
        let _ = self.tx.send(Wire::Frame { iq, sent_at: self.clock });
        self.clock += self.airtime;
        self.last = Some(msg);
        self.attempt = attempt;
        Ok(())
    }

    /// Marks the last logged frame as delivered.
    fn delivered(&mut self) {
        let airtime = self.airtime;
        if let Some(e) = self.log.last_mut() {
            e.accepted = true;
            e.received_at_s = Some(e.sent_at_s + airtime);
        }
    }

    fn abort(&self, err: SimError) -> SimError {
        let _ = self.tx.send(Wire::Abort);
        err
    }

    /// Waits for the next frame from the peer, retransmitting on timeouts.
    /// `None` means the peer confirmed completion.
    fn next_message(&mut self) -> Result<Option<HandshakeMessage>, SimError> {
        loop {
            let wire = self.rx.recv().map_err(|_| peer_gone())?;
            match wire {
                Wire::Abort => return Err(peer_gone()),
                Wire::Done { at } => {
                    self.delivered();
                    self.clock = self.clock.max(at);
                    return Ok(None);
                }
                Wire::Timeout { at } => {
                    self.clock = self.clock.max(at);
                    let last = self.last.clone().expect("timeout only follows a send");
                    if self.attempt >= MAX_ATTEMPTS {
                        return Err(self.abort(SimError::Decode(format!(
                            "{:?} lost after {MAX_ATTEMPTS} attempts",
                            last.kind
                        ))));
                    }
                    self.transmit(last, self.attempt + 1)?;
                }
                Wire::Frame { iq, sent_at } => {
                    self.delivered();
                    self.clock = self.clock.max(sent_at + self.airtime);
                    match self.link.receive(&iq) {
                        Ok(bytes) => {
                            return HandshakeMessage::parse(&bytes)
                                .map(Some)
                                .map_err(|e| self.abort(failed("parse", e)));
                        }
                        Err(_) => {
                            // Only the sender's timer can notice the loss.
                            let _ = self.tx.send(Wire::Timeout { at: self.clock + self.timeout });
                            self.clock += self.timeout;
                        }
                    }
                }
            }
        }
    }

    fn run(
        &mut self,
        mut state: PartyState,
        first: Option<HandshakeMessage>,
        mut step: impl FnMut(&PartyState, &HandshakeMessage) -> Result<Step, SimError>,
    ) -> Result<PartyState, SimError> {
        if let Some(m) = first {
            self.transmit(m, 1)?;
        }
        loop {
            let Some(msg) = self.next_message()? else {
                return Ok(state);
            };
            match step(&state, &msg).map_err(|e| self.abort(e))? {
                Step::Reply(next, reply) => {
                    state = next;
                    self.transmit(reply, 1)?;
                }
                Step::Finished(next) => {
                    let _ = self.tx.send(Wire::Done { at: self.clock });
                    return Ok(next);
                }
            }
        }
    }
}

/// Runs the four-message exchange with each party on its own thread. Every
/// frame goes modulator, channel, demodulator.
pub fn run_handshake_scenario(s: &Scenario) -> Result<HandshakeRun, SimError> {
    s.validate()?;
    let pmk = s.pmk_bytes()?;
    let (ap, sta) = s.macs()?;
    let r = s.handshake.replay_counter as u128;
    let auth = PartyState::new(Role::Authenticator, pmk, ap, sta, r, s.scheme);
    let supp = PartyState::new(Role::Supplicant, pmk, sta, ap, 0, s.scheme);
    let link = Link::new(s.modulation, s.gain, s.channel_config(), s.channel.sync_threshold);
    let airtime = simulated_tx_time(frame_wire_bytes(), MEASURED_FRAME_RATE_BPS)
        .expect("positive constants");
    let a_seed = party_seed(s.seed, 0xa1);
    let s_seed = party_seed(s.seed, 0x5e);

    let (to_supp, supp_rx) = channel();
    let (to_auth, auth_rx) = channel();
    let agent = |role, tx, rx| Agent {
        role,
        link: &link,
        tx,
        rx,
        clock: 0.0,
        airtime,
        timeout: s.handshake.timeout_s,
        tamper: s.handshake.tamper,
        sent: 0,
        last: None,
        attempt: 0,
        log: Vec::new(),
        bursts: Vec::new(),
    };
    let mut a_agent = agent(Role::Authenticator, to_supp, auth_rx);
    let mut s_agent = agent(Role::Supplicant, to_auth, supp_rx);

    let (a_res, s_res) = std::thread::scope(|scope| {
        let a = scope.spawn(|| {
            let (state, m1) = auth_start(&auth, a_seed).map_err(|e| failed("auth_start", e))?;
            let out = a_agent.run(state, Some(m1), |st, m| {
                if st.phase == HandshakePhase::SentNonce {
                    let (n, reply) =
                        authenticator_on_msg2(st, m).map_err(|e| failed("authenticator_on_msg2", e))?;
                    Ok(Step::Reply(n, reply))
                } else {
                    let n = authenticator_on_msg4(st, m).map_err(|e| failed("authenticator_on_msg4", e))?;
                    Ok(Step::Finished(n))
                }
            });
            drop(std::mem::replace(&mut a_agent.tx, channel().0));
            out
        });
        let b = scope.spawn(|| {
            let out = s_agent.run(supp.clone(), None, |st, m| {
                let (n, reply) = if st.phase == HandshakePhase::Idle {
                    supplicant_on_msg1(st, m, s_seed).map_err(|e| failed("supplicant_on_msg1", e))?
                } else {
                    supplicant_on_msg3(st, m).map_err(|e| failed("supplicant_on_msg3", e))?
                };
                Ok(Step::Reply(n, reply))
            });
            drop(std::mem::replace(&mut s_agent.tx, channel().0));
            out
        });
        (a.join().expect("authenticator thread"), b.join().expect("supplicant thread"))
    });

    let mut bursts: Vec<(f64, IqBuffer)> = a_agent.bursts.into_iter().chain(s_agent.bursts).collect();
    bursts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut iq = IqBuffer::new(Vec::new());
    for (_, b) in &bursts {
        iq.extend(b);
    }
    let mut transcript: Vec<TranscriptEntry> = a_agent.log.into_iter().chain(s_agent.log).collect();
    transcript.sort_by(|x, y| x.sent_at_s.total_cmp(&y.sent_at_s));

    let (parties, failure) = match (a_res, s_res) {
        (Ok(a), Ok(b)) if a.phase == HandshakePhase::Installed && b.phase == HandshakePhase::Installed => {
            (Some((a, b)), None)
        }
        (Ok(_), Ok(_)) => (None, Some(failed("install", "a party did not reach Installed"))),
        (Err(e), Ok(_)) | (Ok(_), Err(e)) => (None, Some(e)),
        (Err(a), Err(b)) => (None, Some(if is_peer_gone(&a) { b } else { a })),
    };
    Ok(HandshakeRun {
        parties,
        failure,
        frames_sent: transcript.len(),
        payload_bytes: transcript.len() * FRAME_LEN,
        elapsed_s: a_agent.clock.max(s_agent.clock),
        transcript,
        iq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handshake::MessageKind;
    use crate::ofdm::Modulation;
    use crate::sponge::Scheme;

    fn scenario(scheme: Scheme, m: Modulation) -> Scenario {
        Scenario::new(scheme, m, *b"pairwise master!", 11)
    }

    #[test]
    fn clean_run_installs_both() {
        for scheme in [Scheme::Ace, Scheme::Spix, Scheme::Wage, Scheme::Reference] {
            let run = run_handshake_scenario(&scenario(scheme, Modulation::Qpsk)).unwrap();
            assert!(run.failure.is_none(), "{:?}", run.failure);
            let (a, s) = run.parties.as_ref().unwrap();
            assert_eq!(a.keys(), s.keys());
            assert_eq!(run.frames_sent, 4);
            assert_eq!(run.payload_bytes, 384);
            assert!(run.transcript.iter().all(|e| e.accepted));
            assert!((0.69..=0.73).contains(&run.elapsed_s), "{}", run.elapsed_s);
        }
    }

    #[test]
    fn tamper_aborts_at_mic_check() {
        let mut s = scenario(Scheme::Spix, Modulation::Bpsk);
        s.handshake.tamper = Some(Tamper { kind: MessageKind::Msg2SNonceMicA, bit: 17 * 8 + 3 });
        let run = run_handshake_scenario(&s).unwrap();
        assert!(!run.succeeded());
        assert_eq!(
            run.failure,
            Some(SimError::HandshakeFailed {
                step: "authenticator_on_msg2".into(),
                reason: "MIC verification failed".into()
            })
        );
    }

    #[test]
    fn dead_channel_gives_decode_failure_after_retry() {
        let mut s = scenario(Scheme::Ace, Modulation::Qpsk);
        s.channel.snr_db = Some(-20.0);
        let run = run_handshake_scenario(&s).unwrap();
        assert!(matches!(run.failure, Some(SimError::Decode(_))), "{:?}", run.failure);
        assert_eq!(run.frames_sent, 2);
        assert_eq!(run.transcript[1].attempt, 2);
    }

    #[test]
    fn same_seed_same_bytes() {
        let mut s = scenario(Scheme::Wage, Modulation::Qpsk);
        s.channel.snr_db = Some(18.0);
        let a = run_handshake_scenario(&s).unwrap();
        let b = run_handshake_scenario(&s).unwrap();
        assert_eq!(a.transcript_jsonl(), b.transcript_jsonl());
        assert_eq!(a.iq.to_le_bytes(), b.iq.to_le_bytes());
    }
}
