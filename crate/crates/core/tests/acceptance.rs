//! One line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use lwcwifi::channel::{q_function, ChannelConfig, Tap};
use lwcwifi::handshake::HandshakePhase;
use lwcwifi::ofdm::{
    add_cp, fft64, ifft64, receive_frame, remove_cp, repack_bits, transmit_frame, unpack_bits,
    CarrierPlan, Modulation, TaggedPayload,
};
use lwcwifi::perf::{
    build_report, gen_time_ms, scale_tx_time, throughput_kbps, CycleCostTable, ReportOptions,
    TxTimeSource, F_HZ, MEASURED_FRAME_RATE_BPS,
};
use lwcwifi::sim::{
    crossing_db, ebn0_to_snr_db, run_ber_sweep, run_handshake_scenario, write_ber_csv, Link,
    Scenario,
};
use lwcwifi::sponge::{aead_decrypt, aead_encrypt, kdf, AeadParams, Scheme, SpongeError};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AUTH_MS: [f64; 8] = [956.40, 794.09, 721.50, 895.03, 764.50, 756.78, 776.01, 725.91];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn table2() -> Outcome {
    let r = build_report(&CycleCostTable::builtin(), &ReportOptions::default()).unwrap();
    let worst = r
        .handshakes
        .iter()
        .zip(AUTH_MS)
        .map(|(h, want)| (h.t_auth_ms - want).abs())
        .fold(0.0, f64::max);
    outcome(r.handshakes.len() == 8 && worst <= 0.05, format!("8 rows, max |err| {worst:.4} ms"))
}

fn throughput_cells() -> Outcome {
    let t = CycleCostTable::builtin();
    let mut worst: f64 = 0.0;
    for e in &t.entries {
        worst = worst
            .max((throughput_kbps(e.m_bits, e.cycles, F_HZ).unwrap() - e.golden_throughput_kbps).abs())
            .max((gen_time_ms(e.cycles, F_HZ).unwrap() - e.golden_gentime_ms).abs());
    }
    let wage = throughput_kbps(259, 19011, F_HZ).unwrap();
    outcome(worst <= 0.05, format!("{} rows, max |err| {worst:.4}, WAGE Perm {wage:.2} Kbps", t.entries.len()))
}

fn scaling() -> Outcome {
    let ms = 1000.0 * scale_tx_time(0.7, 16.82e3, 50e6).unwrap();
    let shown = format!("{ms:.3}");
    outcome(shown == "0.235", format!("{shown} ms"))
}

fn loopback() -> Outcome {
    let plan = CarrierPlan::ieee80211a();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let (mut frames, mut errors, mut lost) = (0, 0u64, 0);
    for m in [Modulation::Bpsk, Modulation::Qpsk] {
        for i in 0..1000 {
            let mut bytes = [0u8; 96];
            rng.fill_bytes(&mut bytes);
            let tx = transmit_frame(&TaggedPayload::new(bytes, i), m, &plan, 0.02).unwrap();
            let rx = ChannelConfig::identity().apply(&tx).unwrap();
            match receive_frame(&rx, m, &plan) {
                Ok(f) => errors += bytes.iter().zip(&f.payload).map(|(a, b)| (a ^ b).count_ones() as u64).sum::<u64>(),
                Err(_) => lost += 1,
            }
            frames += 1;
        }
    }
    outcome(errors == 0 && lost == 0, format!("{frames} frames, {lost} lost, {errors} bit errors"))
}

fn inverse_pairs() -> Outcome {
    let repack = (0..=255u8).all(|b| unpack_bits(&repack_bits(b)).unwrap() == b);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut cp_ok = true;
    let mut fft_err: f64 = 0.0;
    for _ in 0..1000 {
        let x: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        cp_ok &= remove_cp(&add_cp(&x).unwrap()).unwrap().to_vec() == x;
        let back = fft64(&ifft64(&x).unwrap()).unwrap();
        fft_err = back.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(fft_err, f64::max);
    }
    let plan = CarrierPlan::ieee80211a();
    let mut labels: Vec<i32> = plan.data_labels.clone();
    labels.extend(plan.pilot_labels);
    labels.extend(&plan.null_labels);
    let set: BTreeSet<i32> = labels.iter().copied().collect();
    let partition = labels.len() == 64 && set == (-32..32).collect() && plan.data_labels.len() == 48;
    outcome(
        repack && cp_ok && fft_err < 1e-6 && partition,
        format!("repack {repack}, cp {cp_ok}, fft max err {fft_err:.2e}, plan partition {partition}"),
    )
}

/// Eb/N0 where Q(√(2γ)) equals `target`, by bisection.
fn theory_crossing(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 15.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if q_function((2.0 * 10f64.powf(mid / 10.0)).sqrt()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn awgn_curve() -> Outcome {
    let ebn0 = [5.5, 6.0, 6.5, 7.0, 7.5];
    let snr: Vec<f64> = ebn0.iter().map(|&e| ebn0_to_snr_db(Modulation::Bpsk, e)).collect();
    let pts = run_ber_sweep(Modulation::Bpsk, &snr, 1_000_000, 102);
    let curve: Vec<(f64, f64)> = pts.iter().map(|p| (p.ebn0_db, p.sim_ber)).collect();
    let bits: u64 = pts.iter().map(|p| p.bits).sum();
    let theory = theory_crossing(1e-3);
    match crossing_db(&curve, 1e-3) {
        Some(sim) => outcome(
            (sim - theory).abs() <= 0.5 && pts.iter().all(|p| p.bits >= 1_000_000),
            format!("sim {sim:.3} dB vs theory {theory:.3} dB at 1e-3, offset {:+.3} dB, {bits} bits", sim - theory),
        ),
        None => outcome(false, format!("curve does not cross 1e-3: {curve:?}")),
    }
}

fn cp_isi() -> Outcome {
    let errors = |m: Modulation, delay: usize, frames: u64| -> (u64, u64) {
        let ch = ChannelConfig {
            snr_db: 30.0,
            cfo_fraction: 0.0,
            taps: vec![Tap::new(0, Complex64::new(1.0, 0.0)), Tap::new(delay, Complex64::new(0.7, 0.0))],
            seed: 103 + delay as u64,
        };
        let link = Link::new(m, 0.02, ch, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(delay as u64);
        let e = (0..frames)
            .map(|i| {
                let mut bytes = [0u8; 96];
                rng.fill_bytes(&mut bytes);
                let rx = link.send(&TaggedPayload::new(bytes, i as u32), i).unwrap();
                let got = link.demodulate(&rx).map(|f| f.payload).unwrap_or([0; 96]);
                bytes.iter().zip(&got).map(|(a, b)| (a ^ b).count_ones() as u64).sum::<u64>()
            })
            .sum();
        (e, frames * 768)
    };
    let mut inside = (0, 0);
    for m in [Modulation::Bpsk, Modulation::Qpsk] {
        for d in [4, 8, 12, 16] {
            let (e, n) = errors(m, d, 131);
            inside = (inside.0 + e, inside.1 + n);
        }
    }
    let (beyond, n20) = errors(Modulation::Qpsk, 20, 131);
    outcome(
        inside.0 == 0 && beyond > 0,
        format!(
            "delay<=16: {} errors / {} bits; delay 20: BER {:.2e}",
            inside.0, inside.1, beyond as f64 / n20 as f64
        ),
    )
}

fn handshake_security() -> Outcome {
    let (mut flips, mut accepted) = (0, 0);
    for scheme in [Scheme::Ace, Scheme::Spix, Scheme::Wage] {
        for frame in 0..4 {
            for bit in common::field_bits(frame) {
                let (a, s) = common::parties(scheme, 1, 0);
                let (res, _) = common::run(a, s, 7, |i, mut f| {
                    if i == frame {
                        f[bit / 8] ^= 1 << (bit % 8);
                    }
                    f
                });
                flips += 1;
                accepted += res.is_ok() as usize;
            }
        }
    }
    let (a, s) = common::parties(Scheme::Spix, 1, 0);
    let (res, old) = common::run(a, s, 8, |_, f| f);
    let last = res.unwrap().1.replay_counter;
    let replays_rejected = (0..4)
        .filter(|&frame| {
            let (a, s) = common::parties(Scheme::Spix, last + 1, last);
            common::run(a, s, 9, |i, f| if i == frame { old[frame] } else { f }).0.is_err()
        })
        .count();
    outcome(
        accepted == 0 && replays_rejected == 4,
        format!("{flips} flips, {accepted} accepted; {replays_rejected}/4 replays rejected"),
    )
}

fn aead_properties() -> Outcome {
    let p = AeadParams::new(2, 16, [3; 16], [4; 16]);
    let mut roundtrips = 0;
    let mut ok = true;
    for scheme in [Scheme::Ace, Scheme::Spix, Scheme::Wage] {
        let spec = scheme.spec();
        for len in 0..=8 * 16 {
            let msg: Vec<u8> = (0..len).map(|i| (i * 7) as u8).collect();
            let (ct, tag) = aead_encrypt(&p, &[1, 2], &msg, &spec).unwrap();
            ok &= aead_decrypt(&p, &[1, 2], &ct, &tag, &spec).unwrap() == msg;
            roundtrips += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut forged = 0;
    let spec = Scheme::Wage.spec();
    let ad = [5u8; 16];
    let (ct, tag) = aead_encrypt(&p, &ad, &[6; 128], &spec).unwrap();
    for _ in 0..10_000 {
        let (mut a, mut c, mut t) = (ad, ct.clone(), tag);
        match rng.random_range(0..3) {
            0 => a[rng.random_range(0..16)] ^= rng.random_range(1..=255u8),
            1 => c[rng.random_range(0..128)] ^= rng.random_range(1..=255u8),
            _ => t[rng.random_range(0..16)] ^= rng.random_range(1..=255u8),
        }
        forged += (aead_decrypt(&p, &a, &c, &t, &spec) != Err(SpongeError::AuthFailure)) as usize;
    }
    let keys = kdf(&[1; 16], &[2; 16], &[3; 16], &[4; 6], &[5; 6], &Scheme::Ace.spec());
    let ptk = keys.to_ptk();
    let split = ptk.len() * 8 == 384 && ptk[..16] == keys.kck && ptk[16..32] == keys.kek && ptk[32..] == keys.tk;
    outcome(
        ok && forged == 0 && split,
        format!("{roundtrips} roundtrips ok={ok}, 10000 perturbations, {forged} forgeries, PTK 384 bits split={split}"),
    )
}

fn determinism() -> Outcome {
    let mut s = Scenario::new(Scheme::Wage, Modulation::Qpsk, [0x42; 16], 105);
    s.channel.snr_db = Some(15.0);
    s.channel.cfo_fraction = 0.05;
    let a = run_handshake_scenario(&s).unwrap();
    let b = run_handshake_scenario(&s).unwrap();
    let opts = ReportOptions {
        tx_time: TxTimeSource::Simulated { frame_rate_bps: MEASURED_FRAME_RATE_BPS },
        ..Default::default()
    };
    let r1 = build_report(&CycleCostTable::builtin(), &opts).unwrap().to_json();
    let r2 = build_report(&CycleCostTable::builtin(), &opts).unwrap().to_json();
    let sweep = || {
        let mut out = Vec::new();
        write_ber_csv(&run_ber_sweep(Modulation::Qpsk, &[6.0], 20_000, 106), &mut out).unwrap();
        out
    };
    let same = a.transcript_jsonl() == b.transcript_jsonl()
        && a.iq.to_le_bytes() == b.iq.to_le_bytes()
        && r1 == r2
        && sweep() == sweep();
    let installed = a.parties.as_ref().is_some_and(|(x, y)| x.phase == HandshakePhase::Installed && y.phase == HandshakePhase::Installed);
    outcome(
        same && !a.iq.is_empty(),
        format!("transcripts, IQ ({} samples), report and BER CSV identical={same}; handshake installed={installed}", a.iq.len()),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("Handshake auth-time reproduction", table2, Some(Duration::from_secs(1))),
        ("Throughput and Gen-time reproduction", throughput_cells, Some(Duration::from_secs(1))),
        ("Transmit-time scaling to 50 Mbps", scaling, None),
        ("Loopback bit-exactness", loopback, None),
        ("Inverse-pair suite", inverse_pairs, None),
        ("AWGN BER curve vs Q(sqrt(2Eb/N0))", awgn_curve, Some(Duration::from_secs(300))),
        ("CP/ISI property", cp_isi, None),
        ("Handshake security properties", handshake_security, None),
        ("AEAD properties", aead_properties, None),
        ("Determinism", determinism, None),
    ];
    let mut failed = 0;
    for (name, check, budget) in checks {
        let t0 = Instant::now();
        let mut o = check();
        let took = t0.elapsed();
        if let Some(b) = budget {
            if took > b {
                o.pass = false;
                o.detail += &format!(" (over {b:?} budget)");
            }
        }
        failed += !o.pass as usize;
        println!(
            "{} {name}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
