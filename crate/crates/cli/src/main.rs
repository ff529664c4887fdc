use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lwcwifi::ofdm::{receive_frame, transmit_frame, CarrierPlan, IqBuffer, Modulation, TaggedPayload};
use lwcwifi::perf::{
    build_report, CycleCostTable, ReportOptions, TimingReport, TxTimeSource, MEASURED_FRAME_RATE_BPS,
};
use lwcwifi::sim::{
    ebn0_to_snr_db, run_ber_sweep, run_data_phase, run_handshake_scenario, write_ber_csv,
    HandshakeRun, Scenario, SimError,
};
use lwcwifi::sponge::{generate_kat, parse_kat, render_kat, verify_kat, Scheme};

const EXIT_HANDSHAKE: u8 = 2;
const EXIT_DECODE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

/// Simulated 4-way handshake and protected data over an OFDM link.
#[derive(Parser)]
#[command(name = "lwcwifi", version)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Raw little-endian f32 I/Q of every burst on the air.
    #[arg(long)]
    iq_out: Option<PathBuf>,
    /// Cycle-count CSV; a timing report is produced when given.
    #[arg(long)]
    timing_fixture: Option<PathBuf>,
    /// JSON-lines transcript destination.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the 4-way handshake described by a scenario.
    Handshake(RunArgs),
    /// Handshake followed by the protected data phase.
    Data(RunArgs),
    /// Monte Carlo BER over AWGN against theory.
    BerSweep {
        #[arg(long, default_value = "BPSK")]
        modulation: Modulation,
        /// Comma-separated SNR points in dB.
        #[arg(long, value_delimiter = ',', conflicts_with = "ebn0")]
        snr: Vec<f64>,
        /// Comma-separated Eb/N0 points in dB, converted to SNR.
        #[arg(long, value_delimiter = ',')]
        ebn0: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        bits: u64,
        #[arg(long)]
        ber_report: Option<PathBuf>,
    },
    /// Throughput, generation and authentication times from cycle counts.
    TimingReport {
        #[arg(long)]
        timing_fixture: Option<PathBuf>,
        /// Use the framing model instead of the observed transmit times.
        #[arg(long)]
        simulated_tx: bool,
        #[arg(long, default_value_t = 50e6)]
        target_rate_bps: f64,
    },
    /// Generate or verify known-answer vectors.
    AeadKat {
        #[arg(long, default_value = "SPIX")]
        scheme: Scheme,
        /// Check this file instead of generating.
        #[arg(long)]
        verify: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        max_ad: usize,
        #[arg(long, default_value_t = 32)]
        max_msg: usize,
    },
    /// Random payloads through modulator and demodulator on a clean channel.
    Loopback {
        #[arg(long, default_value = "QPSK")]
        modulation: Modulation,
        #[arg(long, default_value_t = 100)]
        frames: u32,
        #[arg(long, default_value_t = 0.02)]
        gain: f64,
        #[arg(long)]
        iq_out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn fail(code: u8, err: impl Into<anyhow::Error>) -> Failure {
    Failure { code, err: err.into() }
}

fn config<E: Into<anyhow::Error>>(err: E) -> Failure {
    fail(EXIT_CONFIG, err)
}

fn sim_failure(e: SimError) -> Failure {
    let code = match e {
        SimError::Config(_) => EXIT_CONFIG,
        SimError::Decode(_) => EXIT_DECODE,
        SimError::HandshakeFailed { .. } | SimError::Handshake(_) => EXIT_HANDSHAKE,
    };
    fail(code, e)
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())).map_err(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Handshake(args) => handshake(cli, args, false),
        Cmd::Data(args) => handshake(cli, args, true),
        Cmd::BerSweep { modulation, snr, ebn0, bits, ber_report } => {
            ber_sweep(cli, *modulation, snr, ebn0, *bits, ber_report.as_deref())
        }
        Cmd::TimingReport { timing_fixture, simulated_tx, target_rate_bps } => {
            let tx = if *simulated_tx {
                TxTimeSource::Simulated { frame_rate_bps: MEASURED_FRAME_RATE_BPS }
            } else {
                TxTimeSource::Fixture
            };
            let opts = ReportOptions { tx_time: tx, target_rate_bps: *target_rate_bps, ..Default::default() };
            let report = timing(timing_fixture.as_deref(), &opts)?;
            print_report(cli, &report);
            Ok(())
        }
        Cmd::AeadKat { scheme, verify, out, max_ad, max_msg } => {
            aead_kat(cli, *scheme, verify.as_deref(), out.as_deref(), *max_ad, *max_msg)
        }
        Cmd::Loopback { modulation, frames, gain, iq_out } => {
            loopback(cli, *modulation, *frames, *gain, iq_out.as_deref())
        }
    }
}

fn timing(fixture: Option<&Path>, opts: &ReportOptions) -> Result<TimingReport, Failure> {
    let table = match fixture {
        Some(p) => CycleCostTable::load(p).map_err(config)?,
        None => CycleCostTable::builtin(),
    };
    build_report(&table, opts).map_err(config)
}

fn print_report(cli: &Cli, r: &TimingReport) {
    if cli.json {
        println!("{}", r.to_json());
    } else {
        print!("{}", r.to_text());
    }
}

fn handshake(cli: &Cli, args: &RunArgs, with_data: bool) -> Result<(), Failure> {
    let mut s = Scenario::load(&args.scenario).map_err(sim_failure)?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(p) = &args.iq_out {
        s.report.iq_out = Some(p.clone());
    }
    if let Some(p) = &args.timing_fixture {
        s.report.timing_fixture = Some(p.clone());
    }
    if let Some(p) = &args.transcript {
        s.report.transcript = Some(p.clone());
    }
    if let Some(w) = s.gain_warning() {
        eprintln!("warning: {w}");
    }

    let run = run_handshake_scenario(&s).map_err(sim_failure)?;
    if let Some(p) = &s.report.transcript {
        write_file(p, run.transcript_jsonl())?;
    }
    if let Some(p) = &s.report.iq_out {
        write_file(p, run.iq.to_le_bytes())?;
    }
    let timing_report = match &s.report.timing_fixture {
        Some(fixture) => {
            let opts = ReportOptions {
                tx_time: TxTimeSource::Simulated { frame_rate_bps: MEASURED_FRAME_RATE_BPS },
                ..Default::default()
            };
            let r = timing(Some(fixture), &opts)?;
            if let Some(p) = &s.report.timing_report {
                write_file(p, r.to_json())?;
            }
            Some(r)
        }
        None => None,
    };

    let data = match (&run.parties, with_data) {
        (Some((a, b)), true) => Some(run_data_phase(&s, a, b).map_err(sim_failure)?.2),
        _ => None,
    };

    let summary = summary(&s, &run);
    if cli.json {
        let mut v = summary;
        if let Some(d) = &data {
            v["data"] = serde_json::to_value(d).expect("stats serialize");
        }
        if let Some(r) = &timing_report {
            v["timing"] = serde_json::to_value(r).expect("report serializes");
        }
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!(
            "{} {} handshake: {} ({} frames, {} payload bytes, {:.3} s simulated)",
            s.scheme,
            s.modulation,
            if run.succeeded() { "installed" } else { "failed" },
            run.frames_sent,
            run.payload_bytes,
            run.elapsed_s
        );
        if let Some(d) = &data {
            println!(
                "data: {} sent, {} delivered, {} auth failures, {} decode failures, BER {:.3e}",
                d.records_sent, d.delivered, d.auth_failures, d.decode_failures, d.ber()
            );
        }
        if let Some(r) = &timing_report {
            print!("{}", r.to_text());
        }
    }
    match run.failure {
        Some(e) => Err(sim_failure(e)),
        None => Ok(()),
    }
}

fn summary(s: &Scenario, run: &HandshakeRun) -> serde_json::Value {
    json!({
        "scheme": s.scheme,
        "modulation": s.modulation,
        "seed": s.seed,
        "success": run.succeeded(),
        "failure": run.failure.as_ref().map(|e| e.to_string()),
        "frames_sent": run.frames_sent,
        "payload_bytes": run.payload_bytes,
        "elapsed_s": run.elapsed_s,
        "keys_match": run.parties.as_ref().map(|(a, b)| a.keys() == b.keys()),
    })
}

fn ber_sweep(
    cli: &Cli,
    modulation: Modulation,
    snr: &[f64],
    ebn0: &[f64],
    bits: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let snr_list: Vec<f64> = if ebn0.is_empty() {
        snr.to_vec()
    } else {
        ebn0.iter().map(|&e| ebn0_to_snr_db(modulation, e)).collect()
    };
    if snr_list.is_empty() {
        return Err(config(anyhow::anyhow!("give --snr or --ebn0 points")));
    }
    let points = run_ber_sweep(modulation, &snr_list, bits, cli.seed.unwrap_or(0));
    let mut csv = Vec::new();
    write_ber_csv(&points, &mut csv).map_err(config)?;
    if let Some(p) = out {
        write_file(p, &csv)?;
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&points).expect("json"));
    } else {
        print!("{}", String::from_utf8(csv).expect("csv is utf-8"));
    }
    Ok(())
}

fn aead_kat(
    cli: &Cli,
    scheme: Scheme,
    verify: Option<&Path>,
    out: Option<&Path>,
    max_ad: usize,
    max_msg: usize,
) -> Result<(), Failure> {
    let spec = scheme.spec();
    if let Some(path) = verify {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(config)?;
        let records = parse_kat(&text).map_err(config)?;
        let bad = verify_kat(&records, &spec);
        if cli.json {
            println!("{}", json!({ "scheme": scheme, "records": records.len(), "failed": bad }));
        } else {
            println!("{scheme}: {} records, {} failed", records.len(), bad.len());
        }
        return if bad.is_empty() {
            Ok(())
        } else {
            Err(fail(EXIT_DECODE, anyhow::anyhow!("{} vectors did not verify", bad.len())))
        };
    }
    let text = render_kat(&generate_kat(&spec, max_ad, max_msg));
    match out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn loopback(
    cli: &Cli,
    modulation: Modulation,
    frames: u32,
    gain: f64,
    iq_out: Option<&Path>,
) -> Result<(), Failure> {
    use rand::{RngCore, SeedableRng};
    let plan = CarrierPlan::ieee80211a();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(cli.seed.unwrap_or(0));
    let mut capture = IqBuffer::new(Vec::new());
    let (mut bit_errors, mut lost) = (0u64, 0u32);
    for i in 0..frames {
        let mut bytes = [0u8; 96];
        rng.fill_bytes(&mut bytes);
        let p = TaggedPayload::new(bytes, i);
        let tx = transmit_frame(&p, modulation, &plan, gain).map_err(config)?;
        match receive_frame(&tx, modulation, &plan) {
            Ok(f) => {
                bit_errors += bytes.iter().zip(&f.payload).map(|(a, b)| (a ^ b).count_ones() as u64).sum::<u64>()
            }
            Err(_) => lost += 1,
        }
        if iq_out.is_some() {
            capture.extend(&tx);
        }
    }
    if let Some(p) = iq_out {
        write_file(p, capture.to_le_bytes())?;
    }
    let bits = frames as u64 * 768;
    let ber = if bits == 0 { 0.0 } else { bit_errors as f64 / bits as f64 };
    if cli.json {
        println!(
            "{}",
            json!({ "modulation": modulation, "frames": frames, "lost": lost, "bit_errors": bit_errors, "ber": ber })
        );
    } else {
        println!("{modulation} loopback: {frames} frames, {lost} lost, {bit_errors} bit errors, BER {ber:.3e}");
    }
    if lost > 0 || bit_errors > 0 {
        return Err(fail(EXIT_DECODE, anyhow::anyhow!("loopback was not bit-exact")));
    }
    Ok(())
}
