use std::fmt::Write as _;

use serde::Serialize;

use super::{
    auth_time_ms, gen_time_ms, handshake_tx_time_s, scale_tx_time, throughput_kbps,
    CycleCostTable, PerfError, F_HZ, MEASURED_FRAME_RATE_BPS,
};
use crate::sponge::Scheme;

/// Scheme/platform pairs of the handshake table.
pub const HANDSHAKE_ROWS: [(Scheme, &str); 8] = [
    (Scheme::Spix, "ATmega128"),
    (Scheme::Spix, "MSP430F2013"),
    (Scheme::Spix, "LM3S9D96"),
    (Scheme::Ace, "MSP430F2013"),
    (Scheme::Ace, "LM3S9D96"),
    (Scheme::Wage, "ATmega128"),
    (Scheme::Wage, "MSP430F2370"),
    (Scheme::Wage, "LM3S9D96"),
];

/// Where the 4-way transmit time comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TxTimeSource {
    /// The observed per-row value stored in the fixture.
    Fixture,
    /// The framing model at the given link rate.
    Simulated { frame_rate_bps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportOptions {
    pub f_hz: f64,
    pub tx_time: TxTimeSource,
    pub target_rate_bps: f64,
    /// Allowed gap between a computed cell and its golden value.
    pub tolerance: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            f_hz: F_HZ,
            tx_time: TxTimeSource::Fixture,
            target_rate_bps: 50e6,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionRow {
    pub scheme: Scheme,
    pub platform: String,
    pub function: String,
    pub cycles: u64,
    pub m_bits: u64,
    pub throughput_kbps: f64,
    pub gen_time_ms: f64,
    pub golden_throughput_kbps: f64,
    pub golden_gentime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandshakeRow {
    pub scheme: Scheme,
    pub platform: String,
    pub kdf_throughput_kbps: f64,
    pub mic_throughput_kbps: f64,
    pub kdf_gen_time_ms: f64,
    pub mic_gen_time_ms: f64,
    pub t_4way_tx_s: f64,
    pub t_auth_ms: f64,
    pub golden_auth_ms: Option<f64>,
    /// Authentication time with the transmit share moved to the target rate.
    pub scaled_auth_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub row: String,
    pub column: &'static str,
    pub computed: f64,
    pub golden: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub options: ReportOptions,
    pub functions: Vec<FunctionRow>,
    pub handshakes: Vec<HandshakeRow>,
    pub mismatches: Vec<Mismatch>,
}

pub fn build_report(table: &CycleCostTable, opts: &ReportOptions) -> Result<TimingReport, PerfError> {
    let mut mismatches = Vec::new();
    let mut check = |row: String, column: &'static str, computed: f64, golden: f64| {
        if (computed - golden).abs() > opts.tolerance {
            mismatches.push(Mismatch { row, column, computed, golden });
        }
    };

    let mut functions = Vec::with_capacity(table.entries.len());
    for e in &table.entries {
        let throughput = throughput_kbps(e.m_bits, e.cycles, opts.f_hz)?;
        let gen = gen_time_ms(e.cycles, opts.f_hz)?;
        let label = format!("{} {} {}", e.scheme, e.platform, e.function);
        check(label.clone(), "throughput_kbps", throughput, e.golden_throughput_kbps);
        check(label, "gen_time_ms", gen, e.golden_gentime_ms);
        functions.push(FunctionRow {
            scheme: e.scheme,
            platform: e.platform.clone(),
            function: e.function.clone(),
            cycles: e.cycles,
            m_bits: e.m_bits,
            throughput_kbps: throughput,
            gen_time_ms: gen,
            golden_throughput_kbps: e.golden_throughput_kbps,
            golden_gentime_ms: e.golden_gentime_ms,
        });
    }

    let mut handshakes = Vec::with_capacity(HANDSHAKE_ROWS.len());
    for (scheme, platform) in HANDSHAKE_ROWS {
        let kdf = table.get(scheme, platform, "KDF")?;
        let mic = table.get(scheme, platform, "MIC")?;
        let t_tx = match opts.tx_time {
            TxTimeSource::Fixture => kdf.golden_tx_s.ok_or_else(|| PerfError::MissingEntry {
                scheme: scheme.to_string(),
                platform: platform.to_string(),
                function: "KDF (4-way Tx time)".into(),
            })?,
            TxTimeSource::Simulated { frame_rate_bps } => handshake_tx_time_s(frame_rate_bps)?,
        };
        let kdf_ms = gen_time_ms(kdf.cycles, opts.f_hz)?;
        let mic_ms = gen_time_ms(mic.cycles, opts.f_hz)?;
        let t_auth = auth_time_ms(t_tx, kdf_ms, mic_ms)?;
        if let (Some(golden), TxTimeSource::Fixture) = (kdf.golden_auth_ms, opts.tx_time) {
            check(format!("{scheme} {platform}"), "t_auth_ms", t_auth, golden);
        }
        let scaled_tx = scale_tx_time(t_tx, MEASURED_FRAME_RATE_BPS, opts.target_rate_bps)?;
        handshakes.push(HandshakeRow {
            scheme,
            platform: platform.to_string(),
            kdf_throughput_kbps: throughput_kbps(kdf.m_bits, kdf.cycles, opts.f_hz)?,
            mic_throughput_kbps: throughput_kbps(mic.m_bits, mic.cycles, opts.f_hz)?,
            kdf_gen_time_ms: kdf_ms,
            mic_gen_time_ms: mic_ms,
            t_4way_tx_s: t_tx,
            t_auth_ms: t_auth,
            golden_auth_ms: kdf.golden_auth_ms,
            scaled_auth_ms: auth_time_ms(scaled_tx, kdf_ms, mic_ms)?,
        });
    }

    Ok(TimingReport { options: *opts, functions, handshakes, mismatches })
}

impl TimingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text, handshake table first.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<6} {:<12} {:>9} {:>9} {:>9} {:>9} {:>7} {:>10} {:>11}",
            "Scheme", "Platform", "KDF Kbps", "MIC Kbps", "KDF ms", "MIC ms", "Tx s", "Auth ms",
            "@target ms"
        );
        for h in &self.handshakes {
            let _ = writeln!(
                s,
                "{:<6} {:<12} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>7.3} {:>10.2} {:>11.3}",
                h.scheme.name(),
                h.platform,
                h.kdf_throughput_kbps,
                h.mic_throughput_kbps,
                h.kdf_gen_time_ms,
                h.mic_gen_time_ms,
                h.t_4way_tx_s,
                h.t_auth_ms,
                h.scaled_auth_ms
            );
        }
        s.push('\n');
        let _ = writeln!(
            s,
            "{:<6} {:<12} {:<11} {:>8} {:>6} {:>9} {:>9}",
            "Scheme", "Platform", "Function", "Cycles", "m", "Kbps", "Gen ms"
        );
        for f in &self.functions {
            let _ = writeln!(
                s,
                "{:<6} {:<12} {:<11} {:>8} {:>6} {:>9.2} {:>9.2}",
                f.scheme.name(),
                f.platform,
                f.function,
                f.cycles,
                f.m_bits,
                f.throughput_kbps,
                f.gen_time_ms
            );
        }
        let _ = writeln!(s, "\nmismatches: {}", self.mismatches.len());
        for m in &self.mismatches {
            let _ = writeln!(s, "  {} {}: {:.4} vs {:.2}", m.row, m.column, m.computed, m.golden);
        }
        s
    }
}
