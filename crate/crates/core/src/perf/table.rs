use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PerfError;
use crate::sponge::Scheme;

/// Cycle counts transcribed from the published KDF/MIC, SPIX, ACE and WAGE
/// tables.
pub const DEFAULT_FIXTURE: &str = include_str!("../../fixtures/perf_tables.csv");

/// One fixture row. `golden_*` columns hold the printed values the report is
/// checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCostEntry {
    pub scheme: Scheme,
    pub platform: String,
    pub function: String,
    pub cycles: u64,
    pub sram: u32,
    pub flash: u32,
    pub m_bits: u64,
    pub golden_throughput_kbps: f64,
    pub golden_gentime_ms: f64,
    #[serde(default)]
    pub golden_tx_s: Option<f64>,
    #[serde(default)]
    pub golden_auth_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CycleCostTable {
    pub entries: Vec<CycleCostEntry>,
}

impl CycleCostTable {
    pub fn builtin() -> Self {
        Self::from_csv_str(DEFAULT_FIXTURE).expect("shipped fixture parses")
    }

    pub fn from_csv_str(text: &str) -> Result<Self, PerfError> {
        Self::from_reader(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PerfError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| PerfError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader(r: impl Read) -> Result<Self, PerfError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, row) in rdr.deserialize::<CycleCostEntry>().enumerate() {
            let row = row.map_err(|e| PerfError::Fixture(e.to_string()))?;
            if row.cycles == 0 {
                return Err(PerfError::Fixture(format!("row {}: zero cycles", i + 1)));
            }
            if !seen.insert((row.scheme, row.platform.clone(), row.function.clone())) {
                return Err(PerfError::Fixture(format!(
                    "duplicate row {} / {} / {}",
                    row.scheme, row.platform, row.function
                )));
            }
            entries.push(row);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, scheme: Scheme, platform: &str, function: &str) -> Result<&CycleCostEntry, PerfError> {
        self.entries
            .iter()
            .find(|e| e.scheme == scheme && e.platform == platform && e.function == function)
            .ok_or_else(|| PerfError::MissingEntry {
                scheme: scheme.to_string(),
                platform: platform.to_string(),
                function: function.to_string(),
            })
    }

    /// Drops a row, returning whether it existed.
    pub fn remove(&mut self, scheme: Scheme, platform: &str, function: &str) -> bool {
        let before = self.entries.len();
        self.entries
            .retain(|e| !(e.scheme == scheme && e.platform == platform && e.function == function));
        self.entries.len() != before
    }
}
