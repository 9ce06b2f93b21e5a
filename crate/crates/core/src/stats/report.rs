//! The core test battery and its JSON report.
//!
//! Report layout (all numbers are JSON numbers):
//!
//! ```json
//! {
//!   "alpha": 0.01,
//!   "entries": [
//!     { "name": "monobit", "parameters": { "bits": 8000000.0 },
//!       "statistic": -412.0, "p_value": 0.88, "passed": true }
//!   ],
//!   "skipped": [ { "name": "kuiper/runs", "reason": "..." } ],
//!   "metadata": { "input": "...", "sample_sizes": { "bits": 8000000 },
//!                 "toolkit_version": "photon-qrng 0.1.0",
//!                 "seed_provenance": null, "notes": {} }
//! }
//! ```
//!
//! Whole-stream tests are named `monobit`, `block_frequency`, `runs`,
//! `chi_square_uniformity` and `serial_correlation`. Each also runs per
//! chunk, and the chunk p-values are combined with a Kuiper test under
//! `kuiper/<name>`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOOLKIT_VERSION;

use super::{
    block_frequency, chi_square_uniformity, histogram, kuiper_aggregate, monobit_frequency,
    runs_test, serial_correlation_test, TestStatistic, DEFAULT_ALPHA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub statistic: f64,
    pub p_value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTest {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub input: String,
    pub sample_sizes: BTreeMap<String, u64>,
    pub toolkit_version: String,
    pub seed_provenance: Option<String>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

impl ReportMetadata {
    pub fn for_input(input: impl Into<String>) -> Self {
        ReportMetadata {
            input: input.into(),
            toolkit_version: TOOLKIT_VERSION.to_string(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub alpha: f64,
    pub entries: Vec<TestEntry>,
    pub skipped: Vec<SkippedTest>,
    pub metadata: ReportMetadata,
}

impl TestReport {
    pub fn new(alpha: f64, metadata: ReportMetadata) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(TestReport {
            alpha,
            entries: Vec::new(),
            skipped: Vec::new(),
            metadata,
        })
    }

    /// Appends an entry; the pass flag is `p_value >= alpha`.
    pub fn record(&mut self, name: &str, parameters: &[(&str, f64)], result: TestStatistic) -> Result<()> {
        if !(0.0..=1.0).contains(&result.p_value) {
            return Err(Error::Internal(format!("{name}: p-value {} outside [0, 1]", result.p_value)));
        }
        self.entries.push(TestEntry {
            name: name.to_string(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            statistic: result.statistic,
            p_value: result.p_value,
            passed: result.p_value >= self.alpha,
        });
        Ok(())
    }

    pub fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.skipped.push(SkippedTest {
            name: name.to_string(),
            reason: reason.into(),
        });
    }

    pub fn entry(&self, name: &str) -> Option<&TestEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    pub alpha: f64,
    /// Block length `M` of the block-frequency test.
    pub block_len: usize,
    /// Bits per chunk for the Kuiper aggregation.
    pub chunk_bits: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            alpha: DEFAULT_ALPHA,
            block_len: 128,
            chunk_bits: 1_000_000,
        }
    }
}

const MIN_KUIPER_CHUNKS: usize = 5;

type BitTest = fn(&[u8], &BatteryConfig) -> Result<TestStatistic>;
type SymbolTest = fn(&[u32], u64) -> Result<TestStatistic>;

fn chi_square_test(symbols: &[u32], space: u64) -> Result<TestStatistic> {
    let c = chi_square_uniformity(&histogram(symbols, space as usize)?)?;
    Ok(TestStatistic {
        statistic: c.statistic,
        p_value: c.p_value,
    })
}

/// Runs the core battery on `bits` and on `symbols` drawn from
/// `0..symbol_space`. The bits are normally the MSB-first expansion of the
/// symbols.
pub fn run_battery(
    bits: &[u8],
    symbols: &[u32],
    symbol_space: u64,
    cfg: &BatteryConfig,
    metadata: ReportMetadata,
) -> Result<TestReport> {
    if symbol_space < 2 {
        return Err(Error::domain("symbol space must hold at least 2 symbols"));
    }
    let mut report = TestReport::new(cfg.alpha, metadata)?;
    report.metadata.sample_sizes.insert("bits".into(), bits.len() as u64);
    report.metadata.sample_sizes.insert("symbols".into(), symbols.len() as u64);

    let bit_tests: [(&str, BitTest); 3] = [
        ("monobit", |b, _| monobit_frequency(b)),
        ("block_frequency", |b, c| block_frequency(b, c.block_len)),
        ("runs", |b, _| runs_test(b)),
    ];
    let symbol_tests: [(&str, SymbolTest); 2] = [
        ("chi_square_uniformity", chi_square_test),
        ("serial_correlation", |s, _| serial_correlation_test(s)),
    ];
    let bits_per_symbol = if symbols.is_empty() {
        1.0
    } else {
        (bits.len() as f64 / symbols.len() as f64).max(1.0)
    };
    let chunk_symbols = ((cfg.chunk_bits as f64 / bits_per_symbol).round() as usize).max(1);

    for (name, test) in bit_tests {
        let mut params = vec![("bits", bits.len() as f64)];
        if name == "block_frequency" {
            params.push(("block_len", cfg.block_len as f64));
        }
        match test(bits, cfg) {
            Ok(r) => report.record(name, &params, r)?,
            Err(e) => report.skip(name, e.to_string()),
        }
        let chunk_ps: Vec<f64> = bits
            .chunks_exact(cfg.chunk_bits.max(1))
            .filter_map(|c| test(c, cfg).ok())
            .map(|r| r.p_value)
            .collect();
        aggregate(&mut report, name, &chunk_ps, cfg.chunk_bits as f64, "chunk_bits")?;
    }

    for (name, test) in symbol_tests {
        let params = [("symbols", symbols.len() as f64), ("symbol_space", symbol_space as f64)];
        match test(symbols, symbol_space) {
            Ok(r) => report.record(name, &params, r)?,
            Err(e) => report.skip(name, e.to_string()),
        }
        let chunk_ps: Vec<f64> = symbols
            .chunks_exact(chunk_symbols)
            .filter_map(|c| test(c, symbol_space).ok())
            .map(|r| r.p_value)
            .collect();
        aggregate(&mut report, name, &chunk_ps, chunk_symbols as f64, "chunk_symbols")?;
    }
    Ok(report)
}

fn aggregate(report: &mut TestReport, name: &str, ps: &[f64], chunk: f64, unit: &str) -> Result<()> {
    let label = format!("kuiper/{name}");
    if ps.len() < MIN_KUIPER_CHUNKS {
        report.skip(
            &label,
            format!(
                "{} complete chunks of {chunk} {}; at least {MIN_KUIPER_CHUNKS} needed",
                ps.len(),
                unit.trim_start_matches("chunk_")
            ),
        );
        return Ok(());
    }
    let k = kuiper_aggregate(ps)?;
    report.record(
        &label,
        &[("chunks", ps.len() as f64), (unit, chunk)],
        TestStatistic {
            statistic: k.v,
            p_value: k.p_value,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bytes(n: usize, seed: u64) -> (Vec<u8>, Vec<u32>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let symbols: Vec<u32> = (0..n).map(|_| rng.random::<u8>() as u32).collect();
        let bits = symbols
            .iter()
            .flat_map(|&s| (0..8).rev().map(move |b| ((s >> b) & 1) as u8))
            .collect();
        (bits, symbols)
    }

    #[test]
    fn random_input_passes_and_aggregates() {
        let (bits, symbols) = random_bytes(100_000, 5);
        let cfg = BatteryConfig {
            chunk_bits: 100_000,
            ..Default::default()
        };
        let report = run_battery(&bits, &symbols, 256, &cfg, ReportMetadata::for_input("test")).unwrap();
        assert!(report.all_passed(), "{:#?}", report.failures().collect::<Vec<_>>());
        assert_eq!(report.entries.len(), 10);
        assert!(report.skipped.is_empty());
        assert_eq!(report.entry("kuiper/monobit").unwrap().parameters["chunks"], 8.0);
    }

    #[test]
    fn zeros_fail_monobit() {
        let bits = vec![0u8; 8000];
        let symbols = vec![0u32; 1000];
        let report = run_battery(&bits, &symbols, 256, &BatteryConfig::default(), ReportMetadata::for_input("zeros")).unwrap();
        assert!(!report.entry("monobit").unwrap().passed);
        assert!(!report.all_passed());
        // Constant symbols have no correlation to speak of.
        assert!(report.skipped.iter().any(|s| s.name == "serial_correlation"));
        assert!(report.skipped.iter().any(|s| s.name == "kuiper/monobit"));
    }

    #[test]
    fn short_input_lists_skips() {
        let report = run_battery(&[0, 1, 1], &[3], 256, &BatteryConfig::default(), ReportMetadata::for_input("tiny")).unwrap();
        assert!(report.entries.iter().all(|e| e.name == "chi_square_uniformity"));
        let skipped: Vec<_> = report.skipped.iter().map(|s| s.name.as_str()).collect();
        for name in ["monobit", "block_frequency", "runs", "serial_correlation"] {
            assert!(skipped.contains(&name), "{name} not skipped");
        }
    }

    #[test]
    fn pass_flag_tracks_alpha() {
        let mut r = TestReport::new(0.05, ReportMetadata::default()).unwrap();
        r.record("a", &[], TestStatistic { statistic: 1.0, p_value: 0.05 }).unwrap();
        r.record("b", &[], TestStatistic { statistic: 1.0, p_value: 0.049 }).unwrap();
        assert!(r.entries[0].passed);
        assert!(!r.entries[1].passed);
        assert!(r.record("c", &[], TestStatistic { statistic: 0.0, p_value: 1.5 }).is_err());
        assert!(TestReport::new(0.0, ReportMetadata::default()).is_err());
    }
}
