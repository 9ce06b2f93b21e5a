use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::chi_square_sf;
use crate::theory::{min_entropy_per_bit, BinDistribution, DistributionKind};

/// Counts of each symbol in `0..n_symbols`, reported over bins
/// `1..=n_symbols` (symbol `s` lands in bin `s + 1`).
pub fn histogram<T>(symbols: &[T], n_symbols: usize) -> Result<BinDistribution>
where
    T: Copy + Into<u64>,
{
    if n_symbols == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    let mut counts = vec![0u64; n_symbols];
    for (i, &s) in symbols.iter().enumerate() {
        let s: u64 = s.into();
        match counts.get_mut(s as usize) {
            Some(c) if s < n_symbols as u64 => *c += 1,
            _ => {
                return Err(Error::data(
                    i as u64,
                    format!("symbol {s} outside 0..{n_symbols}"),
                ))
            }
        }
    }
    BinDistribution::from_counts(&counts)
}

/// `-log₂(max frequency) / log₂(bins)` of a count or frequency histogram.
pub fn empirical_min_entropy(hist: &BinDistribution) -> Result<f64> {
    if !(hist.total() > 0.0) {
        return Err(Error::domain("min-entropy of an empty histogram"));
    }
    let freq = hist.to_frequency()?;
    min_entropy_per_bit(freq.max_value().min(1.0), hist.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    /// Some bin expected fewer than 5 counts, so the asymptotic p-value is
    /// unreliable.
    pub low_expected: bool,
}

fn counts_of(hist: &BinDistribution) -> Result<&[f64]> {
    if hist.kind() != DistributionKind::EmpiricalCount {
        return Err(Error::domain("chi-square needs raw counts"));
    }
    Ok(hist.values())
}

/// Pearson chi-square of `hist` against the uniform distribution.
pub fn chi_square_uniformity(hist: &BinDistribution) -> Result<ChiSquare> {
    let counts = counts_of(hist)?;
    if counts.len() < 2 {
        return Err(Error::domain("chi-square uniformity needs at least 2 bins"));
    }
    let bins = counts.len() as f64;
    let uniform = vec![1.0 / bins; counts.len()];
    let expected = BinDistribution::new(uniform, DistributionKind::TheoreticalProbability)?;
    chi_square_goodness_of_fit(hist, &expected)
}

/// Pearson chi-square of observed counts against expected probabilities
/// over the same bins. Bins with zero expectation and zero count are skipped
/// and do not contribute a degree of freedom.
pub fn chi_square_goodness_of_fit(observed: &BinDistribution, expected: &BinDistribution) -> Result<ChiSquare> {
    let counts = counts_of(observed)?;
    if expected.kind() == DistributionKind::EmpiricalCount {
        return Err(Error::domain("expected distribution must be normalized"));
    }
    if observed.first_bin() != expected.first_bin() || observed.len() != expected.len() {
        return Err(Error::domain("observed and expected cover different bins"));
    }
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("chi-square of an empty histogram"));
    }
    let mut statistic = 0.0;
    let mut used = 0usize;
    let mut low_expected = false;
    for (&o, &p) in counts.iter().zip(expected.values()) {
        let e = total * p;
        if e == 0.0 {
            if o > 0.0 {
                statistic = f64::INFINITY;
            }
            continue;
        }
        used += 1;
        low_expected |= e < 5.0;
        statistic += (o - e) * (o - e) / e;
    }
    if used < 2 {
        return Err(Error::domain("chi-square needs at least 2 bins with nonzero expectation"));
    }
    let df = (used - 1) as f64;
    let p_value = if statistic.is_infinite() {
        0.0
    } else {
        chi_square_sf(statistic, df)?
    };
    Ok(ChiSquare {
        statistic,
        df,
        p_value,
        low_expected,
    })
}
