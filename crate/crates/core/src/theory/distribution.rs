use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    TheoreticalProbability,
    EmpiricalCount,
    EmpiricalFrequency,
}

impl DistributionKind {
    pub fn is_normalized(self) -> bool {
        !matches!(self, DistributionKind::EmpiricalCount)
    }
}

/// Values over a contiguous run of 1-based bins.
///
/// A full-period distribution covers bins `1..=n0`; a truncated one keeps the
/// original bin labels, so `first_bin` is `nd + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinDistribution {
    first_bin: u32,
    values: Vec<f64>,
    kind: DistributionKind,
}

impl BinDistribution {
    pub fn new(values: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        Self::with_first_bin(1, values, kind)
    }

    pub fn with_first_bin(first_bin: u32, values: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        if first_bin == 0 {
            return Err(Error::domain("bins are 1-based"));
        }
        if values.is_empty() {
            return Err(Error::domain("distribution needs at least one bin"));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::data(i as u64, format!("bin value {} is negative or not finite", values[i])));
        }
        if kind.is_normalized() {
            let total: f64 = values.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
            }
        }
        Ok(BinDistribution {
            first_bin,
            values,
            kind,
        })
    }

    /// Counts over bins `1..=counts.len()`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        Self::new(counts.iter().map(|&c| c as f64).collect(), DistributionKind::EmpiricalCount)
    }

    /// Normalizes arbitrary non-negative weights to a distribution of `kind`.
    pub(crate) fn normalized_from(first_bin: u32, weights: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::domain("cannot normalize an all-zero distribution"));
        }
        let values = weights.into_iter().map(|w| w / total).collect();
        Self::with_first_bin(first_bin, values, kind)
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Number of bins held.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_bin(&self) -> u32 {
        self.first_bin
    }

    pub fn last_bin(&self) -> u32 {
        self.first_bin + self.values.len() as u32 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at bin label `k`, if held.
    pub fn value(&self, k: u32) -> Option<f64> {
        k.checked_sub(self.first_bin)
            .and_then(|i| self.values.get(i as usize))
            .copied()
    }

    /// `(bin label, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.first_bin + i as u32, v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Bin label of the largest value (first one on ties).
    pub fn argmax(&self) -> u32 {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.first_bin + best as u32
    }

    /// Frequencies from counts; normalized kinds are returned unchanged.
    pub fn to_frequency(&self) -> Result<Self> {
        match self.kind {
            DistributionKind::EmpiricalCount => Self::normalized_from(
                self.first_bin,
                self.values.clone(),
                DistributionKind::EmpiricalFrequency,
            ),
            _ => Ok(self.clone()),
        }
    }

    /// Adds the counts of `other` into `self`. Both must be count
    /// distributions over the same bins.
    pub fn merge_counts(&mut self, other: &BinDistribution) -> Result<()> {
        if self.kind != DistributionKind::EmpiricalCount || other.kind != DistributionKind::EmpiricalCount {
            return Err(Error::domain("only count distributions can be merged"));
        }
        if self.first_bin != other.first_bin || self.len() != other.len() {
            return Err(Error::domain("histograms cover different bins"));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }
}
