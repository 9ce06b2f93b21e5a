//! Bin distribution of the single registered edge under dead time.
//!
//! A pulse edge in bin `k` of an `n`-bin stretch can hide up to two more
//! detections that merge into it. Merge positions are counted by [`merge_count_h`]
//! (one partner) and [`merge_count_h_prime`] (two partners). The window
//! probability then conditions on what happened during the dead time that
//! precedes the period: nothing, one detection shadowing the first `i` bins,
//! or a detection that itself re-opens dead time inside the period.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::distribution::{BinDistribution, DistributionKind};

/// Number of equally likely positions for a second detection that merges
/// into a pulse starting `x` bins before the end of the stretch.
pub fn merge_count_h(x: i64, nd: u32) -> u64 {
    let nd = nd as i64;
    if x > nd {
        nd as u64
    } else if x >= 0 {
        x as u64
    } else {
        0
    }
}

/// Number of equally likely position pairs for two further detections that
/// merge into one pulse, `x` bins from the end of the stretch.
pub fn merge_count_h_prime(x: i64, nd: u32) -> f64 {
    let nd = nd as i64;
    let v = if x >= 2 * nd {
        nd * nd * 2
    } else if x > nd {
        2 * nd * (x - nd) + (x - 1) * (2 * nd - x)
    } else if x >= 2 {
        x * (x - 1)
    } else {
        0
    };
    // Twice the count is always an integer.
    v as f64 / 2.0
}

/// Precomputed per-bin occupancy probabilities for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct SinglePulseModel {
    n0: i64,
    nd: u32,
    /// `p₀ = e^{-λ t0}`, probability of an empty bin.
    p0: f64,
    /// `p_e = 1 - p₀`.
    pe: f64,
}

impl SinglePulseModel {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let a = cfg.lambda_t0();
        Ok(SinglePulseModel {
            n0: cfg.n0 as i64,
            nd: cfg.nd,
            p0: (-a).exp(),
            pe: -(-a).exp_m1(),
        })
    }

    /// Probability that an `n`-bin stretch holds exactly one pulse, starting
    /// in bin `k`, built from at most three detections. Zero for `k ≤ 0`.
    pub fn stretch(&self, n: i64, k: i64) -> f64 {
        if k <= 0 {
            return 0.0;
        }
        let (p0, pe) = (self.p0, self.pe);
        let x = n - k;
        let one = p0.powi((n - 1) as i32) * pe;
        let two = p0.powi((n - 2) as i32) * pe * pe * merge_count_h(x, self.nd) as f64;
        let three = p0.powi((n - 3) as i32) * pe * pe * pe * merge_count_h_prime(x, self.nd);
        one + two + three
    }

    /// Unnormalized probability that the period holds one pulse, in bin `k`.
    ///
    /// Sum of three cases for the `nd` bins before the period: all empty; one
    /// detection shadowing the first `i` bins; detections that extend the
    /// dead time to bin `j` of the period. The last case is the double sum
    /// `Σ_{i=1}^{nd} p₀^{nd-i} Σ_{j=1}^{i} p(n0-j-nd, k-j-nd)`, evaluated here
    /// with the order of summation swapped.
    pub fn unnormalized(&self, k: u32) -> Result<f64> {
        if k == 0 || k as i64 > self.n0 {
            return Err(Error::domain(format!("bin {k} outside 1..={}", self.n0)));
        }
        let (p0, pe) = (self.p0, self.pe);
        let nd = self.nd as i64;
        let k = k as i64;
        let lead = p0.powi(nd as i32);

        let quiet = lead * self.stretch(self.n0, k);

        let shadowed: f64 = (1..=nd).map(|i| self.stretch(self.n0 - i, k - i)).sum();
        let shadowed = lead * pe * shadowed;

        // weight(j) = Σ_{i=j}^{nd} p₀^{nd-i}
        let mut extended = 0.0;
        let mut weight = 0.0;
        for j in (1..=nd).rev() {
            weight += p0.powi((nd - j) as i32);
            extended += weight * self.stretch(self.n0 - j - nd, k - j - nd);
        }
        let extended = lead * pe * pe * extended;

        Ok(quiet + shadowed + extended)
    }
}

/// Unnormalized single-pulse probability for bin `k` of `cfg`.
pub fn single_pulse_bin_prob(cfg: &ExperimentConfig, k: u32) -> Result<f64> {
    SinglePulseModel::new(cfg)?.unnormalized(k)
}

/// Distribution of the registered bin over `1..=n0`, conditioned on the
/// period holding exactly one pulse.
pub fn normalized_bin_distribution(cfg: &ExperimentConfig) -> Result<BinDistribution> {
    if cfg.total_rate() == 0.0 {
        return Err(Error::domain("no signal: detection rate is zero"));
    }
    let model = SinglePulseModel::new(cfg)?;
    let weights = (1..=cfg.n0)
        .map(|k| model.unnormalized(k))
        .collect::<Result<Vec<_>>>()?;
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::domain("no signal: every bin has zero probability"));
    }
    BinDistribution::normalized_from(1, weights, DistributionKind::TheoreticalProbability)
}

/// Drops `nd` bins at both ends of `dist` and renormalizes.
pub fn truncate_distribution(dist: &BinDistribution, nd: u32) -> Result<BinDistribution> {
    let len = dist.len();
    let cut = nd as usize;
    if len <= 2 * cut {
        return Err(Error::domain(format!(
            "cutting {nd} bins from both ends of {len} leaves nothing"
        )));
    }
    if nd == 0 && dist.kind().is_normalized() {
        return Ok(dist.clone());
    }
    let kind = match dist.kind() {
        DistributionKind::TheoreticalProbability => DistributionKind::TheoreticalProbability,
        _ => DistributionKind::EmpiricalFrequency,
    };
    BinDistribution::normalized_from(
        dist.first_bin() + nd,
        dist.values()[cut..len - cut].to_vec(),
        kind,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_branches() {
        assert_eq!(merge_count_h(-1, 32), 0);
        assert_eq!(merge_count_h(0, 32), 0);
        assert_eq!(merge_count_h(10, 32), 10);
        assert_eq!(merge_count_h(32, 32), 32);
        assert_eq!(merge_count_h(100, 32), 32);
    }

    #[test]
    fn h_prime_branches() {
        assert_eq!(merge_count_h_prime(1, 32), 0.0);
        assert_eq!(merge_count_h_prime(2, 32), 1.0);
        assert_eq!(merge_count_h_prime(64, 32), 1024.0);
        assert_eq!(merge_count_h_prime(500, 32), 1024.0);
        // nd(x - nd) + (x - 1)(2nd - x)/2 at x = 40
        assert_eq!(merge_count_h_prime(40, 32), 32.0 * 8.0 + 39.0 * 24.0 / 2.0);
    }

    #[test]
    fn h_prime_continuous_at_branch_boundaries() {
        for nd in 1..50i64 {
            let ndu = nd as u32;
            // Lower branch formula extended to x = nd + 1.
            let x = nd + 1;
            assert_eq!(merge_count_h_prime(x, ndu), (x * (x - 1)) as f64 / 2.0);
            // Middle branch formula extended to x = 2nd.
            let x = 2 * nd;
            let middle = (nd * (x - nd)) as f64 + ((x - 1) * (2 * nd - x)) as f64 / 2.0;
            assert_eq!(merge_count_h_prime(x, ndu), middle);
        }
    }

    #[test]
    fn zero_dead_time_is_flat() {
        let cfg = ExperimentConfig::from_lambda_t0(0.00068, 0.162e-9, 320, 0).unwrap();
        let model = SinglePulseModel::new(&cfg).unwrap();
        let expected = model.p0.powi(319) * model.pe;
        for k in [1, 2, 160, 320] {
            assert!((model.unnormalized(k).unwrap() - expected).abs() < 1e-20);
        }
        let dist = normalized_bin_distribution(&cfg).unwrap();
        let (lo, hi) = dist
            .values()
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi - lo < 1e-14);
        assert!((dist.values()[0] - 1.0 / 320.0).abs() < 1e-15);
    }

    #[test]
    fn reference_peak() {
        let dist = normalized_bin_distribution(&ExperimentConfig::reference()).unwrap();
        assert!((dist.total() - 1.0).abs() < 1e-12);
        assert!((dist.max_value() - 0.003132).abs() < 2e-6);
        // 40-digit evaluation of the same sums.
        assert!((dist.max_value() - 0.003_132_180_115_050_167_7).abs() < 1e-15);
        assert!((dist.values()[0] - 0.003_064_011_965_773_501_7).abs() < 1e-15);
    }

    #[test]
    fn truncation() {
        let dist = normalized_bin_distribution(&ExperimentConfig::reference()).unwrap();
        let cut = truncate_distribution(&dist, 32).unwrap();
        assert_eq!(cut.len(), 256);
        assert_eq!(cut.first_bin(), 33);
        assert!((cut.max_value() - 0.00390633).abs() < 5e-8);
        assert!((cut.max_value() - 0.003_906_333_767_658_967).abs() < 1e-15);
        assert!((cut.total() - 1.0).abs() < 1e-12);

        let flat = BinDistribution::new(vec![0.1; 10], DistributionKind::TheoreticalProbability).unwrap();
        let flat_cut = truncate_distribution(&flat, 2).unwrap();
        assert!(flat_cut.values().iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-15));
        assert_eq!(truncate_distribution(&dist, 0).unwrap(), dist);
        assert!(truncate_distribution(&flat, 5).is_err());
    }

    #[test]
    fn errors() {
        let cfg = ExperimentConfig::new(0.162e-9, 320, 32, 0.0).unwrap();
        assert!(normalized_bin_distribution(&cfg).is_err());
        let cfg = ExperimentConfig::reference();
        assert!(single_pulse_bin_prob(&cfg, 0).is_err());
        assert!(single_pulse_bin_prob(&cfg, 321).is_err());
    }
}
