use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::bins::{normalized_bin_distribution, truncate_distribution};
use super::config::ExperimentConfig;
use super::counting::prob_single_pulse;
use super::distribution::BinDistribution;

/// Min-entropy per output bit, `-log₂(p_max) / log₂(symbol_count)`.
pub fn min_entropy_per_bit(p_max: f64, symbol_count: u64) -> Result<f64> {
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(Error::domain(format!("p_max must lie in (0, 1], got {p_max}")));
    }
    if symbol_count < 2 {
        return Err(Error::domain("min-entropy per bit needs at least 2 symbols"));
    }
    Ok(-p_max.log2() / (symbol_count as f64).log2())
}

/// Probability mass kept after cutting `nd` bins from both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetainedFraction {
    /// Sum of the distribution over the kept bins.
    pub exact: f64,
    /// `(n0 - 2nd) / n0`, the flat-distribution approximation.
    pub approximation: f64,
}

pub fn retained_fraction(dist: &BinDistribution, nd: u32) -> Result<RetainedFraction> {
    let len = dist.len();
    let cut = nd as usize;
    if len <= 2 * cut {
        return Err(Error::domain(format!(
            "cutting {nd} bins from both ends of {len} leaves nothing"
        )));
    }
    let dist = dist.to_frequency()?;
    Ok(RetainedFraction {
        exact: dist.values()[cut..len - cut].iter().sum(),
        approximation: (len - 2 * cut) as f64 / len as f64,
    })
}

/// Output rate estimate and the factors it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitrateEstimate {
    /// `log₂(n0 - 2nd)`, bits carried by one retained symbol.
    pub bits_per_symbol: f64,
    pub single_pulse_probability: f64,
    pub period_seconds: f64,
    pub retained: RetainedFraction,
    /// Rate using the exact retained fraction, bits/second.
    pub exact_bps: f64,
    /// Rate using the `(n0 - 2nd)/n0` approximation, bits/second.
    pub approx_bps: f64,
}

/// Expected bit rate: bits per symbol × single-pulse probability × period
/// frequency × retained fraction.
pub fn predicted_bitrate(cfg: &ExperimentConfig) -> Result<BitrateEstimate> {
    cfg.validate()?;
    let symbols = cfg.symbol_count();
    let bits_per_symbol = (symbols as f64).log2();
    let period_seconds = cfg.period_seconds();
    let approximation = symbols as f64 / cfg.n0 as f64;
    if cfg.total_rate() == 0.0 {
        return Ok(BitrateEstimate {
            bits_per_symbol,
            single_pulse_probability: 0.0,
            period_seconds,
            retained: RetainedFraction {
                exact: approximation,
                approximation,
            },
            exact_bps: 0.0,
            approx_bps: 0.0,
        });
    }
    let p1 = prob_single_pulse(cfg.mean_occupancy(), cfg.dead_time_ratio())?;
    let retained = retained_fraction(&normalized_bin_distribution(cfg)?, cfg.nd)?;
    let base = bits_per_symbol * p1 / period_seconds;
    Ok(BitrateEstimate {
        bits_per_symbol,
        single_pulse_probability: p1,
        period_seconds,
        retained,
        exact_bps: base * retained.exact,
        approx_bps: base * retained.approximation,
    })
}

/// Headline numbers for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheorySummary {
    pub p_max: f64,
    pub h_inf: f64,
    pub p_max_truncated: f64,
    pub h_inf_truncated: f64,
    pub bitrate: BitrateEstimate,
}

pub fn summarize(cfg: &ExperimentConfig) -> Result<(BinDistribution, BinDistribution, TheorySummary)> {
    let dist = normalized_bin_distribution(cfg)?;
    let cut = truncate_distribution(&dist, cfg.nd)?;
    let p_max = dist.max_value();
    let p_max_truncated = cut.max_value();
    // A single-bin period has no entropy to speak of; report 0.
    let h = |p: f64, n: usize| if n < 2 { Ok(0.0) } else { min_entropy_per_bit(p, n as u64) };
    let summary = TheorySummary {
        p_max,
        h_inf: h(p_max, dist.len())?,
        p_max_truncated,
        h_inf_truncated: h(p_max_truncated, cut.len())?,
        bitrate: predicted_bitrate(cfg)?,
    };
    Ok((dist, cut, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mean_occupancy: f64,
    pub bitrate: BitrateEstimate,
}

/// Evaluates the bitrate at each mean occupancy in `mus`, holding the bin
/// geometry of `cfg` fixed.
pub fn bitrate_sweep(cfg: &ExperimentConfig, mus: &[f64]) -> Result<Vec<SweepPoint>> {
    mus.iter()
        .map(|&mu| {
            let point = cfg.with_mean_occupancy(mu)?;
            Ok(SweepPoint {
                mean_occupancy: mu,
                bitrate: predicted_bitrate(&point)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::DistributionKind;

    #[test]
    fn min_entropy_examples() {
        assert!((min_entropy_per_bit(0.00390633, 256).unwrap() - 0.999996).abs() < 1e-6);
        assert!((min_entropy_per_bit(0.003132, 320).unwrap() - 0.99961).abs() < 1e-4);
        assert_eq!(min_entropy_per_bit(1.0 / 256.0, 256).unwrap(), 1.0);
        assert!(min_entropy_per_bit(0.0, 256).is_err());
        assert!(min_entropy_per_bit(1.5, 256).is_err());
        assert!(min_entropy_per_bit(0.5, 1).is_err());
    }

    #[test]
    fn retained_fraction_examples() {
        let dist = normalized_bin_distribution(&ExperimentConfig::reference()).unwrap();
        let r = retained_fraction(&dist, 32).unwrap();
        assert!((r.exact - 0.803).abs() < 0.002);
        assert_eq!(r.approximation, 0.8);
        assert!((r.exact - r.approximation).abs() < 0.01);

        let flat = BinDistribution::new(vec![0.25; 4], DistributionKind::TheoreticalProbability).unwrap();
        assert_eq!(retained_fraction(&flat, 0).unwrap().exact, 1.0);
        assert!(retained_fraction(&flat, 2).is_err());
    }

    #[test]
    fn reference_bitrate() {
        let est = predicted_bitrate(&ExperimentConfig::reference()).unwrap();
        assert_eq!(est.bits_per_symbol, 8.0);
        assert!((est.exact_bps / 1e6 - 22.13).abs() < 0.05, "{}", est.exact_bps);
        // 40-digit evaluation of the same product.
        assert!((est.exact_bps - 22_097_878.538_611_3).abs() < 1e-3);
        assert!((est.approx_bps - 22_047_694.821_693_6).abs() < 1e-3);
    }

    #[test]
    fn zero_rate_bitrate() {
        let cfg = ExperimentConfig::new(0.162e-9, 320, 32, 0.0).unwrap();
        let est = predicted_bitrate(&cfg).unwrap();
        assert_eq!(est.exact_bps, 0.0);
        assert_eq!(est.approx_bps, 0.0);
    }

    #[test]
    fn sweep_crosses_point_four() {
        let mus: Vec<f64> = (1..=30).map(|i| i as f64 * 0.05).collect();
        let curve = bitrate_sweep(&ExperimentConfig::reference(), &mus).unwrap();
        assert!(curve.iter().any(|p| p.bitrate.single_pulse_probability > 0.4));
        let best = curve
            .iter()
            .map(|p| p.bitrate.exact_bps)
            .fold(0.0, f64::max);
        assert!(best > 45e6);
    }
}
