use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and digital parameters of one generator setup.
///
/// Times are in seconds; `n0` and `nd` are counts of TDC bins, so the
/// observation period is `T₀ = n0 · t0` and the dead time is `t_d = nd · t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub t0_seconds: f64,
    pub n0: u32,
    pub nd: u32,
    pub lambda_per_second: f64,
    #[serde(default)]
    pub dark_rate_per_second: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(t0_seconds: f64, n0: u32, nd: u32, lambda_per_second: f64) -> Result<Self> {
        let cfg = ExperimentConfig {
            t0_seconds,
            n0,
            nd,
            lambda_per_second,
            dark_rate_per_second: 0.0,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a config from the dimensionless per-bin rate `λ·t0`.
    pub fn from_lambda_t0(lambda_t0: f64, t0_seconds: f64, n0: u32, nd: u32) -> Result<Self> {
        if !(t0_seconds > 0.0) || !t0_seconds.is_finite() {
            return Err(Error::domain(format!("t0 must be positive, got {t0_seconds}")));
        }
        Self::new(t0_seconds, n0, nd, lambda_t0 / t0_seconds)
    }

    /// The reference setup: 0.162 ns bins, 320 bins per period, 32 bins of
    /// dead time and `λ·t0 = 0.00068`.
    pub fn reference() -> Self {
        Self::from_lambda_t0(0.00068, 0.162e-9, 320, 32).expect("reference config is valid")
    }

    pub fn with_dark_rate(mut self, dark_rate_per_second: f64) -> Result<Self> {
        self.dark_rate_per_second = dark_rate_per_second;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Returns a copy with the signal rate chosen so that the mean number of
    /// detections per period (dark counts included) equals `mu`.
    pub fn with_mean_occupancy(mut self, mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("mean occupancy must be >= 0, got {mu}")));
        }
        self.lambda_per_second = (mu / self.period_seconds() - self.dark_rate_per_second).max(0.0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0_seconds > 0.0) || !self.t0_seconds.is_finite() {
            return Err(Error::domain(format!("t0 must be positive, got {}", self.t0_seconds)));
        }
        if self.n0 == 0 {
            return Err(Error::domain("n0 must be at least 1"));
        }
        if self.n0 <= 2 * self.nd {
            return Err(Error::domain(format!(
                "n0 = {} must exceed 2·nd = {} so truncation leaves bins",
                self.n0,
                2 * self.nd
            )));
        }
        for (name, rate) in [
            ("lambda", self.lambda_per_second),
            ("dark rate", self.dark_rate_per_second),
        ] {
            if !(rate >= 0.0) || !rate.is_finite() {
                return Err(Error::domain(format!("{name} must be finite and >= 0, got {rate}")));
            }
        }
        let mu = self.mean_occupancy();
        if !mu.is_finite() {
            return Err(Error::domain("mean occupancy per period is not finite"));
        }
        Ok(())
    }

    pub fn period_seconds(&self) -> f64 {
        self.n0 as f64 * self.t0_seconds
    }

    pub fn dead_time_seconds(&self) -> f64 {
        self.nd as f64 * self.t0_seconds
    }

    /// Signal plus dark-count rate. Dark counts are indistinguishable from
    /// signal detections, so every model uses the total.
    pub fn total_rate(&self) -> f64 {
        self.lambda_per_second + self.dark_rate_per_second
    }

    /// Expected detections per TDC bin, `λ·t0`.
    pub fn lambda_t0(&self) -> f64 {
        self.total_rate() * self.t0_seconds
    }

    /// Expected detections per period, `μ = λ·T₀`.
    pub fn mean_occupancy(&self) -> f64 {
        self.total_rate() * self.period_seconds()
    }

    /// `t_d / T₀ = nd / n0`.
    pub fn dead_time_ratio(&self) -> f64 {
        self.nd as f64 / self.n0 as f64
    }

    /// Number of distinct symbols after dropping `nd` bins at both ends.
    pub fn symbol_count(&self) -> u32 {
        self.n0 - 2 * self.nd
    }

    /// Bin width rounded to whole femtoseconds, as stored in timestamp files.
    pub fn t0_femtoseconds(&self) -> u64 {
        (self.t0_seconds * 1e15).round() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_derived_quantities() {
        let cfg = ExperimentConfig::reference();
        assert!((cfg.mean_occupancy() - 0.2176).abs() < 1e-12);
        assert!((cfg.lambda_t0() - 0.00068).abs() < 1e-15);
        assert!((cfg.period_seconds() - 51.84e-9).abs() < 1e-20);
        assert_eq!(cfg.symbol_count(), 256);
        assert_eq!(cfg.t0_femtoseconds(), 162_000);
        assert!((cfg.dead_time_ratio() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_geometry_and_rates() {
        assert!(ExperimentConfig::new(1e-9, 64, 32, 1e6).is_err());
        assert!(ExperimentConfig::new(1e-9, 0, 0, 1e6).is_err());
        assert!(ExperimentConfig::new(0.0, 64, 8, 1e6).is_err());
        assert!(ExperimentConfig::new(1e-9, 64, 8, -1.0).is_err());
        assert!(ExperimentConfig::new(1e-9, 64, 8, f64::NAN).is_err());
        let cfg = ExperimentConfig::new(1e-9, 64, 8, 1e6).unwrap();
        assert!(cfg.with_dark_rate(-5.0).is_err());
    }

    #[test]
    fn mean_occupancy_round_trips() {
        let cfg = ExperimentConfig::reference()
            .with_dark_rate(200.0)
            .unwrap()
            .with_mean_occupancy(0.75)
            .unwrap();
        assert!((cfg.mean_occupancy() - 0.75).abs() < 1e-12);
    }
}
