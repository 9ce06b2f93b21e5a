//! Photon counting within one period: plain Poisson statistics, the
//! first-arrival distribution, and the dead-time-distorted counting
//! distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// Probability of `count` events for a Poisson variable with mean `mean`.
pub fn poisson_pmf(mean: f64, count: u64) -> Result<f64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!("Poisson mean must be finite and >= 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(if count == 0 { 1.0 } else { 0.0 });
    }
    let ln = count as f64 * mean.ln() - mean - ln_factorial(count);
    Ok(ln.exp().clamp(0.0, 1.0))
}

/// Density of the first arrival time `t` within a window `[0, window]`,
/// conditioned on at least one arrival.
pub fn first_arrival_density(rate: f64, t: f64, window: f64) -> Result<f64> {
    if !(rate > 0.0) || !(window > 0.0) {
        return Err(Error::domain("rate and window must be positive"));
    }
    if !(0.0..=window).contains(&t) {
        return Ok(0.0);
    }
    Ok(rate * (-rate * t).exp() / -(-rate * window).exp_m1())
}

/// Probability that the first arrival falls in bin `k` (1-based) of an
/// `n0`-bin window, given at least one arrival.
///
/// Exact form `(e^{-a(k-1)} - e^{-ak}) / (1 - e^{-a·n0})` with `a = λ·t0`.
pub fn first_arrival_bin_pmf(lambda_t0: f64, n0: u32, k: u32) -> Result<f64> {
    if !(lambda_t0 > 0.0) || !lambda_t0.is_finite() {
        return Err(Error::domain(format!("λ·t0 must be positive, got {lambda_t0}")));
    }
    if k == 0 || k > n0 {
        return Err(Error::domain(format!("bin {k} outside 1..={n0}")));
    }
    let a = lambda_t0;
    Ok((-a * (k - 1) as f64).exp() * -(-a).exp_m1() / -(-a * n0 as f64).exp_m1())
}

/// Bin distribution of the single detection in a period that holds exactly
/// one detection, without dead time: every bin has probability `1/n0`.
pub fn conditional_uniform_pmf(n0: u32) -> Result<f64> {
    if n0 == 0 {
        return Err(Error::domain("n0 must be at least 1"));
    }
    Ok(1.0 / n0 as f64)
}

/// Outcome of the dead-time counting series before and after clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Compensated sum before clamping to `[0, 1]`.
    pub raw: f64,
    pub clamped: bool,
    /// Upper summation limit `K = ⌈T₀ / t_d⌉` (0 when there is no dead time).
    pub max_count: u64,
}

/// `K = ⌈1/r⌉`. Integer ratios such as `r = 0.1` resolve to the integer
/// itself; the extra term at `K + 1` would vanish anyway because its base
/// `1 - (i + m - 1) r` is zero.
pub fn max_count(ratio: f64) -> u64 {
    (1.0 / ratio - 1e-9).ceil().max(1.0) as u64
}

/// Probability of registering `m` pulses in one period under paralyzable dead
/// time, with mean occupancy `mu` and `ratio = t_d / T₀`.
///
/// Evaluates `(μᵣ^m / m!) Σ_{i=0}^{K-m} ((-μᵣ)^i / i!) (1 - (i + m - 1)·r)^{m+i}`
/// with `μᵣ = μ·e^{-μ·r}`. Each term is formed in log space and accumulated
/// with Neumaier summation.
pub fn deadtime_count_series(mu: f64, ratio: f64, m: u64) -> Result<SeriesValue> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::domain(format!("mean occupancy must be finite and >= 0, got {mu}")));
    }
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::domain(format!("dead-time ratio must lie in [0, 1), got {ratio}")));
    }
    if ratio == 0.0 {
        let p = poisson_pmf(mu, m)?;
        return Ok(SeriesValue {
            value: p,
            raw: p,
            clamped: false,
            max_count: 0,
        });
    }
    let k_max = max_count(ratio);
    let exact = |v: f64| SeriesValue {
        value: v,
        raw: v,
        clamped: false,
        max_count: k_max,
    };
    if m > k_max {
        return Ok(exact(0.0));
    }
    if mu == 0.0 {
        return Ok(exact(if m == 0 { 1.0 } else { 0.0 }));
    }

    let mu_r = mu * (-mu * ratio).exp();
    let ln_mu_r = mu_r.ln();
    let ln_m_fact = ln_factorial(m);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..=(k_max - m) {
        let base = 1.0 - (i + m) as f64 * ratio + ratio;
        if base <= 0.0 {
            continue;
        }
        let ln_mag = (m + i) as f64 * (ln_mu_r + base.ln()) - ln_m_fact - ln_factorial(i);
        let magnitude = ln_mag.exp();
        // Past the peak of μᵣ^i / i! the remaining tail is negligible.
        if i as f64 > mu_r + 1.0 && magnitude < 1e-20 * sum.abs() {
            break;
        }
        let term = if i % 2 == 0 { magnitude } else { -magnitude };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    let raw = sum + comp;
    let value = raw.clamp(0.0, 1.0);
    Ok(SeriesValue {
        value,
        raw,
        clamped: value != raw,
        max_count: k_max,
    })
}

/// Dead-time counting probability, clamped to `[0, 1]`.
pub fn deadtime_count_pmf(mu: f64, ratio: f64, m: u64) -> Result<f64> {
    deadtime_count_series(mu, ratio, m).map(|s| s.value)
}

/// Probability that a period holds exactly one pulse edge.
pub fn prob_single_pulse(mu: f64, ratio: f64) -> Result<f64> {
    deadtime_count_pmf(mu, ratio, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MU: f64 = 0.2176;

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_pmf(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(0.0, 3).unwrap(), 0.0);
        // e^{-0.2176} and 0.2176·e^{-0.2176}, 50-digit reference.
        assert_relative_eq!(poisson_pmf(MU, 0).unwrap(), 0.804_447_156_181_839_808_5, max_relative = 1e-14);
        assert_relative_eq!(poisson_pmf(MU, 1).unwrap(), 0.175_047_701_185_168_342_33, max_relative = 1e-14);
        assert!(poisson_pmf(-0.1, 0).is_err());
        let total: f64 = (0..60).map(|c| poisson_pmf(3.5, c).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn first_arrival_examples() {
        assert_relative_eq!(
            first_arrival_bin_pmf(0.00068, 320, 1).unwrap(),
            0.003_476_138_925_540_382_704_3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            first_arrival_bin_pmf(0.00068, 320, 320).unwrap(),
            0.002_798_272_251_461_025_489_7,
            max_relative = 1e-12
        );
        let total: f64 = (1..=320).map(|k| first_arrival_bin_pmf(0.00068, 320, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(first_arrival_bin_pmf(0.00068, 320, 0).is_err());
        assert!(first_arrival_bin_pmf(0.00068, 320, 321).is_err());
    }

    #[test]
    fn first_arrival_density_integrates_to_bin_pmf() {
        // Midpoint quadrature of the density over bin 7 of a 320-bin window.
        let (rate, t0) = (0.00068 / 0.162e-9, 0.162e-9);
        let window = 320.0 * t0;
        let steps = 2000;
        let h = t0 / steps as f64;
        let integral: f64 = (0..steps)
            .map(|s| first_arrival_density(rate, 6.0 * t0 + (s as f64 + 0.5) * h, window).unwrap() * h)
            .sum();
        assert_relative_eq!(integral, first_arrival_bin_pmf(0.00068, 320, 7).unwrap(), max_relative = 1e-9);
        assert_eq!(first_arrival_density(rate, 2.0 * window, window).unwrap(), 0.0);
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(conditional_uniform_pmf(320).unwrap(), 0.003125);
        assert_eq!(conditional_uniform_pmf(1).unwrap(), 1.0);
        assert_eq!(conditional_uniform_pmf(256).unwrap(), 0.00390625);
        assert!(conditional_uniform_pmf(0).is_err());
    }

    #[test]
    fn single_pulse_reference_value() {
        let p = prob_single_pulse(MU, 0.1).unwrap();
        assert!((p - 0.1786).abs() < 5e-4);
        // 40-digit evaluation of the same series.
        assert_relative_eq!(p, 0.178_586_328_055_717_84, max_relative = 1e-13);
        assert_eq!(prob_single_pulse(0.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn integer_ratio_uses_k_equal_to_ratio() {
        assert_eq!(max_count(0.1), 10);
        assert_eq!(max_count(0.25), 4);
        assert_eq!(max_count(1.0 / 3.0), 3);
        assert_eq!(max_count(0.3), 4);
        assert_eq!(deadtime_count_series(MU, 0.1, 1).unwrap().max_count, 10);
    }

    #[test]
    fn dead_time_series_edge_cases() {
        assert_eq!(deadtime_count_pmf(0.0, 0.1, 0).unwrap(), 1.0);
        assert_eq!(deadtime_count_pmf(MU, 0.1, 11).unwrap(), 0.0);
        assert!(deadtime_count_pmf(MU, 1.0, 1).is_err());
        assert!(deadtime_count_pmf(MU, -0.1, 1).is_err());
        assert!(deadtime_count_pmf(-1.0, 0.1, 1).is_err());
        assert_relative_eq!(
            deadtime_count_pmf(MU, 0.0, 1).unwrap(),
            poisson_pmf(MU, 1).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn dead_time_distribution_sums_to_one() {
        for &(mu, r) in &[(0.2176, 0.1), (1.0, 0.1), (2.5, 0.2), (0.05, 0.3)] {
            let k = max_count(r);
            let total: f64 = (0..=k).map(|m| deadtime_count_pmf(mu, r, m).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "mu={mu} r={r} total={total}");
        }
    }

    #[test]
    fn tiny_ratio_approaches_poisson() {
        for m in 0..=5 {
            let a = deadtime_count_pmf(MU, 1e-7, m).unwrap();
            let b = poisson_pmf(MU, m).unwrap();
            assert!((a - b).abs() < 1e-6, "m={m}: {a} vs {b}");
        }
    }
}
