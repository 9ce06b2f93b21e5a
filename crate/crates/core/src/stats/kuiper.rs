use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kuiper {
    /// `V = D⁺ + D⁻`.
    pub v: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Tail probability of the asymptotic Kuiper distribution,
/// `Q(λ) = 2 Σ_{j≥1} (4j²λ² - 1) e^{-2j²λ²}`.
fn kuiper_tail(lambda: f64) -> f64 {
    // The series converges too slowly below 0.4, where Q is 1 to double
    // precision anyway.
    if lambda < 0.4 {
        return 1.0;
    }
    let l2 = lambda * lambda;
    let mut sum = 0.0;
    for j in 1..=100 {
        let j2 = (j * j) as f64;
        let term = (4.0 * j2 * l2 - 1.0) * (-2.0 * j2 * l2).exp();
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kuiper test of a set of p-values against the uniform distribution on
/// `[0, 1]`.
pub fn kuiper_aggregate(p_values: &[f64]) -> Result<Kuiper> {
    let n = p_values.len();
    if n < MIN_SAMPLES {
        return Err(Error::domain(format!("Kuiper aggregation needs at least {MIN_SAMPLES} p-values, got {n}")));
    }
    if let Some(i) = p_values.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::data(i as u64, format!("{} is not a probability", p_values[i])));
    }
    let mut sorted = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut d_plus, mut d_minus) = (0.0f64, 0.0f64);
    for (i, &x) in sorted.iter().enumerate() {
        d_plus = d_plus.max((i + 1) as f64 / nf - x);
        d_minus = d_minus.max(x - i as f64 / nf);
    }
    let v = d_plus + d_minus;
    let root = nf.sqrt();
    let lambda = (root + 0.155 + 0.24 / root) * v;
    Ok(Kuiper {
        v,
        p_value: kuiper_tail(lambda),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_five_values() {
        assert!(kuiper_aggregate(&[0.1, 0.2, 0.3, 0.4]).is_err());
        assert!(kuiper_aggregate(&[0.1, 0.2, 0.3, 0.4, 1.5]).is_err());
    }

    #[test]
    fn clustered_values_are_rejected() {
        let k = kuiper_aggregate(&[0.999; 100]).unwrap();
        assert!((k.v - 1.0).abs() < 1e-12);
        assert!(k.p_value < 1e-6);
    }

    #[test]
    fn evenly_spread_values_pass() {
        let spread: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
        let k = kuiper_aggregate(&spread).unwrap();
        assert!((k.v - 0.02).abs() < 1e-12);
        assert_eq!(k.p_value, 1.0);
    }

    #[test]
    fn tail_matches_reference_points() {
        // Q(1) from direct summation of the series to convergence.
        let q1: f64 = 2.0 * (1..50).map(|j| {
            let j2 = (j * j) as f64;
            (4.0 * j2 - 1.0) * (-2.0 * j2).exp()
        }).sum::<f64>();
        assert!((kuiper_tail(1.0) - q1).abs() < 1e-15);
        assert!((kuiper_tail(1.0) - 0.822_08).abs() < 1e-4);
        assert!(kuiper_tail(3.0) < 1.1e-6);
        assert!(kuiper_tail(3.5) < 1e-8);
    }
}
