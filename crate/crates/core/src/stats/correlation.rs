use crate::error::{Error, Result};
use crate::special::erfc;

use super::TestStatistic;

/// Lag-1 autocorrelation: Pearson correlation between `x[..n-1]` and `x[1..]`.
pub fn serial_correlation<T>(symbols: &[T]) -> Result<f64>
where
    T: Copy + Into<f64>,
{
    if symbols.len() < 3 {
        return Err(Error::domain("serial correlation needs at least 3 symbols"));
    }
    let n = (symbols.len() - 1) as f64;
    let head = &symbols[..symbols.len() - 1];
    let tail = &symbols[1..];
    let mean = |s: &[T]| s.iter().map(|&v| v.into()).sum::<f64>() / n;
    let (mx, my) = (mean(head), mean(tail));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in head.iter().zip(tail) {
        let (dx, dy) = (a.into() - mx, b.into() - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::domain("zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided test of zero lag-1 correlation using `ρ√n ~ N(0, 1)`.
pub fn serial_correlation_test<T>(symbols: &[T]) -> Result<TestStatistic>
where
    T: Copy + Into<f64>,
{
    let rho = serial_correlation(symbols)?;
    let z = rho * ((symbols.len() - 1) as f64).sqrt();
    Ok(TestStatistic {
        statistic: rho,
        p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
    })
}
