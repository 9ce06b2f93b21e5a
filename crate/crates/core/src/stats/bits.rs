//! Frequency, block-frequency and runs tests on bit sequences, following the
//! definitions of the NIST statistical test suite. Bits are `u8` values 0 or 1.

use crate::error::{Error, Result};
use crate::special::{erfc, gamma_q};

use super::TestStatistic;

const MIN_BITS: usize = 100;

fn check_bits(bits: &[u8], min: usize, test: &str) -> Result<()> {
    if bits.len() < min {
        return Err(Error::domain(format!("{test} needs at least {min} bits, got {}", bits.len())));
    }
    if let Some(i) = bits.iter().position(|&b| b > 1) {
        return Err(Error::data(i as u64, format!("value {} is not a bit", bits[i])));
    }
    Ok(())
}

fn ones(bits: &[u8]) -> u64 {
    bits.iter().map(|&b| b as u64).sum()
}

/// Statistic is `S = Σ(2bᵢ - 1)`; `p = erfc(|S| / √(2n))`.
pub fn monobit_frequency(bits: &[u8]) -> Result<TestStatistic> {
    check_bits(bits, MIN_BITS, "monobit test")?;
    let n = bits.len() as f64;
    let s = 2.0 * ones(bits) as f64 - n;
    Ok(TestStatistic {
        statistic: s,
        p_value: erfc(s.abs() / (2.0 * n).sqrt()),
    })
}

/// Proportion of ones in each of the `⌊n / M⌋` complete blocks;
/// `χ² = 4M Σ(πᵢ - ½)²` with `N` degrees of freedom.
pub fn block_frequency(bits: &[u8], block_len: usize) -> Result<TestStatistic> {
    if block_len == 0 {
        return Err(Error::domain("block length must be positive"));
    }
    check_bits(bits, block_len.saturating_mul(20).max(MIN_BITS), "block frequency test")?;
    let m = block_len as f64;
    let blocks = bits.len() / block_len;
    let chi2: f64 = bits
        .chunks_exact(block_len)
        .map(|b| {
            let pi = ones(b) as f64 / m - 0.5;
            pi * pi
        })
        .sum::<f64>()
        * 4.0
        * m;
    Ok(TestStatistic {
        statistic: chi2,
        p_value: gamma_q(blocks as f64 / 2.0, chi2 / 2.0)?,
    })
}

/// Total number of runs `V`. If the ones proportion fails the frequency
/// prerequisite `|π - ½| < 2/√n`, the test is not applicable and `p = 0`.
pub fn runs_test(bits: &[u8]) -> Result<TestStatistic> {
    check_bits(bits, MIN_BITS, "runs test")?;
    let n = bits.len() as f64;
    let pi = ones(bits) as f64 / n;
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count() as u64;
    let v = runs as f64;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(TestStatistic {
            statistic: v,
            p_value: 0.0,
        });
    }
    let q = pi * (1.0 - pi);
    let p_value = erfc((v - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q));
    Ok(TestStatistic { statistic: v, p_value })
}
