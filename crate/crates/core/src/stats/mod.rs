//! Empirical qualification of symbol and bit streams.

mod bits;
mod correlation;
mod kuiper;
pub mod report;
mod uniformity;

use serde::{Deserialize, Serialize};

pub use bits::{block_frequency, monobit_frequency, runs_test};
pub use correlation::{serial_correlation, serial_correlation_test};
pub use kuiper::{kuiper_aggregate, Kuiper};
pub use report::{run_battery, BatteryConfig, ReportMetadata, SkippedTest, TestEntry, TestReport};
pub use uniformity::{
    chi_square_goodness_of_fit, chi_square_uniformity, empirical_min_entropy, histogram, ChiSquare,
};

/// Significance level used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// A test statistic with its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub statistic: f64,
    pub p_value: f64,
}
