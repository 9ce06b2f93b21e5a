//! Closed-form counting statistics, bin distributions and figures of merit.
//!
//! Everything here is a pure function of its arguments.

mod bins;
mod config;
mod counting;
mod distribution;
mod merit;

pub use bins::{
    merge_count_h, merge_count_h_prime, normalized_bin_distribution, single_pulse_bin_prob,
    truncate_distribution, SinglePulseModel,
};
pub use config::ExperimentConfig;
pub use counting::{
    conditional_uniform_pmf, deadtime_count_pmf, deadtime_count_series, first_arrival_bin_pmf,
    first_arrival_density, max_count, poisson_pmf, prob_single_pulse, SeriesValue,
};
pub use distribution::{BinDistribution, DistributionKind};
pub use merit::{
    bitrate_sweep, min_entropy_per_bit, predicted_bitrate, retained_fraction, summarize,
    BitrateEstimate, RetainedFraction, SweepPoint, TheorySummary,
};
