//! Toolkit for a photon-arrival-time quantum random number generator.
//!
//! The generator observes a weak Poissonian photon stream through a detector
//! with paralyzable dead time, splits the time axis into periods of `n0` TDC
//! bins, keeps only the periods that contain exactly one pulse edge and emits
//! the bin index of that edge. Discarding `nd` bins at either end of the
//! period removes the residual dead-time bias.
//!
//! * [`theory`]: closed-form counting and bin distributions, min-entropy,
//!   retained fraction and bitrate.
//! * [`simulator`]: continuous-time Monte Carlo of detections, pulse merging
//!   and period segmentation.
//! * [`extractor`]: single-pulse selection, truncation and symbol packing.
//! * [`stats`]: histograms, entropy estimates and a core randomness battery.
//! * [`io`]: timestamp files, distribution CSV and suite export.

pub mod error;
pub mod extractor;
pub mod io;
pub mod simulator;
pub mod special;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use extractor::{PeriodRecord, Selection, SymbolStream};
pub use simulator::{PulseTrain, TimestampStream};
pub use stats::report::TestReport;
pub use theory::{BinDistribution, DistributionKind, ExperimentConfig};

/// Version string embedded in reports and sidecar metadata.
pub const TOOLKIT_VERSION: &str = concat!("photon-qrng ", env!("CARGO_PKG_VERSION"));
