//! Monte Carlo model of the detector chain.
//!
//! Detections form a homogeneous Poisson process sampled in continuous time
//! and quantized to TDC ticks. Pulses use paralyzable dead time: a detection
//! no more than `nd` ticks after the previous detection merges into the
//! current pulse and extends it, otherwise it opens a new pulse. Only rising
//! edges are observable. Periods are free-running windows of `n0` ticks.
//!
//! Generation is split into blocks of [`BLOCK_PERIODS`] periods. Block `b`
//! draws from ChaCha8 stream `b` of the run seed, so the output does not
//! depend on how blocks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extractor::PeriodRecord;
use crate::theory::{BinDistribution, ExperimentConfig};

/// Periods per generation block.
pub const BLOCK_PERIODS: u64 = 4096;

/// Identifies the random stream layout in output metadata.
pub const GENERATOR_ID: &str = "chacha8(rand_chacha 0.9), stream = block index, 4096 periods/block, exponential by inversion";

/// Blocks generated together before being merged and segmented.
const BLOCKS_PER_CHUNK: u64 = 64;

/// Detector event times in TDC ticks, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimestampStream {
    t0_femtoseconds: u64,
    ticks: Vec<u64>,
}

impl TimestampStream {
    pub fn new(t0_femtoseconds: u64, ticks: Vec<u64>) -> Result<Self> {
        if t0_femtoseconds == 0 {
            return Err(Error::domain("tick size must be positive"));
        }
        if let Some(i) = ticks.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::data(
                i as u64 + 1,
                format!("tick {} does not exceed previous tick {}", ticks[i + 1], ticks[i]),
            ));
        }
        Ok(TimestampStream {
            t0_femtoseconds,
            ticks,
        })
    }

    pub fn empty(t0_femtoseconds: u64) -> Self {
        TimestampStream {
            t0_femtoseconds,
            ticks: Vec::new(),
        }
    }

    pub fn t0_femtoseconds(&self) -> u64 {
        self.t0_femtoseconds
    }

    pub fn ticks(&self) -> &[u64] {
        &self.ticks
    }

    pub fn into_ticks(self) -> Vec<u64> {
        self.ticks
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Start time of tick `i` in seconds.
    pub fn time_seconds(&self, i: usize) -> Option<f64> {
        self.ticks
            .get(i)
            .map(|&t| t as f64 * self.t0_femtoseconds as f64 * 1e-15)
    }
}

/// Rising edges of merged pulses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub edges: Vec<u64>,
    /// Detections absorbed into each pulse, the opening one included.
    pub merged_multiplicities: Vec<u32>,
}

impl PulseTrain {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

/// Poisson arrival source for a fixed number of periods.
#[derive(Debug, Clone, Copy)]
pub struct ArrivalGenerator {
    rate_per_tick: f64,
    n0: u64,
    periods: u64,
    seed: u64,
}

impl ArrivalGenerator {
    pub fn new(cfg: &ExperimentConfig, periods: u64, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if periods == 0 {
            return Err(Error::domain("simulation needs at least one period"));
        }
        Ok(ArrivalGenerator {
            rate_per_tick: cfg.lambda_t0(),
            n0: cfg.n0 as u64,
            periods,
            seed,
        })
    }

    pub fn periods(&self) -> u64 {
        self.periods
    }

    pub fn total_ticks(&self) -> u64 {
        self.periods * self.n0
    }

    pub fn block_count(&self) -> u64 {
        self.periods.div_ceil(BLOCK_PERIODS)
    }

    /// Period range `[first, end)` covered by block `index`.
    pub fn block_periods(&self, index: u64) -> (u64, u64) {
        let first = index * BLOCK_PERIODS;
        (first, (first + BLOCK_PERIODS).min(self.periods))
    }

    /// Event ticks of block `index`, absolute and strictly increasing.
    pub fn block(&self, index: u64) -> Vec<u64> {
        let (first, end) = self.block_periods(index);
        if first >= end || self.rate_per_tick == 0.0 {
            return Vec::new();
        }
        let base = first * self.n0;
        let span = (end - first) * self.n0;
        let span_f = span as f64;

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);

        let mut out = Vec::with_capacity((span_f * self.rate_per_tick * 1.1) as usize + 8);
        let mut t = 0.0f64;
        loop {
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / self.rate_per_tick;
            if t >= span_f {
                break;
            }
            let tick = t as u64;
            if tick >= span {
                break;
            }
            let tick = base + tick;
            // Events inside one tick are indistinguishable to the TDC.
            if out.last() != Some(&tick) {
                out.push(tick);
            }
        }
        out
    }

    /// Blocks `range`, generated according to `mode`.
    pub fn blocks(&self, range: std::ops::Range<u64>, mode: Parallelism) -> Vec<Vec<u64>> {
        match mode {
            Parallelism::Sequential => range.map(|b| self.block(b)).collect(),
            Parallelism::Parallel => range.into_par_iter().map(|b| self.block(b)).collect(),
        }
    }
}

/// Detection ticks for `duration_periods` periods, generated in parallel.
pub fn generate_arrivals(cfg: &ExperimentConfig, duration_periods: u64, seed: u64) -> Result<TimestampStream> {
    generate_arrivals_with(cfg, duration_periods, seed, Parallelism::Parallel)
}

pub fn generate_arrivals_with(
    cfg: &ExperimentConfig,
    duration_periods: u64,
    seed: u64,
    mode: Parallelism,
) -> Result<TimestampStream> {
    let gen = ArrivalGenerator::new(cfg, duration_periods, seed)?;
    let ticks = gen.blocks(0..gen.block_count(), mode).concat();
    Ok(TimestampStream {
        t0_femtoseconds: cfg.t0_femtoseconds().max(1),
        ticks,
    })
}

/// Streaming paralyzable pulse merger.
#[derive(Debug, Clone, Copy)]
pub struct DeadTimeMerger {
    nd: u64,
    last_event: Option<u64>,
}

impl DeadTimeMerger {
    pub fn new(nd_ticks: u64) -> Self {
        DeadTimeMerger {
            nd: nd_ticks,
            last_event: None,
        }
    }

    /// Feeds the next event; returns `true` if it opens a new pulse.
    #[inline]
    pub fn push(&mut self, tick: u64) -> bool {
        let absorbed = self
            .last_event
            .is_some_and(|last| tick <= last.saturating_add(self.nd));
        self.last_event = Some(tick);
        !absorbed
    }
}

fn merge_slice(events: &[u64], nd_ticks: u64) -> PulseTrain {
    let mut merger = DeadTimeMerger::new(nd_ticks);
    let mut train = PulseTrain::default();
    for &t in events {
        if merger.push(t) {
            train.edges.push(t);
            train.merged_multiplicities.push(1);
        } else if let Some(m) = train.merged_multiplicities.last_mut() {
            *m += 1;
        }
    }
    train
}

/// Merges detections into pulses and returns their rising edges.
pub fn merge_dead_time(events: &TimestampStream, nd_ticks: u64) -> PulseTrain {
    merge_slice(events.ticks(), nd_ticks)
}

/// Merges consecutive event blocks in parallel.
///
/// Each block is merged on its own, then a sequential pass checks whether a
/// block's opening edge lies within the dead time of the last event before
/// it. Because every event restarts the dead time, only that first edge can
/// change, so the result equals [`merge_dead_time`] on the concatenation.
pub fn merge_dead_time_blocks(blocks: &[Vec<u64>], nd_ticks: u64) -> PulseTrain {
    let parts: Vec<PulseTrain> = blocks.par_iter().map(|b| merge_slice(b, nd_ticks)).collect();
    let mut out = PulseTrain::default();
    let mut last_event: Option<u64> = None;
    for (block, mut part) in blocks.iter().zip(parts) {
        let Some(&first) = block.first() else {
            continue;
        };
        if last_event.is_some_and(|last| first <= last.saturating_add(nd_ticks)) {
            let absorbed = part.merged_multiplicities[0];
            if let Some(m) = out.merged_multiplicities.last_mut() {
                *m += absorbed;
            }
            part.edges.remove(0);
            part.merged_multiplicities.remove(0);
        }
        out.edges.extend(part.edges);
        out.merged_multiplicities.extend(part.merged_multiplicities);
        last_event = block.last().copied();
    }
    out
}

/// Walks consecutive `n0`-tick windows and reports the edges in each.
#[derive(Debug, Clone)]
pub struct PeriodIter<I: Iterator<Item = u64>> {
    edges: std::iter::Peekable<I>,
    n0: u64,
    next_period: u64,
    end_period: u64,
}

impl<I: Iterator<Item = u64>> PeriodIter<I> {
    /// Windows `first_period..end_period`; `edges` must be sorted and must
    /// not precede `first_period`.
    pub fn new(edges: I, n0: u64, first_period: u64, end_period: u64) -> Self {
        PeriodIter {
            edges: edges.peekable(),
            n0: n0.max(1),
            next_period: first_period,
            end_period,
        }
    }
}

impl<I: Iterator<Item = u64>> Iterator for PeriodIter<I> {
    type Item = PeriodRecord;

    fn next(&mut self) -> Option<PeriodRecord> {
        if self.next_period >= self.end_period {
            return None;
        }
        let p = self.next_period;
        self.next_period += 1;
        let end = (p + 1) * self.n0;
        let mut count = 0u32;
        let mut only = 0u64;
        while let Some(&e) = self.edges.peek() {
            if e >= end {
                break;
            }
            self.edges.next();
            count += 1;
            only = e;
        }
        let bin_k = (count == 1).then(|| (only % self.n0) as u32 + 1);
        Some(PeriodRecord {
            period_index: p,
            edge_count: count,
            bin_k,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end_period - self.next_period) as usize;
        (n, Some(n))
    }
}

/// Splits the edge axis into `period_count` windows of `n0` ticks. Edges past
/// the last window are discarded.
pub fn segment_periods(pulses: &PulseTrain, n0: u32, period_count: u64) -> Vec<PeriodRecord> {
    PeriodIter::new(pulses.edges.iter().copied(), n0 as u64, 0, period_count).collect()
}

/// Runs generation, merging and segmentation without holding the whole event
/// stream, calling `visit` for each period in order.
pub fn simulate_periods<F>(cfg: &ExperimentConfig, periods: u64, seed: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&PeriodRecord),
{
    let gen = ArrivalGenerator::new(cfg, periods, seed)?;
    let n0 = cfg.n0 as u64;
    let mut merger = DeadTimeMerger::new(cfg.nd as u64);
    let blocks = gen.block_count();
    let mut start = 0;
    let mut edges = Vec::new();
    while start < blocks {
        let end = (start + BLOCKS_PER_CHUNK).min(blocks);
        for (offset, events) in gen.blocks(start..end, Parallelism::Parallel).into_iter().enumerate() {
            edges.clear();
            edges.extend(events.into_iter().filter(|&t| merger.push(t)));
            let (first, last) = gen.block_periods(start + offset as u64);
            for rec in PeriodIter::new(edges.iter().copied(), n0, first, last) {
                visit(&rec);
            }
        }
        start = end;
    }
    Ok(())
}

/// Per-period edge counts and the bin histogram of single-edge periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTally {
    pub periods: u64,
    /// `edge_counts[m]` periods held `m` edges; the last slot collects the
    /// rest.
    pub edge_counts: Vec<u64>,
    /// Counts for bins `1..=n0` (index `k - 1`).
    pub bin_counts: Vec<u64>,
}

impl PeriodTally {
    const COUNT_SLOTS: usize = 8;

    pub fn new(n0: u32) -> Self {
        PeriodTally {
            periods: 0,
            edge_counts: vec![0; Self::COUNT_SLOTS],
            bin_counts: vec![0; n0 as usize],
        }
    }

    pub fn add(&mut self, rec: &PeriodRecord) {
        self.periods += 1;
        let slot = (rec.edge_count as usize).min(Self::COUNT_SLOTS - 1);
        self.edge_counts[slot] += 1;
        if let Some(k) = rec.bin_k {
            self.bin_counts[k as usize - 1] += 1;
        }
    }

    pub fn merge(&mut self, other: &PeriodTally) -> Result<()> {
        if self.bin_counts.len() != other.bin_counts.len() {
            return Err(Error::domain("tallies cover different period lengths"));
        }
        self.periods += other.periods;
        for (a, b) in self.edge_counts.iter_mut().zip(&other.edge_counts) {
            *a += b;
        }
        for (a, b) in self.bin_counts.iter_mut().zip(&other.bin_counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn accepted(&self) -> u64 {
        self.edge_counts[1]
    }

    /// Fraction of periods with exactly `m` edges.
    pub fn count_fraction(&self, m: usize) -> f64 {
        if self.periods == 0 || m >= Self::COUNT_SLOTS - 1 {
            return 0.0;
        }
        self.edge_counts[m] as f64 / self.periods as f64
    }

    pub fn acceptance_ratio(&self) -> f64 {
        self.count_fraction(1)
    }

    pub fn bin_histogram(&self) -> Result<BinDistribution> {
        BinDistribution::from_counts(&self.bin_counts)
    }
}

/// Simulates `periods` periods and tallies them.
pub fn simulate_tally(cfg: &ExperimentConfig, periods: u64, seed: u64) -> Result<PeriodTally> {
    let mut tally = PeriodTally::new(cfg.n0);
    simulate_periods(cfg, periods, seed, |r| tally.add(r))?;
    Ok(tally)
}
