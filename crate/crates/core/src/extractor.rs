//! From period records to output symbols.
//!
//! Periods holding exactly one edge contribute their bin index. Indices in
//! the first and last `nd` bins are dropped and the rest are shifted to start
//! at zero. The stream is emitted raw: there is deliberately no whitening or
//! conditioning stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period_index: u64,
    pub edge_count: u32,
    /// 1-based bin of the edge, present iff `edge_count == 1`.
    pub bin_k: Option<u32>,
}

/// Bin indices of the single-edge periods, in period order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub bins: Vec<u32>,
    pub total_periods: u64,
}

impl Selection {
    pub fn push(&mut self, rec: &PeriodRecord) {
        self.total_periods += 1;
        if rec.edge_count == 1 {
            if let Some(k) = rec.bin_k {
                self.bins.push(k);
            }
        }
    }

    pub fn accepted(&self) -> u64 {
        self.bins.len() as u64
    }

    /// Accepted over total periods; 0 when there were no periods.
    pub fn acceptance_ratio(&self) -> f64 {
        if self.total_periods == 0 {
            0.0
        } else {
            self.accepted() as f64 / self.total_periods as f64
        }
    }
}

pub fn select_single_pulse<'a, I>(records: I) -> Selection
where
    I: IntoIterator<Item = &'a PeriodRecord>,
{
    let mut sel = Selection::default();
    for r in records {
        sel.push(r);
    }
    sel
}

/// Truncated, shifted symbols of a fixed bit width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolStream {
    pub symbols: Vec<u32>,
    /// Bits per symbol, `⌊log₂(n0 - 2nd)⌋`.
    pub bit_width: u32,
    /// Bin indices offered to the packer.
    pub input_count: u64,
    /// Indices that fell inside `[nd + 1, n0 - nd]`.
    pub in_range_count: u64,
    /// In-range indices dropped because they do not fit in `bit_width` bits.
    pub width_discarded: u64,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// In-range over offered indices.
    pub fn retained_fraction(&self) -> f64 {
        if self.input_count == 0 {
            0.0
        } else {
            self.in_range_count as f64 / self.input_count as f64
        }
    }

    /// Fraction of in-range indices lost to the bit-width cut.
    pub fn width_discard_fraction(&self) -> f64 {
        if self.in_range_count == 0 {
            0.0
        } else {
            self.width_discarded as f64 / self.in_range_count as f64
        }
    }

    pub fn symbol_space(&self) -> u64 {
        1u64 << self.bit_width
    }

    /// One byte per symbol; only for 8-bit streams.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.bit_width != 8 {
            return Err(Error::domain(format!(
                "byte output needs 8-bit symbols, stream has {} bits",
                self.bit_width
            )));
        }
        Ok(self.symbols.iter().map(|&s| s as u8).collect())
    }
}

/// Streaming form of [`truncate_and_pack`].
#[derive(Debug, Clone)]
pub struct SymbolPacker {
    lo: u32,
    hi: u32,
    stream: SymbolStream,
}

impl SymbolPacker {
    pub fn new(n0: u32, nd: u32) -> Result<Self> {
        let retained = n0.saturating_sub(2 * nd);
        if retained < 2 {
            return Err(Error::domain(format!(
                "n0 = {n0} and nd = {nd} leave {retained} symbols; at least 2 are needed"
            )));
        }
        Ok(SymbolPacker {
            lo: nd + 1,
            hi: n0 - nd,
            stream: SymbolStream {
                symbols: Vec::new(),
                bit_width: retained.ilog2(),
                input_count: 0,
                in_range_count: 0,
                width_discarded: 0,
            },
        })
    }

    #[inline]
    pub fn push(&mut self, k: u32) {
        self.stream.input_count += 1;
        if k < self.lo || k > self.hi {
            return;
        }
        self.stream.in_range_count += 1;
        let symbol = k - self.lo;
        if (symbol as u64) < (1u64 << self.stream.bit_width) {
            self.stream.symbols.push(symbol);
        } else {
            self.stream.width_discarded += 1;
        }
    }

    pub fn finish(self) -> SymbolStream {
        self.stream
    }
}

/// Keeps bins `nd + 1 ..= n0 - nd` and maps `k` to `k - (nd + 1)`.
///
/// When `n0 - 2nd` is not a power of two the symbols are limited to
/// `⌊log₂(n0 - 2nd)⌋` bits and larger values are dropped, which keeps a
/// uniform input uniform.
pub fn truncate_and_pack(ks: &[u32], n0: u32, nd: u32) -> Result<SymbolStream> {
    let mut packer = SymbolPacker::new(n0, nd)?;
    for &k in ks {
        packer.push(k);
    }
    Ok(packer.finish())
}

/// Expands symbols to bits, most significant bit first. Each element of the
/// result is 0 or 1.
pub fn symbols_to_bits(stream: &SymbolStream) -> Result<Vec<u8>> {
    let w = stream.bit_width;
    if w == 0 || w > 32 {
        return Err(Error::Internal(format!("unsupported bit width {w}")));
    }
    let mut bits = Vec::with_capacity(stream.symbols.len() * w as usize);
    for (i, &s) in stream.symbols.iter().enumerate() {
        if (s as u64) >> w != 0 {
            return Err(Error::Internal(format!("symbol {s} at index {i} does not fit in {w} bits")));
        }
        bits.extend((0..w).rev().map(|b| ((s >> b) & 1) as u8));
    }
    Ok(bits)
}
