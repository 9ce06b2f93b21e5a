//! File formats.
//!
//! Timestamp file, all integers little-endian:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 8    | magic `QRNGTS01`              |
//! | 8      | 2    | format version (`1`)          |
//! | 10     | 8    | tick size in femtoseconds     |
//! | 18     | 8    | record count                  |
//! | 26     | 8·n  | tick values, strictly rising  |
//!
//! A headerless variant holds only the little-endian `u64` ticks; the tick
//! size must then be supplied by the caller.
//!
//! Every writer goes through a temporary file in the destination directory
//! that is renamed into place once complete.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::TimestampStream;
use crate::theory::{BinDistribution, ExperimentConfig};

pub const TIMESTAMP_MAGIC: &[u8; 8] = b"QRNGTS01";
pub const TIMESTAMP_VERSION: u16 = 1;
pub const TIMESTAMP_HEADER_LEN: u64 = 26;

/// Bits per line in ASCII bit output.
pub const ASCII_BITS_PER_LINE: usize = 1_000_000;

/// Writes `path` atomically: the content goes to a temporary sibling that is
/// renamed over `path` only after `fill` succeeds.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn encode_timestamps(stream: &TimestampStream, out: &mut dyn Write) -> Result<()> {
    out.write_all(TIMESTAMP_MAGIC)?;
    out.write_all(&TIMESTAMP_VERSION.to_le_bytes())?;
    out.write_all(&stream.t0_femtoseconds().to_le_bytes())?;
    out.write_all(&(stream.len() as u64).to_le_bytes())?;
    for t in stream.ticks() {
        out.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_timestamp_file(path: &Path, stream: &TimestampStream) -> Result<()> {
    write_atomic(path, |w| encode_timestamps(stream, w))
}

fn parse_ticks(body: &[u8], base_offset: u64) -> Result<Vec<u64>> {
    if body.len() % 8 != 0 {
        return Err(Error::data(
            base_offset + (body.len() - body.len() % 8) as u64,
            "trailing partial record",
        ));
    }
    let mut ticks = Vec::with_capacity(body.len() / 8);
    for (i, chunk) in body.chunks_exact(8).enumerate() {
        let t = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if let Some(&prev) = ticks.last() {
            if t <= prev {
                return Err(Error::data(
                    base_offset + 8 * i as u64,
                    format!("record {i}: tick {t} does not exceed previous tick {prev}"),
                ));
            }
        }
        ticks.push(t);
    }
    Ok(ticks)
}

/// Parses a complete timestamp file image.
pub fn decode_timestamps(bytes: &[u8]) -> Result<TimestampStream> {
    if bytes.len() < TIMESTAMP_HEADER_LEN as usize {
        return Err(Error::data(bytes.len() as u64, "file shorter than the 26-byte header"));
    }
    if &bytes[0..8] != TIMESTAMP_MAGIC {
        return Err(Error::data(0, "bad magic, expected QRNGTS01"));
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != TIMESTAMP_VERSION {
        return Err(Error::data(8, format!("unsupported format version {version}")));
    }
    let t0_fs = u64::from_le_bytes(bytes[10..18].try_into().expect("8 bytes"));
    if t0_fs == 0 {
        return Err(Error::data(10, "tick size is zero"));
    }
    let count = u64::from_le_bytes(bytes[18..26].try_into().expect("8 bytes"));
    let body = &bytes[TIMESTAMP_HEADER_LEN as usize..];
    if count.checked_mul(8) != Some(body.len() as u64) {
        return Err(Error::data(
            18,
            format!("header declares {count} records but {} bytes follow", body.len()),
        ));
    }
    let ticks = parse_ticks(body, TIMESTAMP_HEADER_LEN)?;
    TimestampStream::new(t0_fs, ticks)
}

pub fn read_timestamp_file(path: &Path) -> Result<TimestampStream> {
    decode_timestamps(&fs::read(path)?)
}

/// Headerless little-endian `u64` ticks.
pub fn read_raw_ticks(path: &Path, t0_femtoseconds: u64) -> Result<TimestampStream> {
    let ticks = parse_ticks(&fs::read(path)?, 0)?;
    TimestampStream::new(t0_femtoseconds, ticks)
}

pub fn write_raw_ticks(path: &Path, stream: &TimestampStream) -> Result<()> {
    write_atomic(path, |w| {
        for t in stream.ticks() {
            w.write_all(&t.to_le_bytes())?;
        }
        Ok(())
    })
}

/// One row of the distribution CSV; absent columns are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub bin: u32,
    pub theory_probability: Option<f64>,
    pub empirical_count: Option<u64>,
    pub empirical_frequency: Option<f64>,
}

/// Joins a theoretical curve and an empirical histogram by bin label, one
/// row per bin of whichever is given (the theory curve wins if both are).
pub fn distribution_rows(
    theory: Option<&BinDistribution>,
    counts: Option<&BinDistribution>,
) -> Result<Vec<DistributionRow>> {
    let frame = theory
        .or(counts)
        .ok_or_else(|| Error::domain("nothing to write"))?;
    let freq = counts.map(|c| c.to_frequency()).transpose().ok().flatten();
    Ok(frame
        .iter()
        .map(|(k, _)| DistributionRow {
            bin: k,
            theory_probability: theory.and_then(|t| t.value(k)),
            empirical_count: counts.and_then(|c| c.value(k)).map(|c| c as u64),
            empirical_frequency: freq.as_ref().and_then(|f| f.value(k)),
        })
        .collect())
}

pub fn write_distribution_csv(path: &Path, rows: &[DistributionRow]) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for row in rows {
            csv.serialize(row)?;
        }
        if rows.is_empty() {
            csv.write_record(["bin", "theory_probability", "empirical_count", "empirical_frequency"])?;
        }
        csv.flush()?;
        Ok(())
    })
}

pub fn read_distribution_csv(path: &Path) -> Result<Vec<DistributionRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<DistributionRow>, _>>()?;
    Ok(rows)
}

/// Bits as ASCII `0`/`1`, `per_line` to a line.
pub fn write_ascii_bits(path: &Path, bits: &[u8], per_line: usize) -> Result<()> {
    write_atomic(path, |w| {
        let mut line = Vec::with_capacity(per_line.max(1) + 1);
        for chunk in bits.chunks(per_line.max(1)) {
            line.clear();
            line.extend(chunk.iter().map(|&b| b'0' + (b & 1)));
            line.push(b'\n');
            w.write_all(&line)?;
        }
        Ok(())
    })
}

/// Reads ASCII `0`/`1` characters, ignoring whitespace.
pub fn read_ascii_bits(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    fs::File::open(path)?.read_to_end(&mut raw)?;
    let mut bits = Vec::with_capacity(raw.len());
    for (i, &c) in raw.iter().enumerate() {
        match c {
            b'0' | b'1' => bits.push(c - b'0'),
            c if c.is_ascii_whitespace() => {}
            c => return Err(Error::data(i as u64, format!("unexpected byte {c:#04x} in bit file"))),
        }
    }
    Ok(bits)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, |w| Ok(w.write_all(bytes)?))
}

/// Symbols as decimal integers, one per line.
pub fn write_symbols(path: &Path, symbols: &[u32]) -> Result<()> {
    write_atomic(path, |w| {
        for s in symbols {
            writeln!(w, "{s}")?;
        }
        Ok(())
    })
}

pub fn read_symbols(path: &Path) -> Result<Vec<u32>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|_| {
            Error::data(line_no as u64 + 1, format!("line {}: {t:?} is not a symbol", line_no + 1))
        })?);
    }
    Ok(out)
}

/// Run parameters stored next to a simulated timestamp file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMetadata {
    pub config: ExperimentConfig,
    pub periods: u64,
    pub seed: u64,
    pub generator: String,
    pub toolkit_version: String,
}

/// `<timestamp file>.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

impl SimulationMetadata {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let c = &self.config;
        vec![
            ("toolkit_version", self.toolkit_version.clone()),
            ("generator", self.generator.clone()),
            ("seed", self.seed.to_string()),
            ("periods", self.periods.to_string()),
            ("t0_seconds", format!("{:e}", c.t0_seconds)),
            ("n0", c.n0.to_string()),
            ("nd", c.nd.to_string()),
            ("lambda_per_second", format!("{:e}", c.lambda_per_second)),
            ("dark_rate_per_second", format!("{:e}", c.dark_rate_per_second)),
        ]
    }

    /// `# key = value` lines.
    pub fn to_comment_header(&self) -> String {
        let mut s = String::from("# photon-qrng simulation metadata\n");
        for (k, v) in self.pairs() {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }

    pub fn parse_comment_header(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let Some(body) = line.strip_prefix('#') else {
                continue;
            };
            if let Some((k, v)) = body.split_once('=') {
                map.insert(k.trim().to_string(), (i, v.trim().to_string()));
            }
        }
        let get = |key: &str| -> Result<&(usize, String)> {
            map.get(key)
                .ok_or_else(|| Error::data(0, format!("metadata lacks `{key}`")))
        };
        fn num<T: std::str::FromStr>(entry: &(usize, String), key: &str) -> Result<T> {
            entry
                .1
                .parse()
                .map_err(|_| Error::data(entry.0 as u64 + 1, format!("bad value for `{key}`: {}", entry.1)))
        }
        let seed: u64 = num(get("seed")?, "seed")?;
        let config = ExperimentConfig {
            t0_seconds: num(get("t0_seconds")?, "t0_seconds")?,
            n0: num(get("n0")?, "n0")?,
            nd: num(get("nd")?, "nd")?,
            lambda_per_second: num(get("lambda_per_second")?, "lambda_per_second")?,
            dark_rate_per_second: num(get("dark_rate_per_second")?, "dark_rate_per_second")?,
            seed,
        };
        config.validate()?;
        Ok(SimulationMetadata {
            config,
            periods: num(get("periods")?, "periods")?,
            seed,
            generator: get("generator")?.1.clone(),
            toolkit_version: get("toolkit_version")?.1.clone(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_comment_header();
        write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_comment_header(&fs::read_to_string(path)?)
    }
}
