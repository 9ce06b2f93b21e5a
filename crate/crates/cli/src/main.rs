//! `pqrng`: theory curves, simulation, extraction and analysis from the
//! command line.
//!
//! Exit codes: 0 success (or every test passed), 1 a statistical test
//! failed, 2 usage, data or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use photon_qrng::extractor::{select_single_pulse, symbols_to_bits, truncate_and_pack};
use photon_qrng::io::{
    distribution_rows, read_ascii_bits, read_raw_ticks, read_symbols, read_timestamp_file, sidecar_path,
    write_ascii_bits, write_atomic, write_bytes, write_distribution_csv, write_symbols, write_timestamp_file,
    SimulationMetadata, ASCII_BITS_PER_LINE,
};
use photon_qrng::simulator::{generate_arrivals, merge_dead_time, segment_periods, GENERATOR_ID};
use photon_qrng::stats::{histogram, run_battery, BatteryConfig, ReportMetadata, DEFAULT_ALPHA};
use photon_qrng::theory::{bitrate_sweep, summarize};
use photon_qrng::{ExperimentConfig, SymbolStream, TOOLKIT_VERSION};

const DEFAULT_T0_S: f64 = 0.162e-9;

#[derive(Parser)]
#[command(name = "pqrng", version, about = "Photon arrival-time random number toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-pulse bin distribution and figures of merit.
    Theory(TheoryArgs),
    /// Simulate detections and write a timestamp file.
    Simulate(SimulateArgs),
    /// Turn a timestamp file into random output.
    Extract(ExtractArgs),
    /// Run the test battery on a bit, byte or symbol file.
    Analyze(AnalyzeArgs),
    /// Predicted bitrate as a function of mean occupancy.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct TheoryArgs {
    /// Mean detections per bin.
    #[arg(long)]
    lambda_t0: f64,
    #[arg(long)]
    n0: u32,
    #[arg(long)]
    nd: u32,
    /// Bin width in seconds.
    #[arg(long, default_value_t = DEFAULT_T0_S)]
    t0_s: f64,
    /// Also write `<stem>.truncated.csv` with `nd` bins cut from both ends.
    #[arg(long)]
    truncate: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    lambda_per_s: f64,
    #[arg(long)]
    t0_s: f64,
    #[arg(long)]
    n0: u32,
    #[arg(long)]
    nd: u32,
    #[arg(long)]
    periods: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    dark_rate: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    /// Packed bits, most significant first.
    Raw,
    /// ASCII `0`/`1`.
    AsciiBits,
    /// One decimal symbol per line.
    Symbols,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: OutputFormat,
    #[arg(long)]
    out: PathBuf,
    /// JSON summary of the extraction.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Bins per period; read from the sidecar when absent, else 320.
    #[arg(long)]
    n0: Option<u32>,
    /// Dead-time bins; read from the sidecar when absent, else 32.
    #[arg(long)]
    nd: Option<u32>,
    /// Periods covered by the file; read from the sidecar when absent, else
    /// inferred from the last tick.
    #[arg(long)]
    periods: Option<u64>,
    /// Input is headerless little-endian u64 ticks.
    #[arg(long)]
    raw_ticks: bool,
    /// Tick size for `--raw-ticks` input.
    #[arg(long, default_value_t = 162_000)]
    t0_fs: u64,
    /// Also write ASCII bits for an external STS run.
    #[arg(long)]
    emit_sts: Option<PathBuf>,
    /// Also write raw bytes for an external DieHard run.
    #[arg(long)]
    emit_dieharder: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["bits", "bytes", "symbols"])))]
struct AnalyzeArgs {
    /// ASCII `0`/`1` file.
    #[arg(long)]
    bits: Option<PathBuf>,
    /// Raw byte file.
    #[arg(long)]
    bytes: Option<PathBuf>,
    /// One decimal symbol per line.
    #[arg(long)]
    symbols: Option<PathBuf>,
    /// Size of the symbol alphabet; a power of two. Defaults to the smallest
    /// power of two covering the input.
    #[arg(long, requires = "symbols")]
    symbol_count: Option<u64>,
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 320)]
    n0: u32,
    #[arg(long, default_value_t = 32)]
    nd: u32,
    #[arg(long, default_value_t = DEFAULT_T0_S)]
    t0_s: f64,
    #[arg(long, default_value_t = 2.0)]
    mu_max: f64,
    #[arg(long, default_value_t = 0.05)]
    mu_step: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Theory(a) => theory(a),
        Command::Simulate(a) => simulate(a),
        Command::Extract(a) => extract(a),
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn theory(a: TheoryArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig::from_lambda_t0(a.lambda_t0, a.t0_s, a.n0, a.nd)?;
    let (dist, cut, s) = summarize(&cfg)?;
    write_distribution_csv(&a.out, &distribution_rows(Some(&dist), None)?)
        .with_context(|| format!("writing {}", a.out.display()))?;
    if a.truncate {
        let path = truncated_path(&a.out);
        write_distribution_csv(&path, &distribution_rows(Some(&cut), None)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let b = &s.bitrate;
    println!("lambda_t0={}", a.lambda_t0);
    println!("t0_s={}", a.t0_s);
    println!("n0={}", a.n0);
    println!("nd={}", a.nd);
    println!("mean_occupancy={}", cfg.mean_occupancy());
    println!("prob_single_pulse={}", b.single_pulse_probability);
    println!("p_max={}", s.p_max);
    println!("h_inf={}", s.h_inf);
    println!("symbols_truncated={}", cut.len());
    println!("p_max_truncated={}", s.p_max_truncated);
    println!("h_inf_truncated={}", s.h_inf_truncated);
    println!("retained_fraction={}", b.retained.exact);
    println!("retained_fraction_approx={}", b.retained.approximation);
    println!("bitrate_bps={}", b.exact_bps);
    println!("bitrate_approx_bps={}", b.approx_bps);
    Ok(ExitCode::SUCCESS)
}

fn truncated_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.truncated.csv"))
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig::new(a.t0_s, a.n0, a.nd, a.lambda_per_s)?
        .with_dark_rate(a.dark_rate)?
        .with_seed(a.seed);
    if cfg.t0_femtoseconds() == 0 {
        bail!("t0 of {} s rounds to zero femtoseconds", a.t0_s);
    }
    let stream = generate_arrivals(&cfg, a.periods, a.seed)?;
    write_timestamp_file(&a.out, &stream).with_context(|| format!("writing {}", a.out.display()))?;
    let meta = SimulationMetadata {
        config: cfg,
        periods: a.periods,
        seed: a.seed,
        generator: GENERATOR_ID.to_string(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
    };
    let side = sidecar_path(&a.out);
    meta.write(&side).with_context(|| format!("writing {}", side.display()))?;
    println!("periods={}", a.periods);
    println!("seed={}", a.seed);
    println!("detections={}", stream.len());
    println!("t0_fs={}", stream.t0_femtoseconds());
    Ok(ExitCode::SUCCESS)
}

fn pack_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

fn extract(a: ExtractArgs) -> Result<ExitCode> {
    let stream = if a.raw_ticks {
        read_raw_ticks(&a.input, a.t0_fs)
    } else {
        read_timestamp_file(&a.input)
    }
    .with_context(|| format!("reading {}", a.input.display()))?;

    let side = sidecar_path(&a.input);
    let meta = if side.exists() {
        Some(SimulationMetadata::read(&side).with_context(|| format!("reading {}", side.display()))?)
    } else {
        None
    };
    let n0 = a.n0.or(meta.as_ref().map(|m| m.config.n0)).unwrap_or(320);
    let nd = a.nd.or(meta.as_ref().map(|m| m.config.nd)).unwrap_or(32);
    if n0 <= 2 * nd {
        bail!("n0 = {n0} must exceed 2 * nd = {}", 2 * nd);
    }
    let periods = a.periods.or(meta.as_ref().map(|m| m.periods)).unwrap_or_else(|| {
        stream.ticks().last().map_or(0, |&t| t / n0 as u64 + 1)
    });

    let pulses = merge_dead_time(&stream, nd as u64);
    let records = segment_periods(&pulses, n0, periods);
    let selection = select_single_pulse(&records);
    let symbols = truncate_and_pack(&selection.bins, n0, nd)?;
    let bits = symbols_to_bits(&symbols)?;

    match a.format {
        OutputFormat::Raw => write_bytes(&a.out, &pack_bytes(&bits)),
        OutputFormat::AsciiBits => write_ascii_bits(&a.out, &bits, ASCII_BITS_PER_LINE),
        OutputFormat::Symbols => write_symbols(&a.out, &symbols.symbols),
    }
    .with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(p) = &a.emit_sts {
        write_ascii_bits(p, &bits, ASCII_BITS_PER_LINE).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.emit_dieharder {
        write_bytes(p, &pack_bytes(&bits)).with_context(|| format!("writing {}", p.display()))?;
    }

    println!("periods={periods}");
    println!("pulses={}", pulses.len());
    println!("accepted={}", selection.accepted());
    println!("acceptance_ratio={}", selection.acceptance_ratio());
    println!("retained_fraction={}", symbols.retained_fraction());
    println!("symbols={}", symbols.len());
    println!("bit_width={}", symbols.bit_width);

    if let Some(path) = &a.report {
        let text = serde_json::to_string_pretty(&extract_report(&a, n0, nd, periods, pulses.len(), &selection, &symbols)?)?;
        write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn extract_report(
    a: &ExtractArgs,
    n0: u32,
    nd: u32,
    periods: u64,
    pulses: usize,
    selection: &photon_qrng::Selection,
    symbols: &SymbolStream,
) -> Result<serde_json::Value> {
    let hist = histogram(&symbols.symbols, symbols.symbol_space() as usize)?;
    let counts: Vec<u64> = hist.values().iter().map(|&c| c as u64).collect();
    Ok(json!({
        "input": a.input.display().to_string(),
        "toolkit_version": TOOLKIT_VERSION,
        "parameters": { "n0": n0, "nd": nd, "periods": periods },
        "pulses": pulses,
        "accepted": selection.accepted(),
        "acceptance_ratio": selection.acceptance_ratio(),
        "retained_fraction": symbols.retained_fraction(),
        "symbols": symbols.len(),
        "bit_width": symbols.bit_width,
        "width_discarded": symbols.width_discarded,
        "symbol_histogram": counts,
    }))
}

fn analyze(a: AnalyzeArgs) -> Result<ExitCode> {
    let (input, bits, symbols, space) = if let Some(p) = &a.bits {
        let bits = read_ascii_bits(p).with_context(|| format!("reading {}", p.display()))?;
        let symbols = pack_bytes(&bits).into_iter().map(u32::from).collect();
        (p, bits, symbols, 256)
    } else if let Some(p) = &a.bytes {
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        let bits = bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1)).collect();
        (p, bits, bytes.into_iter().map(u32::from).collect(), 256)
    } else {
        let p = a.symbols.as_ref().expect("clap enforces one source");
        let symbols = read_symbols(p).with_context(|| format!("reading {}", p.display()))?;
        let max = symbols.iter().copied().max().unwrap_or(0) as u64;
        let space = a.symbol_count.unwrap_or_else(|| (max + 1).next_power_of_two().max(2));
        if !space.is_power_of_two() || space < 2 {
            bail!("--symbol-count must be a power of two of at least 2, got {space}");
        }
        if max >= space {
            bail!("symbol {max} does not fit an alphabet of {space}");
        }
        let stream = SymbolStream {
            symbols,
            bit_width: space.trailing_zeros(),
            input_count: 0,
            in_range_count: 0,
            width_discarded: 0,
        };
        (p, symbols_to_bits(&stream)?, stream.symbols, space)
    };
    let cfg = BatteryConfig {
        alpha: a.alpha,
        ..Default::default()
    };
    let report = run_battery(&bits, &symbols, space, &cfg, ReportMetadata::for_input(input.display().to_string()))?;
    let text = report.to_json()?;
    write_atomic(&a.report, |w| Ok(w.write_all(text.as_bytes())?))
        .with_context(|| format!("writing {}", a.report.display()))?;

    for e in &report.entries {
        println!("{} p_value={} passed={}", e.name, e.p_value, e.passed);
    }
    for s in &report.skipped {
        eprintln!("skipped {}: {}", s.name, s.reason);
    }
    if report.entries.is_empty() {
        bail!("input too short for any test");
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn sweep(a: SweepArgs) -> Result<ExitCode> {
    if !(a.mu_step > 0.0 && a.mu_max >= a.mu_step) {
        bail!("need 0 < mu-step <= mu-max");
    }
    let cfg = ExperimentConfig::new(a.t0_s, a.n0, a.nd, 0.0)?;
    let steps = (a.mu_max / a.mu_step + 1e-9).floor() as usize;
    let mus: Vec<f64> = (1..=steps).map(|i| (i as f64 * a.mu_step * 1e9).round() / 1e9).collect();
    println!("mean_occupancy,prob_single_pulse,bitrate_bps,bitrate_approx_bps");
    for p in bitrate_sweep(&cfg, &mus)? {
        println!(
            "{},{},{},{}",
            p.mean_occupancy, p.bitrate.single_pulse_probability, p.bitrate.exact_bps, p.bitrate.approx_bps
        );
    }
    Ok(ExitCode::SUCCESS)
}
