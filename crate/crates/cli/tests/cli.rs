use std::path::Path;
use std::process::{Command, Output};

fn pqrng(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqrng"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn pqrng")
}

fn stdout_value(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn simulate(dir: &Path, name: &str, periods: &str, seed: &str) -> Output {
    pqrng(
        &[
            "simulate", "--lambda-per-s", "4197530.864", "--t0-s", "0.162e-9", "--n0", "320", "--nd", "32",
            "--periods", periods, "--seed", seed, "--out", name,
        ],
        dir,
    )
}

#[test]
fn theory_prints_reference_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = pqrng(
        &["theory", "--lambda-t0", "0.00068", "--n0", "320", "--nd", "32", "--truncate", "--out", "t.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!((stdout_value(&out, "h_inf_truncated") - 0.999996).abs() < 1e-6);
    assert!((stdout_value(&out, "bitrate_bps") - 2.213e7).abs() < 5e4);
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "bin,theory_probability,empirical_count,empirical_frequency");
    assert_eq!(csv.lines().count(), 321);
    let cut = std::fs::read_to_string(dir.path().join("t.truncated.csv")).unwrap();
    assert_eq!(cut.lines().count(), 257);
}

#[test]
fn theory_rejects_overlapping_cut_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = pqrng(&["theory", "--lambda-t0", "0.00068", "--n0", "64", "--nd", "32", "--out", "t.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn simulate_rejects_zero_periods() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "ts.bin", "0", "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("ts.bin").exists());
}

#[test]
fn simulate_extract_analyze_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(simulate(d, "a.bin", "2000000", "9").status.success());
    assert!(simulate(d, "b.bin", "2000000", "9").status.success());
    assert_eq!(std::fs::read(d.join("a.bin")).unwrap(), std::fs::read(d.join("b.bin")).unwrap());
    let meta = std::fs::read_to_string(d.join("a.bin.meta")).unwrap();
    assert!(meta.contains("# seed = 9"));

    let ex = pqrng(
        &["extract", "--in", "a.bin", "--format", "raw", "--out", "x1.bin", "--report", "x.json", "--emit-sts", "sts.txt"],
        d,
    );
    assert!(ex.status.success(), "{}", String::from_utf8_lossy(&ex.stderr));
    assert!((stdout_value(&ex, "acceptance_ratio") - 0.1786).abs() < 0.002);
    assert!((stdout_value(&ex, "retained_fraction") - 0.803).abs() < 0.005);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("x.json")).unwrap()).unwrap();
    assert_eq!(report["parameters"]["n0"], 320);
    assert_eq!(report["symbol_histogram"].as_array().unwrap().len(), 256);

    assert!(pqrng(&["extract", "--in", "a.bin", "--format", "raw", "--out", "x2.bin"], d).status.success());
    let bytes = std::fs::read(d.join("x1.bin")).unwrap();
    assert_eq!(bytes, std::fs::read(d.join("x2.bin")).unwrap());
    let sts = std::fs::read_to_string(d.join("sts.txt")).unwrap();
    assert_eq!(sts.chars().filter(|c| *c == '0' || *c == '1').count(), bytes.len() * 8);

    let an = pqrng(&["analyze", "--bytes", "x1.bin", "--report", "r.json"], d);
    assert_eq!(an.status.code(), Some(0), "{}", String::from_utf8_lossy(&an.stdout));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["alpha"], 0.01);
    assert!(r["entries"].as_array().unwrap().iter().any(|e| e["name"] == "runs"));

    let bits = pqrng(&["analyze", "--bits", "sts.txt", "--report", "rb.json"], d);
    assert_eq!(bits.status.code(), Some(0));
}

#[test]
fn extract_of_empty_input_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e.ticks"), b"").unwrap();
    let out = pqrng(&["extract", "--in", "e.ticks", "--raw-ticks", "--format", "symbols", "--out", "e.txt"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout_value(&out, "acceptance_ratio"), 0.0);
    assert_eq!(std::fs::read(dir.path().join("e.txt")).unwrap().len(), 0);
}

#[test]
fn extract_names_offset_of_bad_data() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.bin"), [b'X'; 40]).unwrap();
    let out = pqrng(&["extract", "--in", "bad.bin", "--format", "raw", "--out", "o.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 0"));

    let mut ticks = Vec::new();
    for t in [5u64, 9, 9] {
        ticks.extend_from_slice(&t.to_le_bytes());
    }
    std::fs::write(dir.path().join("dup.ticks"), ticks).unwrap();
    let out = pqrng(&["extract", "--in", "dup.ticks", "--raw-ticks", "--format", "raw", "--out", "o.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 16"));
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("z.bin"), vec![0u8; 20_000]).unwrap();
    let zeros = pqrng(&["analyze", "--bytes", "z.bin", "--report", "z.json"], dir.path());
    assert_eq!(zeros.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&zeros.stdout).contains("monobit p_value=0 passed=false"));

    let missing = pqrng(&["analyze", "--bytes", "nope.bin", "--report", "m.json"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    std::fs::write(dir.path().join("short.txt"), "1\n0\n").unwrap();
    let short = pqrng(&["analyze", "--symbols", "short.txt", "--report", "s.json"], dir.path());
    // Only the chi-square test can run on two symbols; the rest are listed.
    assert_eq!(short.status.code(), Some(0));
    let err = String::from_utf8_lossy(&short.stderr);
    for name in ["monobit", "block_frequency", "runs", "serial_correlation"] {
        assert!(err.contains(&format!("skipped {name}:")), "{err}");
    }

    std::fs::write(dir.path().join("empty.txt"), "").unwrap();
    let empty = pqrng(&["analyze", "--symbols", "empty.txt", "--report", "e.json"], dir.path());
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn sweep_crosses_point_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = pqrng(&["sweep", "--mu-max", "1.5", "--mu-step", "0.1"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let best = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(best > 0.4);
}
