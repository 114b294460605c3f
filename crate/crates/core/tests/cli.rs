use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn swhbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swhbf")).args(args).output().expect("binary runs")
}

fn out_arg(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_results_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = swhbf(&[
        "simulate", "--trials", "2", "--values", "0,10", "--schemes", "dbf,sw-ts", "--out", &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    assert!(csv.lines().skip(1).all(|l| l.contains(",snr,")));
    assert!(dir.path().join("se_vs_snr.svg").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "[system]\nn_subcarriers = 8\n\n[experiment]\nn_trials = 2\nschemes = [\"dbf\"]\nsweep_values = [5]\n",
    )
    .unwrap();
    let out = swhbf(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--trials", "3", "--out", &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|l| l.starts_with("dbf,snr,5,")));
}

#[test]
fn sweep_subcommands_pin_their_axis() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, axis, values) in [
        ("sweep-bandwidth", "bandwidth", "1e9,2e9"),
        ("sweep-subcarriers", "subcarriers", "8,16"),
    ] {
        let out = swhbf(&[
            cmd, "--trials", "1", "--values", values, "--schemes", "sw-ts,ps-baseline", "--out", &out_arg(dir.path()),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some(axis)));
    }
}

#[test]
fn beampattern_writes_svg_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = swhbf(&["beampattern", "--out", &out_arg(dir.path())]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("beam_pattern.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 1001);
    assert!(fs::read_to_string(dir.path().join("beam_pattern.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn oracle_compare_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = swhbf(&["oracle-compare", "--trials", "5", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("oracle_summary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,mean_ratio,min_ratio,frac_ratio_ge_0.95,trials");
    assert_eq!(lines[1], "sw-es,1,1,1,5");
    assert_eq!(lines.len(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    // config errors
    assert_eq!(swhbf(&["simulate", "--schemes", "sw-nope", "--out", &d]).status.code(), Some(2));
    assert_eq!(swhbf(&["simulate", "--trials", "0", "--out", &d]).status.code(), Some(2));
    assert_eq!(swhbf(&["simulate", "--preset", "huge", "--out", &d]).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[system]\nunknown_key = 1\n").unwrap();
    assert_eq!(swhbf(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    // dimension guard
    assert_eq!(
        swhbf(&["simulate", "--preset", "large", "--schemes", "sw-es", "--trials", "1", "--out", &d]).status.code(),
        Some(3)
    );
    // I/O
    assert_eq!(swhbf(&["simulate", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(4));
    let file = dir.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let under_file = file.join("out");
    assert_eq!(
        swhbf(&["simulate", "--trials", "1", "--values", "0", "--schemes", "dbf", "--out", &out_arg(&under_file)])
            .status
            .code(),
        Some(4)
    );
}
