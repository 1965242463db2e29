use std::fs;
use std::process::{Command, Output};

use specklenoise::{
    classical_noise_correlation, expansion_terms, shot_noise_correlation, CurveTable,
    DiffusionGeometry, NormalizedOffset,
};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specklenoise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn fig1_file_reproduces_analytic_values() {
    let text = stdout(&["curves", "--grid-points", "40"]);
    assert!(text.starts_with("x,c_sn,c_cn\n"));
    assert!(!text.contains('\r'));
    let table = CurveTable::parse_csv(&text).unwrap();
    assert_eq!(table.rows[0], vec![0.0, 1.0, 5.0]);
    for row in &table.rows {
        let x = NormalizedOffset::new(row[0]).unwrap();
        assert!((row[1] - shot_noise_correlation(x)).abs() <= 1e-12);
        assert!((row[2] - classical_noise_correlation(x)).abs() <= 1e-12);
    }
}

#[test]
fn fig2_file_reproduces_analytic_values() {
    let text = stdout(&["curves", "--figure", "fig2", "--grid-scale", "lin", "--grid-min", "0.5", "--grid-max", "30", "--grid-points", "12"]);
    let table = CurveTable::parse_csv(&text).unwrap();
    assert_eq!(table.columns.len(), 10);
    for (ci, name) in table.columns.iter().enumerate().skip(1) {
        let (f, r) = name.trim_start_matches("c2_f").split_once("_r").unwrap();
        let (fano, ratio): (f64, f64) = (f.parse().unwrap(), r.parse().unwrap());
        let geom = DiffusionGeometry::from_ratio(ratio).unwrap();
        for row in &table.rows {
            let x = NormalizedOffset::new(row[0]).unwrap();
            let expected = expansion_terms(x, fano, 1.0, &geom).unwrap().second_order;
            assert!((row[ci] - expected).abs() <= 1e-12);
        }
    }
}

#[test]
fn fig2_is_independent_of_mean_transmission() {
    let a = stdout(&["curves", "--figure", "fig2", "--mean-t", "0.01"]);
    let b = stdout(&["curves", "--figure", "fig2", "--mean-t", "0.3"]);
    assert_eq!(a, b);
}

#[test]
fn json_curves() {
    let text = stdout(&["curves", "--format", "json", "--grid-points", "3"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["columns"][1], "c_sn");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    // missing seed
    assert_eq!(bin(&["validate"]).status.code(), Some(2));
    // unusable grid for the divergent kernel
    assert_eq!(bin(&["curves", "--figure", "fig2", "--grid-scale", "lin", "--grid-min", "0"]).status.code(), Some(2));
    // too few realizations
    let out = bin(&["validate", "--seed", "1", "--realizations", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too few"));
    // custom states have no count law
    assert_eq!(bin(&["sample-stats", "--seed", "1", "--state", "custom"]).status.code(), Some(3));
    // unknown flag
    assert_eq!(bin(&["curves", "--bogus"]).status.code(), Some(2));
    // unwritable output
    assert_eq!(bin(&["curves", "--out", "/nonexistent/dir/x.csv"]).status.code(), Some(1));
}

#[test]
fn validate_status_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = bin(&[
        "validate", "--seed", "4", "--realizations", "1000", "--grid-points", "4",
        "--sampler-shots", "20", "--counting-realizations", "100", "--shots", "5",
        "--bootstrap", "2", "--out", out.to_str().unwrap(),
    ])
    .status;
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let passed = report["passed"].as_bool().unwrap();
    assert_eq!(status.code(), Some(if passed { 0 } else { 4 }));
}

#[test]
fn config_file_and_show_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "seed = 11\nmean_t = 0.02\nfano = [0.0, 2.0]\n").unwrap();
    let text = stdout(&["curves", "--config", path.to_str().unwrap(), "--mean-t", "0.05", "--show-config"]);
    assert!(text.contains("seed = 11"));
    assert!(text.contains("mean_t = 0.05"));
    assert!(text.contains("fano = [0.0, 2.0]"));
    fs::write(&path, "nonsense = true\n").unwrap();
    assert_eq!(bin(&["curves", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

fn summary(dir: &std::path::Path, args: &[&str]) -> Vec<f64> {
    let out = dir.join("counts.csv");
    let mut all = vec!["sample-stats", "--seed", "8", "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    let status = bin(&all).status;
    assert!(status.success());
    let counts = fs::read_to_string(&out).unwrap();
    assert!(counts.starts_with("shot,count\n0,"));
    let text = fs::read_to_string(dir.join("counts.summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "shots,mean,variance,fano,fano_stderr,expected_fano,z");
    lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect()
}

#[test]
fn sample_stats_fano_factors() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], f64); 3] = [
        (&["--state", "coherent", "--photons", "10", "--transmission", "0.3", "--shots", "1000000"], 1.0),
        (&["--state", "fock", "--photons", "10", "--transmission", "0.3", "--shots", "1000000"], 0.7),
        (&["--state", "thermal", "--photons", "1", "--transmission", "1", "--shots", "1000000"], 2.0),
    ];
    for (args, fano) in cases {
        let s = summary(dir.path(), args);
        assert_eq!(s[5], fano);
        assert!((s[3] - fano).abs() <= 5.0 * s[4], "{args:?}: {s:?}");
    }
}

#[test]
fn seeded_commands_are_reproducible() {
    let a = stdout(&["sample-stats", "--seed", "5", "--shots", "1000", "--format", "json"]);
    let b = stdout(&["sample-stats", "--seed", "5", "--shots", "1000", "--format", "json"]);
    assert_eq!(a, b);
    let c = stdout(&["sample-stats", "--seed", "6", "--shots", "1000", "--format", "json"]);
    assert_ne!(a, c);
}
