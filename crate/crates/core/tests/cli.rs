use std::path::Path;
use std::process::{Command, Output};

fn semcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semcomm")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn help_exits_zero() {
    assert_eq!(semcomm(&["--help"]).status.code(), Some(0));
    assert_eq!(semcomm(&["ib-solve", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(semcomm(&["transmogrify"]).status.code(), Some(2));
    assert_eq!(semcomm(&["measures"]).status.code(), Some(2));
    let out = semcomm(&["measures", "--config", "/nonexistent/lang.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_probabilities_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "messages = [\"a\", \"b\"]\nprior = [0.7, 0.7]\nmapping = [\"x\", \"y\"]\n");
    assert_eq!(semcomm(&["measures", "--config", &cfg]).status.code(), Some(2));
    let joint = write(dir.path(), "j.txt", "0.5 0.6\n");
    assert_eq!(semcomm(&["ib-solve", "--joint", &joint, "--z-card", "2", "--beta", "1"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let joint = write(
        dir.path(),
        "j.txt",
        "0.3333333333333333 0 0\n0 0.3333333333333333 0\n0 0 0.3333333333333334\n",
    );
    let out = semcomm(&["ib-solve", "--joint", &joint, "--z-card", "3", "--beta", "1.7e308"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn measures_redundant_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lang.toml",
        "messages = [\"m1\", \"m2\"]\nsymbols = [\"x1\", \"x2\", \"x3\", \"x4\"]\nmapping = [[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]]\n",
    );
    let out = dir.path().join("m.csv");
    let status = semcomm(&["measures", "--config", &cfg, "--output", out.to_str().unwrap()]).status;
    assert!(status.success());
    let rows = data_rows(&std::fs::read_to_string(out).unwrap());
    assert_eq!(rows[0].join(","), "H_M,H_X,H_X_given_M,H_M_given_X,I_MX,class_entropy,huffman_len");
    let v: Vec<f64> = rows[1].iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v[..5], [1.0, 2.0, 1.0, 0.0, 1.0]);
}

#[test]
fn link_sim_writes_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    let status = semcomm(&[
        "link-sim", "--snr-db", "-4:4:2", "--trials", "2000", "--seed", "1", "--output", out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let rows = data_rows(&std::fs::read_to_string(out).unwrap());
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][0], "snr_db");
    let snr: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(snr, [-4.0, -2.0, 0.0, 2.0, 4.0]);
}

#[test]
fn suff_check_sum_statistic() {
    let dir = tempfile::tempdir().unwrap();
    // two coin flips, θ ∈ {0.3, 0.6} equally likely; rows are patterns 00, 01, 10, 11
    let rows: Vec<String> = (0..4u32)
        .map(|x| {
            [0.3f64, 0.6]
                .iter()
                .map(|t| {
                    let k = x.count_ones() as i32;
                    format!("{:.17}", 0.5 * t.powi(k) * (1.0 - t).powi(2 - k))
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let joint = write(dir.path(), "j.txt", &rows.join("\n"));
    let out = dir.path().join("s.csv");
    let status = semcomm(&["suff-check", "--joint", &joint, "--statistic", "sum", "--output", out.to_str().unwrap()]).status;
    assert!(status.success());
    let rows = data_rows(&std::fs::read_to_string(out).unwrap());
    let col = rows[0].iter().position(|h| h == "is_sufficient").unwrap();
    assert_eq!(rows[1][col], "true");
}
