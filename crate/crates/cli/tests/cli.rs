use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use hdsign::distributions::{sample, DistributionSpec, Family, RngStream, ScatterSpec};
use hdsign::SampleMatrix;
use hdsign_cli::csvio::{read_matrix, write_matrix};
use hdsign_cli::{run, Cli, Status};
use tempfile::TempDir;

fn hdsign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdsign"))
        .args(args)
        .env("HDSIGN_THREADS", "1")
        .output()
        .unwrap()
}

fn ar1_data(n: usize, p: usize, seed: u64) -> SampleMatrix {
    let spec = DistributionSpec::centered(Family::Normal, ScatterSpec::ar1(p, 0.5).unwrap()).unwrap();
    sample(&spec, n, &RngStream::new(seed, 0)).unwrap()
}

fn write_csv(dir: &TempDir, name: &str, x: &SampleMatrix) -> PathBuf {
    let path = dir.path().join(name);
    write_matrix(std::fs::File::create(&path).unwrap(), x, b',').unwrap();
    path
}

fn run_in_process(args: &[&str]) -> (Status, String) {
    let cli = Cli::try_parse_from(std::iter::once("hdsign").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let status = run(&cli, &mut out).unwrap();
    (status, String::from_utf8(out).unwrap())
}

/// Column `name` of the single data row of a csv report.
fn csv_field(text: &str, name: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    row[header.iter().position(|h| *h == name).unwrap()].to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn are_prints_the_grid() {
    let out = hdsign(&["are", "--format", "csv"]);
    assert!(out.status.success());
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 9));
    assert_eq!(&rows[0][1], "t_p(0,I_p,3)");
    assert_eq!(&rows[1][0], "ARE(OS,CQ)");
    let t3: f64 = rows[1][1].parse().unwrap();
    assert!((t3 - 3.0).abs() < 1e-12);
    let text = String::from_utf8(hdsign(&["are"]).stdout).unwrap();
    assert!(text.contains("16.68"));
}

#[test]
fn two_rows_is_an_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("two.csv");
    std::fs::write(&path, "1,2,3\n4,5,6\n").unwrap();
    let out = hdsign(&["test", "--input", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("n must be at least 3"));
}

#[test]
fn malformed_csv_reports_the_cell() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,y\n1,2\n3,4\n5,oops\n").unwrap();
    let out = hdsign(&["test", "--header", "--input", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("row 4, column 2"), "{err}");
}

#[test]
fn rejection_sets_exit_code_two() {
    let dir = TempDir::new().unwrap();
    let x = ar1_data(40, 50, 3).centered_at(&vec![-1.0; 50]).unwrap();
    let path = write_csv(&dir, "shifted.csv", &x);
    let out = hdsign(&["test", "-i", path_str(&path), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(csv_field(&String::from_utf8(out.stdout).unwrap(), "reject"), "true");
    // testing against the true location accepts
    let out = hdsign(&["test", "-i", path_str(&path), "--theta0", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn null_data_usually_accepts() {
    let dir = TempDir::new().unwrap();
    let seeds = 200;
    let mut accepted = 0;
    for seed in 0..seeds {
        let path = write_csv(&dir, "null.csv", &ar1_data(40, 200, 1000 + seed));
        let (status, text) = run_in_process(&["test", "-i", path_str(&path), "--format", "csv"]);
        let p: f64 = csv_field(&text, "p_value").parse().unwrap();
        assert_eq!(status == Status::Flagged, p < 0.05);
        accepted += usize::from(p > 0.05);
    }
    let rate = accepted as f64 / seeds as f64;
    // about 0.94; 0.035 is two binomial standard errors at 200 seeds
    assert!((rate - 0.94).abs() < 0.035, "acceptance rate {rate}");
}

#[test]
fn global_rescaling_keeps_z_and_p() {
    let dir = TempDir::new().unwrap();
    let x = ar1_data(30, 60, 8).centered_at(&vec![-0.1; 60]).unwrap();
    let a = write_csv(&dir, "a.csv", &x);
    let b = write_csv(&dir, "b.csv", &x.scaled(7.3).unwrap());
    let (_, ta) = run_in_process(&["test", "-i", path_str(&a), "--format", "csv"]);
    let (_, tb) = run_in_process(&["test", "-i", path_str(&b), "--format", "csv"]);
    for field in ["z", "p_value"] {
        let va: f64 = csv_field(&ta, field).parse().unwrap();
        let vb: f64 = csv_field(&tb, field).parse().unwrap();
        assert!((va - vb).abs() <= 1e-10 * va.abs().max(1e-3), "{field}: {va} vs {vb}");
    }
}

#[test]
fn custom_weight_matches_named_weight() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "x.csv", &ar1_data(20, 15, 4));
    let (_, os) = run_in_process(&["test", "-i", path_str(&path), "--kind", "os", "--format", "csv"]);
    let (_, custom) = run_in_process(&[
        "test",
        "-i",
        path_str(&path),
        "--kind",
        "custom",
        "--weight",
        "r^-1",
        "--format",
        "csv",
    ]);
    assert_eq!(csv_field(&os, "z"), csv_field(&custom, "z"));
    let cli = Cli::try_parse_from(["hdsign", "test", "-i", path_str(&path), "--kind", "custom"]).unwrap();
    assert!(run(&cli, &mut Vec::new()).is_err());
}

#[test]
fn scalar_invariant_kind_runs() {
    let dir = TempDir::new().unwrap();
    let x = ar1_data(20, 10, 6);
    let a = write_csv(&dir, "a.csv", &x);
    let b = write_csv(
        &dir,
        "b.csv",
        &x.scale_columns(&(1..=10).map(|k| k as f64).collect::<Vec<_>>())
            .unwrap(),
    );
    let (_, ta) = run_in_process(&[
        "test",
        "-i",
        path_str(&a),
        "--kind",
        "scalar-invariant-os",
        "--format",
        "csv",
    ]);
    let (_, tb) = run_in_process(&[
        "test",
        "-i",
        path_str(&b),
        "--kind",
        "scalar-invariant-os",
        "--format",
        "csv",
    ]);
    let za: f64 = csv_field(&ta, "z").parse().unwrap();
    let zb: f64 = csv_field(&tb, "z").parse().unwrap();
    assert!((za - zb).abs() < 1e-8 * za.abs().max(1.0));
    assert_eq!(csv_field(&ta, "floored"), "0");
}

#[test]
fn header_and_tsv_inputs() {
    let dir = TempDir::new().unwrap();
    let x = ar1_data(12, 4, 1);
    let plain = write_csv(&dir, "x.csv", &x);
    let tsv = dir.path().join("x.tsv");
    let mut body = String::from("a\tb\tc\td\n");
    for row in x.rows() {
        body.push_str(&row.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join("\t"));
        body.push('\n');
    }
    std::fs::write(&tsv, body).unwrap();
    let y = read_matrix(&tsv, true).unwrap();
    assert_eq!(read_matrix(&plain, false).unwrap(), y);
}

#[test]
fn csv_round_trip_is_bit_identical() {
    let dir = TempDir::new().unwrap();
    let x = ar1_data(25, 7, 77).scaled(1e-7).unwrap();
    let path = write_csv(&dir, "x.csv", &x);
    let y = read_matrix(&path, false).unwrap();
    assert!(x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate",
        "--scenario",
        "ii",
        "--pattern",
        "sparse",
        "--p",
        "40",
        "--reps",
        "50",
        "--seed",
        "7",
        "--format",
        "csv",
    ];
    let a = hdsign(&args);
    let b = hdsign(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("II,Sparse,40,40,CQ,"));
}

#[test]
fn table2_quick_layout() {
    let (status, text) = run_in_process(&["table2", "--quick", "--reps", "2"]);
    assert_eq!(status, Status::Ok);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 21);
    assert!(lines[0].contains("OS p=200"));
    assert!(lines[1].starts_with("(I)") && lines[1].contains("Size"));
    assert!(lines[21].starts_with("(VII)") && lines[21].contains("Sparse"));
}

#[test]
fn validate_reports_each_moment() {
    let (status, text) = run_in_process(&["validate", "--p", "10", "--samples", "20000", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("second,10,20000,"));
    assert!(lines[3].starts_with("fourth-exact,"));
    assert!(lines[3].ends_with("pass"));
    // the status follows the displayed identities
    assert_eq!(
        status == Status::Ok,
        !lines[2].ends_with("FAIL") && lines[1].ends_with("pass")
    );
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_hdsign"))
        .arg("are")
        .env("HDSIGN_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("HDSIGN_THREADS"));
}
