use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ipdft::persistence::{write_samples, SampleRecord};

fn grid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipdft-grid")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
[sweep]
n = [64, 128]
cir = [0.5, 1.0]
phase_step = 0.05

[noise]
cir = [0.7]
snr_db = [50.0]
realizations = 200

[tables]
n = [128]
filters = ["none"]
harmonic_sets = [[2], [3, 4]]
"#;

#[test]
fn fig1_writes_deterministic_scientific_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        let o = grid(&["fig1", "--config", &cfg, "--quick", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&out1).unwrap();
    assert_eq!(text, fs::read_to_string(&out2).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cir,n,err_amplitude,err_phase"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "5.00000000000e-1");
    assert!(row[2].contains('e') && row[2].split('e').next().unwrap().len() >= 10);
    // quick mode keeps every other CiR value
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn monte_carlo_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = grid(&["fig3", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    let o = grid(&["fig3", "--config", &cfg, "--seed", "5"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("cir,snr_db,sigma,rmse_amplitude"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let from_file = dir.path().join("file.csv");
    let from_flag = dir.path().join("flag.csv");
    let text = format!("seed = 1\noutput = {:?}\n{SMALL}", from_file.to_str().unwrap());
    let cfg = write_config(dir.path(), &text);
    assert!(grid(&["fig3", "--config", &cfg]).status.success());
    let o = grid(&["fig3", "--config", &cfg, "--seed", "2", "--out", from_flag.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(fs::read_to_string(&from_file).unwrap(), fs::read_to_string(&from_flag).unwrap());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[sweep]\nunknown = 3\n");
    assert_eq!(grid(&["fig1", "--config", &bad]).status.code(), Some(2));
    assert_eq!(grid(&["fig1", "--config", "/nonexistent/exp.toml"]).status.code(), Some(2));
    let short = write_config(dir.path(), "[window]\norder = 9\n[sweep]\nn = [8]\n");
    assert_eq!(grid(&["fig1", "--config", &short]).status.code(), Some(2));
}

#[test]
fn tables_split_amplitude_and_phase() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let t1 = String::from_utf8(grid(&["table1", "--config", &cfg, "--quick"]).stdout).unwrap();
    let t2 = String::from_utf8(grid(&["table2", "--config", &cfg, "--quick"]).stdout).unwrap();
    assert!(t1.starts_with("n,cir,filter,harmonics,err_amplitude_pct\n"));
    assert!(t2.starts_with("n,cir,filter,harmonics,err_phase\n"));
    assert!(t1.contains(",none,3+4,"));
    assert_eq!(t1.lines().count(), 3);
}

#[test]
fn estimate_reads_a_sample_record() {
    let dir = tempfile::tempdir().unwrap();
    let rec_path = dir.path().join("tone.f64");
    let fs_hz = 24000.0;
    let samples: Vec<f64> = (0..600)
        .map(|i| 2.5 * (2.0 * std::f64::consts::PI * 50.0 * i as f64 / fs_hz + 0.3).sin())
        .collect();
    write_samples(&SampleRecord::new(fs_hz, samples).unwrap(), &rec_path).unwrap();
    let cfg = write_config(dir.path(), "[estimate]\nn = 512\nmax_cir = 1.9\n");
    let o = grid(&["estimate", "--config", &cfg, "--input", rec_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,fs,k,lambda,frequency,amplitude,phase,perturbed"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 512.0);
    assert!((row[4] - 50.0).abs() < 1e-6);
    assert!((row[5] - 2.5).abs() < 1e-6);
    // window holds the last 512 samples, starting at sample 88
    let expected = 0.3 + 2.0 * std::f64::consts::PI * 50.0 * 88.0 / fs_hz;
    let d = (row[6] - expected).rem_euclid(2.0 * std::f64::consts::PI);
    assert!(!(1e-6..=2.0 * std::f64::consts::PI - 1e-6).contains(&d));
}

#[test]
fn silent_record_is_an_estimation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let rec_path = dir.path().join("zero.f64");
    write_samples(&SampleRecord::new(1000.0, vec![0.0; 256]).unwrap(), &rec_path).unwrap();
    let cfg = write_config(dir.path(), "");
    let o = grid(&["estimate", "--config", &cfg, "--input", rec_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    fs::write(dir.path().join("zero.f64.meta"), "fs=1000 n=999\n").unwrap();
    let o = grid(&["estimate", "--config", &cfg, "--input", rec_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transient_summary_has_one_row_per_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[transient]\nn = [64, 128]\n");
    let o = grid(&["transient", "--config", &cfg]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("n,cir,amplitude_settle_nt,phase_settle_nt,phase_peak"));
    assert_eq!(csv.lines().count(), 3);
}
