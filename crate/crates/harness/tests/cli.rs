use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lscov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lscov")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn simulate_writes_one_row_per_index() {
    let text = stdout(&lscov(&["simulate", "--model", "b", "--mean", "II", "--n", "120", "--seed", "4"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,t,x,epsilon");
    assert_eq!(lines.len(), 121);
    assert!(lines[1].starts_with("1,"));
    assert_eq!(text, stdout(&lscov(&["simulate", "--model", "b", "--mean", "II", "--n", "120", "--seed", "4"])));
}

#[test]
fn estimate_cov_emits_banded_triplets() {
    let text = stdout(&lscov(&["estimate-cov", "--model", "d", "--n", "200", "--half-width", "2"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,value"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert!((1..=200).contains(&i) && (1..=200).contains(&j));
        assert!(i.abs_diff(j) <= 2);
        f[2].parse::<f64>().unwrap();
    }
}

#[test]
fn bench_writes_the_summary_table() {
    let out = scratch("bench.csv");
    let o = lscov(&[
        "bench", "--experiment", "cov-loss", "--model", "c", "--mean", "III", "--n", "100,150", "--reps", "3", "--out",
        out.to_str().unwrap(),
    ]);
    stdout(&o);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,mean,n,estimator,mean_loss,se,reps");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("c,III,100,local,"));
    assert!(lines[4].starts_with("c,III,150,stationary,") && lines[4].ends_with(",3"));
}

#[test]
fn qq_table_has_one_pair_per_replication() {
    let text = stdout(&lscov(&["bench", "--experiment", "qq", "--model", "tvar6", "--n", "150", "--reps", "4"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theoretical,sample");
    assert_eq!(lines.len(), 5);
}

#[test]
fn config_file_and_flags_combine() {
    let cfg = scratch("sim.toml");
    std::fs::write(&cfg, "[run]\nseed = 9\n\n[bench]\nmodel = \"d\"\nn = [60]\n").unwrap();
    let from_file = stdout(&lscov(&["simulate", "--config", cfg.to_str().unwrap()]));
    let from_flags = stdout(&lscov(&["simulate", "--model", "d", "--n", "60", "--seed", "9"]));
    assert_eq!(from_file, from_flags);
    let overridden = stdout(&lscov(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "10"]));
    assert_ne!(overridden, from_file);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "[bench]\nmodle = \"a\"\n").unwrap();
    let o = lscov(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("modle"));
}

#[test]
fn analyze_respects_start() {
    let prices = fixture("prices.csv");
    let text = stdout(&lscov(&["analyze", "--input", prices.to_str().unwrap(), "--log-abs-returns", "--start", "700"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,prediction,realized,error,standardized_error");
    // 748 finite values remain, so steps 700..=748 are forecast
    assert_eq!(lines.len() - 1, 49);
    assert!(lines[1].starts_with("700,"));
}

#[test]
fn analyze_reports_missing_column() {
    let prices = fixture("prices.csv");
    let o = lscov(&["analyze", "--input", prices.to_str().unwrap(), "--column", "volume", "--steps", "5"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("volume"));
}
