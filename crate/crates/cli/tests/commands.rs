use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinmarket"))
        .current_dir(root())
        .env_remove("SPINMARKET_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn every_subcommand_produces_its_header() {
    let cases: [(&[&str], &str); 12] = [
        (&["simulate-spins", "--n", "10", "--samples", "5"], "sample,magnetization,energy_per_spin"),
        (&["entropy-curve", "--n", "8"], "energy_per_spin,entropy_per_spin"),
        (&["hysteresis", "--n", "10", "--steps", "5", "--sweeps", "5"], "branch,field_h,magnetization,std_err"),
        (&["inversion", "--n", "10", "--flip-time", "50", "--steps", "100"], "step,magnetization,field_h,beta_eff"),
        (&["magnetocaloric", "--steps", "4"], "step,magnetization,field_h,beta_eff"),
        (&["partition-zeros", "--n", "6"], "re,im"),
        (&["partition-zeros", "--model", "hierarchical", "--generations", "2"], "re,im"),
        (&["julia", "--generations", "3"], "re,im"),
        (&["fixed-point"], "t_star="),
        (&["temperature", "--input", "fixtures/eod_sample.csv", "--format", "ohlcv", "--window", "20"], "timestamp,temperature,level"),
        (&["renormalize", "--input", "fixtures/ticks_sample.csv", "--partition", "day"], "timestamp,price,volume"),
        (&["gbm", "--n", "5"], "timestamp,price,volume"),
    ];
    for (args, header) in cases {
        let text = stdout(args);
        assert!(text.starts_with(header), "{args:?}: {}", &text[..text.len().min(80)]);
    }
}

#[test]
fn renormalize_by_day_gives_one_row_per_session() {
    let text = stdout(&["renormalize", "--input", "fixtures/ticks_sample.csv", "--partition", "day"]);
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn temperature_files_feed_the_detector() {
    let dir = tempfile::tempdir().unwrap();
    let mut levels = Vec::new();
    for (k, part) in ["singletons", "fixed:13", "day"].iter().enumerate() {
        let prices = dir.path().join(format!("p{k}.csv"));
        let prev = if k == 0 { root().join("fixtures/ticks_sample.csv") } else { dir.path().join(format!("p{}.csv", k - 1)) };
        let out = run(&["renormalize", "--input", prev.to_str().unwrap(), "--partition", part, "--out", prices.to_str().unwrap()]);
        assert!(out.status.success());
        let temps = dir.path().join(format!("t{k}.csv"));
        let out = run(&["temperature", "--input", prices.to_str().unwrap(), "--window", "16", "--out", temps.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        levels.push(temps);
    }
    let mut args = vec!["detect"];
    for l in &levels {
        args.push("--level");
        args.push(l.to_str().unwrap());
    }
    assert!(stdout(&args).starts_with("timestamp,spread,T0,T1,T2\n"));
}

#[test]
fn exit_codes_by_failure_class() {
    assert_eq!(run(&["simulate-spins", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["fixed-point", "--lo", "0.6", "--hi", "0.8"]).status.code(), Some(3));
    assert_eq!(run(&["temperature", "--input", "no/such/file.csv"]).status.code(), Some(4));
    let bad = run(&["entropy-curve", "--n", "100"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error: "));
}

#[test]
fn seed_flag_beats_environment() {
    let with_env = |seed: &str, args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_spinmarket"))
            .env("SPINMARKET_SEED", seed)
            .args(args)
            .output()
            .unwrap();
        String::from_utf8(out.stdout).unwrap()
    };
    let a = with_env("3", &["gbm", "--n", "20"]);
    assert_eq!(a, stdout(&["gbm", "--n", "20", "--seed", "3"]));
    assert_ne!(a, stdout(&["gbm", "--n", "20"]));
    assert_eq!(with_env("3", &["gbm", "--n", "20", "--seed", "4"]), stdout(&["gbm", "--n", "20", "--seed", "4"]));
}

#[test]
fn plot_flag_writes_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("zeros.svg");
    stdout(&["partition-zeros", "--n", "10", "--plot", svg.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches(r#"class="marker""#).count(), 10);
    assert!(dir.path().join("zeros.csv").exists());
}
