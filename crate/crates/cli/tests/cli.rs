use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pfp_cli::{simlab_config, Cli, Command as Sub, SimlabCommand};
use pfp_core::io::write_sample;
use pfp_core::simlab::{simulate_replication, Setting, SigmaProfile, SimConfig};
use clap::Parser;

const SMALL: &str = "\
# small forecast study
dim = 5
grid_points = 24
n_curves = 120
burn_in = 20
window = 60
n_train = 40
n_test = 10
replications = 2
dims = 1..=3
dx = 3
dy = 3
";

fn pfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfp")).args(args).env_remove("RUST_LOG").output().unwrap()
}

fn data_file(dir: &Path) -> PathBuf {
    let cfg = SimConfig { dim: 7, grid_points: 24, n_curves: 90, burn_in: 20, ..SimConfig::default() };
    let setting = Setting::new(SigmaProfile::Harmonic, 0.8, 0.0);
    let series = simulate_replication::<f64>(&cfg, &setting, 0).unwrap();
    let path = dir.join("data.csv");
    write_sample(std::fs::File::create(&path).unwrap(), &series.to_sample().unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = pfp(&["pfp", "predict", "--tau", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pfp(&["fpca", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_or_malformed_data_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pfp(&["fpca", "--in", s(&dir.path().join("none.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t_1,t_2,t_3\n1,oops,3\n").unwrap();
    let out = pfp(&["fpca", "--in", s(&bad), "--dim", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_of_range_hyperparameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path());
    let out = pfp(&["pfp", "predict", "--in", s(&data), "--tau", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pfp(&["far-predict", "--in", s(&data), "--dim", "7", "--d", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn select_mode_predicts_the_held_out_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path());
    let out_dir = dir.path().join("run");
    let out = pfp(&[
        "pfp", "predict", "--tau", "0.5", "--select", "--in", s(&data), "--dim", "7", "--p", "1", "--d", "4",
        "--dx", "3", "--dy", "3", "--window", "50", "--out", s(&out_dir), "--svg",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("prediction.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,far,residual,error,prediction,observed");
    assert_eq!(lines.count(), 12);
    assert!(std::fs::read_to_string(out_dir.join("summary.md")).unwrap().contains("PMSE"));
    assert!(std::fs::read_to_string(out_dir.join("prediction.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path());
    let run = |name: &str| {
        let o = dir.path().join(name);
        let out = pfp(&[
            "pfp", "predict", "--tau", "0.5", "--in", s(&data), "--dim", "7", "--window", "50", "--bands", "-B",
            "200", "--seed", "7", "--out", s(&o),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(o.join("prediction.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert!(String::from_utf8(a).unwrap().starts_with("t,far,residual,error,prediction,lower,upper,observed"));
}

#[test]
fn noisy_prediction_with_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path());
    let partial = dir.path().join("partial.csv");
    let left: Vec<String> = (0..12).map(|j| format!("{:.3}", 0.1 * j as f64)).collect();
    std::fs::write(&partial, left.join(",") + "\n").unwrap();
    let out = pfp(&[
        "pfp", "predict", "--tau", "0.5", "--in", s(&data), "--dim", "7", "--window", "40", "--noisy", "--h", "3",
        "--q-max", "2", "--partial", s(&partial),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("== prediction.csv =="));
    let row: Vec<&str> = stdout.lines().find(|l| l.starts_with("0.52")).unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    assert_ne!(row[3], "0.000000");

    std::fs::write(&partial, "1,2,3\n").unwrap();
    let out = pfp(&["pfp", "predict", "--tau", "0.5", "--in", s(&data), "--dim", "7", "--partial", s(&partial)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fpca_far_and_ffr_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path());
    let o = dir.path().join("fpca");
    assert!(pfp(&["fpca", "--in", s(&data), "--dim", "7", "--components", "3", "--out", s(&o)]).status.success());
    let eig = std::fs::read_to_string(o.join("eigenvalues.csv")).unwrap();
    assert_eq!(eig.lines().count(), 4);
    assert_eq!(std::fs::read_to_string(o.join("scores.csv")).unwrap().lines().count(), 91);

    let o = dir.path().join("far");
    let out = pfp(&["far-predict", "--in", s(&data), "--dim", "7", "--select", "--p", "2", "--d", "5", "--h", "3", "--out", s(&o)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(o.join("forecast.csv")).unwrap().lines().count(), 4);

    let o = dir.path().join("ffr");
    let out = pfp(&["ffr", "--in", s(&data), "--dim", "7", "--tau", "0.5", "--select", "--out", s(&o)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kernel = std::fs::read_to_string(o.join("kernel.csv")).unwrap();
    assert_eq!(kernel.lines().count(), 13);
}

#[test]
fn simlab_seed_flag_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("sim.cfg");
    std::fs::write(&cfg_path, SMALL).unwrap();
    let cli = Cli::try_parse_from(["pfp", "simlab", "run", "--config", s(&cfg_path), "--seed", "7"]).unwrap();
    let Sub::Simlab(SimlabCommand::Run(args)) = cli.command else { panic!("wrong subcommand") };
    let cfg = simlab_config(&args, Vec::<(String, String)>::new()).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.dim, 5);
    let env = vec![("PFP_REPLICATIONS".to_string(), "3".to_string()), ("PFP_SEED".to_string(), "9".to_string())];
    let cfg = simlab_config(&args, env).unwrap();
    assert_eq!((cfg.replications, cfg.seed), (3, 7));
}

#[test]
fn simlab_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("sim.cfg");
    std::fs::write(&cfg_path, SMALL).unwrap();
    let run = |name: &str| {
        let o = dir.path().join(name);
        let out = pfp(&["simlab", "run", "--config", s(&cfg_path), "--seed", "3", "--out", s(&o), "--svg"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(o.join("trajectories.svg").exists());
        std::fs::read(o.join("report.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let header = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
    for col in ["fFPE_PFP", "PMSE_PFP", "PMSE_ts", "fFPE_r", "PMSE_r"] {
        assert!(header.split(',').any(|c| c == col), "missing {col}");
    }
}

#[test]
fn simlab_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("sim.cfg");
    std::fs::write(&cfg_path, "window = 500\n").unwrap();
    assert_eq!(pfp(&["simlab", "run", "--config", s(&cfg_path)]).status.code(), Some(2));
    std::fs::write(&cfg_path, "no_such_key = 1\n").unwrap();
    assert_ne!(pfp(&["simlab", "run", "--config", s(&cfg_path)]).status.code(), Some(0));
}
