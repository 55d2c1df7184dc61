use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use wavecast::synthetic::{synthetic_frame, synthetic_sources, SyntheticSpec};

const SMALL: &str = "\
mode = WT_ADA
target = crude_oil
lookback = 8
horizon = 3
epochs = 2
batch_size = 16
bdlstm = 4
fc = 3
grid.bdlstm = 4 | 4-4 | 6
grid.fc = 3 | 2
grid.activation = tanh | relu
grid.optimizer = adam
grid.learning_rate = 0.01
grid.decay = 1e-6
grid.l2 = 1e-4
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wavecast"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A temp dir holding a small synthetic `frame.csv` and a manifest over it.
fn workspace(extra: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let frame = synthetic_frame(&SyntheticSpec { rows: 260, seed: 3, ..Default::default() }).unwrap();
    std::fs::write(dir.path().join("frame.csv"), frame.to_csv()).unwrap();
    let manifest = dir.path().join("run.manifest");
    std::fs::write(&manifest, format!("frame = frame.csv\nseed = 11\nquiet = true\n{SMALL}{extra}")).unwrap();
    (dir, manifest)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

#[test]
fn help_exits_zero_and_unknown_flag_is_usage_error() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["train", "--help"])), 0);
    assert_eq!(code(&run(&["train", "--no-such-flag"])), 1);
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn missing_input_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere").join("crude.csv");
    let o = run(&["--seed", "1", "--out", s(dir.path()), "stats", "--frame", s(&missing)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(s(&missing)), "{}", stderr(&o));

    let o = run(&["--seed", "1", "--manifest", s(&missing), "stats"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(s(&missing)));
}

#[test]
fn no_input_at_all_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--seed", "1", "--out", s(dir.path()), "stats"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_manifest_and_data() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("bad.manifest");
    std::fs::write(&manifest, "lookback = 8\nwhat = ever\n").unwrap();
    let o = run(&["--manifest", s(&manifest), "stats"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2"));

    let frame = dir.path().join("frame.csv");
    std::fs::write(&frame, "date,a\n2020-01-01,1\n2020-01-02,oops\n").unwrap();
    let o = run(&["--seed", "1", "--out", s(dir.path()), "stats", "--frame", s(&frame)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("oops"));
}

#[test]
fn ingest_writes_frame_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let sources = synthetic_sources(&SyntheticSpec { rows: 120, seed: 5, inject_null: true, ..Default::default() });
    let mut args: Vec<String> = vec!["--seed", "1", "-q", "--out", s(dir.path()), "ingest"]
        .into_iter()
        .map(String::from)
        .collect();
    for (name, csv) in &sources.ohlcv {
        let p = dir.path().join(format!("{name}.csv"));
        std::fs::write(&p, csv).unwrap();
        args.push(format!("--{}", name.replace('_', "-")));
        args.push(s(&p).into());
    }
    let cases = dir.path().join("cases.csv");
    std::fs::write(&cases, &sources.cases).unwrap();
    args.extend(["--cases".into(), s(&cases).into()]);
    let o = bin().args(&args).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let frame = read(dir.path().join("frame.csv"));
    assert_eq!(frame.lines().next().unwrap(), "date,crude_oil,dji,sp500,nasdaq,covid_cases");
    assert_eq!(frame.lines().count(), 1 + 119);
    let stats: serde_json::Value = serde_json::from_str(&read(dir.path().join("stats.json"))).unwrap();
    assert_eq!(stats.as_array().unwrap().len(), 5);
    assert_eq!(stats[0]["variable"], "crude_oil");
    assert_eq!(stats[0]["n"], 119);
}

#[test]
fn unitroot_and_decompose_outputs() {
    let (dir, manifest) = workspace("");
    let out = dir.path().join("out");
    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "unitroot", "--max-lags", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table: serde_json::Value = serde_json::from_str(&read(out.join("unitroot.json"))).unwrap();
    let vars = table.as_array().unwrap();
    assert_eq!(vars.len(), 5);
    for v in vars {
        assert_eq!(v["cells"].as_array().unwrap().len(), 8);
    }
    let cell = &vars[0]["cells"][0];
    assert_eq!(cell["test"], "adf");
    assert!(cell["display"].as_str().unwrap().ends_with(')'));
    assert_eq!(cell["asymptotic"], true);

    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "decompose", "--levels", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(out.join("decompose").join("dji.csv"));
    assert_eq!(csv.lines().next().unwrap(), "date,cA3,cD1,cD2,cD3");
    assert_eq!(csv.lines().count(), 261);
}

#[test]
fn random_budget_runs_exactly_k_trials() {
    let (dir, manifest) = workspace("");
    let out = dir.path().join("out");
    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "gridsearch", "--budget", "random_10", "--epochs", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trials: serde_json::Value = serde_json::from_str(&read(out.join("trials.json"))).unwrap();
    let trials = trials.as_array().unwrap();
    assert_eq!(trials.len(), 10);
    let mut indices: Vec<u64> = trials.iter().map(|t| t["index"].as_u64().unwrap()).collect();
    indices.dedup();
    assert_eq!(indices.len(), 10);
    let ranking = read(out.join("ranking.csv"));
    assert!(ranking.starts_with("rank,index,"));
    assert_eq!(ranking.lines().count(), 11);

    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "gridsearch", "--budget", "random_13"]);
    assert_eq!(code(&o), 1, "k beyond the grid size");
}

#[test]
fn train_then_forecast_has_horizon_rows() {
    let (dir, manifest) = workspace("");
    let out = dir.path().join("out");
    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "train"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "forecast"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(out.join("forecast.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "date,predicted_price");
    assert_eq!(lines.len(), 1 + 3);
    for l in &lines[1..] {
        let price: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(price.is_finite());
    }
}

#[test]
fn resumed_training_matches_uninterrupted_training() {
    let (dir, manifest) = workspace("");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let m = s(&manifest);
    assert_eq!(code(&run(&["--manifest", m, "--out", s(&a), "train", "--epochs", "3"])), 0);
    assert_eq!(code(&run(&["--manifest", m, "--out", s(&b), "train", "--epochs", "1"])), 0);
    let saved = b.join("model.json");
    let o = run(&["--manifest", m, "--out", s(&b), "train", "--epochs", "2", "--resume", s(&saved)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(a.join("model.json")), read(b.join("model.json")));

    let o = run(&["--manifest", m, "--out", s(&b), "train", "--epochs", "1", "--lookback", "9", "--resume", s(&saved)]);
    assert_eq!(code(&o), 1, "resuming under different settings");
}

#[test]
fn end_to_end_run_is_idempotent() {
    let (dir, manifest) = workspace("budget = random_3\n");
    let outputs = ["trials.json", "ranking.csv", "model.json", "forecast.csv"];
    let mut runs = Vec::new();
    for (name, threads) in [("a", "2"), ("b", "2"), ("c", "1")] {
        let out = dir.path().join(name);
        let o = run(&["--manifest", s(&manifest), "--out", s(&out), "--threads", threads, "run"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        runs.push(outputs.map(|f| read(out.join(f))));
    }
    assert_eq!(runs[0], runs[1], "same seed, same files");
    assert_eq!(runs[0], runs[2], "thread count does not change results");

    let out = dir.path().join("d");
    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "--seed", "12", "run"]);
    assert_eq!(code(&o), 0);
    assert_ne!(read(out.join("trials.json")), runs[0][0], "a different seed changes the run");
}

#[test]
fn compare_reports_every_mode() {
    let (dir, manifest) = workspace("seeds = 1, 2\n");
    let out = dir.path().join("out");
    let o = run(&["--manifest", s(&manifest), "--out", s(&out), "compare", "--epochs", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&read(out.join("comparison.json"))).unwrap();
    assert_eq!(report["horizon"], 1);
    let cells = report["cells"].as_array().unwrap();
    let modes: Vec<&str> = cells.iter().map(|c| c["mode"].as_str().unwrap()).collect();
    assert_eq!(modes, ["RAW", "WT_AD", "WT_ADA"]);
    for c in cells {
        assert_eq!(c["runs"].as_array().unwrap().len(), 2);
        assert!(c["rmse"]["median"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn unseeded_runs_report_their_seed() {
    let (dir, manifest) = workspace("");
    std::fs::write(&manifest, read(&manifest).replace("seed = 11\n", "")).unwrap();
    let o = run(&["--manifest", s(&manifest), "--out", s(&dir.path().join("o")), "stats"]);
    assert_eq!(code(&o), 0);
    let err = stderr(&o);
    let seed = err.lines().find_map(|l| l.strip_prefix("seed: ")).expect("seed reported");
    assert!(seed.parse::<u64>().is_ok());
}
