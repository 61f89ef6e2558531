use std::process::{Command, Output};

use assoc_lab::patterns::parse_ensemble;
use assoc_lab::{PatternMode, SweepRecord};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assoc-lab"))
        .args(args)
        .env_remove("ASSOC_LAB_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_gb_is_one_per_block_and_deterministic() {
    let args = ["generate", "--mode", "gb", "--l", "8", "--c", "4", "--m", "50", "--seed", "9"];
    let text = stdout(&run(&args));
    assert_eq!(text, stdout(&run(&args)));
    let e = parse_ensemble(&text).unwrap();
    let layout = e.layout().unwrap();
    assert_eq!((layout.blocks(), layout.block_size(), e.len()), (8, 4, 50));
    assert!(e.patterns().iter().all(|p| layout.is_one_per_block(p)));
}

#[test]
fn generate_bernoulli_defaults_to_log_sparsity() {
    let text = stdout(&run(&["generate", "--mode", "bernoulli", "--n", "100", "--m", "5"]));
    let e = parse_ensemble(&text).unwrap();
    match e.mode() {
        PatternMode::Bernoulli { p } => assert_eq!(p, 100f64.ln() / 100.0),
        other => panic!("{other:?}"),
    }
    assert!(text.starts_with("dim=100 M=5 mode=bernoulli:"));
}

#[test]
fn generate_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.txt");
    let p = path.to_str().unwrap();
    stdout(&run(&["generate", "--mode", "fixed", "--n", "40", "--m", "3", "--output", p]));
    let e = parse_ensemble(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(e.patterns().iter().all(|x| x.weight() == 4));
}

#[test]
fn stability_json_schema() {
    let text = stdout(&run(&[
        "stability", "--model", "amari", "--n", "300", "--alpha", "0.1", "--trials", "40", "--format", "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["model"], "amari");
    let records: Vec<SweepRecord> = serde_json::from_value(v["records"].clone()).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert_eq!((r.dim, r.trials, r.n_resolved), (300, 40, Some(2)));
    let rate = r.rate.unwrap();
    assert!(r.ci_low.unwrap() <= rate && rate <= r.ci_high.unwrap());
    assert!(r.wall_ms.is_some());
}

#[test]
fn config_errors_exit_with_2() {
    let out = run(&["stability", "--model", "amari", "--n", "300", "--alpha", "0.1", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["sweep", "--model", "hopfield", "--n", "300", "--alpha", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["sweep", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capped_cell_is_skipped_and_exits_with_3() {
    let out = run(&["stability", "--model", "amari", "--n", "200", "--alpha", "1e6", "--reproducible"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().ends_with(",skipped"));
}

#[test]
fn sweep_grid_rows() {
    let text = stdout(&run(&[
        "sweep", "--model", "willshaw", "--n", "200,400", "--alpha", "0.05,0.2", "--gamma", "0.6", "--trials",
        "20", "--reproducible",
    ]));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let gamma = header.iter().position(|c| *c == "gamma").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == header.len() && r[gamma] == "0.59999999999999998"));
    assert!(!header.contains(&"wall_ms"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# gb run\nmodel=gb\nl=20\nc=4\norder=3\nalpha=0.5\ntrials=30\nseed=5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = stdout(&run(&["stability", "--config", cfg, "--reproducible"]));
    let b = stdout(&run(&["stability", "--config", cfg, "--reproducible", "--threads", "3"]));
    assert_eq!(a, b);
    let c = stdout(&run(&["stability", "--config", cfg, "--seed", "6", "--reproducible"]));
    assert!(c.contains("# seed=6"));
    assert!(a.contains("# l=20"));
}

#[test]
fn selftest_passes() {
    let text = stdout(&run(&["selftest", "--instances", "100"]));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
