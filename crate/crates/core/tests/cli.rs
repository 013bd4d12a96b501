use std::path::Path;
use std::process::{Command, Output};

fn dwgm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwgm")).args(args).current_dir(cwd).env("DWGM_THREADS", "1").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn simulate_then_fit_then_learn_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = dwgm(&["simulate", "--p", "5", "--n", "40", "--seed", "2", "--out", "sim"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["counts.tsv", "covariates.tsv", "graph.txt", "precision.tsv"] {
        assert!(d.join("sim").join(f).exists());
    }
    let common = ["--counts", "sim/counts.tsv", "--covariates", "sim/covariates.tsv", "--out", "fit", "--mh-iterations", "1500"];
    let o = dwgm(&[&["fit-marginals"][..], &common].concat(), d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = dwgm(
        &[&["learn-structure", "--marginals", "fit/marginals.json", "--iterations", "300"][..], &common].concat(),
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("fit/edge_probabilities.tsv").exists());
    let o = dwgm(&["evaluate", "--probabilities", "fit/edge_probabilities.tsv", "--truth", "sim/graph.txt", "--out", "ev"], d);
    let stdout = String::from_utf8_lossy(&o.stdout);
    // A graph with no edges or all edges makes the AUC undefined.
    assert!(code(&o) == 0 && stdout.starts_with("AUC ") || code(&o) == 3, "{stdout}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.tsv"), "id\ta\tb\nr1\t1\t-1\n").unwrap();
    let o = dwgm(&["pipeline", "--counts", "bad.tsv"], d);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1, column b: '-1'"));

    std::fs::write(d.join("ok.tsv"), "id\ta\tb\nr1\t1\t2\nr2\t0\t3\nr3\t4\t0\n").unwrap();
    let o = dwgm(&["pipeline", "--counts", "ok.tsv", "--chains", "0"], d);
    assert_eq!(code(&o), 4);
    std::fs::write(d.join("bad.toml"), "[chain]\nburn_in_fraction = 1.5\n").unwrap();
    let o = dwgm(&["--config", "bad.toml", "pipeline", "--counts", "ok.tsv"], d);
    assert_eq!(code(&o), 4);
    let o = dwgm(&["pipeline", "--counts", "ok.tsv", "--min-prevalence", "1.0"], d);
    assert_eq!(code(&o), 3);
    let o = dwgm(&["pipeline"], d);
    assert_eq!(code(&o), 4);
}

#[test]
fn config_file_wins_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.tsv"), "id\ta\tb\tc\nr1\t1\t2\t0\nr2\t0\t3\t1\nr3\t4\t0\t2\nr4\t2\t2\t5\n").unwrap();
    std::fs::write(d.join("run.toml"), "seed = 5\n[chain]\niterations = 20\n[marginals]\nchoice = \"empirical\"\n").unwrap();
    let o = dwgm(&["--config", "run.toml", "pipeline", "--counts", "c.tsv", "--iterations", "999", "--out", "o"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--iterations ignored"));
    let manifest = std::fs::read_to_string(d.join("o/manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["config"]["chain"]["iterations"], 20);
    assert_eq!(m["config"]["seed"], 5);
}
