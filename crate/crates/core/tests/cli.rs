use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsetopo"))
}

fn run<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok<S: AsRef<std::ffi::OsStr> + std::fmt::Debug>(args: &[S]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Relative paths of result files below `dir`, sorted.
fn outputs(dir: &Path) -> Vec<PathBuf> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.extension().is_some_and(|x| x == "csv" || x == "png" || x == "topo" || x == "ckpt") {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// Re-run from `<first>/run.json` into a fresh directory and compare bytes.
fn assert_rerun_identical(verb: &str, first: &Path) {
    let second = first.with_extension("rerun");
    ok(&[verb, "--config", s(&first.join("run.json")), "--out", s(&second)]);
    let (a, b) = (outputs(first), outputs(&second));
    assert!(!a.is_empty(), "{verb} wrote no outputs");
    assert_eq!(a, b);
    for f in &a {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{verb}: {}", f.display());
    }
    assert_eq!(fs::read(first.join("run.json")).unwrap(), fs::read(second.join("run.json")).unwrap());
}

#[test]
fn topology_verbs_rerun_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let d = |n: &str| tmp.path().join(n);
    ok(&["init", "--widths", "30,20,20,5", "--density", "0.2", "--seed", "4", "--out", s(&d("init"))]);
    assert_rerun_identical("init", &d("init"));
    let root = d("init").join("topology.topo");
    ok(&["perturb", s(&root), "--fraction", "0.1", "--seed", "2", "--out", s(&d("perturb"))]);
    assert_rerun_identical("perturb", &d("perturb"));
    let child = d("perturb").join("perturbed.topo");
    ok(&["distance", s(&root), s(&child), "--out", s(&d("distance"))]);
    assert_rerun_identical("distance", &d("distance"));
    ok(&["family", "--widths", "30,20,20,5", "--density", "0.2", "--generations", "4", "--out", s(&d("family"))]);
    assert_rerun_identical("family", &d("family"));
    ok(&["pairwise", s(&d("family").join("topologies")), "--layers", "2", "--out", s(&d("pairwise"))]);
    assert_rerun_identical("pairwise", &d("pairwise"));
    ok(&["heatmap", s(&d("family").join("nnstd.csv")), "--cell", "3", "--out", s(&d("heatmap"))]);
    assert_rerun_identical("heatmap", &d("heatmap"));

    let m = fs::read_to_string(d("family").join("nnstd.csv")).unwrap();
    assert_eq!(m.lines().count(), 6);
    assert!(m.lines().nth(1).unwrap().starts_with("w0,0.000000,"));
    let layers = fs::read_to_string(d("pairwise").join("nnstd.csv")).unwrap();
    assert!(layers.starts_with("network,w0,w1,w2,w3,w4\n"));
    assert!(d("pairwise").join("layer_1.csv").exists() && !d("pairwise").join("layer_2.csv").exists());
}

#[test]
fn training_verbs_rerun_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let d = |n: &str| tmp.path().join(n);
    let common = ["--dataset", "synthetic", "--epochs", "2", "--workers", "2"];
    let with = |extra: &[&str]| -> Vec<String> { extra.iter().chain(&common).map(|x| x.to_string()).collect() };

    let train = with(&["train", "--out", s(&d("train"))]);
    ok(&train);
    assert_rerun_identical("train", &d("train"));
    let sweep = with(&["density-sweep", "--densities", "0.1,0.3", "--seeds", "0,1", "--out", s(&d("sweep"))]);
    ok(&sweep);
    assert_rerun_identical("density-sweep", &d("sweep"));
    let evolve = with(&["evolve", "--members", "3", "--out", s(&d("evolve"))]);
    ok(&evolve);
    assert_rerun_identical("evolve", &d("evolve"));
    let retrain = with(&["retrain", s(&d("evolve")), "--out", s(&d("retrain"))]);
    ok(&retrain);
    assert_rerun_identical("retrain", &d("retrain"));

    let table = fs::read_to_string(d("retrain").join("retrain.csv")).unwrap();
    assert!(table.starts_with("snapshot_epoch,mode,n,mean_accuracy,std_accuracy\n"));
    assert!(table.contains("\n2,CONTINUE,3,"));
    let sweep_rows = fs::read_to_string(d("sweep").join("accuracy.csv")).unwrap();
    assert_eq!(sweep_rows.lines().count(), 1 + 2 * 2 * 2 + 2);
    assert!(sweep_rows.contains("1.000000,DENSE,1,"));
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let base = ["density-sweep", "--dataset", "synthetic", "--epochs", "2", "--densities", "0.2", "--seeds", "0,1,2"];
    let mut one: Vec<&str> = base.to_vec();
    one.extend(["--workers", "1", "--out", s(&a)]);
    let mut three: Vec<&str> = base.to_vec();
    three.extend(["--workers", "3", "--out", s(&b)]);
    ok(&one);
    ok(&three);
    assert_eq!(fs::read(a.join("accuracy.csv")).unwrap(), fs::read(b.join("accuracy.csv")).unwrap());
}

#[test]
fn failures_have_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    // usage
    assert_eq!(code(&["family", "--no-such-flag"]), 2);
    // configuration
    assert_eq!(code(&["family", "--density", "1.5", "--out", s(&out)]), 2);
    // parse
    let bad = tmp.path().join("bad.topo");
    fs::write(&bad, "sparsetopo-topology 1\nwidths 2 2\nedges 1\nepsilon none\nseed none\nlayer 0\n5 0\n").unwrap();
    assert_eq!(code(&["distance", s(&bad), s(&bad), "--out", s(&out)]), 3);
    let ragged = tmp.path().join("ragged.csv");
    fs::write(&ragged, "network,a,b\na,0,1\nb,1\n").unwrap();
    assert_eq!(code(&["heatmap", s(&ragged), "--out", s(&out)]), 3);
    // io
    assert_eq!(code(&["distance", "missing.topo", "missing.topo", "--out", s(&out)]), 4);
    // data
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let status = bin()
        .args(["train", "--epochs", "1", "--out", s(&out)])
        .env("SPARSETOPO_DATA", &empty)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(6));
}

#[test]
fn missing_snapshot_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let train = tmp.path().join("train");
    ok(&["train", "--dataset", "synthetic", "--epochs", "2", "--out", s(&train)]);
    let out = run(&["retrain", s(&train), "--dataset", "synthetic", "--snapshot-epochs", "7", "--out", s(&tmp.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no snapshot for epoch 7"));
}
