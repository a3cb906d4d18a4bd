//! End-to-end runs of the `twopoint` binary on small cohorts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twopoint(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twopoint"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = twopoint(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code and the single stderr line of a failing run.
fn fails(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = twopoint(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    (out.status.code().unwrap(), lines[0].to_string())
}

fn small_cohort(dir: &Path) {
    ok(dir, &["synth", "--subjects", "2", "--reps", "3", "--duration", "1", "--seed", "7", "--out", "data"]);
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_reproducible_and_config_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_cohort(a.path());
    small_cohort(b.path());
    let ta = tree_bytes(&a.path().join("data"));
    assert_eq!(ta.len(), 2 + 2 * 3 * 10);
    assert_eq!(ta, tree_bytes(&b.path().join("data")));

    // the written run file regenerates the same dataset
    let c = tempfile::tempdir().unwrap();
    fs::copy(a.path().join("data/run.toml"), c.path().join("cfg.toml")).unwrap();
    ok(c.path(), &["--config", "cfg.toml", "synth"]);
    assert_eq!(ta, tree_bytes(&c.path().join("data")));
}

#[test]
fn train_eval_sweep_report_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_cohort(dir);
    let common = ["--data", "data", "--epochs", "3", "--folds", "3"];
    ok(dir, &[&["train", "--model", "ln,dd", "--subject", "all", "--out", "models"][..], &common].concat());
    for stem in ["ln_s00", "ln_s01", "dd_s00", "dd_s01"] {
        assert!(dir.join(format!("models/{stem}.ckpt")).is_file());
        assert!(dir.join(format!("models/{stem}.report.json")).is_file());
    }
    assert!(dir.join("models/run.toml").is_file());

    // single subject and model writes exactly the named file
    ok(dir, &[&["train", "--model", "mlp", "--subject", "1", "--out", "one.ckpt"][..], &common].concat());
    assert!(dir.join("one.ckpt").is_file());
    assert!(dir.join("one.report.json").is_file());
    assert!(dir.join("one.run.toml").is_file());

    let direction_table = ok(dir, &["eval", "--ckpt", "models", "--report", "rep"]);
    assert!(direction_table.contains("pooled over 2 subject(s)"), "{direction_table}");
    assert_eq!(direction_table.lines().filter(|l| l.contains(" LN ")).count(), 5);
    let fit_table = ok(dir, &["sweep", "--ckpt", "models", "--report", "rep"]);
    assert!(fit_table.starts_with("Interpolation fit"));
    assert!(fit_table.contains("Sweeps"));
    for f in ["eval_ln_s00.json", "sweep_dd_s01.json", "sweep_dd_s01.csv", "direction_table.txt", "direction_table.csv", "fit_table.txt", "fit_table.csv", "run.toml"] {
        assert!(dir.join("rep").join(f).is_file(), "{f}");
    }
    let curve = fs::read_to_string(dir.join("rep/sweep_ln_s00.csv")).unwrap();
    assert!(curve.starts_with("finger,scale,output\n"));
    // 5 fingers x 20 signed scales
    assert_eq!(curve.lines().count(), 1 + 5 * 20);

    let report = ok(dir, &["report", "--in", "rep", "--out", "again"]);
    assert_eq!(report, format!("{direction_table}\n{fit_table}"));
    assert_eq!(
        fs::read(dir.join("again/fit_table.csv")).unwrap(),
        fs::read(dir.join("rep/fit_table.csv")).unwrap()
    );

    let track = ok(
        dir,
        &["track", "--ckpt", "models/ln_s00.ckpt", "--scripted", "--freq", "0.5", "--duration", "4", "--report", "trk"],
    );
    assert!(track.contains("RMSE"), "{track}");
    let csv = fs::read_to_string(dir.join("trk/track.csv")).unwrap();
    assert!(csv.starts_with("t,target,decoded\n"));
    assert_eq!(csv.lines().count(), 1 + 77);

    let served = ok(
        dir,
        &[
            "serve", "--ckpt", "models/dd_s01.ckpt", "--bind", "127.0.0.1:0", "--fast", "--duration", "3",
            "--script-freq", "1", "--script-duration", "2", "--stats", "serve/stats.json",
        ],
    );
    assert!(served.contains("0 missed deadlines"), "{served}");
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("serve/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["sessions"].as_array().unwrap().len(), 1);
    assert!(stats["ticks"].as_u64().unwrap() >= 50);
}

#[test]
fn errors_are_one_line_with_category() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let (code, line) = fails(dir, &["frobnicate"]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error[usage]: "), "{line}");

    let (code, line) = fails(dir, &["eval", "--ckpt", "missing.ckpt", "--data", "nowhere"]);
    assert_eq!(code, 1);
    assert!(line.starts_with("error[io]: missing.ckpt: "), "{line}");

    let (code, line) = fails(dir, &["synth", "--subjects", "0", "--out", "d"]);
    assert_eq!((code, line.as_str()), (1, "error[synth]: synth: at least one subject is required"));

    let (code, line) = fails(dir, &["synth", "--artifacts", "hum", "--out", "d"]);
    assert_eq!(code, 2);
    assert!(line.contains("unknown artifact"), "{line}");

    let (code, line) = fails(dir, &["train", "--out", "m"]);
    assert_eq!((code, line.as_str()), (2, "error[usage]: missing --data DIR"));

    let (code, line) = fails(dir, &["sweep", "--ckpt", "x.ckpt", "--grid", "0.5:0.1"]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error[usage]: --grid"), "{line}");

    fs::write(dir.join("bad.toml"), "seed = 1\n[train]\nepoch = 3\n").unwrap();
    let (code, line) = fails(dir, &["--config", "bad.toml", "synth", "--out", "d"]);
    assert_eq!(code, 1);
    assert!(line.starts_with("error[config]: config bad.toml: unknown field `epoch`"), "{line}");

    let (code, line) = fails(dir, &["track", "--ckpt", "x.ckpt"]);
    assert_eq!(code, 2);
    assert!(line.contains("--scripted"), "{line}");

    small_cohort(dir);
    let (code, line) = fails(dir, &["train", "--data", "data", "--subject", "5", "--out", "m"]);
    assert_eq!((code, line.as_str()), (2, "error[usage]: subject 5 out of range (dataset has 2)"));
}
