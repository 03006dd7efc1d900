use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use radarnas::association_roi::{file, Split};
use radarnas::Category;

fn radarnas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radarnas"))
        .args(args)
        .output()
        .expect("failed to launch radarnas")
}

fn ok(args: &[&str]) -> String {
    let o = radarnas(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&o.stderr),
        String::from_utf8_lossy(&o.stdout)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    radarnas(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Relative path -> bytes for every file below `root`.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

/// Simulated and preprocessed small dataset in `out`.
fn prepared(out: &Path, tracks: &str, frames: &str) {
    ok(&[
        "simulate",
        "--tracks",
        tracks,
        "--frames",
        frames,
        "--seed",
        "1",
        "--out",
        s(out),
    ]);
    ok(&["preprocess", "--seed", "1", "--out", s(out)]);
}

#[test]
fn simulate_is_reproducible_and_creates_the_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("nested/a");
    let b = dir.path().join("b");
    ok(&[
        "simulate",
        "--tracks",
        "29",
        "--frames",
        "2",
        "--seed",
        "1",
        "--out",
        s(&a),
    ]);
    ok(&[
        "simulate",
        "--tracks",
        "29",
        "--frames",
        "2",
        "--seed",
        "1",
        "--out",
        s(&b),
    ]);
    let (sa, sb) = (snapshot(&a.join("raw")), snapshot(&b.join("raw")));
    assert_eq!(sa.len(), 1 + 29 * 3);
    assert_eq!(sa, sb);
    // rerun into the same directory replaces it with identical content
    ok(&[
        "simulate",
        "--tracks",
        "29",
        "--frames",
        "2",
        "--seed",
        "1",
        "--out",
        s(&a),
    ]);
    assert_eq!(snapshot(&a.join("raw")), sb);
    let index = fs::read_to_string(a.join("raw/dataset.json")).unwrap();
    assert_eq!(index.matches("\"TwoWheeler\"").count(), 3);
    assert_eq!(index.matches("\"Car\"").count(), 10);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    assert_eq!(code(&["simulate", "--car", "0", "--out", out]), 2);
    assert_eq!(code(&["simulate", "--tracks", "0", "--out", out]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["train", "--out", out]), 2);
    assert_eq!(code(&["train", "--model", "resnet", "--out", out]), 2);
    assert_eq!(code(&["nas", "--budget", "3", "--out", out]), 2);
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[train]\nlearning_rate = -1.0\n").unwrap();
    assert_eq!(code(&["knn", "--config", s(&cfg), "--out", out]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn runtime_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    // no dataset yet
    assert_eq!(code(&["knn", "--out", out]), 1);
    assert_eq!(code(&["preprocess", "--out", out]), 1);
    // a held lock blocks the directory
    fs::write(dir.path().join(".radarnas.lock"), "1").unwrap();
    assert_eq!(code(&["simulate", "--tracks", "8", "--out", out]), 1);
}

#[test]
fn preprocess_is_reproducible_and_leaves_its_input_alone() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    prepared(&a, "20", "3");
    let raw_before = snapshot(&a.join("raw"));
    let b = dir.path().join("b");
    let summary = ok(&[
        "preprocess",
        "--seed",
        "1",
        "--raw",
        s(&a.join("raw")),
        "--out",
        s(&b),
    ]);
    assert!(summary.contains("train") && summary.contains("test"));
    assert_eq!(snapshot(&a.join("raw")), raw_before);
    assert_eq!(
        fs::read(a.join("rois.roids")).unwrap(),
        fs::read(b.join("rois.roids")).unwrap()
    );

    let ds = file::read(&a.join("rois.roids")).unwrap();
    assert!(ds
        .samples
        .iter()
        .all(|x| x.roi.iter().all(|&v| (0.0..=1.0).contains(&v))));
    // whole tracks per split
    let mut seen = BTreeMap::new();
    for x in &ds.samples {
        assert_eq!(*seen.entry(x.track_id).or_insert(x.split), x.split);
    }
}

#[test]
fn train_eval_and_knn_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    prepared(out, "16", "3");
    let text = ok(&[
        "train",
        "--model",
        "hybrid",
        "--runs",
        "2",
        "--epochs",
        "2",
        "--out",
        s(out),
    ]);
    assert!(text.contains("Δparams (hybrid - spectrum) = 560"), "{text}");

    // class weights printed match N / (C * N_c) on the training split
    let ds = file::read(&out.join("rois.roids")).unwrap();
    let train = ds.split(Split::Train);
    for c in Category::ALL {
        let n_c = train.iter().filter(|x| x.category == c).count();
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("class weight {c} ")))
            .unwrap();
        let printed: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
        let expect = train.len() as f64 / (4.0 * n_c as f64);
        assert!((printed - expect).abs() < 1e-4, "{line} vs {expect}");
    }

    let run_dir = out.join("train/hybrid");
    for f in [
        "run_00.json",
        "run_00.bin",
        "run_01.bin",
        "history_run_01.csv",
        "report.json",
        "confusion_mean.csv",
    ] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let history = fs::read_to_string(run_dir.join("history_run_00.csv")).unwrap();
    assert_eq!(
        history.lines().next().unwrap(),
        "epoch,train_loss,val_mean_acc"
    );
    assert_eq!(history.lines().count(), 3);

    ok(&[
        "train",
        "--model",
        "reflection-only",
        "--runs",
        "1",
        "--epochs",
        "1",
        "--out",
        s(out),
    ]);
    let cmp = ok(&[
        "eval",
        s(&run_dir),
        s(&out.join("train/reflection-only/run_00")),
        "--out",
        s(out),
    ]);
    assert!(cmp.contains("2 runs: mean accuracy"));
    assert!(out.join("eval/comparison.txt").exists());
    assert!(out.join("eval/set1/confusion_variance.csv").exists());

    let knn = ok(&["knn", "--out", s(out)]);
    let k: usize = knn
        .lines()
        .find_map(|l| l.strip_prefix("selected k = "))
        .and_then(|r| r.split(';').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!([3, 4, 5, 7, 10].contains(&k));
}

#[test]
fn eval_on_training_data_of_an_overfit_model_is_near_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    prepared(out, "12", "3");
    ok(&[
        "train",
        "--model",
        "hybrid",
        "--runs",
        "1",
        "--epochs",
        "300",
        "--out",
        s(out),
    ]);
    ok(&[
        "eval",
        s(&out.join("train/hybrid/run_00.json")),
        "--split",
        "train",
        "--out",
        s(out),
    ]);
    let csv = fs::read_to_string(out.join("eval/set1/confusion_run_00.csv")).unwrap();
    for (i, line) in csv.lines().skip(1).enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!(v[i] >= 0.9, "row {i}: {line}");
    }
}

#[test]
fn eval_rejects_mismatched_or_broken_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    prepared(out, "12", "2");
    ok(&[
        "train",
        "--model",
        "spectrum",
        "--runs",
        "1",
        "--epochs",
        "1",
        "--out",
        s(out),
    ]);
    let ck = out.join("train/spectrum/run_00");

    let small = dir.path().join("small");
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, "[roi]\nsize = 16\n").unwrap();
    ok(&[
        "preprocess",
        "--config",
        s(&cfg),
        "--raw",
        s(&out.join("raw")),
        "--out",
        s(&small),
    ]);
    let o = radarnas(&[
        "eval",
        s(&ck),
        "--data",
        s(&small.join("rois.roids")),
        "--out",
        s(&small),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not fit"));

    let bin = ck.with_extension("bin");
    let bytes = fs::read(&bin).unwrap();
    fs::write(&bin, &bytes[..bytes.len() - 4]).unwrap();
    assert_eq!(code(&["eval", s(&ck), "--out", s(out)]), 1);
}

#[test]
fn nas_writes_a_verified_front_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    prepared(&data, "12", "2");
    let cfg = dir.path().join("nas.toml");
    fs::write(
        &cfg,
        "[nas]\nbudget = 6\npopulation = 3\nsample = 2\nepochs = 1\nmin_accuracy = 0.0\n",
    )
    .unwrap();
    let roi = data.join("rois.roids");
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "nas",
            "--config",
            s(&cfg),
            "--data",
            s(&roi),
            "--seed",
            "4",
            "--out",
            s(&out),
        ]);
        out.join("nas")
    };
    let (a, b) = (run("a"), run("b"));
    for f in [
        "archive.jsonl",
        "front.csv",
        "candidate.json",
        "summary.txt",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read_to_string(a.join("archive.jsonl"))
            .unwrap()
            .lines()
            .count(),
        6
    );
    radarnas::nas_engine::read_front_csv(&a.join("front.csv")).unwrap();

    // the picked genome feeds straight back into training
    let genome = a.join("candidate.json");
    let text = ok(&[
        "train",
        "--model",
        &format!("spectrum:{}", s(&genome)),
        "--runs",
        "1",
        "--epochs",
        "1",
        "--data",
        s(&roi),
        "--out",
        s(&dir.path().join("c")),
    ]);
    assert!(text.contains("model spectrum"));
}
