use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn abnet(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abnet"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn abnet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 10] = [
    "--epochs",
    "3",
    "--train",
    "40",
    "--validation",
    "10",
    "--small-test",
    "10",
    "--large-test",
    "10",
];

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synthetic_writes_small_and_large_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["--seed", "7", "synthetic", "--task", "add", "--model", "agn"];
    args.extend(SMALL);
    let o = abnet(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "task,model,split,rmse,seed,wall_clock_s");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("add,agn,small,"));
    assert!(lines[2].starts_with("add,agn,large,"));
    assert!(dir.path().join("add_agn.abnn").exists());
    let echo = read_json(&dir.path().join("config.json"));
    assert_eq!(echo["subcommand"], "synthetic");
    assert_eq!(echo["resolved"]["runs"][0]["epochs"], 3);
}

#[test]
fn synthetic_three_models() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["synthetic", "--task", "mul", "--model", "agn,asn,deepsets"];
    args.extend(SMALL);
    let o = abnet(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    for split in ["small", "large"] {
        let models: Vec<&str> = csv
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(2) == Some(split))
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(models, ["agn", "asn", "deepsets"]);
    }
}

#[test]
fn unknown_task_lists_valid_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let o = abnet(dir.path(), &["synthetic", "--task", "div"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for t in ["add", "add1", "cbrt_sum_cubes", "mul", "bilinear_half"] {
        assert!(err.contains(t), "{err}");
    }
}

#[test]
fn unknown_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = abnet(dir.path(), &["synthetic", "--task", "add", "--epoch", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["--seed", "3", "synthetic", "--task", "add1", "--model", "agn,deepsets", "--no-timing"];
    args.extend(SMALL);
    for dir in [&a, &b] {
        assert!(abnet(dir.path(), &args).status.success());
    }
    for f in ["results.csv", "results.json", "add1_agn.abnn", "add1_deepsets.abnn", "config.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn search_writes_trials() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["--threads", "2", "search", "--task", "add", "--model", "agn", "--trials", "3"];
    args.extend(SMALL);
    let o = abnet(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let outcome = read_json(&dir.path().join("search_add_agn.json"));
    assert_eq!(outcome["trials"].as_array().unwrap().len(), 3);
    let seeds: Vec<u64> = outcome["trials"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["config"]["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, [0, 1, 2]);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 11\n[synthetic]\nepochs = 2\ntrain = 30\nvalidation = 5\nsmall_test = 5\nlarge_test = 5\n").unwrap();
    let o = abnet(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "--seed", "5", "synthetic", "--task", "add", "--epochs", "1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let echo = read_json(&dir.path().join("config.json"));
    assert_eq!(echo["seed"], 5);
    assert_eq!(echo["resolved"]["runs"][0]["epochs"], 1);
    assert_eq!(echo["resolved"]["sizes"]["train"], 30);
    assert_eq!(echo["resolved"]["runs"][0]["batch_size"], 32);

    fs::write(&cfg, "[synthetic]\nepoch = 2\n").unwrap();
    let o = abnet(dir.path(), &["--config", cfg.to_str().unwrap(), "synthetic", "--task", "add"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_poly_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = abnet(dir.path(), &["classify-poly", "--grid", "0,1;1,0.5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "Bilinear β=1 γ=0.5");

    let o = abnet(dir.path(), &["classify-poly", "--grid", "5"]);
    assert_eq!(stdout(&o).trim(), "Constant α=5");

    let o = abnet(dir.path(), &["classify-poly", "--grid", "0,0,1;0,0,0;1,0,0"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("NotAssociative"));
    let report = read_json(&dir.path().join("classification.json"));
    let w = &report["classification"]["NotAssociative"];
    let op = |x: f64, y: f64| x * x + y * y;
    let (x, y, z) = (w["x"].as_f64().unwrap(), w["y"].as_f64().unwrap(), w["z"].as_f64().unwrap());
    assert!((op(op(x, y), z) - op(x, op(y, z))).abs() > 1e-6);
}

#[test]
fn classify_poly_rejects_asymmetric_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = abnet(dir.path(), &["classify-poly", "--grid", "0,1;2,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bound_prints_value() {
    let dir = tempfile::tempdir().unwrap();
    // a K1 K2 = 2, ceil(log_2 8) = 3: 0.5 (2^3 - 1) / (2 - 1)
    let o = abnet(dir.path(), &["bound", "--epsilon", "0.5", "--a", "2", "--b", "8", "--k1", "1", "--k2", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3.5");
    let o = abnet(dir.path(), &["bound", "--epsilon", "0.5", "--a", "2", "--b", "8", "--k1", "0.25", "--k2", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

/// Two pairs whose offset is tiny, so `b - a + c` lands on `c` unless the
/// query words are excluded.
fn toy_files(dir: &Path) -> (String, String) {
    let emb = dir.join("toy.txt");
    fs::write(
        &emb,
        "5 3\nx1 1 0 0\nx2 1 0.05 0\ny1 0 1 0\ny2 0 1 0.05\nz 0 0 1\n",
    )
    .unwrap();
    let rel = dir.join("pairs.tsv");
    fs::write(&rel, "# toy\nx1\tx2\ny1\ty2\n").unwrap();
    (emb.to_str().unwrap().to_string(), rel.to_str().unwrap().to_string())
}

fn toy_eval(dir: &Path, extra: &[&str]) -> Value {
    let (emb, rel) = toy_files(dir);
    let mut args = vec![
        "analogy-eval",
        "--kind",
        "wv",
        "--embeddings",
        &emb,
        "--relations",
        &rel,
        "--train-fraction",
        "0",
        "--validation-fraction",
        "0",
    ];
    args.extend(extra);
    let o = abnet(dir, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy"));
    read_json(&dir.join("analogy_eval_wv.json"))
}

#[test]
fn analogy_eval_exclusion_flag() {
    let dir = tempfile::tempdir().unwrap();
    let full = toy_eval(dir.path(), &[]);
    assert_eq!(full["total"], 2);
    assert_eq!(full["correct"], 0);
    assert_eq!(full["examples"][0]["predicted"], full["examples"][0]["c"]);
    let excl = toy_eval(dir.path(), &["--exclude-abc"]);
    assert_eq!(excl["correct"], 2);
    assert_eq!(excl["exclude_abc"], true);
}

#[test]
fn analogy_missing_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rel) = toy_files(dir.path());
    let o = abnet(
        dir.path(),
        &["analogy-eval", "--kind", "wv", "--embeddings", "/no/such/file.txt", "--relations", &rel],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analogy_parse_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, rel) = toy_files(dir.path());
    fs::write(&emb, "5 3\nx1 1 0 0\nx2 1 oops 0\n").unwrap();
    let o = abnet(dir.path(), &["analogy-eval", "--kind", "wv", "--embeddings", &emb, "--relations", &rel]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":3:"), "{}", stderr(&o));
}

#[test]
fn analogy_train_then_eval_synthetic() {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "--synthetic",
        "--kind",
        "wv_mlp",
        "--max-train-per-category",
        "20",
        "--max-eval-per-category",
        "5",
    ];
    let mut train = vec!["--seed", "2", "analogy-train", "--epochs", "1", "--hidden", "8"];
    train.extend(common);
    let o = abnet(dir.path(), &train);
    assert!(o.status.success(), "{}", stderr(&o));
    let ckpt = dir.path().join("analogy_wv_mlp.abnn");
    assert!(ckpt.exists());

    let ckpt = ckpt.to_str().unwrap().to_string();
    let mut eval = vec!["--seed", "2", "analogy-eval", "--checkpoint", &ckpt];
    eval.extend(common);
    let o = abnet(dir.path(), &eval);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&dir.path().join("analogy_eval_wv_mlp.json"));
    assert_eq!(report["kind"], "wv_mlp");
    assert_eq!(report["total"], 45);

    let mut wrong = vec!["analogy-eval", "--kind", "wv_agn", "--checkpoint", &ckpt, "--synthetic"];
    wrong.extend(["--max-eval-per-category", "5"]);
    assert_eq!(abnet(dir.path(), &wrong).status.code(), Some(1));
}
