mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;

fn lexmrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexmrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_json(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path
}

// Same engineered set as the evaluation tests: `fixme` is a WM question that
// only the distance-aware method gets right.
fn toy(dir: &Path) -> PathBuf {
    let q = |id: &str, text: &str, options: [&str; 4], gold: &str, rt: &str| json!({"id": id, "text_id": text, "stem": "q", "options": options, "gold": gold, "reasoning_type": rt, "split": "dev"});
    write_json(
        dir,
        "toy.json",
        json!({
            "texts": [
                {"id": "far", "grade": 3, "body": "a z z q z b"},
                {"id": "near", "grade": 4, "body": "q a"}
            ],
            "questions": [
                q("fixme", "far", ["a", "b", "c1", "d1"], "B", "WM"),
                q("easy0", "near", ["a", "c1", "d1", "e1"], "A", "WM"),
                q("easy1", "near", ["a", "c1", "d1", "e1"], "A", "WM"),
                q("easy2", "near", ["a", "c1", "d1", "e1"], "A", "WM"),
                q("pp", "near", ["a", "c1", "d1", "e1"], "A", "PP"),
                q("tie", "near", ["same", "same", "same", "same"], "C", "PP")
            ]
        }),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn forced_tie_answers_a() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    for method in ["sw", "sw_d"] {
        let out = lexmrc(&[
            "answer",
            "--dataset",
            path_str(&data),
            "--question-id",
            "tie",
            "--method",
            method,
        ]);
        assert!(out.status.success(), "{out:?}");
        assert!(stdout(&out).ends_with("predicted: A\n"), "{}", stdout(&out));
    }
}

#[test]
fn word_matching_fixture_answers_b() {
    let args = [
        "answer",
        "--dataset",
        &common::fixture("reasoning_types.json").display().to_string(),
        "--embeddings",
        &common::fixture("toy_embeddings.txt").display().to_string(),
        "--lexicon",
        &common::fixture("toy_lexicon.txt").display().to_string(),
        "--method",
        "sw_d_web",
        "--question-id",
        "wm",
        "--format",
        "json",
    ]
    .map(|s| s.to_owned());
    let out = lexmrc(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{out:?}");
    let scores: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(scores["predicted"], 1);
    assert_eq!(scores["method"], "sw_d_web");
    assert_eq!(scores["web"][1], 1.0);
}

#[test]
fn configuration_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let data = path_str(&data);

    let out = lexmrc(&["evaluate", "--dataset", data, "--method", "sw_d_web"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("embedding"));

    let out = lexmrc(&["evaluate", "--dataset", data, "--method", "random"]);
    assert_eq!(out.status.code(), Some(2));

    let out = lexmrc(&["answer", "--dataset", data, "--question-id", "nope"]);
    assert_eq!(out.status.code(), Some(2));

    let out = lexmrc(&["evaluate", "--dataset", data, "--workers", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = lexmrc(&["evaluate", "--dataset", data, "--method", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_and_data_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = lexmrc(&["stats", "--dataset", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(3));

    let bad = write_json(
        dir.path(),
        "bad.json",
        json!({
            "texts": [{"id": "t", "grade": 3, "body": "x"}],
            "questions": [{"id": "q1", "text_id": "t", "stem": "x", "options": ["a", "b", "c", "d"], "gold": 5, "split": "dev"}]
        }),
    );
    let out = lexmrc(&["stats", "--dataset", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q1"));
}

#[test]
fn repeated_evaluation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let mut outputs = Vec::new();
    for (i, (method, workers)) in [
        ("sw_d", "1"),
        ("sw_d", "1"),
        ("sw_d", "3"),
        ("random", "1"),
        ("random", "2"),
    ]
    .iter()
    .enumerate()
    {
        let out = dir.path().join(format!("r{i}.csv"));
        let status = lexmrc(&[
            "evaluate",
            "--dataset",
            path_str(&data),
            "--method",
            method,
            "--seed",
            "5",
            "--workers",
            workers,
            "--format",
            "csv",
            "--out",
            path_str(&out),
        ]);
        assert!(status.status.success(), "{status:?}");
        assert!(status.stdout.is_empty());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[3], outputs[4]);
}

#[test]
fn evaluate_reports_the_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let out = lexmrc(&[
        "evaluate",
        "--dataset",
        path_str(&data),
        "--method",
        "sw",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // fixme picks A under sw; tie has gold C.
    assert_eq!(report["questions"], 6);
    assert_eq!(report["correct"], 4);
    assert_eq!(report["records"].as_array().unwrap().len(), 6);

    let plain = stdout(&lexmrc(&["evaluate", "--dataset", path_str(&data), "--method", "sw"]));
    assert!(plain.contains("accuracy:  66.67%"), "{plain}");
    assert!(plain.contains("by reasoning_type"), "{plain}");
}

#[test]
fn compare_same_method_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let out = lexmrc(&[
        "compare",
        "--dataset",
        path_str(&data),
        "--baseline",
        "sw",
        "--candidate",
        "sw",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = 0;
    for row in reader.records() {
        assert_eq!(row.unwrap()[4].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert_eq!(rows, 2);
}

#[test]
fn compare_credits_the_fixed_question_to_its_bin() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let out = lexmrc(&[
        "compare",
        "--dataset",
        path_str(&data),
        "--baseline",
        "sw",
        "--candidate",
        "sw_d",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let wm = text.lines().find(|l| l.starts_with("WM")).unwrap();
    // One of four WM questions: 100 / 4 points.
    assert!(wm.ends_with("+25.00"), "{text}");
    let pp = text.lines().find(|l| l.starts_with("PP")).unwrap();
    assert!(pp.ends_with("0.00") && !pp.ends_with("+0.00"), "{text}");
}

#[test]
fn stats_of_single_text_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_json(
        dir.path(),
        "one.json",
        json!({
            "texts": [{"id": "t", "grade": 2, "body": "a b"}],
            "questions": [{"id": "q", "text_id": "t", "stem": "x y z", "options": ["a", "b", "c", "d"], "gold": "A", "split": "train"}]
        }),
    );
    let out = lexmrc(&["stats", "--dataset", path_str(&data), "--format", "json"]);
    assert!(out.status.success(), "{out:?}");
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["overall"]["texts"], 1);
    assert_eq!(stats["overall"]["questions"], 1);
    assert_eq!(stats["overall"]["avg_text_length"], 2.0);
    assert_eq!(stats["overall"]["avg_question_length"], 3.0);
    assert_eq!(stats["grades"]["2"]["questions"], 1);
}

#[test]
fn stats_respects_split_filter() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let out = lexmrc(&[
        "stats",
        "--dataset",
        path_str(&data),
        "--split",
        "dev",
        "--format",
        "json",
    ]);
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["overall"]["questions"], 6);
    let out = lexmrc(&[
        "stats",
        "--dataset",
        path_str(&data),
        "--split",
        "test",
        "--format",
        "json",
    ]);
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["overall"]["questions"], 0);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let cfg = write_json(
        dir.path(),
        "run.json",
        json!({"dataset": data, "method": "sw", "format": "json"}),
    );
    let out = lexmrc(&["evaluate", "--config", path_str(&cfg)]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["method"], "sw");

    let out = lexmrc(&["evaluate", "--config", path_str(&cfg), "--method", "sw_d"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["method"], "sw_d");
}

#[test]
fn batch_runs_every_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy(dir.path());
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    let script = dir.path().join("jobs.txt");
    fs::write(
        &script,
        format!(
            "# two runs over one dataset\nevaluate --dataset {d} --method sw --out {a}\n\ncompare --dataset {d} --baseline sw --candidate sw_d --out {b}\n",
            d = data.display(),
            a = a.display(),
            b = b.display()
        ),
    )
    .unwrap();
    let out = lexmrc(&["batch", path_str(&script)]);
    assert!(out.status.success(), "{out:?}");
    assert!(fs::read_to_string(&a).unwrap().contains("accuracy:"));
    assert!(fs::read_to_string(&b).unwrap().contains("+25.00"));
}
