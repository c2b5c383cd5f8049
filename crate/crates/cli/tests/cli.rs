use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nliprobe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nliprobe"))
        .args(args)
        .current_dir(cwd)
        .env_remove("NLIPROBE_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = nliprobe(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A small synthetic corpus under `<dir>/data`.
fn synth(dir: &Path) {
    ok(&["synth", "--examples", "600", "--seed", "3"], dir);
}

const FAST: [&str; 6] = [
    "--epochs",
    "2",
    "--batch-size",
    "32",
    "--checkpoint-interval",
    "10",
];

#[test]
fn stats_respects_k() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let text = ok(
        &["stats", "--corpus", "out/data/synth_train.jsonl", "-k", "2"],
        tmp.path(),
    );
    assert!(!text.is_empty());
    let json = read_json(&tmp.path().join("out/reports/stats.json"));
    assert_eq!(json["examples"], 480);
    let report = &json["report"];
    assert_eq!(report["k"], 2);
    assert_eq!(report["subject_nouns"].as_array().unwrap().len(), 2);
    assert_eq!(report["main_verbs"].as_array().unwrap().len(), 2);
    assert_eq!(report["expected"]["p_value"], 1.0);
    for file in ["stats.txt", "stats.svg", "counts.csv"] {
        assert!(
            tmp.path().join("out/reports").join(file).is_file(),
            "{file}"
        );
    }
}

#[test]
fn augment_writes_one_line_per_copy() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let summary: Value = serde_json::from_str(&ok(
        &[
            "augment",
            "--corpus",
            "out/data/synth_train.jsonl",
            "--strategy",
            "synonym_wordnet",
            "--copies",
            "2",
        ],
        tmp.path(),
    ))
    .unwrap();
    assert_eq!(summary["examples_out"], 960);
    let written =
        fs::read_to_string(tmp.path().join("out/augmented/synonym_wordnet.jsonl")).unwrap();
    assert_eq!(written.lines().count(), 960);
}

#[test]
fn word_embedding_without_table_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let out = nliprobe(
        &[
            "augment",
            "--corpus",
            "out/data/synth_train.jsonl",
            "--strategy",
            "word_embedding",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--embeddings"), "{stderr}");
}

#[test]
fn data_dir_resolves_relative_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    ok(
        &[
            "--data-dir",
            "out/data",
            "stats",
            "--corpus",
            "synth_dev.jsonl",
            "--split",
            "dev",
        ],
        tmp.path(),
    );
    assert_eq!(
        read_json(&tmp.path().join("out/reports/stats.json"))["examples"],
        60
    );
}

#[test]
fn baseline_row_matches_standalone_training() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let data = [
        "--train",
        "out/data/synth_train.jsonl",
        "--dev",
        "out/data/synth_dev.jsonl",
        "--test",
        "out/data/synth_test.jsonl",
    ];
    let mut args = vec!["--out-dir", "exp", "experiment", "--strategies", "none"];
    args.extend(data);
    args.extend(FAST);
    let table = ok(&args, tmp.path());
    assert_eq!(table.lines().count(), 3, "{table}");

    let json = read_json(&tmp.path().join("exp/tables/experiment.json"));
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row["strategy"], "none");
    assert_eq!(row["pair_delta"], 0.0);
    assert_eq!(row["hypothesis_only_delta"], 0.0);

    for (mode, column) in [
        ("pair", "pair_accuracy"),
        ("hypothesis_only", "hypothesis_only_accuracy"),
    ] {
        let mut args = vec!["--out-dir", "solo", "train", "--mode", mode];
        args.extend(data);
        args.extend(FAST);
        ok(&args, tmp.path());
        let model = format!("solo/models/{mode}.json");
        let report: Value = serde_json::from_str(&ok(
            &[
                "--out-dir",
                "solo",
                "evaluate",
                "--model",
                &model,
                "--corpus",
                "out/data/synth_test.jsonl",
            ],
            tmp.path(),
        ))
        .unwrap();
        assert_eq!(report["accuracy"], row[column], "{mode}");
        assert_eq!(
            fs::read(tmp.path().join(&model)).unwrap(),
            fs::read(tmp.path().join(format!("exp/models/none_{mode}.json"))).unwrap()
        );
    }
}

#[test]
fn unknown_config_fields_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.json"), r#"{"seed": 1, "sede": 2}"#).unwrap();
    let out = nliprobe(
        &["--config", "c.json", "synth", "--examples", "30"],
        tmp.path(),
    );
    assert!(!out.status.success());
}
