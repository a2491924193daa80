//! The `ambiq` binary run as a subprocess.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use ambiq_cli::{load_tables_dir, DetectRequest, Detector, ServiceState};
use ambiq_core::dataset::load_dataset;
use ambiq_core::{Category, MatchConfig};
use serde_json::Value;

fn ambiq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ambiq")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn table(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tables").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let out = ambiq(&["detect", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(ambiq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ambiq(&[]).status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = ambiq(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    for sub in ["generate", "derive-labels", "train", "detect", "eval", "serve"] {
        assert!(text.contains(sub), "{sub}");
    }
}

#[test]
fn missing_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = dir.path().join("out.jsonl");
    assert_eq!(ambiq(&["detect", "--table", s(&missing), "--question", "q"]).status.code(), Some(2));
    assert_eq!(
        ambiq(&["detect", "--table", s(&table("movies.json")), "--question", "q", "--model", s(&missing)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ambiq(&["eval", "--data", s(&missing)]).status.code(), Some(2));
    assert_eq!(ambiq(&["generate", "--seed-corpus", s(&missing), "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(ambiq(&["serve", "--tables-dir", s(&missing)]).status.code(), Some(2));
}

#[test]
fn invalid_values_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.jsonl");
    let movies = table("movies.json");
    assert_eq!(ambiq(&["generate", "--synthetic", "8", "--out", s(&out), "--ratio", "1.5"]).status.code(), Some(1));
    assert_eq!(ambiq(&["generate", "--synthetic", "8", "--out", s(&out), "--threshold", "0"]).status.code(), Some(1));
    assert_eq!(ambiq(&["detect", "--table", s(&movies), "--question", "  "]).status.code(), Some(1));
    assert_eq!(ambiq(&["detect", "--table", s(&movies), "--question", "q", "--top-k", "0"]).status.code(), Some(1));

    let bad_table = dir.path().join("bad.json");
    std::fs::write(&bad_table, r#"{"table_id":"t","columns":["A","a"]}"#).unwrap();
    assert_eq!(ambiq(&["detect", "--table", s(&bad_table), "--question", "q"]).status.code(), Some(1));
    let bad_data = dir.path().join("bad.jsonl");
    std::fs::write(&bad_data, "{not json}\n").unwrap();
    assert_eq!(ambiq(&["eval", "--data", s(&bad_data)]).status.code(), Some(1));
    let bad_model = dir.path().join("bad_model.json");
    std::fs::write(&bad_model, "{}").unwrap();
    assert_eq!(
        ambiq(&["detect", "--table", s(&movies), "--question", "q", "--model", s(&bad_model)]).status.code(),
        Some(1)
    );
}

#[test]
fn detect_rating_question_is_ambiguous() {
    let out = ambiq(&["detect", "--table", s(&table("movies.json")), "--question", "what is the rating of Avatar"]);
    let body = stdout_json(&out);
    assert_eq!(body["verdict"], "ambiguous");
    assert_eq!(body["labels"].as_array().unwrap().len(), 6);
}

#[test]
fn stopwords_flag_changes_matching() {
    let dir = tempfile::tempdir().unwrap();
    let stop = dir.path().join("stop.txt");
    std::fs::write(&stop, "what\nis\nthe\nof\nrating\n").unwrap();
    let movies = table("movies.json");
    let args = ["detect", "--table", s(&movies), "--question", "what is the rating of Avatar"];
    let default = stdout_json(&ambiq(&args));
    assert_eq!(default["verdict"], "ambiguous");
    let mut with_stop = args.to_vec();
    with_stop.extend(["--stopwords", s(&stop)]);
    let body = stdout_json(&ambiq(&with_stop));
    assert_eq!(body["verdict"], "answerable");
}

fn service_payload(detector: Detector, cfg: MatchConfig, table_id: &str, question: &str) -> Value {
    let st = ServiceState::new(detector, load_tables_dir(table("").as_path()).unwrap(), cfg);
    let payload = Arc::new(st).detect(&DetectRequest { table_id: table_id.into(), question: question.into() }).unwrap();
    serde_json::to_value(payload).unwrap()
}

const QUESTIONS: [(&str, &str, &str); 4] = [
    ("movies.json", "movies", "what is the rating of Avatar"),
    ("movies.json", "movies", "Which director made The Godfather?"),
    ("phones.json", "phones", "Which model name has the highest price?"),
    ("phones.json", "phones", "what is the storage of the Samsung phone"),
];

#[test]
fn detect_matches_the_service_with_the_heuristic() {
    for (file, id, q) in QUESTIONS {
        let cli = stdout_json(&ambiq(&["detect", "--table", s(&table(file)), "--question", q]));
        assert_eq!(cli, service_payload(Detector::Heuristic, MatchConfig::default(), id, q), "{q}");
    }
}

/// generate → train → eval → detect, with the CLI detect payload compared to the service's.
#[test]
fn full_pipeline_with_a_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test, model) =
        (dir.path().join("train.jsonl"), dir.path().join("test.jsonl"), dir.path().join("m.json"));

    let stats = stdout_json(&ambiq(&[
        "generate",
        "--synthetic",
        "400",
        "--out",
        s(&train),
        "--ratio",
        "0.2",
        "--rng-seed",
        "7",
    ]));
    assert_eq!(stats["seeds"], 400);
    assert_eq!(stats["examples"], 480);
    assert_eq!(stats["ambiguous"].as_u64().unwrap() + stats["unanswerable"].as_u64().unwrap(), 80);
    let data = load_dataset(&train).unwrap();
    assert_eq!(data.len(), 480);
    assert_eq!(data.iter().filter(|e| e.category == Category::Answerable).count(), 400);

    let again = dir.path().join("again.jsonl");
    stdout_json(&ambiq(&["generate", "--synthetic", "400", "--out", s(&again), "--ratio", "0.2", "--rng-seed", "7"]));
    assert_eq!(std::fs::read(&train).unwrap(), std::fs::read(&again).unwrap());

    stdout_json(&ambiq(&["generate", "--synthetic", "100", "--out", s(&test), "--rng-seed", "8"]));
    let trained =
        stdout_json(&ambiq(&["train", "--data", s(&train), "--out", s(&model), "--epochs", "5", "--rng-seed", "3"]));
    assert_eq!(trained["examples"], 480);
    assert_eq!(trained["loss_history"].as_array().unwrap().len(), 6);

    let report = stdout_json(&ambiq(&["eval", "--model", s(&model), "--data", s(&test)]));
    assert_eq!(report["examples"], 120);
    for key in ["label_accuracy", "grounding_accuracy", "span_exact"] {
        assert!(report[key].is_object(), "{key}");
    }
    assert!(report["label_accuracy"]["O"]["accuracy"].as_f64().unwrap() > 0.9);

    let crf = ambiq_core::CrfModel::load(&model).unwrap();
    let cfg = crf.config.match_config();
    for (file, id, q) in QUESTIONS {
        let cli = stdout_json(&ambiq(&["detect", "--table", s(&table(file)), "--question", q, "--model", s(&model)]));
        assert_eq!(cli, service_payload(Detector::Crf(Box::new(crf.clone())), cfg.clone(), id, q), "{q}");
    }
}

#[test]
fn derive_labels_annotates_a_seed_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = dir.path().join("seeds.jsonl");
    let out = dir.path().join("labeled.jsonl");
    let lines = [
        r#"{"question":"What is the score where record is 0–2?","table_id":"games","columns":["Game","Date","Opponent","Score","Record"],"cells":{"Record":["0–1","0–2","1–2"]},"sql":"SELECT Score FROM games WHERE Record = '0–2'"}"#,
        r#"{"question":"How many games?","table_id":"games","columns":["Game"],"sql":"SELECT COUNT(Game) FROM games GROUP BY Game"}"#,
        r#"{"question":"No SQL here","table_id":"games","columns":["Game"]}"#,
    ];
    std::fs::write(&seeds, lines.join("\n")).unwrap();
    let summary = stdout_json(&ambiq(&["derive-labels", "--input", s(&seeds), "--out", s(&out)]));
    assert_eq!(summary["examples"], 1);
    assert_eq!(summary["skipped_unsupported_sql"], 1);
    assert_eq!(summary["skipped_missing_sql"], 1);
    let data = load_dataset(&out).unwrap();
    let labels: Vec<String> = data[0].labels.iter().map(|l| l.to_string()).collect();
    assert_eq!(labels, ["O", "O", "O", "B-COL", "O", "B-COL", "O", "B-VAL", "O"]);
}
