//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero if
//! any criterion fails.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use ambiq_core::aligner::Annotation;
use ambiq_core::crf::train_on_examples;
use ambiq_core::dataset::{load_dataset, save_dataset, write_dataset};
use ambiq_core::fuzzy::{similarity, Prepared};
use ambiq_core::label::{spans, LabelKind};
use ambiq_core::pipeline::detect::candidate_texts;
use ambiq_core::pipeline::response::{ambiguous_sentence, unanswerable_sentence};
use ambiq_core::pipeline::{eval_grounding, eval_labels, metrics_report, CategoryScores};
use ambiq_core::synth::{movie_table, phone_table, seed_corpus};
use ambiq_core::{
    build_dataset, detect_then_explain, heuristic_detect, Category, CrfModel, GenConfig, LabeledExample, MatchConfig,
    TemplateProvider, TokenSpan, TrainConfig,
};
use common::{check_decode, check_gradient, metric_fixture, random_instance, FIXTURE_GROUNDING, FIXTURE_LABELS};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn cfg() -> MatchConfig {
    MatchConfig::default().with_threshold(0.72)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn crf_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        check_decode(&random_instance(&mut rng, 6)).map_err(|e| format!("instance {i}: {e}"))?;
    }
    for i in 0..50 {
        check_gradient(&random_instance(&mut rng, 6), 0.01).map_err(|e| format!("gradient instance {i}: {e}"))?;
    }
    Ok("200 decode/logZ instances, 50 gradient instances".into())
}

fn jsonl(data: &[LabeledExample]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_dataset(data, &mut buf).expect("in-memory write");
    buf
}

fn matching_columns(ex: &LabeledExample, span: TokenSpan, theta: f64) -> usize {
    let text = Prepared::new(&ex.span_text(span));
    ex.schema.columns.iter().filter(|c| similarity(&text, &Prepared::new(c)) >= theta).count()
}

fn generation() -> Outcome {
    let seeds = seed_corpus(1000, 1);
    let provider = TemplateProvider::default();
    let (gen, cfg) = (GenConfig::default(), cfg());
    let (data, report) = build_dataset(&seeds, &provider, &gen, &cfg).map_err(|e| e.to_string())?;
    let problematic = report.ambiguous + report.unanswerable;
    ensure(problematic.abs_diff(200) <= 2, || format!("{problematic} problematic examples"))?;
    ensure(report.ambiguous.abs_diff(110) <= 1 && report.unanswerable.abs_diff(90) <= 1, || {
        format!("split {}/{}", report.ambiguous, report.unanswerable)
    })?;
    for ex in &data {
        for s in spans(&ex.labels) {
            let n = matching_columns(ex, TokenSpan::new(s.start, s.end), cfg.threshold);
            match s.kind {
                LabelKind::Unk => ensure(n == 0, || format!("UNK span in {:?} matches {n} columns", ex.question))?,
                LabelKind::Amb => ensure(n >= 2, || format!("AMB span in {:?} matches {n} columns", ex.question))?,
                _ => {}
            }
        }
    }
    let (again, _) = build_dataset(&seeds, &provider, &gen, &cfg).map_err(|e| e.to_string())?;
    ensure(jsonl(&data) == jsonl(&again), || "regeneration differs".into())?;
    Ok(format!("{} ambiguous / {} unanswerable over {} tables", report.ambiguous, report.unanswerable, report.tables))
}

struct Split {
    train: Vec<LabeledExample>,
    test: Vec<LabeledExample>,
}

fn splits() -> Result<Split, String> {
    let gen = GenConfig::default();
    let provider = TemplateProvider::default();
    let (train, _) = build_dataset(&seed_corpus(2000, 11), &provider, &gen, &cfg()).map_err(|e| e.to_string())?;
    let (test, _) = build_dataset(&seed_corpus(417, 99), &provider, &gen, &cfg()).map_err(|e| e.to_string())?;
    Ok(Split { train, test })
}

fn token_scores(model: Option<&CrfModel>, data: &[LabeledExample]) -> Result<CategoryScores, String> {
    let cfg = cfg();
    let predicted: Vec<_> = data
        .iter()
        .map(|ex| match model {
            Some(m) => ambiq_core::crf::predict(m, &ex.tokens, &ex.schema, &cfg),
            None => heuristic_detect(&ex.tokens, &ex.schema, &cfg),
        })
        .collect();
    let gold: Vec<_> = data.iter().map(|ex| ex.labels.clone()).collect();
    eval_labels(&predicted, &gold).map_err(|e| e.to_string())
}

fn learning_beats_heuristic(split: &Split, model: &CrfModel) -> Outcome {
    ensure(split.train.len() >= 2000, || format!("{} training examples", split.train.len()))?;
    ensure(split.test.len() == 500, || format!("{} test examples", split.test.len()))?;
    let seen: HashSet<(&str, String)> =
        split.train.iter().map(|e| (e.question.as_str(), serde_json::to_string(&e.schema).unwrap())).collect();
    let overlap = split
        .test
        .iter()
        .filter(|e| seen.contains(&(e.question.as_str(), serde_json::to_string(&e.schema).unwrap())))
        .count();
    ensure(overlap == 0, || format!("{overlap} test examples also in training"))?;

    let crf = token_scores(Some(model), &split.test)?;
    let heur = token_scores(None, &split.test)?;
    let acc = |s: &CategoryScores, k: LabelKind| s[&k].accuracy.unwrap_or(0.0);
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [LabelKind::Amb, LabelKind::Unk] {
        let (c, h) = (acc(&crf, kind), acc(&heur, kind));
        ok &= c > h;
        detail.push(format!("{kind} crf {c:.3} vs heuristic {h:.3} over {} tokens", crf[&kind].total));
    }
    let detail = detail.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn golden_fixtures(model: &CrfModel) -> Outcome {
    let cfg = cfg();
    let a =
        detect_then_explain("what is the rating of Avatar", &movie_table(), model, &cfg).map_err(|e| e.to_string())?;
    ensure(a.verdict == Category::Ambiguous, || format!("rating question verdict {:?}", a.verdict))?;
    let rating = a.tokens.iter().position(|t| t.norm == "rating").unwrap();
    let pair =
        a.groundings.iter().find(|g| g.span == TokenSpan::new(rating, rating)).ok_or("no grounding on \"rating\"")?;
    let mut got = candidate_texts(pair);
    got.sort();
    ensure(got == ["Content Rating", "IMDB Rating", "Rotten Tomatoes Rating"], || format!("candidates {got:?}"))?;

    let b = detect_then_explain(
        "what is the model name of phone whose price is greater than 500",
        &phone_table(),
        model,
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    ensure(b.verdict == Category::Unanswerable, || format!("model name verdict {:?}", b.verdict))?;
    let model_at = b.tokens.iter().position(|t| t.norm == "model").unwrap();
    ensure(b.labels[model_at] == ambiq_core::BioLabel::BUnk, || format!("\"model\" labeled {}", b.labels[model_at]))?;

    let amb = ambiguous_sentence("rating", &["IMDB Rating", "Rotten Tomatoes Rating", "Content Rating"])
        .map_err(|e| e.to_string())?;
    ensure(
        amb == "Oops, this question has multiple semantic meanings. \"rating\" may refer to either \"IMDB Rating\", \"Rotten Tomatoes Rating\", or \"Content Rating\".",
        || amb.clone(),
    )?;
    let unk = unanswerable_sentence("model name");
    ensure(
        unk == "Sorry, we can\u{2019}t find an answer for you since \"model name\" cannot be mapped to any concepts in your table.",
        || unk.clone(),
    )?;
    Ok(format!("responses: {:?} / {:?}", a.response, b.response))
}

fn metric_fixtures() -> Outcome {
    let (pred, gold) = metric_fixture();
    let labels = |xs: &[Annotation]| xs.iter().map(|a| a.labels.clone()).collect::<Vec<_>>();
    let check = |scores: &CategoryScores, expected: &[(LabelKind, usize, usize)]| -> Result<(), String> {
        for &(kind, correct, total) in expected {
            let cell = scores[&kind];
            ensure(
                (cell.correct, cell.total) == (correct, total) && cell.accuracy == Some(correct as f64 / total as f64),
                || format!("{kind}: {}/{} expected {correct}/{total}", cell.correct, cell.total),
            )?;
        }
        Ok(())
    };
    check(&eval_labels(&labels(&pred), &labels(&gold)).map_err(|e| e.to_string())?, &FIXTURE_LABELS)?;
    check(&eval_grounding(&pred, &gold).map_err(|e| e.to_string())?, &FIXTURE_GROUNDING)?;
    let perfect = metrics_report(&gold, &gold).map_err(|e| e.to_string())?;
    for cell in perfect.label_accuracy.values().chain(perfect.grounding_accuracy.values()) {
        ensure(cell.accuracy == Some(1.0), || "all-correct input below 1.0".into())?;
    }
    Ok("10 examples, hand counts reproduced".into())
}

fn round_trip(split: &Split, model: &CrfModel) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut data = split.train.clone();
    data.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    data.truncate(1000);
    let path = dir.path().join("data.jsonl");
    save_dataset(&data, &path).map_err(|e| e.to_string())?;
    let back = load_dataset(&path).map_err(|e| e.to_string())?;
    ensure(back == data, || "reloaded dataset differs".into())?;

    let model_path = dir.path().join("model.json");
    model.save(&model_path).map_err(|e| e.to_string())?;
    let loaded = CrfModel::load(&model_path).map_err(|e| e.to_string())?;
    let cfg = cfg();
    for ex in split.test.iter().take(100) {
        let before = ambiq_core::crf::predict(model, &ex.tokens, &ex.schema, &cfg);
        let after = ambiq_core::crf::predict(&loaded, &ex.tokens, &ex.schema, &cfg);
        ensure(before == after, || format!("decoding changed for {:?}", ex.question))?;
    }
    Ok("1000 examples and 100 decodes identical".into())
}

fn run(name: &str, limit: Duration, failures: &mut usize, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let mut outcome = f();
    let elapsed = start.elapsed();
    if outcome.is_ok() && elapsed > limit {
        outcome = Err(format!("took {elapsed:.1?}, limit {limit:?}"));
    }
    match outcome {
        Ok(detail) => println!("PASS {name} ({elapsed:.1?}): {detail}"),
        Err(detail) => {
            *failures += 1;
            println!("FAIL {name} ({elapsed:.1?}): {detail}");
        }
    }
}

fn main() {
    let mut failures = 0;
    let minute = Duration::from_secs(60);
    run("crf_correctness", minute, &mut failures, crf_correctness);
    run("generation_soundness", minute, &mut failures, generation);

    let start = Instant::now();
    let trained = splits().and_then(|split| {
        let model = train_on_examples(&split.train, &cfg(), &TrainConfig::default()).map_err(|e| e.to_string())?;
        Ok((split, model))
    });
    let train_time = start.elapsed();
    match &trained {
        Ok((split, model)) => {
            run("learning_beats_heuristic", Duration::from_secs(600).saturating_sub(train_time), &mut failures, || {
                learning_beats_heuristic(split, model)
            });
            run("golden_fixtures", minute, &mut failures, || golden_fixtures(model));
        }
        Err(e) => {
            for name in ["learning_beats_heuristic", "golden_fixtures"] {
                failures += 1;
                println!("FAIL {name}: training failed: {e}");
            }
        }
    }
    run("metric_fixtures", minute, &mut failures, metric_fixtures);
    match &trained {
        Ok((split, model)) => run("round_trip", minute, &mut failures, || round_trip(split, model)),
        Err(e) => {
            failures += 1;
            println!("FAIL round_trip: training failed: {e}");
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
