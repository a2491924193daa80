use ambiq_bench::small_model;
use ambiq_core::crf::{featurize_with, viterbi_decode};
use ambiq_core::pipeline::heuristic_then_explain;
use ambiq_core::synth::{movie_table, phone_table, seed_corpus};
use ambiq_core::{build_dataset, detect_then_explain, fuzzy_score, tokenize, GenConfig, MatchConfig, TemplateProvider};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn fuzzy(c: &mut Criterion) {
    c.bench_function("fuzzy_score/rating_vs_rotten_tomatoes_rating", |b| {
        b.iter(|| fuzzy_score(black_box("rating"), black_box("rotten tomatoes rating")))
    });
}

fn detection(c: &mut Criterion) {
    let cfg = MatchConfig::default();
    let model = small_model();
    let cases = [
        ("movies", movie_table(), "what is the rating of Avatar"),
        ("phones", phone_table(), "Which model name has the highest price?"),
    ];
    let mut group = c.benchmark_group("detect");
    for (name, table, question) in &cases {
        group.bench_with_input(BenchmarkId::new("heuristic", name), question, |b, q| {
            b.iter(|| heuristic_then_explain(black_box(q), table, &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("crf", name), question, |b, q| {
            b.iter(|| detect_then_explain(black_box(q), table, &model, &cfg).unwrap())
        });
    }
    group.finish();
}

fn decoding(c: &mut Criterion) {
    let cfg = MatchConfig::default();
    let model = small_model();
    let table = movie_table();
    let mut group = c.benchmark_group("viterbi");
    for words in [4usize, 16, 64] {
        let question = ["what is the imdb rating of avatar"].repeat(words / 4 + 1).join(" ");
        let tokens: Vec<_> = tokenize(&question).into_iter().take(words).collect();
        let feats = model.feature_vocabulary.encode(&featurize_with(&tokens, &table, &cfg, &model.column_lexicon));
        group.throughput(Throughput::Elements(words as u64));
        group.bench_with_input(BenchmarkId::from_parameter(words), &feats, |b, f| {
            b.iter(|| viterbi_decode(&model, black_box(f)))
        });
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let seeds = seed_corpus(200, 1);
    let provider = TemplateProvider::default();
    let cfg = MatchConfig::default();
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    group.throughput(Throughput::Elements(seeds.len() as u64));
    group.bench_function("build_dataset/200", |b| {
        b.iter_batched(
            GenConfig::default,
            |gen| build_dataset(&seeds, &provider, &gen, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, fuzzy, detection, decoding, generation);
criterion_main!(benches);
