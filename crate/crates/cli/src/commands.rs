use ambiq_core::crf::{train_on_examples, TrainConfig};
use ambiq_core::dataset::{load_dataset, load_seed_corpus, save_dataset};
use ambiq_core::pipeline::{annotate, evaluate};
use ambiq_core::synth::seed_corpus;
use ambiq_core::{
    build_dataset, DetectionPayload, GenConfig, MatchConfig, MetricsReport, StatsReport, TemplateProvider,
};
use serde::Serialize;

use crate::args::{DeriveLabelsArgs, DetectArgs, EvalArgs, GenerateArgs, TrainArgs};
use crate::detector::{load_table, Detector};
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct GenerateOutput {
    pub seeds: usize,
    pub skipped_unsupported_sql: usize,
    pub skipped_missing_sql: usize,
    pub examples: usize,
    #[serde(flatten)]
    pub stats: StatsReport,
}

pub fn generate(args: &GenerateArgs) -> CliResult<GenerateOutput> {
    let cfg = args.matching.resolve(MatchConfig::default())?;
    let gen = GenConfig {
        problematic_ratio: args.ratio,
        ambiguous_share: args.ambiguous_share,
        rng_seed: args.rng_seed,
        added_columns: args.added_columns,
    };
    gen.validate()?;
    let mut provider = TemplateProvider::default();
    if let Some(path) = &args.lexicon {
        provider = provider.with_lexicon(TemplateProvider::load_lexicon(path)?);
    }
    let (seeds, unsupported, missing) = match (&args.seed_corpus, args.synthetic) {
        (Some(path), _) => {
            let corpus = load_seed_corpus(path)?;
            (corpus.examples, corpus.skipped_unsupported_sql, corpus.skipped_missing_sql)
        }
        (None, Some(n)) => (seed_corpus(n, args.rng_seed), 0, 0),
        (None, None) => return Err(CliError::Usage("one of --seed-corpus or --synthetic is required".into())),
    };
    if seeds.is_empty() {
        return Err(CliError::Validation("seed corpus has no usable examples".into()));
    }
    let (data, stats) = build_dataset(&seeds, &provider, &gen, &cfg)?;
    save_dataset(&data, &args.out)?;
    Ok(GenerateOutput {
        seeds: seeds.len(),
        skipped_unsupported_sql: unsupported,
        skipped_missing_sql: missing,
        examples: data.len(),
        stats,
    })
}

#[derive(Debug, Serialize)]
pub struct DeriveLabelsOutput {
    pub examples: usize,
    pub unmatched_concepts: usize,
    pub skipped_unsupported_sql: usize,
    pub skipped_missing_sql: usize,
}

pub fn derive_labels(args: &DeriveLabelsArgs) -> CliResult<DeriveLabelsOutput> {
    let cfg = args.matching.resolve(MatchConfig::default())?;
    let corpus = load_seed_corpus(&args.input)?;
    let mut labeled = Vec::with_capacity(corpus.examples.len());
    let mut unmatched = 0;
    for example in &corpus.examples {
        let (ex, weak) = annotate(example, &cfg)?;
        unmatched += weak.unmatched;
        labeled.push(ex);
    }
    save_dataset(&labeled, &args.out)?;
    Ok(DeriveLabelsOutput {
        examples: labeled.len(),
        unmatched_concepts: unmatched,
        skipped_unsupported_sql: corpus.skipped_unsupported_sql,
        skipped_missing_sql: corpus.skipped_missing_sql,
    })
}

#[derive(Debug, Serialize)]
pub struct TrainOutput {
    pub examples: usize,
    pub features: usize,
    pub loss_history: Vec<f64>,
}

pub fn train(args: &TrainArgs) -> CliResult<TrainOutput> {
    let cfg = args.matching.resolve(MatchConfig::default())?;
    let defaults = TrainConfig::default();
    let tc = TrainConfig {
        l2_lambda: args.l2.unwrap_or(defaults.l2_lambda),
        learning_rate: args.learning_rate.unwrap_or(defaults.learning_rate),
        lr_decay: args.lr_decay.unwrap_or(defaults.lr_decay),
        epochs: args.epochs.unwrap_or(defaults.epochs),
        batch_size: args.batch_size.unwrap_or(defaults.batch_size),
        rng_seed: args.rng_seed,
    };
    tc.validate()?;
    let data = load_dataset(&args.data)?;
    if data.is_empty() {
        return Err(CliError::Validation("training dataset is empty".into()));
    }
    let model = train_on_examples(&data, &cfg, &tc)?;
    model.save(&args.out)?;
    Ok(TrainOutput { examples: data.len(), features: model.num_features(), loss_history: model.loss_history.clone() })
}

pub fn detect(args: &DetectArgs) -> CliResult<DetectionPayload> {
    let detector = Detector::load(args.model.as_deref())?;
    let cfg = args.matching.resolve(detector.base_config())?;
    let schema = load_table(&args.table)?;
    if args.question.trim().is_empty() {
        return Err(CliError::Validation("empty question".into()));
    }
    Ok(detector.detect(&args.question, &schema, &cfg)?.payload())
}

pub fn eval(args: &EvalArgs) -> CliResult<MetricsReport> {
    let detector = Detector::load(args.model.as_deref())?;
    let cfg = args.matching.resolve(detector.base_config())?;
    let data = load_dataset(&args.data)?;
    if data.is_empty() {
        return Err(CliError::Validation("evaluation dataset is empty".into()));
    }
    Ok(evaluate(&data, |ex| detector.detect(&ex.question, &ex.schema, &cfg))?)
}
