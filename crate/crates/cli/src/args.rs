use std::path::PathBuf;
use std::sync::Arc;

use ambiq_core::fuzzy::Stopwords;
use ambiq_core::MatchConfig;
use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "ambiq", version, about = "Detect and explain ambiguous or unanswerable questions over single tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a dataset of answerable and generated problematic examples from a seed corpus.
    Generate(GenerateArgs),
    /// Weakly label an answerable seed corpus from its gold SQL.
    DeriveLabels(DeriveLabelsArgs),
    /// Train a CRF tagger on a labeled dataset and write the model file.
    Train(TrainArgs),
    /// Tag one question against one table and print the detection payload.
    Detect(DetectArgs),
    /// Score a detector on a labeled dataset and print the metrics report.
    Eval(EvalArgs),
    /// Run the HTTP detection service.
    Serve(ServeArgs),
}

/// Matching flags shared by every subcommand that grounds spans.
#[derive(Debug, Clone, Default, Args)]
pub struct MatchArgs {
    /// Fuzzy similarity threshold in (0, 1).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Maximum number of candidates kept per span.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Longest span considered, in tokens.
    #[arg(long)]
    pub max_ngram: Option<usize>,
    /// Stopword file, one word per line, replacing the built-in list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

impl MatchArgs {
    /// `base` with every flag that was given applied on top, validated.
    pub fn resolve(&self, base: MatchConfig) -> CliResult<MatchConfig> {
        let mut cfg = base;
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(k) = self.top_k {
            cfg.top_k = k;
        }
        if let Some(n) = self.max_ngram {
            cfg.max_ngram = n;
        }
        if let Some(path) = &self.stopwords {
            cfg.stopwords = Arc::new(Stopwords::load(path)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Seed corpus JSONL with `question`, `table_id`, `columns`, optional `cells`, and `sql`.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub seed_corpus: Option<PathBuf>,
    /// Use N built-in synthetic seed questions instead of a corpus file.
    #[arg(long, value_name = "N")]
    pub synthetic: Option<usize>,
    /// Output dataset JSONL.
    #[arg(long)]
    pub out: PathBuf,
    /// Problematic examples to generate, as a fraction of the seed count.
    #[arg(long, default_value_t = 0.2)]
    pub ratio: f64,
    /// Fraction of generated examples that are ambiguous.
    #[arg(long, default_value_t = 0.55)]
    pub ambiguous_share: f64,
    /// Columns inserted when making a question ambiguous.
    #[arg(long, default_value_t = 2)]
    pub added_columns: usize,
    /// Column synonym lexicon JSONL (`{"column": ..., "synonyms": [...]}`).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct DeriveLabelsArgs {
    /// Seed corpus JSONL with gold SQL.
    #[arg(long)]
    pub input: PathBuf,
    /// Output dataset JSONL.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled dataset JSONL.
    #[arg(long)]
    pub data: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Table schema JSON (`table_id`, `columns`, optional `cells`).
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub question: String,
    /// Model file; without it the heuristic tagger is used.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model file; without it the heuristic tagger is scored.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled dataset JSONL.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Model file; without it the heuristic tagger is used.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory of `*.json` table schemas registered at startup.
    #[arg(long)]
    pub tables_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 8490)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Serve the UI from this directory instead of the embedded bundle.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    #[command(flatten)]
    pub matching: MatchArgs,
}
