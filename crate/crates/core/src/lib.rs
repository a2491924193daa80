//! Detecting and explaining ambiguous and unanswerable questions over single tables.
//!
//! Questions are tagged token by token with BIO labels over four span categories
//! (`COL`, `VAL`, `AMB`, `UNK`). Training data comes from gold SQL (weak labels) and
//! from counterfactual table edits that turn answerable questions into ambiguous or
//! unanswerable ones.

pub mod aligner;
pub mod countergen;
pub mod crf;
pub mod dataset;
pub mod error;
pub mod example;
pub mod fuzzy;
pub mod label;
pub mod pipeline;
pub mod schema;
pub mod sql;
pub mod synth;
pub mod token;

pub use aligner::{ground, heuristic_detect, MatchConfig};
pub use countergen::{
    build_dataset, make_ambiguous, make_unanswerable, rerank_candidates, GenConfig, StatsReport, TemplateProvider,
};
pub use crf::{CrfModel, TrainConfig};
pub use error::{Error, Result, ValidationError};
pub use example::{GroundingPair, LabeledExample, ScoredConcept, TokenSpan};
pub use fuzzy::fuzzy_score;
pub use label::{BioLabel, Category, LabelKind};
pub use pipeline::{detect_then_explain, render_response, DetectionPayload, DetectionResult, MetricsReport};
pub use schema::{Concept, ConceptKind, TableSchema};
pub use sql::{extract_concepts, parse_sql, SqlQuery};
pub use token::{tokenize, Token};
