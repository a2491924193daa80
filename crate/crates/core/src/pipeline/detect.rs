use serde::{Deserialize, Serialize};

use crate::aligner::{tokens_text, MatchConfig, SpanTable};
use crate::crf::{predict, CrfModel};
use crate::error::{Error, Result};
use crate::example::{GroundingPair, ScoredConcept, TokenSpan};
use crate::fuzzy::{similarity, Prepared};
use crate::label::{spans, BioLabel, Category, LabelKind};
use crate::schema::{ConceptKind, TableSchema};
use crate::token::{tokenize, Token};

use super::response::render_response;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub question: String,
    pub tokens: Vec<Token>,
    pub labels: Vec<BioLabel>,
    pub groundings: Vec<GroundingPair>,
    pub verdict: Category,
    /// Empty when the verdict is answerable.
    pub response: String,
}

/// Highlight for one labeled span, with character offsets `[start, end)` into the question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanPayload {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub category: LabelKind,
    pub candidates: Vec<ScoredConcept>,
}

/// Wire form of a [`DetectionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionPayload {
    pub labels: Vec<BioLabel>,
    pub spans: Vec<SpanPayload>,
    pub verdict: Category,
    pub response: String,
}

impl DetectionResult {
    pub fn payload(&self) -> DetectionPayload {
        let spans = spans(&self.labels)
            .into_iter()
            .map(|s| {
                let span = TokenSpan::new(s.start, s.end);
                let candidates =
                    self.groundings.iter().find(|g| g.span == span).map(|g| g.candidates.clone()).unwrap_or_default();
                SpanPayload {
                    start: self.tokens[s.start].start,
                    end: self.tokens[s.end].end,
                    text: crate::token::span_text(&self.question, &self.tokens, s.start, s.end),
                    category: s.kind,
                    candidates,
                }
            })
            .collect();
        DetectionPayload { labels: self.labels.clone(), spans, verdict: self.verdict, response: self.response.clone() }
    }
}

/// Every concept of `kind`, best first; ties keep schema order.
fn ranked(text: &str, schema: &TableSchema, kind: ConceptKind) -> Vec<ScoredConcept> {
    let span = Prepared::new(text);
    let mut out: Vec<ScoredConcept> = schema
        .concepts()
        .into_iter()
        .filter(|c| c.kind == kind)
        .map(|concept| {
            let score = similarity(&span, &Prepared::new(&concept.text));
            ScoredConcept { concept, score }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out
}

fn ground_span(
    table: &SpanTable,
    tokens: &[Token],
    schema: &TableSchema,
    span: TokenSpan,
    kind: LabelKind,
    cfg: &MatchConfig,
) -> Option<GroundingPair> {
    let (concept_kind, want) = match kind {
        LabelKind::Amb => (ConceptKind::Column, 2),
        LabelKind::Col => (ConceptKind::Column, 1),
        LabelKind::Val => (ConceptKind::Value, 1),
        LabelKind::Unk | LabelKind::O => return None,
    };
    let top_k = if kind == LabelKind::Amb { cfg.top_k } else { 1 };
    let mut candidates = table.candidates_for(span, Some(concept_kind), top_k);
    if candidates.len() < want {
        // The tagger may label a span the matcher did not select; fall back to the
        // closest concepts of the right kind.
        let text = tokens_text(tokens, span.start, span.end);
        for extra in ranked(&text, schema, concept_kind) {
            if candidates.len() >= want {
                break;
            }
            if !candidates.iter().any(|c: &ScoredConcept| c.concept == extra.concept) {
                candidates.push(extra);
            }
        }
        candidates.sort_by(|a, b| b.score.total_cmp(&a.score));
    }
    (!candidates.is_empty()).then_some(GroundingPair { span, candidates })
}

/// Attaches groundings to labeled spans and renders the verdict's response.
pub fn explain(
    question: &str,
    tokens: Vec<Token>,
    labels: Vec<BioLabel>,
    schema: &TableSchema,
    cfg: &MatchConfig,
) -> Result<DetectionResult> {
    if labels.len() != tokens.len() {
        return Err(Error::LengthMismatch { left: labels.len(), right: tokens.len() });
    }
    let table = SpanTable::for_schema(&tokens, schema, cfg);
    let groundings = spans(&labels)
        .into_iter()
        .filter_map(|s| ground_span(&table, &tokens, schema, TokenSpan::new(s.start, s.end), s.kind, cfg))
        .collect();
    let verdict = Category::from_labels(&labels);
    let mut result = DetectionResult {
        question: question.to_string(),
        tokens,
        labels,
        groundings,
        verdict,
        response: String::new(),
    };
    if verdict != Category::Answerable {
        result.response = render_response(&result, question)?;
    }
    Ok(result)
}

pub fn detect_then_explain(
    question: &str,
    schema: &TableSchema,
    model: &CrfModel,
    cfg: &MatchConfig,
) -> Result<DetectionResult> {
    let tokens = tokenize(question);
    if tokens.is_empty() {
        return Err(Error::EmptyInput("question is empty"));
    }
    let labels = predict(model, &tokens, schema, cfg);
    explain(question, tokens, labels, schema, cfg)
}

/// Detection with the lexical baseline in place of the CRF.
pub fn heuristic_then_explain(question: &str, schema: &TableSchema, cfg: &MatchConfig) -> Result<DetectionResult> {
    let tokens = tokenize(question);
    if tokens.is_empty() {
        return Err(Error::EmptyInput("question is empty"));
    }
    let labels = crate::aligner::heuristic_detect(&tokens, schema, cfg);
    explain(question, tokens, labels, schema, cfg)
}

/// Concept texts named by a grounding, in candidate order.
pub fn candidate_texts(pair: &GroundingPair) -> Vec<&str> {
    pair.candidates.iter().map(|c| c.concept.text.as_str()).collect()
}
