//! Per-category label and grounding accuracy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aligner::Annotation;
use crate::error::{Error, Result};
use crate::example::{GroundingPair, LabeledExample, TokenSpan};
use crate::label::{spans, BioLabel, LabelKind, LabeledSpan};
use crate::schema::Concept;

/// `correct / total`; accuracy is absent when nothing was counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub correct: usize,
    pub total: usize,
    pub accuracy: Option<f64>,
}

impl Cell {
    fn finish(mut self) -> Cell {
        self.accuracy = (self.total > 0).then(|| self.correct as f64 / self.total as f64);
        self
    }
}

pub type CategoryScores = BTreeMap<LabelKind, Cell>;

pub const GROUNDED_KINDS: [LabelKind; 3] = [LabelKind::Col, LabelKind::Val, LabelKind::Amb];
pub const SPAN_KINDS: [LabelKind; 4] = [LabelKind::Col, LabelKind::Val, LabelKind::Amb, LabelKind::Unk];

fn empty(kinds: &[LabelKind]) -> CategoryScores {
    kinds.iter().map(|&k| (k, Cell::default())).collect()
}

fn finish(scores: CategoryScores) -> CategoryScores {
    scores.into_iter().map(|(k, c)| (k, c.finish())).collect()
}

fn check_lengths(pred: usize, gold: usize) -> Result<()> {
    if pred != gold {
        return Err(Error::LengthMismatch { left: pred, right: gold });
    }
    Ok(())
}

/// Token-level accuracy per gold category with B/I collapsed.
pub fn eval_labels(predictions: &[Vec<BioLabel>], golds: &[Vec<BioLabel>]) -> Result<CategoryScores> {
    check_lengths(predictions.len(), golds.len())?;
    let mut scores = empty(&LabelKind::ALL);
    for (pred, gold) in predictions.iter().zip(golds) {
        check_lengths(pred.len(), gold.len())?;
        for (p, g) in pred.iter().zip(gold) {
            let cell = scores.get_mut(&g.kind()).expect("all kinds present");
            cell.total += 1;
            cell.correct += usize::from(p.kind() == g.kind());
        }
    }
    Ok(finish(scores))
}

fn pair_for<'a>(groundings: &'a [GroundingPair], span: &LabeledSpan) -> Option<&'a GroundingPair> {
    let span = TokenSpan::new(span.start, span.end);
    groundings.iter().find(|g| g.span == span)
}

fn concept_set(pair: &GroundingPair) -> Vec<&Concept> {
    let mut set: Vec<&Concept> = pair.concepts().collect();
    set.sort_by(|a, b| (a.kind, &a.column, &a.text).cmp(&(b.kind, &b.column, &b.text)));
    set.dedup();
    set
}

fn grounding_matches(kind: LabelKind, pred: &GroundingPair, gold: &GroundingPair) -> bool {
    if kind == LabelKind::Amb {
        concept_set(pred) == concept_set(gold)
    } else {
        pred.candidates.first().map(|c| &c.concept) == gold.candidates.first().map(|c| &c.concept)
    }
}

/// A gold COL/VAL/AMB span is correct when a predicted span of the same category overlaps it
/// and carries the same concept (COL/VAL) or exactly the same candidate set (AMB).
pub fn eval_grounding(predictions: &[Annotation], golds: &[Annotation]) -> Result<CategoryScores> {
    check_lengths(predictions.len(), golds.len())?;
    let mut scores = empty(&GROUNDED_KINDS);
    for (pred, gold) in predictions.iter().zip(golds) {
        check_lengths(pred.labels.len(), gold.labels.len())?;
        let pred_spans = spans(&pred.labels);
        for gs in spans(&gold.labels) {
            let Some(cell) = scores.get_mut(&gs.kind) else {
                continue;
            };
            cell.total += 1;
            let Some(gold_pair) = pair_for(&gold.groundings, &gs) else {
                continue;
            };
            let hit = pred_spans
                .iter()
                .filter(|ps| ps.kind == gs.kind && ps.start <= gs.end && gs.start <= ps.end)
                .filter_map(|ps| pair_for(&pred.groundings, ps))
                .any(|pp| grounding_matches(gs.kind, pp, gold_pair));
            cell.correct += usize::from(hit);
        }
    }
    Ok(finish(scores))
}

/// Gold spans recovered with exactly the same boundaries and category.
pub fn eval_spans_exact(predictions: &[Vec<BioLabel>], golds: &[Vec<BioLabel>]) -> Result<CategoryScores> {
    check_lengths(predictions.len(), golds.len())?;
    let mut scores = empty(&SPAN_KINDS);
    for (pred, gold) in predictions.iter().zip(golds) {
        check_lengths(pred.len(), gold.len())?;
        let pred_spans = spans(pred);
        for gs in spans(gold) {
            let cell = scores.get_mut(&gs.kind).expect("span kinds present");
            cell.total += 1;
            cell.correct += usize::from(pred_spans.contains(&gs));
        }
    }
    Ok(finish(scores))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub examples: usize,
    pub label_accuracy: CategoryScores,
    pub grounding_accuracy: CategoryScores,
    /// Boundary-sensitive span recall, reported next to the token-level scores.
    pub span_exact: CategoryScores,
}

pub fn metrics_report(predictions: &[Annotation], golds: &[Annotation]) -> Result<MetricsReport> {
    let pl: Vec<Vec<BioLabel>> = predictions.iter().map(|a| a.labels.clone()).collect();
    let gl: Vec<Vec<BioLabel>> = golds.iter().map(|a| a.labels.clone()).collect();
    Ok(MetricsReport {
        examples: golds.len(),
        label_accuracy: eval_labels(&pl, &gl)?,
        grounding_accuracy: eval_grounding(predictions, golds)?,
        span_exact: eval_spans_exact(&pl, &gl)?,
    })
}

impl From<&LabeledExample> for Annotation {
    fn from(ex: &LabeledExample) -> Annotation {
        Annotation { labels: ex.labels.clone(), groundings: ex.groundings.clone() }
    }
}
