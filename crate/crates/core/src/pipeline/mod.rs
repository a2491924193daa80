//! Weak labels, detection with explanations, and evaluation.

pub mod detect;
pub mod metrics;
pub mod response;
pub mod weak;

pub use detect::{
    detect_then_explain, explain, heuristic_then_explain, DetectionPayload, DetectionResult, SpanPayload,
};
pub use metrics::{eval_grounding, eval_labels, eval_spans_exact, metrics_report, CategoryScores, Cell, MetricsReport};
pub use response::render_response;
pub use weak::{annotate, derive_weak_labels, WeakLabels};

use rayon::prelude::*;

use crate::aligner::Annotation;
use crate::error::Result;
use crate::example::LabeledExample;

/// Runs `detect` over every example in parallel and scores it against the stored labels.
pub fn evaluate<F>(examples: &[LabeledExample], detect: F) -> Result<MetricsReport>
where
    F: Fn(&LabeledExample) -> Result<DetectionResult> + Sync,
{
    let predictions = examples
        .par_iter()
        .map(|ex| detect(ex).map(|r| Annotation { labels: r.labels, groundings: r.groundings }))
        .collect::<Result<Vec<_>>>()?;
    let golds: Vec<Annotation> = examples.iter().map(Annotation::from).collect();
    metrics_report(&predictions, &golds)
}
