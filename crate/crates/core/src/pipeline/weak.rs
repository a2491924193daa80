//! Pseudo labels from the concepts of an example's gold SQL.

use crate::aligner::{MatchConfig, SpanSet};
use crate::error::{Error, Result};
use crate::example::{GroundingPair, LabeledExample, ScoredConcept, TokenSpan};
use crate::label::{write_span, BioLabel, LabelKind};
use crate::schema::{Concept, ConceptKind, TableSchema};
use crate::sql::{extract_concepts, SqlQuery};
use crate::token::Token;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakLabels {
    pub labels: Vec<BioLabel>,
    pub groundings: Vec<GroundingPair>,
    /// SQL concepts present in the schema that no question span matched uniquely.
    pub unmatched: usize,
    /// SQL concepts whose column is not in the schema.
    pub absent: usize,
}

/// SQL concepts restated with the schema's spelling of each column; concepts whose column
/// is missing from the schema are dropped.
fn schema_concepts(sql: &SqlQuery, schema: &TableSchema) -> (Vec<Concept>, usize) {
    let mut absent = 0;
    let mut out = Vec::new();
    for concept in extract_concepts(sql) {
        match schema.column_index(&concept.column) {
            Some(i) => {
                let column = &schema.columns[i];
                let c = match concept.kind {
                    ConceptKind::Column => Concept::column(column),
                    ConceptKind::Value => Concept::value(&concept.text, column),
                };
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            None => absent += 1,
        }
    }
    (out, absent)
}

pub fn derive_weak_labels(tokens: &[Token], sql: &SqlQuery, schema: &TableSchema, cfg: &MatchConfig) -> WeakLabels {
    let spans = SpanSet::new(tokens, cfg);
    derive_with_spans(tokens.len(), &spans, sql, schema, cfg)
}

pub(crate) fn derive_with_spans(
    num_tokens: usize,
    spans: &SpanSet,
    sql: &SqlQuery,
    schema: &TableSchema,
    cfg: &MatchConfig,
) -> WeakLabels {
    let (concepts, absent) = schema_concepts(sql, schema);
    let mut found: Vec<(usize, TokenSpan, f64)> = Vec::new();
    let mut unmatched = 0;
    for (i, concept) in concepts.iter().enumerate() {
        match spans.best_span(&concept.text, cfg) {
            Some((span, score)) => found.push((i, span, score)),
            None => unmatched += 1,
        }
    }
    found.sort_by(|a, b| b.2.total_cmp(&a.2).then(b.1.len().cmp(&a.1.len())).then(a.0.cmp(&b.0)));

    let mut labels = vec![BioLabel::O; num_tokens];
    let mut groundings: Vec<GroundingPair> = Vec::new();
    for (i, span, score) in found {
        if groundings.iter().any(|g| g.span.overlaps(&span)) {
            unmatched += 1;
            continue;
        }
        let concept = concepts[i].clone();
        let kind = match concept.kind {
            ConceptKind::Column => LabelKind::Col,
            ConceptKind::Value => LabelKind::Val,
        };
        write_span(&mut labels, span.start, span.end, kind);
        groundings.push(GroundingPair { span, candidates: vec![ScoredConcept { concept, score }] });
    }
    groundings.sort_by_key(|g| g.span.start);
    WeakLabels { labels, groundings, unmatched, absent }
}

/// Weakly labels an answerable example in place of whatever labels it carried.
pub fn annotate(example: &LabeledExample, cfg: &MatchConfig) -> Result<(LabeledExample, WeakLabels)> {
    let sql = example.sql.as_ref().ok_or(Error::EmptyInput("example has no SQL"))?;
    let weak = derive_weak_labels(&example.tokens, sql, &example.schema, cfg);
    let out = LabeledExample::new(
        example.question.clone(),
        example.schema.clone(),
        example.sql.clone(),
        weak.labels.clone(),
        weak.groundings.clone(),
    )?;
    Ok((out, weak))
}
