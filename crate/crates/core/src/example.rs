use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::label::{check_bio, BioLabel, Category, LabelKind};
use crate::schema::{Concept, TableSchema};
use crate::sql::SqlQuery;
use crate::token::{tokenize, Token};

/// Inclusive token range `[start, end]`; serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> TokenSpan {
        debug_assert!(start <= end);
        TokenSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn contains(&self, other: &TokenSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl From<[usize; 2]> for TokenSpan {
    fn from([start, end]: [usize; 2]) -> Self {
        TokenSpan { start, end }
    }
}

impl From<TokenSpan> for [usize; 2] {
    fn from(s: TokenSpan) -> Self {
        [s.start, s.end]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredConcept {
    #[serde(flatten)]
    pub concept: Concept,
    pub score: f64,
}

/// A question span linked to up to three concepts, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingPair {
    pub span: TokenSpan,
    pub candidates: Vec<ScoredConcept>,
}

impl GroundingPair {
    pub const MAX_CANDIDATES: usize = 3;

    pub fn validate(&self) -> Result<(), ValidationError> {
        let bad = || ValidationError::BadCandidates { start: self.span.start, end: self.span.end };
        if self.candidates.is_empty() || self.candidates.len() > Self::MAX_CANDIDATES {
            return Err(bad());
        }
        if self.candidates.iter().any(|c| !(0.0..=1.0).contains(&c.score)) {
            return Err(bad());
        }
        if self.candidates.windows(2).any(|w| w[0].score < w[1].score) {
            return Err(bad());
        }
        Ok(())
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.candidates.iter().map(|c| &c.concept)
    }
}

/// A question over a table with token labels, groundings and the derived verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub question: String,
    pub tokens: Vec<Token>,
    pub schema: TableSchema,
    /// Provenance only. For generated examples it may reference a removed column.
    pub sql: Option<SqlQuery>,
    pub labels: Vec<BioLabel>,
    pub groundings: Vec<GroundingPair>,
    pub category: Category,
}

impl LabeledExample {
    /// Tokenizes `question`, derives the category from `labels` and checks every invariant.
    pub fn new(
        question: impl Into<String>,
        schema: TableSchema,
        sql: Option<SqlQuery>,
        labels: Vec<BioLabel>,
        groundings: Vec<GroundingPair>,
    ) -> Result<Self, ValidationError> {
        let question = question.into();
        let tokens = tokenize(&question);
        let category = Category::from_labels(&labels);
        let example = LabeledExample { question, tokens, schema, sql, labels, groundings, category };
        example.validate()?;
        Ok(example)
    }

    /// An unlabeled seed: every token `O`, no groundings.
    pub fn unlabeled(
        question: impl Into<String>,
        schema: TableSchema,
        sql: Option<SqlQuery>,
    ) -> Result<Self, ValidationError> {
        let question = question.into();
        let n = tokenize(&question).len();
        Self::new(question, schema, sql, vec![BioLabel::O; n], Vec::new())
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        self.schema.validate()?;
        if self.labels.len() != self.tokens.len() {
            return Err(ValidationError::LabelTokenMismatch { labels: self.labels.len(), tokens: self.tokens.len() });
        }
        check_bio(&self.labels)?;
        let derived = Category::from_labels(&self.labels);
        if derived != self.category {
            return Err(ValidationError::CategoryMismatch {
                stored: self.category.to_string(),
                derived: derived.to_string(),
            });
        }
        for pair in &self.groundings {
            let TokenSpan { start, end } = pair.span;
            let covered = start <= end
                && end < self.labels.len()
                && self.labels[start..=end]
                    .iter()
                    .all(|l| matches!(l.kind(), LabelKind::Col | LabelKind::Val | LabelKind::Amb));
            if !covered {
                return Err(ValidationError::UncoveredGrounding { start, end });
            }
            pair.validate()?;
        }
        Ok(())
    }

    /// Verbatim question text of a span.
    pub fn span_text(&self, span: TokenSpan) -> String {
        crate::token::span_text(&self.question, &self.tokens, span.start, span.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::BioLabel::*;

    fn schema() -> TableSchema {
        TableSchema::new("t", vec!["Sales".into(), "Region".into()]).unwrap()
    }

    #[test]
    fn category_is_derived() {
        let ex = LabeledExample::new("show sales by region", schema(), None, vec![O, BCol, O, BUnk], vec![]).unwrap();
        assert_eq!(ex.category, Category::Unanswerable);
    }

    #[test]
    fn length_mismatch_is_named() {
        let err = LabeledExample::new("show sales", schema(), None, vec![O], vec![]).unwrap_err();
        assert!(err.to_string().contains("label/token length mismatch"));
    }

    #[test]
    fn grounding_must_be_covered() {
        let pair = GroundingPair {
            span: TokenSpan::new(0, 0),
            candidates: vec![ScoredConcept { concept: Concept::column("Sales"), score: 1.0 }],
        };
        let err = LabeledExample::new("show sales", schema(), None, vec![O, BCol], vec![pair]).unwrap_err();
        assert!(matches!(err, ValidationError::UncoveredGrounding { .. }));
    }

    #[test]
    fn candidates_sorted_and_capped() {
        let c = |s| ScoredConcept { concept: Concept::column("Sales"), score: s };
        let ok = GroundingPair { span: TokenSpan::new(0, 0), candidates: vec![c(0.9), c(0.8)] };
        assert!(ok.validate().is_ok());
        let unsorted = GroundingPair { span: TokenSpan::new(0, 0), candidates: vec![c(0.8), c(0.9)] };
        assert!(unsorted.validate().is_err());
        let many = GroundingPair { span: TokenSpan::new(0, 0), candidates: vec![c(0.9); 4] };
        assert!(many.validate().is_err());
    }
}
