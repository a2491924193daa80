//! N-gram span to concept matching, grounding, and the lexical baseline detector.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::example::{GroundingPair, ScoredConcept, TokenSpan};
use crate::fuzzy::{similarity, Prepared, Stopwords};
use crate::label::{write_span, BioLabel, LabelKind};
use crate::schema::{Concept, ConceptKind, TableSchema};
use crate::token::Token;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchConfig {
    pub max_ngram: usize,
    pub threshold: f64,
    pub top_k: usize,
    #[serde(skip, default = "Stopwords::builtin")]
    pub stopwords: Arc<Stopwords>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { max_ngram: 5, threshold: 0.72, top_k: 3, stopwords: Stopwords::builtin() }
    }
}

impl PartialEq for MatchConfig {
    fn eq(&self, other: &Self) -> bool {
        self.max_ngram == other.max_ngram
            && self.threshold == other.threshold
            && self.top_k == other.top_k
            && self.stopwords == other.stopwords
    }
}

impl MatchConfig {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.max_ngram < 1 {
            return Err(ValidationError::Config("max_ngram must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ValidationError::Config(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        if self.top_k < 1 {
            return Err(ValidationError::Config("top_k must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_stopword(&self, token: &Token) -> bool {
        self.stopwords.contains(&token.norm)
    }

    /// Not punctuation and not a stopword. Numbers count.
    pub fn is_content(&self, token: &Token) -> bool {
        !token.is_punct() && !self.is_stopword(token)
    }
}

/// Normalized text of tokens `[first, last]`; gaps collapse to one space.
pub fn tokens_text(tokens: &[Token], first: usize, last: usize) -> String {
    let mut out = String::new();
    for i in first..=last {
        if i > first && tokens[i - 1].end < tokens[i].start {
            out.push(' ');
        }
        out.push_str(&tokens[i].norm);
    }
    out
}

/// Every candidate n-gram of a question, prepared for scoring.
///
/// A span is a candidate when it has at most `max_ngram` tokens, neither edge token is
/// punctuation, and it contains at least one content token.
#[derive(Debug, Clone)]
pub struct SpanSet {
    spans: Vec<TokenSpan>,
    prepared: Vec<Prepared>,
    /// index of the span `(start, len)` in `spans`, if it is a candidate
    lookup: Vec<Vec<Option<usize>>>,
    max_ngram: usize,
}

impl SpanSet {
    #[allow(clippy::needless_range_loop)]
    pub fn new(tokens: &[Token], cfg: &MatchConfig) -> SpanSet {
        let n = tokens.len();
        let max_ngram = cfg.max_ngram.max(1);
        let mut spans = Vec::new();
        let mut prepared = Vec::new();
        let mut lookup = vec![vec![None; max_ngram + 1]; n];
        for start in 0..n {
            for len in 1..=max_ngram {
                let end = start + len - 1;
                if end >= n {
                    break;
                }
                if tokens[start].is_punct() || tokens[end].is_punct() {
                    continue;
                }
                if !tokens[start..=end].iter().any(|t| cfg.is_content(t)) {
                    continue;
                }
                lookup[start][len] = Some(spans.len());
                spans.push(TokenSpan::new(start, end));
                prepared.push(Prepared::new(&tokens_text(tokens, start, end)));
            }
        }
        SpanSet { spans, prepared, lookup, max_ngram }
    }

    pub fn spans(&self) -> &[TokenSpan] {
        &self.spans
    }

    pub fn index_of(&self, span: TokenSpan) -> Option<usize> {
        let len = span.len();
        if len > self.max_ngram {
            return None;
        }
        self.lookup.get(span.start).and_then(|row| row[len])
    }

    /// Scores of every span against one concept, with "tightness": a span keeps its score
    /// only if it strictly beats every shorter candidate span inside it.
    fn tight_scores(&self, concept: &Prepared) -> Vec<Option<f64>> {
        let raw: Vec<f64> = self.prepared.iter().map(|p| similarity(p, concept)).collect();
        // best_within[i] = max raw score over candidate spans contained in spans[i], itself included
        let mut best_within = vec![f64::NEG_INFINITY; self.spans.len()];
        let mut order: Vec<usize> = (0..self.spans.len()).collect();
        order.sort_by_key(|&i| self.spans[i].len());
        let mut tight = vec![None; self.spans.len()];
        for i in order {
            let span = self.spans[i];
            let mut inner = f64::NEG_INFINITY;
            if span.len() > 1 {
                for sub in [TokenSpan::new(span.start + 1, span.end), TokenSpan::new(span.start, span.end - 1)] {
                    inner = inner.max(self.best_inside(sub, &best_within));
                }
            }
            if raw[i] > inner {
                tight[i] = Some(raw[i]);
            }
            best_within[i] = raw[i].max(inner);
        }
        tight
    }

    /// Max over candidate spans inside `span` (which need not be a candidate itself).
    fn best_inside(&self, span: TokenSpan, best_within: &[f64]) -> f64 {
        if let Some(i) = self.index_of(span) {
            return best_within[i];
        }
        if span.len() == 1 {
            return f64::NEG_INFINITY;
        }
        self.best_inside(TokenSpan::new(span.start + 1, span.end), best_within)
            .max(self.best_inside(TokenSpan::new(span.start, span.end - 1), best_within))
    }

    /// Best tight span for a concept with score ≥ θ, provided no other span ties it.
    pub fn best_span(&self, concept_text: &str, cfg: &MatchConfig) -> Option<(TokenSpan, f64)> {
        let concept = Prepared::new(concept_text);
        if concept.is_empty() {
            return None;
        }
        let tight = self.tight_scores(&concept);
        let best = tight.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        if best < cfg.threshold {
            return None;
        }
        let mut winners = tight.iter().enumerate().filter(|(_, s)| **s == Some(best));
        let (i, _) = winners.next()?;
        if winners.next().is_some() {
            return None;
        }
        Some((self.spans[i], best))
    }
}

/// Candidate concepts (score ≥ θ, tight) for every candidate span of a question.
#[derive(Debug, Clone)]
pub struct SpanTable {
    pub spans: SpanSet,
    pub concepts: Vec<Concept>,
    /// per span: (concept index, score), best first, ties by concept order
    pub candidates: Vec<Vec<(usize, f64)>>,
}

impl SpanTable {
    pub fn build(tokens: &[Token], concepts: Vec<Concept>, cfg: &MatchConfig) -> SpanTable {
        let spans = SpanSet::new(tokens, cfg);
        let mut candidates = vec![Vec::new(); spans.spans.len()];
        for (ci, concept) in concepts.iter().enumerate() {
            let prepared = Prepared::new(&concept.text);
            if prepared.is_empty() {
                continue;
            }
            for (si, score) in spans.tight_scores(&prepared).into_iter().enumerate() {
                if let Some(score) = score.filter(|s| *s >= cfg.threshold) {
                    candidates[si].push((ci, score));
                }
            }
        }
        for list in &mut candidates {
            list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        }
        SpanTable { spans, concepts, candidates }
    }

    pub fn for_schema(tokens: &[Token], schema: &TableSchema, cfg: &MatchConfig) -> SpanTable {
        Self::build(tokens, schema.concepts(), cfg)
    }

    fn scored(&self, list: &[(usize, f64)], top_k: usize) -> Vec<ScoredConcept> {
        list.iter()
            .take(top_k)
            .map(|&(ci, score)| ScoredConcept { concept: self.concepts[ci].clone(), score })
            .collect()
    }

    /// Non-overlapping grounding pairs: longer spans first, then higher top score, then leftmost.
    pub fn ground(&self, cfg: &MatchConfig) -> Vec<GroundingPair> {
        let mut matched: Vec<usize> = (0..self.candidates.len()).filter(|&i| !self.candidates[i].is_empty()).collect();
        matched.sort_by(|&a, &b| {
            let (sa, sb) = (self.spans.spans[a], self.spans.spans[b]);
            sb.len()
                .cmp(&sa.len())
                .then(self.candidates[b][0].1.total_cmp(&self.candidates[a][0].1))
                .then(sa.start.cmp(&sb.start))
        });
        let mut accepted: Vec<GroundingPair> = Vec::new();
        for i in matched {
            let span = self.spans.spans[i];
            if accepted.iter().any(|p| p.span.overlaps(&span)) {
                continue;
            }
            accepted.push(GroundingPair { span, candidates: self.scored(&self.candidates[i], cfg.top_k) });
        }
        accepted.sort_by_key(|p| p.span.start);
        accepted
    }

    /// Candidates for one exact span, optionally restricted to one concept kind.
    pub fn candidates_for(&self, span: TokenSpan, kind: Option<ConceptKind>, top_k: usize) -> Vec<ScoredConcept> {
        let Some(i) = self.spans.index_of(span) else {
            return Vec::new();
        };
        let list: Vec<(usize, f64)> = self.candidates[i]
            .iter()
            .copied()
            .filter(|(ci, _)| kind.is_none_or(|k| self.concepts[*ci].kind == k))
            .collect();
        self.scored(&list, top_k)
    }

    /// Distinct column concepts matched by any span covering each token.
    pub fn column_counts(&self, num_tokens: usize) -> Vec<usize> {
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); num_tokens];
        for (si, span) in self.spans.spans.iter().enumerate() {
            for &(ci, _) in &self.candidates[si] {
                if self.concepts[ci].kind != ConceptKind::Column {
                    continue;
                }
                for set in &mut sets[span.start..=span.end] {
                    if !set.contains(&ci) {
                        set.push(ci);
                    }
                }
            }
        }
        sets.into_iter().map(|s| s.len()).collect()
    }
}

/// Links question n-grams to columns and cell values.
pub fn ground(tokens: &[Token], schema: &TableSchema, cfg: &MatchConfig) -> Vec<GroundingPair> {
    SpanTable::for_schema(tokens, schema, cfg).ground(cfg)
}

/// Words of the table id, used to recognise mentions of the table's own subject
/// ("phone" for a `phones` table). Anything after `#` marks a derived table and is ignored.
pub fn table_words(schema: &TableSchema) -> Vec<Prepared> {
    let base = schema.table_id.split('#').next().unwrap_or_default();
    base.split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().count() >= 3 && w.chars().any(char::is_alphabetic))
        .map(Prepared::new)
        .collect()
}

pub fn is_table_mention(token: &Token, table_words: &[Prepared], cfg: &MatchConfig) -> bool {
    if token.is_punct() || table_words.is_empty() {
        return false;
    }
    let t = Prepared::new(&token.norm);
    table_words.iter().any(|w| similarity(&t, w) >= cfg.threshold)
}

/// Content word eligible for the baseline's "unmatched noun phrase" rule.
pub fn is_unk_candidate(token: &Token, cfg: &MatchConfig) -> bool {
    cfg.is_content(token) && !token.is_numeric() && token.norm.chars().count() >= 3
}

/// Labels plus the groundings that support them.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub labels: Vec<BioLabel>,
    pub groundings: Vec<GroundingPair>,
}

/// Lexical baseline: multi-candidate spans are ambiguous, single-candidate spans are column
/// or value mentions, and runs of unmatched content words are unanswerable.
pub fn heuristic_annotate(tokens: &[Token], schema: &TableSchema, cfg: &MatchConfig) -> Annotation {
    let groundings = ground(tokens, schema, cfg);
    let mut labels = vec![BioLabel::O; tokens.len()];
    let mut covered = vec![false; tokens.len()];
    for pair in &groundings {
        let kind = if pair.candidates.len() >= 2 {
            LabelKind::Amb
        } else if pair.candidates[0].concept.kind == ConceptKind::Column {
            LabelKind::Col
        } else {
            LabelKind::Val
        };
        write_span(&mut labels, pair.span.start, pair.span.end, kind);
        covered[pair.span.start..=pair.span.end].fill(true);
    }
    let table = table_words(schema);
    let unk: Vec<bool> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| !covered[i] && is_unk_candidate(t, cfg) && !is_table_mention(t, &table, cfg))
        .collect();
    let mut i = 0;
    while i < tokens.len() {
        if unk[i] {
            let start = i;
            while i + 1 < tokens.len() && unk[i + 1] {
                i += 1;
            }
            write_span(&mut labels, start, i, LabelKind::Unk);
        }
        i += 1;
    }
    Annotation { labels, groundings }
}

pub fn heuristic_detect(tokens: &[Token], schema: &TableSchema, cfg: &MatchConfig) -> Vec<BioLabel> {
    heuristic_annotate(tokens, schema, cfg).labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{is_well_formed, BioLabel::*};
    use crate::token::tokenize;

    fn table(id: &str, cols: &[&str]) -> TableSchema {
        TableSchema::new(id, cols.iter().map(|c| c.to_string()).collect()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(MatchConfig::default().validate().is_ok());
        assert!(MatchConfig::default().with_threshold(1.0).validate().is_err());
        assert!(MatchConfig { top_k: 0, ..MatchConfig::default() }.validate().is_err());
    }

    #[test]
    fn span_set_skips_function_word_spans() {
        let tokens = tokenize("what is the rating ?");
        let set = SpanSet::new(&tokens, &MatchConfig::default());
        assert!(set.index_of(TokenSpan::new(0, 2)).is_none());
        assert!(set.index_of(TokenSpan::new(3, 4)).is_none());
        assert!(set.index_of(TokenSpan::new(2, 3)).is_some());
    }

    #[test]
    fn tightness_rejects_padded_spans() {
        let tokens = tokenize("show sales by region");
        let pairs = ground(&tokens, &table("t", &["Sales", "Region"]), &MatchConfig::default());
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].span, TokenSpan::new(1, 1));
        assert_eq!(pairs[1].span, TokenSpan::new(3, 3));
    }

    #[test]
    fn no_match_no_pairs() {
        let tokens = tokenize("hello world");
        assert!(ground(&tokens, &table("t", &["Price"]), &MatchConfig::default()).is_empty());
    }

    #[test]
    fn best_span_requires_unique_winner() {
        let cfg = MatchConfig::default();
        let tokens = tokenize("rating or rating");
        assert!(SpanSet::new(&tokens, &cfg).best_span("Rating", &cfg).is_none());
        let tokens = tokenize("what is the score");
        let (span, s) = SpanSet::new(&tokens, &cfg).best_span("Score", &cfg).unwrap();
        assert_eq!((span, s), (TokenSpan::new(3, 3), 1.0));
    }

    #[test]
    fn table_mentions_are_not_unanswerable() {
        let tokens = tokenize("list phones with storage");
        let labels = heuristic_detect(&tokens, &table("phones", &["Storage"]), &MatchConfig::default());
        assert_eq!(labels, vec![O, O, O, BCol]);
    }

    #[test]
    fn adjacent_unmatched_words_merge() {
        let tokens = tokenize("what is the model name");
        let labels = heuristic_detect(&tokens, &table("t", &["Price"]), &MatchConfig::default());
        assert_eq!(labels, vec![O, O, O, BUnk, IUnk]);
        assert!(is_well_formed(&labels));
    }
}
