//! Counterfactual problematic examples built by editing tables, never questions.
//!
//! * unanswerable: delete a SQL column the question mentions; the mention becomes `UNK`.
//! * ambiguous: replace that column with two near-synonym columns; the mention becomes `AMB`
//!   and is grounded to both.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aligner::{tokens_text, MatchConfig, SpanSet};
use crate::error::{Error, Result, ValidationError};
use crate::example::{GroundingPair, LabeledExample, ScoredConcept, TokenSpan};
use crate::fuzzy::{similarity, Prepared};
use crate::label::{spans, write_span, BioLabel, Category, LabelKind};
use crate::pipeline::weak::{annotate, derive_with_spans};
use crate::schema::{normalize_name, Concept, TableSchema};
use crate::sql::{extract_concepts, SqlQuery};
use crate::token::Token;

/// Source of near-synonym column names for a target column.
pub trait CandidateProvider: Sync {
    fn propose(&self, target_column: &str, schema: &TableSchema) -> Vec<String>;
}

/// Trims, drops empties and case-insensitive duplicates, and drops names already in `schema`.
pub fn valid_proposals(raw: Vec<String>, schema: &TableSchema) -> Vec<String> {
    let mut seen: HashSet<String> = schema.columns.iter().map(|c| normalize_name(c)).collect();
    raw.into_iter()
        .map(|c| c.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|c| !c.is_empty() && seen.insert(normalize_name(c)))
        .collect()
}

/// `(prefix, suffix, quantities only)`
const TEMPLATES: [(&str, &str, bool); 7] = [
    ("Our ", "", false),
    ("Opponent ", "", false),
    ("", " (Home)", false),
    ("", " (Away)", false),
    ("Average ", "", true),
    ("Total ", "", true),
    ("Previous ", "", false),
];

/// A column with no cells, or only numeric cells.
fn holds_quantities(schema: &TableSchema, column: &str) -> bool {
    let cells = schema.column_index(column).and_then(|i| schema.cells.get(&schema.columns[i]));
    cells.is_none_or(|cells| cells.iter().all(|v| v.chars().any(|c| c.is_ascii_digit()) && v.parse::<f64>().is_ok()))
}

/// Built-in provider: a few compositional templates around the target name, chosen per
/// (table, column) by a stable hash, plus synonyms from an optional lexicon.
#[derive(Debug, Clone)]
pub struct TemplateProvider {
    templates_per_column: usize,
    lexicon: HashMap<String, Vec<String>>,
}

impl Default for TemplateProvider {
    fn default() -> Self {
        TemplateProvider { templates_per_column: 3, lexicon: HashMap::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub column: String,
    pub synonyms: Vec<String>,
}

impl TemplateProvider {
    /// Lexicon only, no templates.
    pub fn lexicon_only(entries: impl IntoIterator<Item = LexiconEntry>) -> Self {
        TemplateProvider { templates_per_column: 0, lexicon: HashMap::new() }.with_lexicon(entries)
    }

    pub fn with_templates_per_column(mut self, n: usize) -> Self {
        self.templates_per_column = n.min(TEMPLATES.len());
        self
    }

    pub fn with_lexicon(mut self, entries: impl IntoIterator<Item = LexiconEntry>) -> Self {
        for e in entries {
            self.lexicon.entry(normalize_name(&e.column)).or_default().extend(e.synonyms);
        }
        self
    }

    /// Lexicon file: JSONL lines `{"column": ..., "synonyms": [...]}`.
    pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<LexiconEntry>> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(
                serde_json::from_str(&line).map_err(|e| Error::Malformed { line: i + 1, message: e.to_string() })?,
            );
        }
        Ok(out)
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl CandidateProvider for TemplateProvider {
    fn propose(&self, target_column: &str, schema: &TableSchema) -> Vec<String> {
        let key = normalize_name(target_column);
        let h = fnv1a(schema.table_id.bytes().chain([0]).chain(key.bytes()));
        let quantities = holds_quantities(schema, target_column);
        let eligible: Vec<_> = TEMPLATES.iter().filter(|t| quantities || !t.2).collect();
        // 5 or 7 templates: both prime, so any stride visits distinct ones.
        let n = eligible.len() as u64;
        let stride = 1 + (h / n) % (n - 1);
        let mut raw: Vec<String> = (0..self.templates_per_column.min(eligible.len()) as u64)
            .map(|i| {
                let (pre, post, _) = eligible[((h + i * stride) % n) as usize];
                format!("{pre}{target_column}{post}")
            })
            .collect();
        if let Some(syn) = self.lexicon.get(&key) {
            raw.extend(syn.iter().cloned());
        }
        valid_proposals(raw, schema)
    }
}

/// Orders candidates by similarity to `target` (descending), then by length, then
/// lexicographically.
pub fn rerank_candidates(candidates: &[String], target: &str) -> Result<Vec<String>> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let t = Prepared::new(target);
    let mut scored: Vec<(f64, &String)> = candidates.iter().map(|c| (similarity(&Prepared::new(c), &t), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.chars().count().cmp(&b.1.chars().count())).then(a.1.cmp(b.1)));
    Ok(scored.into_iter().map(|(_, c)| c.clone()).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenConfig {
    pub problematic_ratio: f64,
    pub ambiguous_share: f64,
    pub rng_seed: u64,
    pub added_columns: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { problematic_ratio: 0.20, ambiguous_share: 0.55, rng_seed: 0, added_columns: 2 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(0.0..1.0).contains(&self.problematic_ratio) {
            return Err(ValidationError::Config(format!(
                "problematic_ratio {} outside [0, 1)",
                self.problematic_ratio
            )));
        }
        if !(0.0..=1.0).contains(&self.ambiguous_share) {
            return Err(ValidationError::Config(format!("ambiguous_share {} outside [0, 1]", self.ambiguous_share)));
        }
        if self.added_columns < 2 {
            return Err(ValidationError::Config("added_columns must be at least 2".into()));
        }
        Ok(())
    }
}

/// Why a seed could not be turned into a problematic example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Skip {
    MissingSql,
    SchemaTooSmall,
    NoAlignment,
    ProviderShortfall,
    BelowThreshold,
    Unsound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTarget {
    /// Column name as spelled in the schema.
    pub column: String,
    pub span: TokenSpan,
    pub score: f64,
}

fn aligned_columns(spans: &SpanSet, sql: &SqlQuery, schema: &TableSchema, cfg: &MatchConfig) -> Vec<AlignedTarget> {
    extract_concepts(sql)
        .into_iter()
        .filter(|c| c.kind == crate::schema::ConceptKind::Column)
        .filter_map(|c| {
            let column = schema.columns[schema.column_index(&c.column)?].clone();
            let (span, score) = spans.best_span(&column, cfg)?;
            Some(AlignedTarget { column, span, score })
        })
        .collect()
}

/// Samples one SQL column that has a unique best-matching question span.
pub fn align_target(
    tokens: &[Token],
    sql: &SqlQuery,
    schema: &TableSchema,
    cfg: &MatchConfig,
    rng: &mut impl Rng,
) -> Option<AlignedTarget> {
    sample_target(&SpanSet::new(tokens, cfg), sql, schema, cfg, rng)
}

fn sample_target(
    spans: &SpanSet,
    sql: &SqlQuery,
    schema: &TableSchema,
    cfg: &MatchConfig,
    rng: &mut impl Rng,
) -> Option<AlignedTarget> {
    let mut options = aligned_columns(spans, sql, schema, cfg);
    if options.is_empty() {
        return None;
    }
    let i = rng.gen_range(0..options.len());
    Some(options.swap_remove(i))
}

/// Weak labels against `schema`, with `target` forced to `kind`.
#[allow(clippy::too_many_arguments)]
fn relabel(
    example: &LabeledExample,
    spans: &SpanSet,
    sql: &SqlQuery,
    schema: TableSchema,
    target: TokenSpan,
    kind: LabelKind,
    grounding: Option<GroundingPair>,
    cfg: &MatchConfig,
) -> Result<LabeledExample, Skip> {
    let weak = derive_with_spans(example.tokens.len(), spans, sql, &schema, cfg);
    let mut labels = weak.labels;
    for s in spans_overlapping(&labels, target) {
        labels[s.0..=s.1].fill(BioLabel::O);
    }
    write_span(&mut labels, target.start, target.end, kind);
    let mut groundings: Vec<GroundingPair> =
        weak.groundings.into_iter().filter(|g| !g.span.overlaps(&target)).collect();
    groundings.extend(grounding);
    groundings.sort_by_key(|g| g.span.start);
    LabeledExample::new(example.question.clone(), schema, Some(sql.clone()), labels, groundings)
        .map_err(|_| Skip::Unsound)
}

fn spans_overlapping(labels: &[BioLabel], target: TokenSpan) -> Vec<(usize, usize)> {
    spans(labels)
        .into_iter()
        .map(|s| (s.start, s.end))
        .filter(|&(a, b)| TokenSpan::new(a, b).overlaps(&target))
        .collect()
}

fn matching_columns(span_text: &Prepared, schema: &TableSchema, cfg: &MatchConfig) -> usize {
    schema.columns.iter().filter(|c| similarity(span_text, &Prepared::new(c)) >= cfg.threshold).count()
}

pub fn make_unanswerable(
    example: &LabeledExample,
    cfg: &MatchConfig,
    rng: &mut impl Rng,
) -> Result<LabeledExample, Skip> {
    let sql = example.sql.as_ref().ok_or(Skip::MissingSql)?;
    if example.schema.columns.len() < 2 {
        return Err(Skip::SchemaTooSmall);
    }
    let spans = SpanSet::new(&example.tokens, cfg);
    let target = sample_target(&spans, sql, &example.schema, cfg, rng).ok_or(Skip::NoAlignment)?;
    let mut schema = example.schema.without_column(&target.column);
    schema.table_id = format!("{}#unk:{}", example.schema.table_id, target.column);

    let span_text = Prepared::new(&tokens_text(&example.tokens, target.span.start, target.span.end));
    if matching_columns(&span_text, &schema, cfg) > 0 {
        return Err(Skip::Unsound);
    }
    relabel(example, &spans, sql, schema, target.span, LabelKind::Unk, None, cfg)
}

pub fn make_ambiguous(
    example: &LabeledExample,
    provider: &dyn CandidateProvider,
    gen: &GenConfig,
    cfg: &MatchConfig,
    rng: &mut impl Rng,
) -> Result<LabeledExample, Skip> {
    let sql = example.sql.as_ref().ok_or(Skip::MissingSql)?;
    let spans = SpanSet::new(&example.tokens, cfg);
    let target = sample_target(&spans, sql, &example.schema, cfg, rng).ok_or(Skip::NoAlignment)?;

    let proposals = valid_proposals(provider.propose(&target.column, &example.schema), &example.schema);
    if proposals.len() < gen.added_columns {
        return Err(Skip::ProviderShortfall);
    }
    let mut added = rerank_candidates(&proposals, &target.column).map_err(|_| Skip::ProviderShortfall)?;
    added.truncate(gen.added_columns);

    let span_text = Prepared::new(&tokens_text(&example.tokens, target.span.start, target.span.end));
    let mut scored: Vec<ScoredConcept> = Vec::new();
    for name in &added {
        let score = similarity(&span_text, &Prepared::new(name));
        if score < cfg.threshold {
            return Err(Skip::BelowThreshold);
        }
        scored.push(ScoredConcept { concept: Concept::column(name), score });
    }
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    scored.truncate(GroundingPair::MAX_CANDIDATES);

    let position = example.schema.column_index(&target.column).ok_or(Skip::NoAlignment)?;
    let mut schema = example.schema.without_column(&target.column);
    for (offset, name) in added.iter().enumerate() {
        schema.columns.insert(position + offset, name.clone());
    }
    schema.table_id = format!("{}#amb:{}", example.schema.table_id, target.column);
    if schema.validate().is_err() || matching_columns(&span_text, &schema, cfg) < 2 {
        return Err(Skip::Unsound);
    }
    let grounding = GroundingPair { span: target.span, candidates: scored };
    relabel(example, &spans, sql, schema, target.span, LabelKind::Amb, Some(grounding), cfg)
}

/// Per-split counts in the shape of a dataset statistics table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub ambiguous: usize,
    pub unanswerable: usize,
    pub answerable: usize,
    pub tables: usize,
    pub requested_ambiguous: usize,
    pub requested_unanswerable: usize,
    pub seeds_without_sql: usize,
    pub unmatched_concepts: usize,
    pub skipped: std::collections::BTreeMap<Skip, usize>,
    pub warnings: Vec<String>,
}

fn seed_rng(base: u64, index: usize, kind: u64) -> ChaCha8Rng {
    let mixed = fnv1a(base.to_le_bytes().into_iter().chain((index as u64).to_le_bytes()).chain(kind.to_le_bytes()));
    ChaCha8Rng::seed_from_u64(mixed)
}

#[derive(Clone, Copy)]
enum Want {
    Amb,
    Unk,
}

/// All seeds (weakly labeled) followed by `round(ratio * |seeds|)` generated problematic
/// examples split by `ambiguous_share`. Seeds are drawn without replacement in a seeded
/// order; a seed that cannot be mutated is replaced by the next one.
pub fn build_dataset(
    seeds: &[LabeledExample],
    provider: &dyn CandidateProvider,
    gen: &GenConfig,
    cfg: &MatchConfig,
) -> Result<(Vec<LabeledExample>, StatsReport)> {
    gen.validate()?;
    cfg.validate()?;
    let mut report = StatsReport::default();

    let annotated: Vec<Option<(LabeledExample, usize)>> =
        seeds.par_iter().map(|s| annotate(s, cfg).ok().map(|(ex, weak)| (ex, weak.unmatched))).collect();
    let mut answerable = Vec::with_capacity(seeds.len());
    for item in annotated {
        match item {
            Some((ex, unmatched)) => {
                report.unmatched_concepts += unmatched;
                answerable.push(ex);
            }
            None => report.seeds_without_sql += 1,
        }
    }

    let target = (gen.problematic_ratio * answerable.len() as f64).round() as usize;
    let want_amb = (target as f64 * gen.ambiguous_share).round() as usize;
    let want_unk = target - want_amb;
    report.requested_ambiguous = want_amb;
    report.requested_unanswerable = want_unk;

    let mut order: Vec<usize> = (0..answerable.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(gen.rng_seed));

    let attempt = |index: usize, want: Want| -> Result<LabeledExample, Skip> {
        let ex = &answerable[index];
        match want {
            Want::Amb => make_ambiguous(ex, provider, gen, cfg, &mut seed_rng(gen.rng_seed, index, 1)),
            Want::Unk => make_unanswerable(ex, cfg, &mut seed_rng(gen.rng_seed, index, 2)),
        }
    };

    let (mut amb, mut unk) = (0usize, 0usize);
    let mut problematic = Vec::with_capacity(target);
    let mut cursor = 0;
    while (amb < want_amb || unk < want_unk) && cursor < order.len() {
        let remaining = (want_amb - amb) + (want_unk - unk);
        let chunk = &order[cursor..(cursor + remaining + remaining / 2 + 8).min(order.len())];
        cursor += chunk.len();
        // Both mutations are pure functions of (seed index, rng_seed), so evaluating them in
        // parallel and selecting serially gives an execution-order independent result.
        let results: Vec<(Result<LabeledExample, Skip>, Result<LabeledExample, Skip>)> =
            chunk.par_iter().map(|&i| (attempt(i, Want::Amb), attempt(i, Want::Unk))).collect();
        for (amb_try, unk_try) in results {
            let need_amb = want_amb - amb;
            let need_unk = want_unk - unk;
            if need_amb == 0 && need_unk == 0 {
                break;
            }
            // Prefer the kind furthest behind its quota, fall back to the other.
            let amb_first = need_amb as f64 / want_amb.max(1) as f64 >= need_unk as f64 / want_unk.max(1) as f64;
            let mut tries = [(Want::Amb, need_amb, amb_try), (Want::Unk, need_unk, unk_try)];
            if !amb_first {
                tries.swap(0, 1);
            }
            for (want, need, outcome) in tries {
                if need == 0 {
                    continue;
                }
                match outcome {
                    Ok(ex) => {
                        match want {
                            Want::Amb => amb += 1,
                            Want::Unk => unk += 1,
                        }
                        problematic.push(ex);
                        break;
                    }
                    Err(skip) => *report.skipped.entry(skip).or_default() += 1,
                }
            }
        }
    }
    if amb < want_amb || unk < want_unk {
        report.warnings.push(format!(
            "shortfall: generated {amb}/{want_amb} ambiguous and {unk}/{want_unk} unanswerable examples from {} seeds",
            answerable.len()
        ));
    }

    let mut out = answerable;
    out.extend(problematic);
    for ex in &out {
        match ex.category {
            Category::Answerable => report.answerable += 1,
            Category::Ambiguous => report.ambiguous += 1,
            Category::Unanswerable => report.unanswerable += 1,
        }
    }
    report.tables = out.iter().map(|e| e.schema.table_id.as_str()).collect::<BTreeSet<_>>().len();
    Ok((out, report))
}
