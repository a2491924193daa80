//! Lexical token features standing in for a contextual encoder.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::aligner::{is_table_mention, is_unk_candidate, table_words, MatchConfig, SpanTable};
use crate::fuzzy::{similarity, Prepared};
use crate::schema::{ConceptKind, TableSchema};
use crate::token::Token;

/// Named features of one token.
pub type TokenFeatures = Vec<(String, f64)>;

/// Sparse feature-id → value map of one token.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn new(entries: Vec<(u32, f64)>) -> FeatureVector {
        debug_assert!(entries.iter().all(|(_, v)| v.is_finite()));
        FeatureVector { entries }
    }
}

/// Feature name ↔ id mapping fixed at training time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVocabulary {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl FeatureVocabulary {
    pub fn from_names(names: impl IntoIterator<Item = String>) -> FeatureVocabulary {
        let mut vocab = FeatureVocabulary::default();
        for name in names {
            vocab.intern(&name);
        }
        vocab
    }

    /// Every feature seen in `sequences`, in first-seen order.
    pub fn build<'a>(sequences: impl IntoIterator<Item = &'a [TokenFeatures]>) -> FeatureVocabulary {
        let mut vocab = FeatureVocabulary::default();
        for seq in sequences {
            for token in seq {
                for (name, _) in token {
                    vocab.intern(name);
                }
            }
        }
        vocab
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    /// Maps names to ids, dropping features outside the vocabulary.
    pub fn encode(&self, features: &[TokenFeatures]) -> Vec<FeatureVector> {
        features
            .iter()
            .map(|token| {
                FeatureVector::new(
                    token
                        .iter()
                        .filter(|(_, v)| v.is_finite())
                        .filter_map(|(name, v)| self.id(name).map(|id| (id, *v)))
                        .collect(),
                )
            })
            .collect()
    }
}

impl Serialize for FeatureVocabulary {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, u32> = self.index.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeatureVocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, u32>::deserialize(deserializer)?;
        let mut names = vec![None; map.len()];
        for (name, id) in map {
            let slot = names
                .get_mut(id as usize)
                .ok_or_else(|| serde::de::Error::custom(format!("feature id {id} out of range")))?;
            if slot.replace(name).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate feature id {id}")));
            }
        }
        let names: Vec<String> = names.into_iter().map(|n| n.expect("ids are dense")).collect();
        Ok(FeatureVocabulary::from_names(names))
    }
}

/// Words of the column names seen in training tables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnLexicon(BTreeSet<String>);

fn singular(word: &str) -> &str {
    match word.strip_suffix('s') {
        Some(stem) if stem.chars().count() >= 3 && !stem.ends_with('s') => stem,
        _ => word,
    }
}

impl ColumnLexicon {
    pub fn from_schemas<'a>(schemas: impl IntoIterator<Item = &'a TableSchema>, cfg: &MatchConfig) -> ColumnLexicon {
        let mut words = BTreeSet::new();
        for schema in schemas {
            for column in &schema.columns {
                for w in column.to_lowercase().split(|c: char| !c.is_alphanumeric()) {
                    if w.chars().any(char::is_alphabetic) && !cfg.stopwords.contains(w) {
                        words.insert(singular(w).to_string());
                    }
                }
            }
        }
        ColumnLexicon(words)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(singular(word))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn bucket(score: f64) -> u32 {
    (score.clamp(0.0, 1.0) * 10.0).floor() as u32
}

fn count_bucket(n: usize) -> &'static str {
    match n {
        0 => "0",
        1 => "1",
        _ => "2+",
    }
}

fn shape(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            c
        };
        if !out.ends_with(s) {
            out.push(s);
        }
    }
    out
}

/// Per-token context features that are also copied onto neighbours.
struct Local {
    word: String,
    stop: bool,
    num: bool,
    punct: bool,
    table: bool,
    unk_candidate: bool,
    col_count: &'static str,
    val_count: &'static str,
    span_kind: &'static str,
}

/// Lexical and schema-match features for every token.
pub fn featurize(tokens: &[Token], schema: &TableSchema, cfg: &MatchConfig) -> Vec<TokenFeatures> {
    featurize_with(tokens, schema, cfg, &ColumnLexicon::default())
}

/// [`featurize`] plus features from a lexicon of known column words.
pub fn featurize_with(
    tokens: &[Token],
    schema: &TableSchema,
    cfg: &MatchConfig,
    lexicon: &ColumnLexicon,
) -> Vec<TokenFeatures> {
    let table = SpanTable::for_schema(tokens, schema, cfg);
    let n = tokens.len();
    let columns: Vec<Prepared> = schema.columns.iter().map(|c| Prepared::new(c)).collect();
    let values: Vec<Prepared> = schema.cells.values().flatten().map(|v| Prepared::new(v)).collect();
    let table_words = table_words(schema);
    let table = &table;

    let col_counts = table.column_counts(n);
    let mut val_counts = vec![0usize; n];
    let mut col_span_best = vec![0.0f64; n];
    let mut val_span_best = vec![0.0f64; n];
    for (si, span) in table.spans.spans().iter().enumerate() {
        for &(ci, score) in &table.candidates[si] {
            let is_col = table.concepts[ci].kind == ConceptKind::Column;
            for t in span.start..=span.end {
                if is_col {
                    col_span_best[t] = col_span_best[t].max(score);
                } else {
                    val_span_best[t] = val_span_best[t].max(score);
                    val_counts[t] += 1;
                }
            }
        }
    }
    // Position inside the baseline's chosen grounding span, and that span's kind.
    let mut span_pos = vec![""; n];
    let mut span_kind = vec!["none"; n];
    for pair in table.ground(cfg) {
        let kind = if pair.candidates.len() >= 2 {
            "multi"
        } else if pair.candidates[0].concept.kind == ConceptKind::Column {
            "col"
        } else {
            "val"
        };
        for t in pair.span.start..=pair.span.end {
            span_pos[t] = if t == pair.span.start { "B" } else { "I" };
            span_kind[t] = kind;
        }
    }

    let locals: Vec<Local> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let table_mention = is_table_mention(t, &table_words, cfg);
            Local {
                word: t.norm.clone(),
                stop: cfg.is_stopword(t),
                num: t.is_numeric(),
                punct: t.is_punct(),
                table: table_mention,
                unk_candidate: is_unk_candidate(t, cfg) && !table_mention && col_counts[i] == 0 && val_counts[i] == 0,
                col_count: count_bucket(col_counts[i]),
                val_count: count_bucket(val_counts[i]),
                span_kind: span_kind[i],
            }
        })
        .collect();

    let mut out = Vec::with_capacity(n);
    for (i, token) in tokens.iter().enumerate() {
        let mut f: TokenFeatures = Vec::with_capacity(48);
        let mut add = |name: String| f.push((name, 1.0));
        let local = &locals[i];
        add("bias".into());
        add(format!("w={}", local.word));
        add(format!("shape={}", shape(&token.text)));
        add(format!(
            "pos={}",
            if i == 0 {
                "first"
            } else if i + 1 == n {
                "last"
            } else {
                "mid"
            }
        ));
        let t = Prepared::new(&token.norm);
        let best = |set: &[Prepared]| set.iter().map(|c| similarity(&t, c)).fold(0.0, f64::max);
        add(format!("colsim={}", bucket(best(&columns))));
        add(format!("valsim={}", bucket(best(&values))));
        add(format!("colspan={}", bucket(col_span_best[i])));
        add(format!("valspan={}", bucket(val_span_best[i])));
        add(format!("colcount={}", local.col_count));
        add(format!("valcount={}", local.val_count));
        add(format!("span={}{}", span_pos[i], local.span_kind));
        if token.norm.chars().count() < 3 {
            add("short".into());
        }
        if local.unk_candidate {
            add(format!("unkcand|w={}", local.word));
            add(format!("unkcand|shape={}", shape(&token.text)));
        }
        if !local.punct && lexicon.contains(&local.word) {
            add("lexcol".into());
            add(format!("lexcol|colcount={}", local.col_count));
            if local.unk_candidate {
                add("unkcand|lexcol".into());
            }
        }
        for (prefix, j) in [("p", i.checked_sub(1)), ("n", Some(i + 1).filter(|&j| j < n))] {
            let Some(j) = j else {
                add(format!("{prefix}:boundary"));
                continue;
            };
            let other = &locals[j];
            add(format!("{prefix}:w={}", other.word));
            add(format!("{prefix}:colcount={}", other.col_count));
            add(format!("{prefix}:span={}", other.span_kind));
            add(format!("colcount={}|{prefix}:colcount={}", local.col_count, other.col_count));
            add(format!("span={}|{prefix}:span={}", local.span_kind, other.span_kind));
            if local.unk_candidate {
                add(format!("unkcand|{prefix}:w={}", other.word));
            }
            for (flag, name) in [
                (other.stop, "stop"),
                (other.num, "num"),
                (other.punct, "punct"),
                (other.table, "table"),
                (other.unk_candidate, "unkcand"),
            ] {
                if flag {
                    add(format!("{prefix}:{name}"));
                    if local.unk_candidate {
                        add(format!("unkcand|{prefix}:{name}"));
                    }
                    if local.stop {
                        add(format!("stop|{prefix}:{name}"));
                    }
                }
            }
        }
        for (flag, name) in [
            (local.stop, "stop"),
            (local.num, "num"),
            (local.punct, "punct"),
            (local.table, "table"),
            (local.unk_candidate, "unkcand"),
        ] {
            if flag {
                add(name.into());
            }
        }
        out.push(f);
    }
    out
}
