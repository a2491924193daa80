//! String similarity used for every span-to-concept comparison.
//!
//! The score is the larger of two routes:
//!
//! * character route: `0.5 * trigram Dice + 0.5 * (1 - levenshtein / max_len)` on the
//!   lowercased, whitespace-collapsed strings;
//! * word route: soft containment of the content words of one side in the other, scaled by
//!   `0.8 + 0.15 * word_count_ratio`. Content words contain a letter and are not stopwords.
//!   Two words match when equal, or when their character route reaches 0.8.
//!
//! The word route tops out at 0.95, so only normalized-equal strings score 1.0.

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

const WORD_MATCH_MIN: f64 = 0.8;
const CONTAINMENT_WEIGHT: f64 = 0.8;
const COVERAGE_WEIGHT: f64 = 0.15;

/// Lowercased stopword set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn builtin() -> Arc<Stopwords> {
        static BUILTIN: OnceLock<Arc<Stopwords>> = OnceLock::new();
        BUILTIN.get_or_init(|| Arc::new(Stopwords::parse(include_str!("stopwords.txt")))).clone()
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Stopwords {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Stopwords> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map(|t| Stopwords::parse(&t))
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Character form of one string, ready for repeated comparisons.
#[derive(Debug, Clone)]
struct CharForm {
    chars: Vec<char>,
    trigrams: Vec<[char; 3]>,
}

impl CharForm {
    fn new(s: &str) -> CharForm {
        let chars: Vec<char> = s.chars().collect();
        let mut trigrams: Vec<[char; 3]> = if chars.len() < 3 {
            let mut g = ['\0'; 3];
            g[..chars.len()].copy_from_slice(&chars);
            vec![g]
        } else {
            chars.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
        };
        trigrams.sort_unstable();
        CharForm { chars, trigrams }
    }
}

/// A string preprocessed for [`similarity`].
#[derive(Debug, Clone)]
pub struct Prepared {
    norm: String,
    form: CharForm,
    words: Vec<(String, CharForm)>,
}

impl Prepared {
    pub fn new(s: &str) -> Prepared {
        let norm = normalize(s);
        let stop = Stopwords::builtin();
        let words = norm
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| w.chars().any(char::is_alphabetic) && !stop.contains(w))
            .map(|w| (w.to_string(), CharForm::new(w)))
            .collect();
        Prepared { form: CharForm::new(&norm), norm, words }
    }

    pub fn normalized(&self) -> &str {
        &self.norm
    }

    pub fn is_empty(&self) -> bool {
        self.norm.is_empty()
    }
}

pub fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Similarity in `[0, 1]` between two non-empty strings; symmetric, and 1.0 exactly when
/// the normalized strings are equal.
pub fn fuzzy_score(span_text: &str, concept_text: &str) -> Result<f64> {
    let (a, b) = (Prepared::new(span_text), Prepared::new(concept_text));
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("fuzzy_score needs two non-empty strings"));
    }
    Ok(similarity(&a, &b))
}

pub fn similarity(a: &Prepared, b: &Prepared) -> f64 {
    if a.norm == b.norm {
        return 1.0;
    }
    char_similarity(&a.form, &b.form).max(word_similarity(a, b))
}

fn char_similarity(a: &CharForm, b: &CharForm) -> f64 {
    let longest = a.chars.len().max(b.chars.len());
    if longest == 0 {
        return 1.0;
    }
    let edit = 1.0 - levenshtein(&a.chars, &b.chars) as f64 / longest as f64;
    0.5 * dice(&a.trigrams, &b.trigrams) + 0.5 * edit
}

fn word_similarity(a: &Prepared, b: &Prepared) -> f64 {
    if a.words.is_empty() || b.words.is_empty() {
        return 0.0;
    }
    let containment = containment(&a.words, &b.words).max(containment(&b.words, &a.words));
    let (na, nb) = (a.words.len() as f64, b.words.len() as f64);
    containment * (CONTAINMENT_WEIGHT + COVERAGE_WEIGHT * na.min(nb) / na.max(nb))
}

fn containment(from: &[(String, CharForm)], into: &[(String, CharForm)]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|(w, wf)| {
            into.iter()
                .map(|(v, vf)| {
                    if w == v {
                        1.0
                    } else {
                        let s = char_similarity(wf, vf);
                        if s >= WORD_MATCH_MIN {
                            s
                        } else {
                            0.0
                        }
                    }
                })
                .fold(0.0, f64::max)
        })
        .sum();
    total / from.len() as f64
}

/// Multiset Dice coefficient over sorted trigram lists.
fn dice(a: &[[char; 3]], b: &[[char; 3]]) -> f64 {
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    2.0 * common as f64 / (a.len() + b.len()) as f64
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (row[j + 1] + 1).min(row[j] + 1).min(diag + usize::from(ca != cb));
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}
