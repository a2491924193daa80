//! BIO label set and the question-level verdict derived from it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Span category, i.e. a BIO label with the boundary prefix removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    #[serde(rename = "COL")]
    Col,
    #[serde(rename = "VAL")]
    Val,
    #[serde(rename = "AMB")]
    Amb,
    #[serde(rename = "UNK")]
    Unk,
    #[serde(rename = "O")]
    O,
}

impl LabelKind {
    pub const ALL: [LabelKind; 5] = [LabelKind::Col, LabelKind::Val, LabelKind::Amb, LabelKind::Unk, LabelKind::O];

    pub fn as_str(self) -> &'static str {
        match self {
            LabelKind::Col => "COL",
            LabelKind::Val => "VAL",
            LabelKind::Amb => "AMB",
            LabelKind::Unk => "UNK",
            LabelKind::O => "O",
        }
    }

    pub fn begin(self) -> BioLabel {
        match self {
            LabelKind::Col => BioLabel::BCol,
            LabelKind::Val => BioLabel::BVal,
            LabelKind::Amb => BioLabel::BAmb,
            LabelKind::Unk => BioLabel::BUnk,
            LabelKind::O => BioLabel::O,
        }
    }

    pub fn inside(self) -> BioLabel {
        match self {
            LabelKind::Col => BioLabel::ICol,
            LabelKind::Val => BioLabel::IVal,
            LabelKind::Amb => BioLabel::IAmb,
            LabelKind::Unk => BioLabel::IUnk,
            LabelKind::O => BioLabel::O,
        }
    }
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the nine token labels. Declaration order is the label index used by the CRF
/// and the tie-break order used by Viterbi decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BioLabel {
    BCol,
    ICol,
    BVal,
    IVal,
    BAmb,
    IAmb,
    BUnk,
    IUnk,
    O,
}

pub const NUM_LABELS: usize = 9;

impl BioLabel {
    pub const ALL: [BioLabel; NUM_LABELS] = [
        BioLabel::BCol,
        BioLabel::ICol,
        BioLabel::BVal,
        BioLabel::IVal,
        BioLabel::BAmb,
        BioLabel::IAmb,
        BioLabel::BUnk,
        BioLabel::IUnk,
        BioLabel::O,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> BioLabel {
        Self::ALL[index]
    }

    pub fn kind(self) -> LabelKind {
        match self {
            BioLabel::BCol | BioLabel::ICol => LabelKind::Col,
            BioLabel::BVal | BioLabel::IVal => LabelKind::Val,
            BioLabel::BAmb | BioLabel::IAmb => LabelKind::Amb,
            BioLabel::BUnk | BioLabel::IUnk => LabelKind::Unk,
            BioLabel::O => LabelKind::O,
        }
    }

    pub fn is_begin(self) -> bool {
        matches!(self, BioLabel::BCol | BioLabel::BVal | BioLabel::BAmb | BioLabel::BUnk)
    }

    pub fn is_inside(self) -> bool {
        matches!(self, BioLabel::ICol | BioLabel::IVal | BioLabel::IAmb | BioLabel::IUnk)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BioLabel::BCol => "B-COL",
            BioLabel::ICol => "I-COL",
            BioLabel::BVal => "B-VAL",
            BioLabel::IVal => "I-VAL",
            BioLabel::BAmb => "B-AMB",
            BioLabel::IAmb => "I-AMB",
            BioLabel::BUnk => "B-UNK",
            BioLabel::IUnk => "I-UNK",
            BioLabel::O => "O",
        }
    }

    /// Whether `next` may directly follow `prev` (`None` = sequence start).
    pub fn transition_allowed(prev: Option<BioLabel>, next: BioLabel) -> bool {
        if !next.is_inside() {
            return true;
        }
        match prev {
            Some(p) => p != BioLabel::O && p.kind() == next.kind(),
            None => false,
        }
    }
}

impl fmt::Display for BioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BioLabel {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BioLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| ValidationError::UnknownLabel(s.to_string()))
    }
}

impl Serialize for BioLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for BioLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Checks that every `I-X` continues a `B-X`/`I-X`.
pub fn check_bio(labels: &[BioLabel]) -> Result<(), ValidationError> {
    let mut prev = None;
    for (position, &label) in labels.iter().enumerate() {
        if !BioLabel::transition_allowed(prev, label) {
            return Err(ValidationError::IllFormedBio { position, label: label.to_string() });
        }
        prev = Some(label);
    }
    Ok(())
}

pub fn is_well_formed(labels: &[BioLabel]) -> bool {
    check_bio(labels).is_ok()
}

/// A maximal labeled run `[start, end]` (inclusive) of one non-O kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledSpan {
    pub start: usize,
    pub end: usize,
    pub kind: LabelKind,
}

/// Extracts spans from a label sequence. A stray `I-X` opens a new span.
pub fn spans(labels: &[BioLabel]) -> Vec<LabeledSpan> {
    let mut out: Vec<LabeledSpan> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let kind = label.kind();
        if kind == LabelKind::O {
            continue;
        }
        let continues = label.is_inside() && matches!(out.last(), Some(s) if s.end + 1 == i && s.kind == kind);
        if continues {
            out.last_mut().unwrap().end = i;
        } else {
            out.push(LabeledSpan { start: i, end: i, kind });
        }
    }
    out
}

/// Writes `kind` over `[start, end]` as a B/I run.
pub fn write_span(labels: &mut [BioLabel], start: usize, end: usize, kind: LabelKind) {
    for (offset, slot) in labels[start..=end].iter_mut().enumerate() {
        *slot = if offset == 0 { kind.begin() } else { kind.inside() };
    }
}

/// Question-level verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Answerable,
    Ambiguous,
    Unanswerable,
}

impl Category {
    /// AMB anywhere dominates UNK; otherwise UNK makes the question unanswerable.
    pub fn from_labels(labels: &[BioLabel]) -> Category {
        let has = |k: LabelKind| labels.iter().any(|l| l.kind() == k);
        if has(LabelKind::Amb) {
            Category::Ambiguous
        } else if has(LabelKind::Unk) {
            Category::Unanswerable
        } else {
            Category::Answerable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Answerable => "answerable",
            Category::Ambiguous => "ambiguous",
            Category::Unanswerable => "unanswerable",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BioLabel::*;

    #[test]
    fn parse_all_labels() {
        for l in BioLabel::ALL {
            assert_eq!(l.as_str().parse::<BioLabel>().unwrap(), l);
        }
        assert!("B-FOO".parse::<BioLabel>().is_err());
    }

    #[test]
    fn bio_rules() {
        assert!(is_well_formed(&[O, BAmb, IAmb, O, BCol]));
        assert!(!is_well_formed(&[O, IAmb]));
        assert!(!is_well_formed(&[ICol]));
        assert!(!is_well_formed(&[BCol, IVal]));
        assert!(is_well_formed(&[]));
    }

    #[test]
    fn spans_split_on_begin() {
        let s = spans(&[BUnk, IUnk, BUnk, O, BCol]);
        assert_eq!(s.len(), 3);
        assert_eq!((s[0].start, s[0].end), (0, 1));
        assert_eq!((s[1].start, s[1].end), (2, 2));
        assert_eq!(s[2].kind, LabelKind::Col);
    }

    #[test]
    fn verdict_precedence() {
        assert_eq!(Category::from_labels(&[BUnk, O, BAmb]), Category::Ambiguous);
        assert_eq!(Category::from_labels(&[BUnk, BCol]), Category::Unanswerable);
        assert_eq!(Category::from_labels(&[BCol, O, BVal]), Category::Answerable);
    }
}
