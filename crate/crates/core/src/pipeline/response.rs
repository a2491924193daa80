//! User-facing explanation sentences.

use crate::error::{Error, Result};
use crate::example::TokenSpan;
use crate::label::{spans, Category, LabelKind};
use crate::token::span_text;

use super::detect::DetectionResult;

pub const AMBIGUOUS_PREFIX: &str = "Oops, this question has multiple semantic meanings.";

/// `"a"`, `either "a" or "b"`, `either "a", "b", or "c"`.
fn alternatives(items: &[&str]) -> String {
    let quoted: Vec<String> = items.iter().map(|c| format!("\"{c}\"")).collect();
    match quoted.as_slice() {
        [one] => one.clone(),
        [a, b] => format!("either {a} or {b}"),
        [init @ .., last] => format!("either {}, or {last}", init.join(", ")),
        [] => String::new(),
    }
}

pub fn ambiguous_sentence(span: &str, candidates: &[&str]) -> Result<String> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(format!("{AMBIGUOUS_PREFIX} \"{span}\" may refer to {}.", alternatives(candidates)))
}

pub fn unanswerable_sentence(span: &str) -> String {
    format!("Sorry, we can\u{2019}t find an answer for you since \"{span}\" cannot be mapped to any concepts in your table.")
}

/// One sentence per ambiguous or unanswerable span, in question order.
pub fn render_response(result: &DetectionResult, question: &str) -> Result<String> {
    if result.verdict == Category::Answerable {
        return Err(Error::AnswerableResponse);
    }
    let mut sentences = Vec::new();
    for s in spans(&result.labels) {
        let text = span_text(question, &result.tokens, s.start, s.end);
        match s.kind {
            LabelKind::Amb => {
                let span = TokenSpan::new(s.start, s.end);
                let candidates: Vec<&str> = result
                    .groundings
                    .iter()
                    .find(|g| g.span == span)
                    .map(|g| g.candidates.iter().map(|c| c.concept.text.as_str()).collect())
                    .unwrap_or_default();
                sentences.push(ambiguous_sentence(&text, &candidates)?);
            }
            LabelKind::Unk => sentences.push(unanswerable_sentence(&text)),
            _ => {}
        }
    }
    Ok(sentences.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joining() {
        assert_eq!(alternatives(&["a"]), "\"a\"");
        assert_eq!(alternatives(&["a", "b"]), "either \"a\" or \"b\"");
        assert_eq!(alternatives(&["a", "b", "c"]), "either \"a\", \"b\", or \"c\"");
    }

    #[test]
    fn no_candidates_is_error() {
        assert!(ambiguous_sentence("x", &[]).is_err());
    }
}
