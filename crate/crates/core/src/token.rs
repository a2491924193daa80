use serde::{Deserialize, Serialize};

/// A question token. Offsets count Unicode scalar values, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub norm: String,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.text.chars().all(|c| c.is_ascii_punctuation())
    }

    /// Digits plus separators such as `1,000`, `3.5` or `0–2`.
    pub fn is_numeric(&self) -> bool {
        self.text.chars().any(|c| c.is_ascii_digit())
            && self.text.chars().all(|c| c.is_ascii_digit() || !c.is_alphanumeric())
    }
}

/// Splits on whitespace, then detaches leading and trailing ASCII punctuation
/// characters as single-character tokens. Interior characters are never split.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let chunk_start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, chunk_start, i, &mut tokens);
    }
    tokens
}

fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let mut lo = start;
    let mut hi = end;
    while lo < hi && chars[lo].is_ascii_punctuation() {
        out.push(make_token(chars, lo, lo + 1));
        lo += 1;
    }
    let mut trailing = Vec::new();
    while hi > lo && chars[hi - 1].is_ascii_punctuation() {
        trailing.push(make_token(chars, hi - 1, hi));
        hi -= 1;
    }
    if lo < hi {
        out.push(make_token(chars, lo, hi));
    }
    out.extend(trailing.into_iter().rev());
}

fn make_token(chars: &[char], start: usize, end: usize) -> Token {
    let text: String = chars[start..end].iter().collect();
    let norm = text.to_lowercase();
    Token { text, start, end, norm }
}

/// Verbatim question text covered by tokens `[first, last]`.
pub fn span_text(question: &str, tokens: &[Token], first: usize, last: usize) -> String {
    let (start, end) = (tokens[first].start, tokens[last].end);
    question.chars().skip(start).take(end - start).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.norm).collect()
    }

    #[test]
    fn detaches_question_mark() {
        assert_eq!(norms("What is the rating of Avatar?"), ["what", "is", "the", "rating", "of", "avatar", "?"]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t").is_empty());
    }

    #[test]
    fn leading_and_trailing_runs() {
        assert_eq!(norms("('0–2'),"), ["(", "'", "0–2", "'", ")", ","]);
        assert_eq!(norms("U.S."), ["u.s", "."]);
        assert_eq!(norms("..."), [".", ".", "."]);
    }

    #[test]
    fn offsets_are_char_based() {
        let toks = tokenize("é 0–2 x");
        assert_eq!((toks[1].start, toks[1].end), (2, 5));
        assert_eq!(span_text("é 0–2 x", &toks, 1, 2), "0–2 x");
    }

    #[test]
    fn numeric_detection() {
        let t = tokenize("500 0–2 1,000 a5 abc");
        let flags: Vec<bool> = t.iter().map(Token::is_numeric).collect();
        assert_eq!(flags, [true, true, true, false, false]);
    }
}
