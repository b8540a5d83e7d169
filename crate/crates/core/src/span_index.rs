//! Source-text tokenization and the span trie that constrains generated
//! mentions to contiguous spans of the input.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use thiserror::Error;

use crate::codec::is_reserved;

/// Upper bound on mention length, in tokens.
pub const DEFAULT_MAX_SPAN_LEN: usize = 16;

/// A sentence split into tokens, each remembering where it came from.
///
/// Offsets in `char_spans` count Unicode scalar values, end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedInput {
    text: String,
    tokens: Vec<String>,
    char_spans: Vec<(usize, usize)>,
    byte_spans: Vec<(usize, usize)>,
}

/// Splits `text` into tokens. Alphanumeric runs form one token; every other
/// non-whitespace character is a token on its own.
pub fn tokenize(text: &str) -> TokenizedInput {
    let mut out = TokenizedInput {
        text: text.to_owned(),
        ..Default::default()
    };
    // (char start, byte start) of the alphanumeric run being built
    let mut run: Option<(usize, usize)> = None;
    let mut char_idx = 0;
    for (byte_idx, c) in text.char_indices() {
        if c.is_alphanumeric() {
            run.get_or_insert((char_idx, byte_idx));
        } else {
            if let Some((cs, bs)) = run.take() {
                out.push(cs, char_idx, bs, byte_idx);
            }
            if !c.is_whitespace() {
                out.push(char_idx, char_idx + 1, byte_idx, byte_idx + c.len_utf8());
            }
        }
        char_idx += 1;
    }
    if let Some((cs, bs)) = run {
        out.push(cs, char_idx, bs, text.len());
    }
    out
}

impl TokenizedInput {
    fn push(&mut self, cs: usize, ce: usize, bs: usize, be: usize) {
        self.tokens.push(self.text[bs..be].to_owned());
        self.char_spans.push((cs, ce));
        self.byte_spans.push((bs, be));
    }

    /// Builds an input from pre-split tokens, joined by single spaces.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let mut out = TokenizedInput::default();
        let mut chars = 0;
        for (i, tok) in tokens.iter().enumerate() {
            let tok = tok.as_ref();
            if i > 0 {
                out.text.push(' ');
                chars += 1;
            }
            let bs = out.text.len();
            out.text.push_str(tok);
            let n = tok.chars().count();
            out.tokens.push(tok.to_owned());
            out.char_spans.push((chars, chars + n));
            out.byte_spans.push((bs, out.text.len()));
            chars += n;
        }
        out
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn char_spans(&self) -> &[(usize, usize)] {
        &self.char_spans
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn detokenize(&self) -> String {
        self.tokens.join(" ")
    }

    /// Source text covered by tokens `start..end`.
    pub fn surface(&self, start: usize, end: usize) -> Option<&str> {
        if start >= end || end > self.tokens.len() {
            return None;
        }
        Some(&self.text[self.byte_spans[start].0..self.byte_spans[end - 1].1])
    }

    /// Character span covered by tokens `start..end`.
    pub fn char_range(&self, start: usize, end: usize) -> Option<(usize, usize)> {
        if start >= end || end > self.tokens.len() {
            return None;
        }
        Some((self.char_spans[start].0, self.char_spans[end - 1].1))
    }

    /// Start indices of every occurrence of `needle` in the token sequence.
    pub fn occurrences<S: AsRef<str>>(&self, needle: &[S]) -> Vec<usize> {
        if needle.is_empty() || needle.len() > self.tokens.len() {
            return Vec::new();
        }
        (0..=self.tokens.len() - needle.len())
            .filter(|&i| {
                needle
                    .iter()
                    .zip(&self.tokens[i..])
                    .all(|(a, b)| a.as_ref() == b)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{partial:?} is not a span of the input")]
pub struct NotASpan {
    pub partial: Vec<String>,
}

#[derive(Debug, Clone, Default)]
struct SpanNode {
    children: IndexMap<String, usize>,
    depth: usize,
}

/// Trie whose root paths are exactly the contiguous token subsequences of an
/// input of length at most `max_span_len`.
///
/// Spans never cross structure indicators or sentinel tokens, since those
/// could not be told apart from structure in a linearized sequence.
#[derive(Debug, Clone)]
pub struct SpanTrie {
    nodes: Vec<SpanNode>,
    max_span_len: usize,
}

pub fn build_span_trie(input: &TokenizedInput, max_span_len: usize) -> SpanTrie {
    assert!(max_span_len >= 1, "max_span_len must be positive");
    let mut nodes = vec![SpanNode::default()];
    let tokens = input.tokens();
    for start in 0..tokens.len() {
        let mut node = 0;
        for tok in tokens[start..].iter().take(max_span_len) {
            if is_reserved(tok) {
                break;
            }
            node = match nodes[node].children.get(tok) {
                Some(&next) => next,
                None => {
                    let next = nodes.len();
                    let depth = nodes[node].depth + 1;
                    nodes.push(SpanNode {
                        children: IndexMap::new(),
                        depth,
                    });
                    nodes[node].children.insert(tok.clone(), next);
                    next
                }
            };
        }
    }
    SpanTrie {
        nodes,
        max_span_len,
    }
}

/// Position inside a [`SpanTrie`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpanNodeId(usize);

impl SpanTrie {
    pub const ROOT: SpanNodeId = SpanNodeId(0);

    pub fn max_span_len(&self) -> usize {
        self.max_span_len
    }

    /// True when no span at all can be generated.
    pub fn is_empty(&self) -> bool {
        self.nodes[0].children.is_empty()
    }

    /// Number of distinct non-empty spans.
    pub fn span_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn child(&self, node: SpanNodeId, token: &str) -> Option<SpanNodeId> {
        self.nodes[node.0].children.get(token).copied().map(SpanNodeId)
    }

    pub fn child_tokens(&self, node: SpanNodeId) -> impl Iterator<Item = &str> + '_ {
        self.nodes[node.0].children.keys().map(String::as_str)
    }

    pub fn depth(&self, node: SpanNodeId) -> usize {
        self.nodes[node.0].depth
    }

    pub fn walk<S: AsRef<str>>(&self, partial: &[S]) -> Option<SpanNodeId> {
        partial
            .iter()
            .try_fold(Self::ROOT, |node, tok| self.child(node, tok.as_ref()))
    }

    pub fn contains<S: AsRef<str>>(&self, span: &[S]) -> bool {
        !span.is_empty() && self.walk(span).is_some()
    }

    /// Tokens `t` such that `partial · t` is a span, in sorted order.
    pub fn continuations<S: AsRef<str>>(&self, partial: &[S]) -> Result<BTreeSet<String>, NotASpan> {
        let node = self.walk(partial).ok_or_else(|| NotASpan {
            partial: partial.iter().map(|s| s.as_ref().to_owned()).collect(),
        })?;
        Ok(self.child_tokens(node).map(str::to_owned).collect())
    }

    /// Every span stored in the trie.
    pub fn spans(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::<String>::new())];
        while let Some((node, path)) = stack.pop() {
            if !path.is_empty() {
                out.push(path.clone());
            }
            for (tok, &child) in &self.nodes[node].children {
                let mut next = path.clone();
                next.push(tok.clone());
                stack.push((child, next));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SENTENCE: &str =
        "The man returned to Los Angeles from Mexico following his capture Tuesday by bounty hunters.";

    #[test]
    fn tokenizes_sample_sentence() {
        let input = tokenize(SENTENCE);
        assert_eq!(
            &input.tokens()[..6],
            ["The", "man", "returned", "to", "Los", "Angeles"]
        );
        assert_eq!(input.tokens().last().unwrap(), ".");
        assert_eq!(input.len(), 16);
    }

    #[test]
    fn empty_text() {
        let input = tokenize("");
        assert!(input.is_empty());
        assert!(build_span_trie(&input, 4).is_empty());
    }

    #[test]
    fn punctuation_splits() {
        let input = tokenize("a,b");
        assert_eq!(input.tokens(), ["a", ",", "b"]);
        assert_eq!(input.char_spans(), [(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn char_offsets_count_scalars() {
        let input = tokenize("café au-lait");
        assert_eq!(input.tokens(), ["café", "au", "-", "lait"]);
        assert_eq!(input.char_spans(), [(0, 4), (5, 7), (7, 8), (8, 12)]);
        assert_eq!(input.surface(1, 4), Some("au-lait"));
    }

    #[test]
    fn span_trie_small() {
        let input = TokenizedInput::from_tokens(&["a", "b", "a"]);
        let trie = build_span_trie(&input, 2);
        let mut spans = trie.spans();
        spans.sort();
        let expect: Vec<Vec<String>> = vec![
            vec!["a".into()],
            vec!["a".into(), "b".into()],
            vec!["b".into()],
            vec!["b".into(), "a".into()],
        ];
        assert_eq!(spans, expect);
        assert!(!trie.contains(&["a", "a"]));
    }

    #[test]
    fn sample_spans() {
        let trie = build_span_trie(&tokenize(SENTENCE), DEFAULT_MAX_SPAN_LEN);
        assert!(trie.contains(&["bounty", "hunters"]));
        assert!(!trie.contains(&["man", "Angeles"]));
        let next: Vec<_> = trie.continuations(&["The"]).unwrap().into_iter().collect();
        assert_eq!(next, ["man"]);
        let starts = trie.continuations::<&str>(&[]).unwrap();
        let distinct: BTreeSet<_> = tokenize(SENTENCE).tokens().iter().cloned().collect();
        assert_eq!(starts, distinct);
        assert!(trie.continuations(&["man", "The"]).is_err());
    }

    #[test]
    fn length_bound_stops_continuations() {
        let input = TokenizedInput::from_tokens(&["a", "b", "c"]);
        let trie = build_span_trie(&input, 2);
        assert!(trie.continuations(&["a", "b"]).unwrap().is_empty());
    }

    #[test]
    fn spans_stop_at_structure_tokens() {
        let input = tokenize("x (y) z");
        assert_eq!(input.tokens(), ["x", "(", "y", ")", "z"]);
        let trie = build_span_trie(&input, 8);
        assert!(!trie.contains(&["("]));
        assert!(!trie.contains(&["x", "("]));
        assert!(trie.contains(&["y"]));
        assert_eq!(trie.span_count(), 3);
    }
}
