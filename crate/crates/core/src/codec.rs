//! Event records, their labeled-tree form, and the linearized token
//! sequence with `(` / `)` structure indicators.
//!
//! ```text
//! ( ( Transport returned ( Artifact The man ) ( Destination Los Angeles ) )
//!   ( Arrest Jail capture ( Person The man ) ) )
//! ```
//!
//! Every sentence has a virtual root; events hang off the root, arguments off
//! their event. Siblings are ordered by where their spans start in the text.
//! A sentence without events linearizes to `( )`.

use std::fmt;

use thiserror::Error;

use crate::schema::{tokenize_label, EventSchema, LabelTrie, SchemaTries};

pub const OPEN: &str = "(";
pub const CLOSE: &str = ")";
pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";

/// Structure indicators and sentinels; these never occur inside a mention.
pub fn is_reserved(token: &str) -> bool {
    matches!(token, OPEN | CLOSE | BOS | EOS)
}

/// A text span, optionally anchored in the source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mention {
    pub tokens: Vec<String>,
    pub token_start: Option<usize>,
    pub char_start: Option<usize>,
}

impl Mention {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Mention {
            tokens: tokens.into_iter().map(Into::into).collect(),
            token_start: None,
            char_start: None,
        }
    }

    /// Mention whose first token sits at `token_start` in the source.
    pub fn at<I, S>(tokens: I, token_start: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Mention {
            token_start: Some(token_start),
            ..Mention::new(tokens)
        }
    }

    /// Splits a whitespace-separated string into a mention.
    pub fn words(text: &str) -> Self {
        Mention::new(text.split_whitespace())
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_grounded(&self) -> bool {
        self.token_start.is_some()
    }

    /// End-exclusive token span, when grounded.
    pub fn token_span(&self) -> Option<(usize, usize)> {
        self.token_start.map(|s| (s, s + self.tokens.len()))
    }

    pub fn erase_offsets(&self) -> Mention {
        Mention::new(self.tokens.iter().cloned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Argument {
    pub role: String,
    pub mention: Mention,
}

/// One event: a type, the trigger mention, and role-labeled arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventRecord {
    pub event_type: String,
    pub trigger: Mention,
    pub args: Vec<Argument>,
}

impl EventRecord {
    pub fn new(event_type: impl Into<String>, trigger: Mention) -> Self {
        EventRecord {
            event_type: event_type.into(),
            trigger,
            args: Vec::new(),
        }
    }

    pub fn with_arg(mut self, role: impl Into<String>, mention: Mention) -> Self {
        self.args.push(Argument {
            role: role.into(),
            mention,
        });
        self
    }

    pub fn erase_offsets(&self) -> EventRecord {
        EventRecord {
            event_type: self.event_type.clone(),
            trigger: self.trigger.erase_offsets(),
            args: self
                .args
                .iter()
                .map(|a| Argument {
                    role: a.role.clone(),
                    mention: a.mention.erase_offsets(),
                })
                .collect(),
        }
    }
}

/// Strips offsets from every mention in `records`.
pub fn erase_offsets(records: &[EventRecord]) -> Vec<EventRecord> {
    records.iter().map(EventRecord::erase_offsets).collect()
}

/// A linearized structure: the tokens between the `<bos>` and `<eos>`
/// sentinels, which are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearizedSeq {
    tokens: Vec<String>,
}

impl LinearizedSeq {
    pub fn new(tokens: Vec<String>) -> Self {
        LinearizedSeq { tokens }
    }

    /// Splits a whitespace-separated rendering back into tokens.
    pub fn parse(text: &str) -> Self {
        LinearizedSeq {
            tokens: text.split_whitespace().map(str::to_owned).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The tokens a decoder must produce after `<bos>`: the body plus `<eos>`.
    pub fn decoder_targets(&self) -> Vec<String> {
        let mut out = self.tokens.clone();
        out.push(EOS.to_owned());
        out
    }

    /// The full sequence including both sentinels.
    pub fn with_sentinels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.tokens.len() + 2);
        out.push(BOS.to_owned());
        out.extend(self.tokens.iter().cloned());
        out.push(EOS.to_owned());
        out
    }

    /// Checks that indicators are balanced and depth never goes negative.
    pub fn is_balanced(&self) -> bool {
        let mut depth = 0i64;
        for tok in &self.tokens {
            match tok.as_str() {
                OPEN => depth += 1,
                CLOSE => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
        depth == 0
    }
}

impl fmt::Display for LinearizedSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("event {event}: {what} has no token offset")]
    MissingOffset { event: usize, what: String },
    #[error("event {event}: {what} is empty")]
    EmptyMention { event: usize, what: String },
    #[error("event {event}: {what} contains the reserved token {token:?}")]
    ReservedToken {
        event: usize,
        what: String,
        token: String,
    },
    #[error("event {event}: unknown event type {event_type:?}")]
    UnknownType { event: usize, event_type: String },
    #[error("event {event}: role {role:?} is not permitted for {event_type:?}")]
    RoleNotPermitted {
        event: usize,
        event_type: String,
        role: String,
    },
}

fn check_record(
    idx: usize,
    record: &EventRecord,
    schema: Option<&EventSchema>,
    need_offsets: bool,
) -> Result<(), CodecError> {
    let check_mention = |m: &Mention, what: String| {
        if m.is_empty() {
            return Err(CodecError::EmptyMention { event: idx, what });
        }
        if let Some(tok) = m.tokens.iter().find(|t| is_reserved(t)) {
            return Err(CodecError::ReservedToken {
                event: idx,
                what,
                token: tok.clone(),
            });
        }
        if need_offsets && m.token_start.is_none() {
            return Err(CodecError::MissingOffset { event: idx, what });
        }
        Ok(())
    };
    check_mention(&record.trigger, "trigger".to_owned())?;
    for (j, arg) in record.args.iter().enumerate() {
        check_mention(&arg.mention, format!("argument {j}"))?;
    }
    if let Some(schema) = schema {
        if !schema.contains_type(&record.event_type) {
            return Err(CodecError::UnknownType {
                event: idx,
                event_type: record.event_type.clone(),
            });
        }
        for arg in &record.args {
            if !schema.permits_role(&record.event_type, &arg.role) {
                return Err(CodecError::RoleNotPermitted {
                    event: idx,
                    event_type: record.event_type.clone(),
                    role: arg.role.clone(),
                });
            }
        }
    }
    Ok(())
}

fn span_key(m: &Mention) -> (usize, usize) {
    m.token_span().unwrap_or((usize::MAX, usize::MAX))
}

/// Sorts events by trigger position (ties: trigger end, then type name) and
/// each event's arguments by span position. Sorting is stable.
pub fn canonical_order(records: &[EventRecord]) -> Vec<EventRecord> {
    let mut out: Vec<EventRecord> = records.to_vec();
    out.sort_by(|a, b| {
        span_key(&a.trigger)
            .cmp(&span_key(&b.trigger))
            .then_with(|| a.event_type.cmp(&b.event_type))
    });
    for rec in &mut out {
        rec.args.sort_by_key(|a| span_key(&a.mention));
    }
    out
}

/// Linearizes records depth-first under a virtual root. Every mention must
/// carry a token offset, which fixes sibling order.
pub fn linearize(
    records: &[EventRecord],
    schema: Option<&EventSchema>,
) -> Result<LinearizedSeq, CodecError> {
    for (i, rec) in records.iter().enumerate() {
        check_record(i, rec, schema, true)?;
    }
    let mut tokens = vec![OPEN.to_owned()];
    for rec in canonical_order(records) {
        tokens.push(OPEN.to_owned());
        tokens.extend(tokenize_label(&rec.event_type));
        tokens.extend(rec.trigger.tokens.iter().cloned());
        for arg in &rec.args {
            tokens.push(OPEN.to_owned());
            tokens.extend(tokenize_label(&arg.role));
            tokens.extend(arg.mention.tokens.iter().cloned());
            tokens.push(CLOSE.to_owned());
        }
        tokens.push(CLOSE.to_owned());
    }
    tokens.push(CLOSE.to_owned());
    Ok(LinearizedSeq { tokens })
}

/// Node payload of the labeled event tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeLabel {
    Root,
    EventType(String),
    Role(String),
    Span(Vec<String>),
}

/// Kind of an edge in the event tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Root to event type, or event type to argument role.
    EventRole,
    /// Label to the text span it governs.
    LabelSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: TreeLabel,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    fn leaf(span: &Mention) -> TreeNode {
        TreeNode {
            label: TreeLabel::Span(span.tokens.clone()),
            children: Vec::new(),
        }
    }

    /// All edges below this node, in depth-first order.
    pub fn edges(&self) -> Vec<(EdgeKind, &TreeLabel, &TreeLabel)> {
        let mut out = Vec::new();
        for child in &self.children {
            let kind = match child.label {
                TreeLabel::Span(_) => EdgeKind::LabelSpan,
                _ => EdgeKind::EventRole,
            };
            out.push((kind, &self.label, &child.label));
            out.extend(child.edges());
        }
        out
    }
}

/// Converts records into the labeled tree: the root links to each event
/// type, each type to its trigger span and its roles, each role to its span.
pub fn to_tree(
    records: &[EventRecord],
    schema: Option<&EventSchema>,
) -> Result<TreeNode, CodecError> {
    for (i, rec) in records.iter().enumerate() {
        check_record(i, rec, schema, true)?;
    }
    let events = canonical_order(records)
        .into_iter()
        .map(|rec| {
            let mut children = vec![TreeNode::leaf(&rec.trigger)];
            children.extend(rec.args.iter().map(|arg| TreeNode {
                label: TreeLabel::Role(arg.role.clone()),
                children: vec![TreeNode::leaf(&arg.mention)],
            }));
            TreeNode {
                label: TreeLabel::EventType(rec.event_type),
                children,
            }
        })
        .collect();
    Ok(TreeNode {
        label: TreeLabel::Root,
        children: events,
    })
}

/// Depth-first rendering of a tree built by [`to_tree`].
pub fn tree_to_seq(tree: &TreeNode) -> LinearizedSeq {
    fn walk(node: &TreeNode, out: &mut Vec<String>) {
        match &node.label {
            TreeLabel::Span(tokens) => out.extend(tokens.iter().cloned()),
            label => {
                out.push(OPEN.to_owned());
                if let TreeLabel::EventType(name) | TreeLabel::Role(name) = label {
                    out.extend(tokenize_label(name));
                }
                for child in &node.children {
                    walk(child, out);
                }
                out.push(CLOSE.to_owned());
            }
        }
    }
    let mut tokens = Vec::new();
    walk(tree, &mut tokens);
    LinearizedSeq { tokens }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedToken { found: String, expected: &'static str },
    UnknownType(String),
    UnknownRole { event_type: String, label: String },
    EmptyMention,
    TrailingTokens,
}

/// A parse failure at a token position of the input sequence.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at position {position}", describe(.kind))]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedEnd => "unexpected end of sequence".to_owned(),
        ParseErrorKind::UnexpectedToken { found, expected } => {
            format!("unexpected token {found:?} (expected {expected})")
        }
        ParseErrorKind::UnknownType(label) => format!("unknown type {label:?}"),
        ParseErrorKind::UnknownRole { label, .. } => format!("unknown role {label:?}"),
        ParseErrorKind::EmptyMention => "empty mention".to_owned(),
        ParseErrorKind::TrailingTokens => "trailing tokens after root close".to_owned(),
    }
}

impl ParseErrorKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            ParseErrorKind::UnexpectedEnd => "unexpected end",
            ParseErrorKind::UnexpectedToken { .. } => "unexpected token",
            ParseErrorKind::UnknownType(_) => "unknown type",
            ParseErrorKind::UnknownRole { .. } => "unknown role",
            ParseErrorKind::EmptyMention => "empty mention",
            ParseErrorKind::TrailingTokens => "trailing tokens",
        }
    }
}

pub(crate) struct Cursor<'a> {
    tokens: &'a [String],
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    /// Skips a leading `<bos>` and ignores a final `<eos>`.
    pub(crate) fn new(tokens: &'a [String]) -> Self {
        let pos = usize::from(tokens.first().is_some_and(|t| t == BOS));
        let mut end = tokens.len();
        if end > pos && tokens[end - 1] == EOS {
            end -= 1;
        }
        Cursor { tokens, pos, end }
    }

    pub(crate) fn peek(&self) -> Option<&'a str> {
        (self.pos < self.end).then(|| self.tokens[self.pos].as_str())
    }

    pub(crate) fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    pub(crate) fn expect(&mut self, want: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(tok) if tok == want => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(self.error(ParseErrorKind::UnexpectedToken {
                found: tok.to_owned(),
                expected: want,
            })),
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    /// Follows `trie` as far as the tokens allow. Returns the start position
    /// and the label completed at the stopping node, if any.
    pub(crate) fn read_label(&mut self, trie: &LabelTrie) -> (usize, Vec<String>, Option<String>) {
        let start = self.pos;
        let mut node = LabelTrie::ROOT;
        let mut consumed = Vec::new();
        while let Some(tok) = self.peek() {
            match trie.child(node, tok) {
                Some(next) => {
                    node = next;
                    consumed.push(tok.to_owned());
                    self.pos += 1;
                }
                None => break,
            }
        }
        (start, consumed, trie.label(node).map(str::to_owned))
    }

    /// Reads mention tokens up to the next structure indicator.
    pub(crate) fn read_span(&mut self) -> Result<Mention, ParseError> {
        let mut tokens = Vec::new();
        while let Some(tok) = self.peek() {
            match tok {
                OPEN | CLOSE => break,
                BOS | EOS => {
                    return Err(self.error(ParseErrorKind::UnexpectedToken {
                        found: tok.to_owned(),
                        expected: "mention token",
                    }))
                }
                _ => {
                    tokens.push(tok.to_owned());
                    self.pos += 1;
                }
            }
        }
        if tokens.is_empty() {
            return Err(self.error(ParseErrorKind::EmptyMention));
        }
        Ok(Mention::new(tokens))
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.pos < self.end {
            return Err(self.error(ParseErrorKind::TrailingTokens));
        }
        Ok(())
    }
}

/// Parses a linearized sequence back into event records (without offsets).
///
/// Leading `<bos>` and trailing `<eos>` are accepted and skipped. Label
/// tokens are matched greedily along the schema tries: a token that extends
/// the current label path is always read as part of the label.
pub fn delinearize(seq: &LinearizedSeq, schema: &EventSchema) -> Result<Vec<EventRecord>, ParseError> {
    delinearize_with(seq.tokens(), &SchemaTries::new(schema))
}

/// [`delinearize`] over raw tokens with pre-built tries.
pub fn delinearize_with(tokens: &[String], tries: &SchemaTries) -> Result<Vec<EventRecord>, ParseError> {
    let mut cur = Cursor::new(tokens);
    cur.expect(OPEN)?;
    let mut records = Vec::new();
    loop {
        match cur.peek() {
            Some(CLOSE) => {
                cur.expect(CLOSE)?;
                break;
            }
            Some(OPEN) => records.push(parse_event(&mut cur, tries)?),
            Some(tok) => {
                return Err(cur.error(ParseErrorKind::UnexpectedToken {
                    found: tok.to_owned(),
                    expected: "'(' or ')'",
                }))
            }
            None => return Err(cur.error(ParseErrorKind::UnexpectedEnd)),
        }
    }
    cur.finish()?;
    Ok(records)
}

fn parse_event(cur: &mut Cursor<'_>, tries: &SchemaTries) -> Result<EventRecord, ParseError> {
    cur.expect(OPEN)?;
    let (start, consumed, label) = cur.read_label(&tries.types);
    let Some(event_type) = label else {
        let mut consumed = consumed.join(" ");
        if consumed.is_empty() {
            consumed = cur.peek().unwrap_or_default().to_owned();
        }
        return Err(ParseError {
            position: start,
            kind: ParseErrorKind::UnknownType(consumed),
        });
    };
    let trigger = cur.read_span()?;
    let role_trie = tries
        .role_trie(&event_type)
        .expect("every schema type has a role trie");
    let mut record = EventRecord::new(event_type, trigger);
    loop {
        match cur.peek() {
            Some(CLOSE) => {
                cur.expect(CLOSE)?;
                return Ok(record);
            }
            Some(OPEN) => {
                cur.expect(OPEN)?;
                let (start, consumed, label) = cur.read_label(role_trie);
                let Some(role) = label else {
                    let mut consumed = consumed.join(" ");
                    if consumed.is_empty() {
                        consumed = cur.peek().unwrap_or_default().to_owned();
                    }
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::UnknownRole {
                            event_type: record.event_type.clone(),
                            label: consumed,
                        },
                    });
                };
                let mention = cur.read_span()?;
                cur.expect(CLOSE)?;
                record.args.push(Argument { role, mention });
            }
            Some(_) => unreachable!("read_span stops only at indicators"),
            None => return Err(cur.error(ParseErrorKind::UnexpectedEnd)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transport_schema() -> EventSchema {
        EventSchema::parse(
            "Transport: Artifact, Destination, Origin\nArrest-Jail: Person, Time, Agent\n",
        )
        .unwrap()
    }

    // The man returned to Los Angeles from Mexico following his capture
    // Tuesday by bounty hunters .
    fn sample_records() -> Vec<EventRecord> {
        vec![
            EventRecord::new("Transport", Mention::at(["returned"], 2))
                .with_arg("Artifact", Mention::at(["The", "man"], 0))
                .with_arg("Destination", Mention::at(["Los", "Angeles"], 4))
                .with_arg("Origin", Mention::at(["Mexico"], 7)),
            EventRecord::new("Arrest-Jail", Mention::at(["capture"], 10))
                .with_arg("Person", Mention::at(["The", "man"], 0))
                .with_arg("Time", Mention::at(["Tuesday"], 11))
                .with_arg("Agent", Mention::at(["bounty", "hunters"], 13)),
        ]
    }

    const TARGET: &str = "( ( Transport returned ( Artifact The man ) ( Destination Los Angeles ) \
        ( Origin Mexico ) ) ( Arrest Jail capture ( Person The man ) ( Time Tuesday ) \
        ( Agent bounty hunters ) ) )";

    #[test]
    fn linearizes_sample() {
        let seq = linearize(&sample_records(), Some(&transport_schema())).unwrap();
        assert_eq!(seq, LinearizedSeq::parse(TARGET));
        assert!(seq.is_balanced());
    }

    #[test]
    fn order_follows_offsets_not_input_order() {
        let mut recs = sample_records();
        recs.reverse();
        recs[0].args.reverse();
        let seq = linearize(&recs, None).unwrap();
        assert_eq!(seq.to_string(), LinearizedSeq::parse(TARGET).to_string());
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(linearize(&[], None).unwrap().to_string(), "( )");
        let rec = EventRecord::new("Attack", Mention::at(["fire"], 3));
        assert_eq!(linearize(&[rec], None).unwrap().to_string(), "( ( Attack fire ) )");
    }

    #[test]
    fn linearize_errors() {
        let rec = EventRecord::new("Transport", Mention::words("returned"));
        assert!(matches!(
            linearize(&[rec], None),
            Err(CodecError::MissingOffset { event: 0, .. })
        ));
        let rec = EventRecord::new("Attack", Mention::at(["fire"], 0));
        assert!(matches!(
            linearize(&[rec], Some(&transport_schema())),
            Err(CodecError::UnknownType { .. })
        ));
        let rec = EventRecord::new("Transport", Mention::at(["went"], 0))
            .with_arg("Agent", Mention::at(["x"], 1));
        assert!(matches!(
            linearize(&[rec], Some(&transport_schema())),
            Err(CodecError::RoleNotPermitted { .. })
        ));
        let rec = EventRecord::new("Transport", Mention::at(["("], 0));
        assert!(matches!(
            linearize(&[rec], None),
            Err(CodecError::ReservedToken { .. })
        ));
    }

    #[test]
    fn delinearizes_sample() {
        let got = delinearize(&LinearizedSeq::parse(TARGET), &transport_schema()).unwrap();
        assert_eq!(got, erase_offsets(&sample_records()));
    }

    #[test]
    fn delinearize_empty_and_sentinels() {
        let schema = transport_schema();
        assert!(delinearize(&LinearizedSeq::parse("( )"), &schema).unwrap().is_empty());
        let got = delinearize(&LinearizedSeq::parse("<bos> ( ) <eos>"), &schema).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn unknown_role_position() {
        let err = delinearize(
            &LinearizedSeq::parse("( ( Transport returned ( BogusRole x ) ) )"),
            &transport_schema(),
        )
        .unwrap_err();
        assert_eq!(err.position, 5);
        assert!(matches!(err.kind, ParseErrorKind::UnknownRole { .. }));
        assert!(err.to_string().starts_with("unknown role"));
        assert!(err.to_string().ends_with("at position 5"));
    }

    #[test]
    fn role_of_other_type_is_rejected() {
        let err = delinearize(
            &LinearizedSeq::parse("( ( Transport returned ( Agent x ) ) )"),
            &transport_schema(),
        )
        .unwrap_err();
        assert_eq!(err.position, 5);
    }

    #[test]
    fn positioned_errors() {
        let schema = transport_schema();
        let cases = [
            ("", 0, "unexpected end"),
            ("( ( Transport returned )", 5, "unexpected end"),
            ("( ) )", 2, "trailing tokens"),
            ("( ( Transport ) )", 3, "empty mention"),
            ("( ( Arrest capture ) )", 2, "unknown type"),
            ("( ( Bogus x ) )", 2, "unknown type"),
            ("( ( ( Transport x ) ) )", 2, "unknown type"),
            ("x", 0, "unexpected token"),
            ("( x )", 1, "unexpected token"),
            ("( ( Transport a <eos> b ) )", 4, "unexpected token"),
            ("( ( Transport a ( Origin ) ) )", 6, "empty mention"),
        ];
        for (text, pos, kind) in cases {
            let err = delinearize(&LinearizedSeq::parse(text), &schema).unwrap_err();
            assert_eq!((err.position, err.kind.short_name()), (pos, kind), "{text}");
        }
    }

    #[test]
    fn tree_form_matches_sample() {
        let tree = to_tree(&sample_records(), None).unwrap();
        let kids: Vec<_> = tree.children.iter().map(|c| c.label.clone()).collect();
        assert_eq!(
            kids,
            [
                TreeLabel::EventType("Transport".into()),
                TreeLabel::EventType("Arrest-Jail".into())
            ]
        );
        let edges = tree.edges();
        assert!(edges.contains(&(
            EdgeKind::LabelSpan,
            &TreeLabel::EventType("Transport".into()),
            &TreeLabel::Span(vec!["returned".into()])
        )));
        assert!(edges.contains(&(
            EdgeKind::EventRole,
            &TreeLabel::EventType("Transport".into()),
            &TreeLabel::Role("Origin".into())
        )));
        // 2 root edges + per event (trigger + 3 roles + 3 spans)
        assert_eq!(edges.len(), 2 + 2 * 7);
        assert_eq!(tree_to_seq(&tree), linearize(&sample_records(), None).unwrap());
    }

    #[test]
    fn empty_tree_is_root_only() {
        let tree = to_tree(&[], None).unwrap();
        assert_eq!(tree.label, TreeLabel::Root);
        assert!(tree.children.is_empty());
        assert_eq!(tree_to_seq(&tree).to_string(), "( )");
    }

    #[test]
    fn duplicate_arguments_are_kept() {
        let rec = EventRecord::new("Transport", Mention::at(["went"], 1))
            .with_arg("Artifact", Mention::at(["x"], 0))
            .with_arg("Artifact", Mention::at(["x"], 0));
        let seq = linearize(std::slice::from_ref(&rec), None).unwrap();
        let back = delinearize(&seq, &transport_schema()).unwrap();
        assert_eq!(back[0].args.len(), 2);
    }
}
