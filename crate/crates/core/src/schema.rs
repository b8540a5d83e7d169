//! Event schemas and the label tries built from them.
//!
//! A schema maps every event type to the argument roles it permits. Label
//! names are split into word tokens (see [`LabelTokenizer`]) and indexed in a
//! [`LabelTrie`], so that a decoder can restrict the next token to the
//! children of the last generated label node.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Errors raised while loading or querying a schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("empty schema")]
    Empty,
    #[error("{}malformed line: {message}", Loc(*.line))]
    Malformed { line: Option<usize>, message: String },
    #[error("{}empty name", Loc(*.line))]
    EmptyName { line: Option<usize> },
    #[error("{}invalid name {name:?}: only letters, digits and '-' are allowed", Loc(*.line))]
    InvalidName { line: Option<usize>, name: String },
    #[error("{}duplicate event type {name:?}", Loc(*.line))]
    DuplicateType { line: Option<usize>, name: String },
    #[error("{}duplicate role {role:?} for event type {event_type:?}", Loc(*.line))]
    DuplicateRole {
        line: Option<usize>,
        event_type: String,
        role: String,
    },
    #[error("{}labels {first:?} and {second:?} tokenize to the same token sequence", Loc(*.line))]
    LabelCollision {
        line: Option<usize>,
        first: String,
        second: String,
    },
    #[error("unknown event type {0:?}")]
    UnknownType(String),
}

struct Loc(Option<usize>);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, "line {line}: "),
            None => Ok(()),
        }
    }
}

/// Strategy that splits a label name into the tokens a decoder emits for it.
pub trait LabelTokenizer {
    fn tokenize(&self, label: &str) -> Vec<String>;
}

/// Splits labels at hyphens and whitespace: `Transfer-Ownership` becomes
/// `[Transfer, Ownership]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordSplit;

impl LabelTokenizer for WordSplit {
    fn tokenize(&self, label: &str) -> Vec<String> {
        label
            .split(|c: char| c == '-' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect()
    }
}

/// Tokenizes a label with the default [`WordSplit`] strategy.
pub fn tokenize_label(label: &str) -> Vec<String> {
    WordSplit.tokenize(label)
}

/// Mapping from event-type names to their permitted argument roles, in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSchema {
    types: IndexMap<String, Vec<String>>,
}

impl EventSchema {
    /// Builds a validated schema from `(type, roles)` pairs.
    pub fn new<I, T, R, S>(types: I) -> Result<Self, SchemaError>
    where
        I: IntoIterator<Item = (T, R)>,
        T: Into<String>,
        R: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut builder = Builder::default();
        for (name, roles) in types {
            let roles = roles.into_iter().map(Into::into).collect();
            builder.push(name.into(), roles, None)?;
        }
        builder.finish()
    }

    /// Parses the line-oriented schema document format:
    ///
    /// ```text
    /// # comment
    /// Transport: Artifact, Destination, Origin
    /// Arrest-Jail: Person, Time, Agent
    /// Die:
    /// ```
    pub fn parse(document: &str) -> Result<Self, SchemaError> {
        let mut builder = Builder::default();
        for (idx, raw) in document.lines().enumerate() {
            let line = Some(idx + 1);
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let Some((name, roles)) = content.split_once(':') else {
                return Err(SchemaError::Malformed {
                    line,
                    message: format!("expected `Type: Role, ...`, found {content:?}"),
                });
            };
            let roles = if roles.trim().is_empty() {
                Vec::new()
            } else {
                roles.split(',').map(|r| r.trim().to_owned()).collect()
            };
            builder.push(name.trim().to_owned(), roles, line)?;
        }
        builder.finish()
    }

    /// Renders the schema back into the document format accepted by
    /// [`EventSchema::parse`].
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (ty, roles) in &self.types {
            out.push_str(ty);
            out.push(':');
            if !roles.is_empty() {
                out.push(' ');
                out.push_str(&roles.join(", "));
            }
            out.push('\n');
        }
        out
    }

    pub fn event_types(&self) -> impl Iterator<Item = &str> + '_ {
        self.types.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn contains_type(&self, event_type: &str) -> bool {
        self.types.contains_key(event_type)
    }

    pub fn roles(&self, event_type: &str) -> Option<&[String]> {
        self.types.get(event_type).map(Vec::as_slice)
    }

    pub fn permits_role(&self, event_type: &str, role: &str) -> bool {
        self.roles(event_type)
            .is_some_and(|roles| roles.iter().any(|r| r == role))
    }

    /// Every distinct role name across all types, in first-declaration order.
    pub fn all_roles(&self) -> Vec<&str> {
        let mut seen = indexmap::IndexSet::new();
        for roles in self.types.values() {
            for role in roles {
                seen.insert(role.as_str());
            }
        }
        seen.into_iter().collect()
    }

    /// All tokens that can appear inside any label, in first-seen order.
    pub fn label_tokens(&self) -> Vec<String> {
        let mut seen = indexmap::IndexSet::new();
        for (ty, roles) in &self.types {
            seen.extend(tokenize_label(ty));
            for role in roles {
                seen.extend(tokenize_label(role));
            }
        }
        seen.into_iter().collect()
    }
}

#[derive(Default)]
struct Builder {
    types: IndexMap<String, Vec<String>>,
    type_tokens: IndexMap<Vec<String>, String>,
}

impl Builder {
    fn push(
        &mut self,
        name: String,
        roles: Vec<String>,
        line: Option<usize>,
    ) -> Result<(), SchemaError> {
        let tokens = check_name(&name, line)?;
        if self.types.contains_key(&name) {
            return Err(SchemaError::DuplicateType { line, name });
        }
        if let Some(first) = self.type_tokens.get(&tokens) {
            return Err(SchemaError::LabelCollision {
                line,
                first: first.clone(),
                second: name,
            });
        }
        let mut role_tokens: IndexMap<Vec<String>, &str> = IndexMap::new();
        for (i, role) in roles.iter().enumerate() {
            let toks = check_name(role, line)?;
            if roles[..i].contains(role) {
                return Err(SchemaError::DuplicateRole {
                    line,
                    event_type: name,
                    role: role.clone(),
                });
            }
            if let Some(first) = role_tokens.get(&toks) {
                return Err(SchemaError::LabelCollision {
                    line,
                    first: (*first).to_owned(),
                    second: role.clone(),
                });
            }
            role_tokens.insert(toks, role);
        }
        self.type_tokens.insert(tokens, name.clone());
        self.types.insert(name, roles);
        Ok(())
    }

    fn finish(self) -> Result<EventSchema, SchemaError> {
        if self.types.is_empty() {
            return Err(SchemaError::Empty);
        }
        Ok(EventSchema { types: self.types })
    }
}

fn check_name(name: &str, line: Option<usize>) -> Result<Vec<String>, SchemaError> {
    if name.is_empty() {
        return Err(SchemaError::EmptyName { line });
    }
    if !name.chars().all(|c| c.is_alphanumeric() || c == '-') {
        return Err(SchemaError::InvalidName {
            line,
            name: name.to_owned(),
        });
    }
    let tokens = tokenize_label(name);
    if tokens.is_empty() {
        return Err(SchemaError::InvalidName {
            line,
            name: name.to_owned(),
        });
    }
    Ok(tokens)
}

/// Raised when a prefix does not name a path of a [`LabelTrie`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("prefix {prefix:?} is not a path in the label trie")]
pub struct PrefixNotFound {
    pub prefix: Vec<String>,
}

/// Index of a node inside a [`LabelTrie`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: IndexMap<String, usize>,
    label: Option<String>,
}

/// Prefix tree over the token sequences of a set of labels.
///
/// A node carries the canonical label name when the path to it spells a
/// complete label. Such a node may still have children when another label
/// extends it.
#[derive(Debug, Clone)]
pub struct LabelTrie {
    nodes: Vec<TrieNode>,
}

impl LabelTrie {
    pub const ROOT: NodeId = NodeId(0);

    pub fn from_labels<'a, I>(labels: I, tokenizer: &dyn LabelTokenizer) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut trie = LabelTrie {
            nodes: vec![TrieNode::default()],
        };
        for label in labels {
            let mut node = 0;
            for token in tokenizer.tokenize(label) {
                node = match trie.nodes[node].children.get(&token) {
                    Some(&next) => next,
                    None => {
                        let next = trie.nodes.len();
                        trie.nodes.push(TrieNode::default());
                        trie.nodes[node].children.insert(token, next);
                        next
                    }
                };
            }
            trie.nodes[node].label = Some(label.to_owned());
        }
        trie
    }

    /// True when the trie holds no label at all.
    pub fn is_empty(&self) -> bool {
        self.nodes[0].children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn child(&self, node: NodeId, token: &str) -> Option<NodeId> {
        self.nodes[node.0].children.get(token).copied().map(NodeId)
    }

    pub fn child_tokens(&self, node: NodeId) -> impl Iterator<Item = &str> + '_ {
        self.nodes[node.0].children.keys().map(String::as_str)
    }

    pub fn has_children(&self, node: NodeId) -> bool {
        !self.nodes[node.0].children.is_empty()
    }

    /// The label completed at `node`, if any.
    pub fn label(&self, node: NodeId) -> Option<&str> {
        self.nodes[node.0].label.as_deref()
    }

    pub fn walk<S: AsRef<str>>(&self, prefix: &[S]) -> Option<NodeId> {
        prefix
            .iter()
            .try_fold(Self::ROOT, |node, tok| self.child(node, tok.as_ref()))
    }

    /// The tokens that may follow `prefix`, each flagged with whether it
    /// completes a label.
    pub fn children<S: AsRef<str>>(
        &self,
        prefix: &[S],
    ) -> Result<Vec<(String, bool)>, PrefixNotFound> {
        let node = self.walk(prefix).ok_or_else(|| PrefixNotFound {
            prefix: prefix.iter().map(|s| s.as_ref().to_owned()).collect(),
        })?;
        Ok(self.nodes[node.0]
            .children
            .iter()
            .map(|(tok, &id)| (tok.clone(), self.nodes[id].label.is_some()))
            .collect())
    }

    /// Looks up the label spelled exactly by `tokens`.
    pub fn lookup<S: AsRef<str>>(&self, tokens: &[S]) -> Option<&str> {
        self.walk(tokens).and_then(|n| self.label(n))
    }

    /// Every `(token path, label)` pair stored in the trie, depth-first.
    pub fn labels(&self) -> Vec<(Vec<String>, String)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((node, path)) = stack.pop() {
            if let Some(label) = &self.nodes[node].label {
                out.push((path.clone(), label.clone()));
            }
            for (tok, &child) in self.nodes[node].children.iter().rev() {
                let mut next = path.clone();
                next.push(tok.clone());
                stack.push((child, next));
            }
        }
        out
    }
}

/// Trie over the event-type labels of `schema`.
pub fn build_type_trie(schema: &EventSchema) -> LabelTrie {
    LabelTrie::from_labels(schema.event_types(), &WordSplit)
}

/// Trie over the roles permitted for `event_type`.
pub fn build_role_trie(schema: &EventSchema, event_type: &str) -> Result<LabelTrie, SchemaError> {
    let roles = schema
        .roles(event_type)
        .ok_or_else(|| SchemaError::UnknownType(event_type.to_owned()))?;
    Ok(LabelTrie::from_labels(
        roles.iter().map(String::as_str),
        &WordSplit,
    ))
}

/// The type trie together with one role trie per event type.
#[derive(Debug, Clone)]
pub struct SchemaTries {
    pub types: LabelTrie,
    pub roles: IndexMap<String, LabelTrie>,
}

impl SchemaTries {
    pub fn new(schema: &EventSchema) -> Self {
        let roles = schema
            .event_types()
            .map(|ty| {
                let trie = build_role_trie(schema, ty).expect("type taken from schema");
                (ty.to_owned(), trie)
            })
            .collect();
        SchemaTries {
            types: build_type_trie(schema),
            roles,
        }
    }

    pub fn role_trie(&self, event_type: &str) -> Option<&LabelTrie> {
        self.roles.get(event_type)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EventSchema {
        EventSchema::parse(
            "Transport: Artifact, Destination, Origin\nArrest-Jail: Person, Time, Agent\n",
        )
        .unwrap()
    }

    fn transfer() -> EventSchema {
        EventSchema::new([
            ("Transfer-Ownership", vec!["Buyer", "Seller"]),
            ("Transfer-Money", vec!["Giver", "Recipient"]),
        ])
        .unwrap()
    }

    #[test]
    fn loads_two_type_schema_in_order() {
        let schema = sample();
        assert_eq!(schema.len(), 2);
        let types: Vec<_> = schema.event_types().collect();
        assert_eq!(types, ["Transport", "Arrest-Jail"]);
        assert_eq!(
            schema.roles("Transport").unwrap(),
            ["Artifact", "Destination", "Origin"]
        );
        assert!(schema.permits_role("Arrest-Jail", "Agent"));
        assert!(!schema.permits_role("Arrest-Jail", "Origin"));
    }

    #[test]
    fn empty_document_is_rejected() {
        assert_eq!(EventSchema::parse("# nothing\n\n"), Err(SchemaError::Empty));
        assert_eq!(EventSchema::parse("").unwrap_err().to_string(), "empty schema");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = EventSchema::parse("A: x\nB: y, y\n").unwrap_err();
        assert!(matches!(err, SchemaError::DuplicateRole { line: Some(2), .. }));
        let err = EventSchema::parse("A: x\n\nA: z\n").unwrap_err();
        assert!(matches!(err, SchemaError::DuplicateType { line: Some(3), .. }));
        let err = EventSchema::parse("A x\n").unwrap_err();
        assert_eq!(err.to_string().split(':').next(), Some("line 1"));
        let err = EventSchema::parse("A: x, , y\n").unwrap_err();
        assert!(matches!(err, SchemaError::EmptyName { line: Some(1) }));
        let err = EventSchema::parse("A_B: x\n").unwrap_err();
        assert!(matches!(err, SchemaError::InvalidName { .. }));
        let err = EventSchema::parse("---: x\n").unwrap_err();
        assert!(matches!(err, SchemaError::InvalidName { .. }));
        let err = EventSchema::parse("A-B: x\nA--B: y\n").unwrap_err();
        assert!(matches!(err, SchemaError::LabelCollision { line: Some(2), .. }));
    }

    #[test]
    fn types_without_roles_are_allowed() {
        let schema = EventSchema::parse("Die:\n").unwrap();
        assert_eq!(schema.roles("Die").unwrap().len(), 0);
        let trie = build_role_trie(&schema, "Die").unwrap();
        assert!(trie.is_empty());
        assert_eq!(trie.node_count(), 1);
    }

    #[test]
    fn document_roundtrip() {
        let schema = sample();
        assert_eq!(EventSchema::parse(&schema.to_document()).unwrap(), schema);
    }

    #[test]
    fn label_tokenization() {
        assert_eq!(tokenize_label("Transfer-Ownership"), ["Transfer", "Ownership"]);
        assert_eq!(tokenize_label("Artifact"), ["Artifact"]);
        assert_eq!(tokenize_label("Arrest-Jail"), ["Arrest", "Jail"]);
        let trie = build_type_trie(&sample());
        assert_eq!(trie.lookup(&tokenize_label("Arrest-Jail")), Some("Arrest-Jail"));
    }

    #[test]
    fn transfer_trie_shares_prefix() {
        let schema = transfer();
        let trie = build_type_trie(&schema);
        let kids = trie.children(&["Transfer"]).unwrap();
        assert_eq!(
            kids,
            [("Ownership".to_owned(), true), ("Money".to_owned(), true)]
        );
        assert_eq!(trie.children::<&str>(&[]).unwrap(), [("Transfer".to_owned(), false)]);
    }

    #[test]
    fn root_children() {
        let trie = build_type_trie(&sample());
        assert_eq!(
            trie.children::<&str>(&[]).unwrap(),
            [("Transport".to_owned(), true), ("Arrest".to_owned(), false)]
        );
        assert!(trie.children(&["Bogus"]).is_err());
    }

    #[test]
    fn role_trie_is_per_type() {
        let schema = sample();
        let trie = build_role_trie(&schema, "Transport").unwrap();
        let labels: Vec<_> = trie.labels().into_iter().map(|(_, l)| l).collect();
        assert_eq!(labels, ["Artifact", "Destination", "Origin"]);
        assert_eq!(
            build_role_trie(&schema, "Attack").unwrap_err(),
            SchemaError::UnknownType("Attack".into())
        );
    }

    #[test]
    fn prefix_labels_keep_both_continuations() {
        let schema = EventSchema::new([("Transfer", Vec::<String>::new()), ("Transfer-Money", vec![])])
            .unwrap();
        let trie = build_type_trie(&schema);
        let node = trie.walk(&["Transfer"]).unwrap();
        assert_eq!(trie.label(node), Some("Transfer"));
        assert!(trie.has_children(node));
        assert_eq!(trie.lookup(&["Transfer", "Money"]), Some("Transfer-Money"));
    }
}
