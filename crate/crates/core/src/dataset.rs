//! Line-delimited JSON documents for sentences, records and training pairs.
//!
//! One sentence per line:
//!
//! ```json
//! {"id":"s1","text":"he hit him","events":[{"type":"Attack","trigger":{"text":"hit","start":1},"args":[{"role":"Target","text":"him","start":2}]}]}
//! ```
//!
//! Offsets are token indices under [`tokenize`]. A `start` of `null` marks an
//! ungrounded mention.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Argument, EventRecord, LinearizedSeq, Mention};
use crate::schema::EventSchema;
use crate::span_index::{tokenize, TokenizedInput};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("sentence {id:?}: mention {text:?} does not occur at token {start}")]
    OffsetMismatch { id: String, text: String, start: usize },
    #[error("sentence {id:?}: empty mention")]
    EmptyMention { id: String },
    #[error("sentence {id:?}: unknown event type {event_type:?}")]
    UnknownType { id: String, event_type: String },
    #[error("sentence {id:?}: role {role:?} is not permitted for {event_type:?}")]
    RoleNotPermitted {
        id: String,
        event_type: String,
        role: String,
    },
}

/// A source sentence with its event records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub events: Vec<EventRecord>,
}

impl Sentence {
    pub fn input(&self) -> TokenizedInput {
        tokenize(&self.text)
    }

    /// Checks every type and role against `schema`.
    pub fn check_schema(&self, schema: &EventSchema) -> Result<(), DatasetError> {
        for ev in &self.events {
            if !schema.contains_type(&ev.event_type) {
                return Err(DatasetError::UnknownType {
                    id: self.id.clone(),
                    event_type: ev.event_type.clone(),
                });
            }
            for arg in &ev.args {
                if !schema.permits_role(&ev.event_type, &arg.role) {
                    return Err(DatasetError::RoleNotPermitted {
                        id: self.id.clone(),
                        event_type: ev.event_type.clone(),
                        role: arg.role.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionDoc {
    pub text: String,
    pub start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgDoc {
    pub role: String,
    pub text: String,
    pub start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDoc {
    #[serde(rename = "type")]
    pub event_type: String,
    pub trigger: MentionDoc,
    #[serde(default)]
    pub args: Vec<ArgDoc>,
}

/// Wire form of a [`Sentence`]. Prediction files may also carry the raw
/// decoded `target` and a decode `error`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceDoc {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub events: Vec<EventDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A `(sentence, linearized target)` training pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDoc {
    pub id: String,
    pub text: String,
    pub target: String,
}

fn mention_from_doc(
    id: &str,
    text: &str,
    start: Option<usize>,
    input: &TokenizedInput,
) -> Result<Mention, DatasetError> {
    let tokens = tokenize(text).tokens().to_vec();
    if tokens.is_empty() {
        return Err(DatasetError::EmptyMention { id: id.to_owned() });
    }
    let Some(start) = start else {
        return Ok(Mention::new(tokens));
    };
    let end = start + tokens.len();
    if end > input.len() || input.tokens()[start..end] != tokens[..] {
        return Err(DatasetError::OffsetMismatch {
            id: id.to_owned(),
            text: text.to_owned(),
            start,
        });
    }
    Ok(Mention {
        tokens,
        token_start: Some(start),
        char_start: input.char_range(start, end).map(|r| r.0),
    })
}

fn mention_to_doc(m: &Mention, input: &TokenizedInput) -> (String, Option<usize>) {
    let text = m
        .token_span()
        .and_then(|(s, e)| input.surface(s, e))
        .map(str::to_owned)
        .unwrap_or_else(|| m.text());
    (text, m.token_start)
}

impl SentenceDoc {
    pub fn into_sentence(self) -> Result<Sentence, DatasetError> {
        let input = tokenize(&self.text);
        let id = self.id;
        let mut events = Vec::with_capacity(self.events.len());
        for ev in self.events {
            let trigger = mention_from_doc(&id, &ev.trigger.text, ev.trigger.start, &input)?;
            let mut args = Vec::with_capacity(ev.args.len());
            for a in ev.args {
                args.push(Argument {
                    role: a.role,
                    mention: mention_from_doc(&id, &a.text, a.start, &input)?,
                });
            }
            events.push(EventRecord {
                event_type: ev.event_type,
                trigger,
                args,
            });
        }
        Ok(Sentence {
            id,
            text: self.text,
            events,
        })
    }

    pub fn from_sentence(sentence: &Sentence) -> Self {
        let input = sentence.input();
        let events = sentence
            .events
            .iter()
            .map(|ev| {
                let (text, start) = mention_to_doc(&ev.trigger, &input);
                EventDoc {
                    event_type: ev.event_type.clone(),
                    trigger: MentionDoc { text, start },
                    args: ev
                        .args
                        .iter()
                        .map(|a| {
                            let (text, start) = mention_to_doc(&a.mention, &input);
                            ArgDoc {
                                role: a.role.clone(),
                                text,
                                start,
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        SentenceDoc {
            id: sentence.id.clone(),
            text: sentence.text.clone(),
            events,
            target: None,
            error: None,
        }
    }
}

fn parse_lines<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<(usize, T)>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|v| (i + 1, v))
                .map_err(|e| DatasetError::Json {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

/// Parses a sentence document, one JSON object per non-blank line.
pub fn read_sentences(text: &str) -> Result<Vec<Sentence>, DatasetError> {
    parse_lines::<SentenceDoc>(text)?
        .into_iter()
        .map(|(_, doc)| doc.into_sentence())
        .collect()
}

pub fn read_sentence_docs(text: &str) -> Result<Vec<SentenceDoc>, DatasetError> {
    Ok(parse_lines(text)?.into_iter().map(|(_, d)| d).collect())
}

pub fn write_docs<T: Serialize>(docs: &[T]) -> String {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc).expect("documents serialize"));
        out.push('\n');
    }
    out
}

pub fn write_sentences(sentences: &[Sentence]) -> String {
    let docs: Vec<SentenceDoc> = sentences.iter().map(SentenceDoc::from_sentence).collect();
    write_docs(&docs)
}

pub fn read_pairs(text: &str) -> Result<Vec<PairDoc>, DatasetError> {
    Ok(parse_lines(text)?.into_iter().map(|(_, d)| d).collect())
}

impl PairDoc {
    pub fn new(id: impl Into<String>, input: &TokenizedInput, target: &LinearizedSeq) -> Self {
        PairDoc {
            id: id.into(),
            text: input.text().to_owned(),
            target: target.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"s1","text":"he hit him, hard.","events":[{"type":"Attack","trigger":{"text":"hit","start":1},"args":[{"role":"Target","text":"him","start":2}]}]}"#;

    #[test]
    fn reads_and_writes_one_line() {
        let sents = read_sentences(LINE).unwrap();
        assert_eq!(sents.len(), 1);
        let ev = &sents[0].events[0];
        assert_eq!(ev.trigger, Mention { tokens: vec!["hit".into()], token_start: Some(1), char_start: Some(3) });
        assert_eq!(write_sentences(&sents).trim_end(), LINE);
    }

    #[test]
    fn surface_text_is_preserved() {
        let line = r#"{"id":"x","text":"in the U.S. today","events":[{"type":"E","trigger":{"text":"U.S.","start":2},"args":[]}]}"#;
        let sents = read_sentences(line).unwrap();
        assert_eq!(sents[0].events[0].trigger.tokens, ["U", ".", "S", "."]);
        assert_eq!(write_sentences(&sents).trim_end(), line);
    }

    #[test]
    fn offset_mismatch_is_an_error() {
        let bad = LINE.replace("\"start\":1", "\"start\":0");
        assert!(matches!(read_sentences(&bad), Err(DatasetError::OffsetMismatch { .. })));
        let bad = LINE.replace("\"start\":2", "\"start\":40");
        assert!(matches!(read_sentences(&bad), Err(DatasetError::OffsetMismatch { .. })));
    }

    #[test]
    fn json_errors_name_the_line() {
        let text = format!("{LINE}\n\n{{not json}}\n");
        assert!(matches!(read_sentences(&text), Err(DatasetError::Json { line: 3, .. })));
    }

    #[test]
    fn ungrounded_mentions_serialize_null() {
        let s = Sentence {
            id: "a".into(),
            text: "x y".into(),
            events: vec![EventRecord::new("E", Mention::words("z"))],
        };
        let out = write_sentences(&[s]);
        assert!(out.contains(r#""start":null"#));
    }

    #[test]
    fn schema_check() {
        let schema = EventSchema::parse("Attack: Target\n").unwrap();
        let s = read_sentences(LINE).unwrap().remove(0);
        assert!(s.check_schema(&schema).is_ok());
        let schema = EventSchema::parse("Attack: Victim\n").unwrap();
        assert!(matches!(s.check_schema(&schema), Err(DatasetError::RoleNotPermitted { .. })));
    }
}
