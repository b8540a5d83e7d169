//! Randomized safety check of the constrained decoder.
//!
//! Each seed draws an input sentence (words, punctuation, stray brackets and
//! schema label words) and decodes it under a [`RandomScorer`]. Every output
//! is checked independently of the decoder:
//!
//! * grammar: the sequence parses with [`delinearize`];
//! * schema: every type and role is declared and the role belongs to its type;
//! * spans: every mention is a contiguous run of input tokens, found by a
//!   naive scan, within the span length limit;
//! * grounding: the left-to-right trigger rule places every trigger.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{delinearize, is_reserved, EventRecord, LinearizedSeq};
use crate::decoder::{constrained_decode, DecodeConfig, DecodeError, DecodeMode};
use crate::grounding::ground_triggers;
use crate::schema::EventSchema;
use crate::scorers::RandomScorer;
use crate::span_index::{tokenize, TokenizedInput};

const FILLER: &[&str] = &[
    "the", "man", "returned", "to", "city", "from", "his", "capture", "by", "hunters", "paid", "sold",
    "a", "house", "for", "money", "he", "hit", "him", "again",
];
const PUNCT: &[&str] = &[",", ".", "'", "(", ")", "-", "$"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzConfig {
    pub seeds: usize,
    pub base_seed: u64,
    pub max_input_len: usize,
    /// Decoding settings; every fourth seed switches to beam search.
    pub decode: DecodeConfig,
    pub beam_width: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seeds: 500,
            base_seed: 0,
            max_input_len: 16,
            decode: DecodeConfig::greedy().with_max_length(1024),
            beam_width: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    Grammar,
    Schema,
    Span,
    Grounding,
    /// The decoder returned an error other than hitting the length limit.
    Decoder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub seed: u64,
    pub kind: ViolationKind,
    pub input: String,
    pub output: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FuzzReport {
    pub decodes: usize,
    pub completed: usize,
    /// Decodes that stopped at the length limit.
    pub truncated: usize,
    pub events: usize,
    pub empty_outputs: usize,
    pub violations: Vec<Violation>,
}

impl FuzzReport {
    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Random sentence over words, punctuation, brackets and `extra` words.
pub fn random_input(rng: &mut ChaCha8Rng, max_len: usize, extra: &[String]) -> TokenizedInput {
    let len = rng.random_range(0..=max_len);
    let mut words: Vec<String> = Vec::with_capacity(len);
    for _ in 0..len {
        let w = match rng.random_range(0..10) {
            0 | 1 => PUNCT.choose(rng).copied().map(str::to_owned),
            2 if !extra.is_empty() => extra.choose(rng).cloned(),
            _ => FILLER.choose(rng).copied().map(str::to_owned),
        };
        words.extend(w);
    }
    tokenize(&words.join(" "))
}

fn naive_contains(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty()
        && needle.len() <= haystack.len()
        && (0..=haystack.len() - needle.len()).any(|s| haystack[s..s + needle.len()] == *needle)
}

fn check_output(
    records: &[EventRecord],
    schema: &EventSchema,
    input: &TokenizedInput,
    max_span_len: usize,
) -> Vec<(ViolationKind, String)> {
    let mut out = Vec::new();
    for rec in records {
        if !schema.contains_type(&rec.event_type) {
            out.push((ViolationKind::Schema, format!("undeclared type {:?}", rec.event_type)));
        }
        for arg in &rec.args {
            if !schema.permits_role(&rec.event_type, &arg.role) {
                out.push((
                    ViolationKind::Schema,
                    format!("role {:?} not permitted for {:?}", arg.role, rec.event_type),
                ));
            }
        }
        let mentions = std::iter::once(&rec.trigger).chain(rec.args.iter().map(|a| &a.mention));
        for m in mentions {
            let ok = m.len() <= max_span_len
                && !m.tokens.iter().any(|t| is_reserved(t))
                && naive_contains(input.tokens(), &m.tokens);
            if !ok {
                out.push((ViolationKind::Span, format!("{:?} is not an input span", m.text())));
            }
        }
    }
    for rec in ground_triggers(records, input) {
        if !rec.trigger.is_grounded() {
            out.push((
                ViolationKind::Grounding,
                format!("trigger {:?} cannot be placed", rec.trigger.text()),
            ));
        }
    }
    out
}

enum Outcome {
    Done { events: usize, violations: Vec<Violation> },
    Truncated,
    Failed(Violation),
}

fn run_one(schema: &EventSchema, config: &FuzzConfig, seed: u64, extra: &[String]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = random_input(&mut rng, config.max_input_len, extra);
    let mut decode = config.decode;
    if seed % 4 == 3 {
        decode.mode = DecodeMode::Beam {
            width: config.beam_width,
        };
    }
    let scorer = RandomScorer::new(seed, schema);
    let violation = |kind, output: &LinearizedSeq, detail: String| Violation {
        seed,
        kind,
        input: input.text().to_owned(),
        output: output.to_string(),
        detail,
    };
    let seq = match constrained_decode(&scorer, &input, schema, &decode) {
        Ok(out) => out.seq,
        Err(DecodeError::MaxLength { .. }) => return Outcome::Truncated,
        Err(e) => return Outcome::Failed(violation(ViolationKind::Decoder, &LinearizedSeq::default(), e.to_string())),
    };
    match delinearize(&seq, schema) {
        Err(e) => Outcome::Done {
            events: 0,
            violations: vec![violation(ViolationKind::Grammar, &seq, e.to_string())],
        },
        Ok(records) => Outcome::Done {
            events: records.len(),
            violations: check_output(&records, schema, &input, decode.max_span_len)
                .into_iter()
                .map(|(kind, detail)| violation(kind, &seq, detail))
                .collect(),
        },
    }
}

/// Decodes `config.seeds` random inputs and reports every violation found.
pub fn fuzz_decoder(schema: &EventSchema, config: &FuzzConfig) -> FuzzReport {
    let extra = schema.label_tokens();
    let outcomes: Vec<Outcome> = (0..config.seeds as u64)
        .into_par_iter()
        .map(|i| run_one(schema, config, config.base_seed.wrapping_add(i), &extra))
        .collect();
    let mut report = FuzzReport {
        decodes: config.seeds,
        ..Default::default()
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Done { events, violations } => {
                report.completed += 1;
                report.events += events;
                report.empty_outputs += usize::from(events == 0);
                report.violations.extend(violations);
            }
            Outcome::Truncated => report.truncated += 1,
            Outcome::Failed(v) => report.violations.push(v),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Mention, EventRecord};

    fn schema() -> EventSchema {
        EventSchema::parse(
            "Transport: Artifact, Destination, Origin\n\
             Transfer-Ownership: Buyer, Seller\n\
             Transfer-Money: Giver, Recipient\n\
             Transfer: Thing\n\
             Die:\n",
        )
        .unwrap()
    }

    #[test]
    fn fuzz_is_clean() {
        let report = fuzz_decoder(
            &schema(),
            &FuzzConfig {
                seeds: 120,
                ..Default::default()
            },
        );
        assert!(report.violations.is_empty(), "{:#?}", report.violations);
        assert_eq!(report.completed + report.truncated, 120);
        assert!(report.events > 0);
    }

    #[test]
    fn checker_catches_bad_records() {
        let s = schema();
        let input = tokenize("a b , c");
        let bad = vec![
            EventRecord::new("Attack", Mention::words("a")),
            EventRecord::new("Die", Mention::words("b c")).with_arg("Victim", Mention::words("b")),
            EventRecord::new("Die", Mention::words("b , c")),
        ];
        let found: Vec<ViolationKind> = check_output(&bad, &s, &input, 16).into_iter().map(|v| v.0).collect();
        assert!(found.contains(&ViolationKind::Schema));
        assert!(found.contains(&ViolationKind::Span));
        assert!(found.contains(&ViolationKind::Grounding));
        assert_eq!(found.iter().filter(|k| **k == ViolationKind::Schema).count(), 2);
    }

    #[test]
    fn naive_scan() {
        let hay: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        assert!(naive_contains(&hay, &hay[1..]));
        assert!(!naive_contains(&hay, &["c".to_string(), "a".to_string()]));
        assert!(!naive_contains(&hay, &[]));
    }
}
