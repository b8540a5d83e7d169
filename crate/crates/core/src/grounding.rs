//! Assigning source offsets to generated mentions.
//!
//! Triggers are matched in order: each takes the first
//! occurrence of its tokens at or after the end of the previous match, and the
//! cursor never rewinds. Arguments take the occurrence whose start is nearest
//! to their event's trigger start, the earlier one on ties.
//!
//! A mention with no acceptable occurrence is left without offsets.

use crate::codec::{EventRecord, Mention};
use crate::span_index::TokenizedInput;

fn place(mention: &Mention, start: Option<usize>, input: &TokenizedInput) -> Mention {
    let char_start = start.and_then(|s| input.char_range(s, s + mention.len()).map(|r| r.0));
    Mention {
        tokens: mention.tokens.clone(),
        token_start: start,
        char_start,
    }
}

/// Grounds every trigger with the left-to-right cursor rule. Argument
/// mentions are copied unchanged.
pub fn ground_triggers(records: &[EventRecord], input: &TokenizedInput) -> Vec<EventRecord> {
    let mut cursor = 0;
    records
        .iter()
        .map(|rec| {
            let start = input
                .occurrences(&rec.trigger.tokens)
                .into_iter()
                .find(|&s| s >= cursor);
            if let Some(s) = start {
                cursor = s + rec.trigger.len();
            }
            EventRecord {
                trigger: place(&rec.trigger, start, input),
                ..rec.clone()
            }
        })
        .collect()
}

/// Grounds each argument at the occurrence nearest the trigger. Needs a
/// grounded trigger; otherwise every argument stays ungrounded.
pub fn ground_arguments(record: &EventRecord, input: &TokenizedInput) -> EventRecord {
    let anchor = record.trigger.token_start;
    let mut out = record.clone();
    for arg in &mut out.args {
        let start = anchor.and_then(|t| {
            input
                .occurrences(&arg.mention.tokens)
                .into_iter()
                .min_by_key(|&s| (s.abs_diff(t), s))
        });
        arg.mention = place(&arg.mention, start, input);
    }
    out
}

/// Triggers first, then arguments.
pub fn ground(records: &[EventRecord], input: &TokenizedInput) -> Vec<EventRecord> {
    ground_triggers(records, input)
        .iter()
        .map(|rec| ground_arguments(rec, input))
        .collect()
}

/// True when every mention of `records` has offsets.
pub fn fully_grounded(records: &[EventRecord]) -> bool {
    records
        .iter()
        .all(|r| r.trigger.is_grounded() && r.args.iter().all(|a| a.mention.is_grounded()))
}
