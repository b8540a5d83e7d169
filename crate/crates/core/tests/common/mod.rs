//! Random schemas, record sets and sentences shared by the integration tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use structgen::codec::{EventRecord, Mention};
use structgen::dataset::Sentence;
use structgen::schema::EventSchema;

const SYLLABLES: &[&str] = &[
    "Ar", "Be", "Co", "Da", "El", "Fo", "Ga", "Hu", "In", "Jo", "Ka", "Lu", "Mo", "Ne", "Or", "Pi",
];

/// Mention words: lowercase, so never equal to a capitalized label token.
pub const WORDS: &[&str] = &[
    "the", "man", "returned", "to", "los", "angeles", "from", "mexico", "capture", "tuesday", "by",
    "bounty", "hunters", "paid", "sold", "house", "money", "he", "hit", "him", "her", "again", "a",
    "city", "army", "bank", "fire", "gold", "ship", "road",
];

fn name(rng: &mut impl Rng) -> String {
    let parts = rng.random_range(1..=3);
    (0..parts)
        .map(|_| {
            let a = SYLLABLES.choose(rng).unwrap();
            let b = SYLLABLES.choose(rng).unwrap().to_lowercase();
            format!("{a}{b}")
        })
        .collect::<Vec<_>>()
        .join("-")
}

/// A random schema with up to `max_types` types and `max_roles` roles per
/// type. Some names extend earlier ones (`Xy` and `Xy-Zw`) so label tries
/// contain complete labels with children.
pub fn random_schema(rng: &mut impl Rng, max_types: usize, max_roles: usize) -> EventSchema {
    loop {
        let n = rng.random_range(1..=max_types);
        let mut types: Vec<(String, Vec<String>)> = Vec::new();
        while types.len() < n {
            let ty = if !types.is_empty() && rng.random_bool(0.25) {
                let base = &types.choose(rng).unwrap().0;
                format!("{base}-{}", name(rng))
            } else {
                name(rng)
            };
            if types.iter().any(|(t, _)| *t == ty) {
                continue;
            }
            let k = rng.random_range(0..=max_roles);
            let mut roles: Vec<String> = Vec::new();
            while roles.len() < k {
                let r = if !roles.is_empty() && rng.random_bool(0.25) {
                    format!("{}-{}", roles.choose(rng).unwrap(), name(rng))
                } else {
                    name(rng)
                };
                if !roles.contains(&r) {
                    roles.push(r);
                }
            }
            types.push((ty, roles));
        }
        if let Ok(schema) = EventSchema::new(types) {
            return schema;
        }
    }
}

pub fn random_mention(rng: &mut impl Rng, sentence_len: usize) -> Mention {
    let len = rng.random_range(1..=3);
    let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
    Mention::at(words, rng.random_range(0..sentence_len))
}

/// Up to `max_events` schema-valid records with random offsets.
pub fn random_records(rng: &mut impl Rng, schema: &EventSchema, max_events: usize) -> Vec<EventRecord> {
    let types: Vec<&str> = schema.event_types().collect();
    let n = rng.random_range(0..=max_events);
    (0..n)
        .map(|_| {
            let ty = *types.choose(rng).unwrap();
            let mut rec = EventRecord::new(ty, random_mention(rng, 40));
            let roles = schema.roles(ty).unwrap();
            if !roles.is_empty() {
                for _ in 0..rng.random_range(0..=roles.len()) {
                    rec = rec.with_arg(roles.choose(rng).unwrap().clone(), random_mention(rng, 40));
                }
            }
            rec
        })
        .collect()
}

/// A sentence whose gold records point at real tokens.
pub fn random_gold(rng: &mut impl Rng, id: usize, schema: &EventSchema, max_events: usize) -> Sentence {
    let len = rng.random_range(4..=14);
    let words: Vec<&str> = (0..len).map(|_| *WORDS[..8].choose(rng).unwrap()).collect();
    let text = words.join(" ");
    let types: Vec<&str> = schema.event_types().collect();
    let span = |rng: &mut dyn rand::RngCore| {
        let s = rng.random_range(0..len);
        let e = rng.random_range(s + 1..=(s + 2).min(len));
        Mention::at(words[s..e].iter().copied(), s)
    };
    let events = (0..rng.random_range(0..=max_events))
        .map(|_| {
            let ty = *types.choose(rng).unwrap();
            let mut rec = EventRecord::new(ty, span(rng));
            let roles = schema.roles(ty).unwrap();
            if !roles.is_empty() {
                for _ in 0..rng.random_range(0..=3) {
                    rec = rec.with_arg(roles.choose(rng).unwrap().clone(), span(rng));
                }
            }
            rec
        })
        .collect();
    Sentence {
        id: id.to_string(),
        text,
        events,
    }
}

/// Noisy copy of `gold`: dropped, duplicated, retyped, re-roled and shifted
/// items, plus spurious events.
pub fn perturb(rng: &mut impl Rng, gold: &Sentence, schema: &EventSchema) -> Sentence {
    let types: Vec<&str> = schema.event_types().collect();
    let n_tokens = gold.input().len();
    let mut events = Vec::new();
    for ev in &gold.events {
        if rng.random_bool(0.2) {
            continue;
        }
        let mut ev = ev.clone();
        if rng.random_bool(0.2) {
            ev.event_type = types.choose(rng).unwrap().to_string();
            let roles = schema.roles(&ev.event_type).unwrap();
            for arg in &mut ev.args {
                match roles.choose(rng) {
                    Some(r) => arg.role = r.clone(),
                    None => arg.role = "Nope".into(),
                }
            }
        }
        for arg in &mut ev.args {
            if rng.random_bool(0.2) {
                arg.mention.token_start = Some(rng.random_range(0..n_tokens));
            }
        }
        if rng.random_bool(0.15) {
            ev.trigger.token_start = Some(rng.random_range(0..n_tokens));
        }
        if rng.random_bool(0.15) {
            events.push(ev.clone());
        }
        events.push(ev);
    }
    if rng.random_bool(0.3) {
        let extra = random_gold(rng, 0, schema, 2);
        events.extend(extra.events.into_iter().filter(|e| {
            e.trigger.token_span().is_some_and(|(_, end)| end <= n_tokens)
        }));
    }
    Sentence {
        id: gold.id.clone(),
        text: gold.text.clone(),
        events,
    }
}
