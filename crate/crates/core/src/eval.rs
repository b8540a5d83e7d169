//! Trigger and argument P/R/F1.
//!
//! * Trig-I: trigger offsets match.
//! * Trig-C: Trig-I and the event type matches.
//! * Arg-I: argument offsets match and the containing event type matches.
//! * Arg-C: Arg-I and the role matches.
//!
//! Each gold item is matched at most once. Predictions are matched greedily
//! in reading order; counts are micro-averaged over the corpus. Ungrounded
//! predictions count as predicted but can never match.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Mention;
use crate::dataset::Sentence;
use crate::span_index::TokenizedInput;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("duplicate sentence id {0:?}")]
    DuplicateId(String),
    #[error("no prediction for gold sentence {0:?}")]
    MissingPrediction(String),
    #[error("prediction for unknown sentence {0:?}")]
    UnexpectedPrediction(String),
}

/// Offset unit used when comparing mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    #[default]
    Token,
    Char,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metric {
    pub gold: usize,
    pub predicted: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metric {
    pub fn from_counts(gold: usize, predicted: usize, matched: usize) -> Self {
        let precision = ratio(matched, predicted);
        let recall = ratio(matched, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metric {
            gold,
            predicted,
            matched,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(rename = "Trig-I")]
    pub trig_i: Metric,
    #[serde(rename = "Trig-C")]
    pub trig_c: Metric,
    #[serde(rename = "Arg-I")]
    pub arg_i: Metric,
    #[serde(rename = "Arg-C")]
    pub arg_c: Metric,
}

impl EvalReport {
    pub fn metrics(&self) -> [(&'static str, &Metric); 4] {
        [
            ("Trig-I", &self.trig_i),
            ("Trig-C", &self.trig_c),
            ("Arg-I", &self.arg_i),
            ("Arg-C", &self.arg_c),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}",
            "metric", "gold", "pred", "match", "P", "R", "F1"
        )?;
        for (name, m) in self.metrics() {
            writeln!(
                f,
                "{:<8}{:>8}{:>8}{:>8}{:>8.2}{:>8.2}{:>8.2}",
                name,
                m.gold,
                m.predicted,
                m.matched,
                m.precision * 100.0,
                m.recall * 100.0,
                m.f1 * 100.0
            )?;
        }
        Ok(())
    }
}

type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TriggerItem {
    span: Option<Span>,
    event_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ArgItem {
    span: Option<Span>,
    event_type: String,
    role: String,
}

struct Items {
    triggers: Vec<TriggerItem>,
    args: Vec<ArgItem>,
}

fn mention_span(m: &Mention, input: &TokenizedInput, granularity: Granularity) -> Option<Span> {
    let (s, e) = m.token_span()?;
    match granularity {
        Granularity::Token => Some((s, e)),
        Granularity::Char => input.char_range(s, e),
    }
}

fn items(sentence: &Sentence, granularity: Granularity) -> Items {
    let input = sentence.input();
    let mut triggers = Vec::new();
    let mut args = Vec::new();
    for ev in &sentence.events {
        triggers.push(TriggerItem {
            span: mention_span(&ev.trigger, &input, granularity),
            event_type: ev.event_type.clone(),
        });
        for arg in &ev.args {
            args.push(ArgItem {
                span: mention_span(&arg.mention, &input, granularity),
                event_type: ev.event_type.clone(),
                role: arg.role.clone(),
            });
        }
    }
    Items { triggers, args }
}

/// Matches each prediction, in order, to the first unused gold item with an
/// equal key. `None` keys never match.
pub fn greedy_match<K: PartialEq>(gold: &[Option<K>], pred: &[Option<K>]) -> usize {
    let mut used = vec![false; gold.len()];
    let mut matched = 0;
    for p in pred.iter().flatten() {
        if let Some(i) = (0..gold.len()).find(|&i| !used[i] && gold[i].as_ref() == Some(p)) {
            used[i] = true;
            matched += 1;
        }
    }
    matched
}

/// Size of a maximum one-to-one matching, found by exhaustive search over
/// assignments (memoized on the set of used gold items). At most 64 gold
/// items.
pub fn optimal_match<K: PartialEq>(gold: &[Option<K>], pred: &[Option<K>]) -> usize {
    assert!(gold.len() <= 64, "exhaustive matcher handles at most 64 gold items");
    fn go<K: PartialEq>(
        i: usize,
        used: u64,
        gold: &[Option<K>],
        pred: &[Option<K>],
        memo: &mut HashMap<(usize, u64), usize>,
    ) -> usize {
        if i == pred.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, used)) {
            return v;
        }
        let mut best = go(i + 1, used, gold, pred, memo);
        if let Some(p) = &pred[i] {
            for (j, g) in gold.iter().enumerate() {
                if used & (1 << j) == 0 && g.as_ref() == Some(p) {
                    best = best.max(1 + go(i + 1, used | (1 << j), gold, pred, memo));
                }
            }
        }
        memo.insert((i, used), best);
        best
    }
    go(0, 0, gold, pred, &mut HashMap::new())
}

type Matcher = fn(&[Option<Key>], &[Option<Key>]) -> usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Span(Span),
    Typed(Span, String),
    Role(Span, String, String),
}

/// Per-metric keys of one sentence, in reading order.
fn keys(items: &Items) -> [Vec<Option<Key>>; 4] {
    let trig_i = items.triggers.iter().map(|t| t.span.map(Key::Span)).collect();
    let trig_c = items
        .triggers
        .iter()
        .map(|t| t.span.map(|s| Key::Typed(s, t.event_type.clone())))
        .collect();
    let arg_i = items
        .args
        .iter()
        .map(|a| a.span.map(|s| Key::Typed(s, a.event_type.clone())))
        .collect();
    let arg_c = items
        .args
        .iter()
        .map(|a| a.span.map(|s| Key::Role(s, a.event_type.clone(), a.role.clone())))
        .collect();
    [trig_i, trig_c, arg_i, arg_c]
}

fn align<'a>(gold: &'a [Sentence], pred: &'a [Sentence]) -> Result<Vec<(&'a Sentence, &'a Sentence)>, EvalError> {
    let mut by_id: HashMap<&str, &Sentence> = HashMap::new();
    for p in pred {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(EvalError::DuplicateId(p.id.clone()));
        }
    }
    let mut seen = HashSet::new();
    let mut pairs = Vec::with_capacity(gold.len());
    for g in gold {
        if !seen.insert(g.id.as_str()) {
            return Err(EvalError::DuplicateId(g.id.clone()));
        }
        let p = by_id
            .get(g.id.as_str())
            .ok_or_else(|| EvalError::MissingPrediction(g.id.clone()))?;
        pairs.push((g, *p));
    }
    if let Some(extra) = pred.iter().find(|p| !seen.contains(p.id.as_str())) {
        return Err(EvalError::UnexpectedPrediction(extra.id.clone()));
    }
    Ok(pairs)
}

/// Per-sentence `(gold, predicted, matched)` counts for the four metrics.
fn sentence_counts(g: &Sentence, p: &Sentence, granularity: Granularity, matcher: Matcher) -> [(usize, usize, usize); 4] {
    let gk = keys(&items(g, granularity));
    let pk = keys(&items(p, granularity));
    std::array::from_fn(|m| (gk[m].len(), pk[m].len(), matcher(&gk[m], &pk[m])))
}

fn evaluate_with(
    gold: &[Sentence],
    pred: &[Sentence],
    granularity: Granularity,
    matcher: Matcher,
) -> Result<EvalReport, EvalError> {
    let pairs = align(gold, pred)?;
    let totals = pairs
        .par_iter()
        .map(|(g, p)| sentence_counts(g, p, granularity, matcher))
        .reduce(
            || [(0, 0, 0); 4],
            |mut acc, x| {
                for (a, b) in acc.iter_mut().zip(x) {
                    a.0 += b.0;
                    a.1 += b.1;
                    a.2 += b.2;
                }
                acc
            },
        );
    let [t_i, t_c, a_i, a_c] = totals.map(|(g, p, m)| Metric::from_counts(g, p, m));
    Ok(EvalReport {
        trig_i: t_i,
        trig_c: t_c,
        arg_i: a_i,
        arg_c: a_c,
    })
}

/// Scores `pred` against `gold`, aligning sentences by id.
pub fn evaluate(gold: &[Sentence], pred: &[Sentence], granularity: Granularity) -> Result<EvalReport, EvalError> {
    evaluate_with(gold, pred, granularity, greedy_match::<Key>)
}

/// The same report computed with the exhaustive matcher.
pub fn evaluate_optimal(gold: &[Sentence], pred: &[Sentence], granularity: Granularity) -> Result<EvalReport, EvalError> {
    evaluate_with(gold, pred, granularity, optimal_match::<Key>)
}

/// A sentence where greedy and exhaustive matching disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub id: String,
    pub metric: &'static str,
    pub greedy: usize,
    pub optimal: usize,
}

/// Compares the greedy matcher against the exhaustive one, sentence by
/// sentence, and lists every disagreement.
pub fn cross_check(gold: &[Sentence], pred: &[Sentence], granularity: Granularity) -> Result<Vec<Discrepancy>, EvalError> {
    const NAMES: [&str; 4] = ["Trig-I", "Trig-C", "Arg-I", "Arg-C"];
    let mut out = Vec::new();
    for (g, p) in align(gold, pred)? {
        let greedy = sentence_counts(g, p, granularity, greedy_match::<Key>);
        let optimal = sentence_counts(g, p, granularity, optimal_match::<Key>);
        for m in 0..4 {
            if greedy[m].2 != optimal[m].2 {
                out.push(Discrepancy {
                    id: g.id.clone(),
                    metric: NAMES[m],
                    greedy: greedy[m].2,
                    optimal: optimal[m].2,
                });
            }
        }
    }
    Ok(out)
}
