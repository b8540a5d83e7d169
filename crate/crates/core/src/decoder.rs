//! Constrained decoding of linearized event structures.
//!
//! The decoder walks a small pushdown automaton over the event grammar
//!
//! ```text
//! <bos> ( { ( TYPE SPAN { ( ROLE SPAN ) } ) } ) <eos>
//! ```
//!
//! and at every step intersects the scorer's next-token distribution with the
//! tokens the automaton allows: structure indicators, children of the current
//! label-trie node, or continuations of the current input span. Whatever the
//! scorer prefers, the result parses and only mentions contiguous input spans.
//!
//! Scores are combined in the log domain. Beam hypotheses are ranked by total
//! log-probability with no length normalization, so a shorter finished
//! hypothesis wins over a longer one of equal per-token quality.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{is_reserved, LinearizedSeq, BOS, CLOSE, EOS, OPEN};
use crate::schema::{EventSchema, LabelTrie, NodeId, SchemaTries};
use crate::span_index::{build_span_trie, SpanNodeId, SpanTrie, TokenizedInput, DEFAULT_MAX_SPAN_LEN};

/// Unnormalized next-token scores (logits). Tokens absent from the list
/// have probability zero.
pub type Scores = Vec<(String, f64)>;

/// Provider of next-token distributions `p(y_i | y_<i, x)`.
///
/// `prefix` always starts with `<bos>`.
pub trait Scorer {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores {
        (**self).next_scores(input, prefix)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores {
        (**self).next_scores(input, prefix)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("scorer returned non-finite score {score} for {token:?}")]
    NonFinite { token: String, score: f64 },
    #[error("scorer returned an empty distribution")]
    Empty,
}

/// A normalized next-token distribution in log space. Sums run in token
/// order, so results are bit-for-bit reproducible.
#[derive(Debug, Clone)]
pub struct Distribution {
    log_probs: BTreeMap<String, f64>,
}

impl Distribution {
    /// Log-softmax over `scores`. Duplicate tokens keep their last score.
    pub fn from_scores(scores: Scores) -> Result<Self, ScoreError> {
        if scores.is_empty() {
            return Err(ScoreError::Empty);
        }
        if let Some((token, score)) = scores.iter().find(|(_, s)| !s.is_finite()) {
            return Err(ScoreError::NonFinite {
                token: token.clone(),
                score: *score,
            });
        }
        let mut log_probs: BTreeMap<String, f64> = scores.into_iter().collect();
        let max = log_probs.values().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm = max + log_probs.values().map(|s| (s - max).exp()).sum::<f64>().ln();
        for v in log_probs.values_mut() {
            *v -= norm;
        }
        Ok(Distribution { log_probs })
    }

    /// Log-probability of `token`; `-inf` outside the support.
    pub fn log_prob(&self, token: &str) -> f64 {
        self.log_probs.get(token).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn prob(&self, token: &str) -> f64 {
        self.log_prob(token).exp()
    }

    pub fn support(&self) -> impl Iterator<Item = &str> + '_ {
        self.log_probs.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }
}

/// Queries `scorer` and normalizes the result.
pub fn next_distribution<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    prefix: &[String],
) -> Result<Distribution, ScoreError> {
    Distribution::from_scores(scorer.next_scores(input, prefix))
}

/// Every token a constrained decoder could ever emit for `input`: indicators,
/// `<eos>`, schema label tokens and input tokens. Sorted.
pub fn output_vocabulary(schema: &EventSchema, input: &TokenizedInput) -> Vec<String> {
    let mut vocab: BTreeSet<String> = [OPEN, CLOSE, EOS].iter().map(|s| s.to_string()).collect();
    vocab.extend(schema.label_tokens());
    vocab.extend(
        input
            .tokens()
            .iter()
            .filter(|t| !is_reserved(t))
            .cloned(),
    );
    vocab.into_iter().collect()
}

/// Where the automaton is in the event grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Only `<bos>` so far.
    AwaitRoot,
    /// Right after the root `(`.
    AwaitEventOpenOrRootClose,
    InTypeLabel,
    InTriggerSpan,
    AwaitArgOpenOrEventClose,
    InRoleLabel,
    InArgSpan,
    /// After a closed event.
    AwaitEventOpenOrRootClose2,
    /// Root closed; only `<eos>` may follow.
    AwaitEnd,
    Done,
}

/// Automaton state during constrained generation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodeState {
    emitted: Vec<String>,
    depth: usize,
    phase: Phase,
    partial_label: Vec<String>,
    label_node: NodeId,
    partial_span: Vec<String>,
    span_node: SpanNodeId,
    // Start positions of `partial_span` still compatible with the trigger
    // cursor; only tracked inside trigger spans.
    span_starts: Vec<usize>,
    // Triggers are placed left to right: the next one must start here or later.
    trigger_cursor: usize,
    current_type: Option<String>,
}

impl Default for DecodeState {
    fn default() -> Self {
        Self::new()
    }
}

impl DecodeState {
    pub fn new() -> Self {
        DecodeState {
            emitted: Vec::new(),
            depth: 0,
            phase: Phase::AwaitRoot,
            partial_label: Vec::new(),
            label_node: LabelTrie::ROOT,
            partial_span: Vec::new(),
            span_node: SpanTrie::ROOT,
            span_starts: Vec::new(),
            trigger_cursor: 0,
            current_type: None,
        }
    }

    /// Tokens emitted after `<bos>`.
    pub fn emitted(&self) -> &[String] {
        &self.emitted
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn partial_label(&self) -> &[String] {
        &self.partial_label
    }

    pub fn partial_span(&self) -> &[String] {
        &self.partial_span
    }

    pub fn current_type(&self) -> Option<&str> {
        self.current_type.as_deref()
    }

    /// Token index before which no further trigger may start.
    pub fn trigger_cursor(&self) -> usize {
        self.trigger_cursor
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// `<bos>` followed by the emitted tokens, as handed to a scorer.
    pub fn prefix(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.emitted.len() + 1);
        out.push(BOS.to_owned());
        out.extend(self.emitted.iter().cloned());
        out
    }

    /// The emitted body, without `<eos>`.
    pub fn sequence(&self) -> LinearizedSeq {
        let body = match self.emitted.last() {
            Some(last) if last == EOS => &self.emitted[..self.emitted.len() - 1],
            _ => &self.emitted[..],
        };
        LinearizedSeq::new(body.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("decoding already finished")]
    Finished,
    #[error("token {token:?} is not allowed here (phase {phase:?})")]
    IllegalToken { token: String, phase: Phase },
    #[error("no complete structure within {max_length} tokens")]
    MaxLength { max_length: usize },
    #[error("step {step}: {source}")]
    Scorer {
        step: usize,
        #[source]
        source: ScoreError,
    },
    #[error("invalid decode config: {0}")]
    Config(String),
}

/// Schema and span tries for one input sentence.
#[derive(Debug, Clone)]
pub struct Constraints {
    tries: SchemaTries,
    spans: SpanTrie,
    tokens: Vec<String>,
}

impl Constraints {
    pub fn new(schema: &EventSchema, input: &TokenizedInput, max_span_len: usize) -> Self {
        Self::from_parts(SchemaTries::new(schema), input, max_span_len)
    }

    pub fn from_parts(tries: SchemaTries, input: &TokenizedInput, max_span_len: usize) -> Self {
        Constraints {
            tries,
            spans: build_span_trie(input, max_span_len),
            tokens: input.tokens().to_vec(),
        }
    }

    pub fn tries(&self) -> &SchemaTries {
        &self.tries
    }

    pub fn spans(&self) -> &SpanTrie {
        &self.spans
    }

    fn active_role_trie(&self, state: &DecodeState) -> &LabelTrie {
        let ty = state.current_type.as_deref().expect("event type committed");
        self.tries.role_trie(ty).expect("type comes from the schema")
    }

    fn trigger_starts(&self, cursor: usize) -> impl Iterator<Item = usize> + '_ {
        (cursor..self.tokens.len()).filter(|&i| !is_reserved(&self.tokens[i]))
    }

    /// Positions `start + len` that extend a trigger occurrence by one token.
    fn trigger_continuations<'a>(&'a self, state: &'a DecodeState) -> impl Iterator<Item = usize> + 'a {
        let len = state.partial_span.len();
        state
            .span_starts
            .iter()
            .map(move |&s| s + len)
            .filter(move |&i| {
                len < self.spans.max_span_len() && i < self.tokens.len() && !is_reserved(&self.tokens[i])
            })
    }

    fn can_open_event(&self, state: &DecodeState) -> bool {
        !self.tries.types.is_empty() && self.trigger_starts(state.trigger_cursor).next().is_some()
    }

    fn can_open_arg(&self, state: &DecodeState) -> bool {
        !self.active_role_trie(state).is_empty()
    }

    /// The legal next tokens, sorted.
    pub fn candidate_vocab(&self, state: &DecodeState) -> Result<BTreeSet<String>, DecodeError> {
        let mut out = BTreeSet::new();
        let mut push = |t: &str| {
            out.insert(t.to_owned());
        };
        match state.phase {
            Phase::Done => return Err(DecodeError::Finished),
            Phase::AwaitRoot => push(OPEN),
            Phase::AwaitEventOpenOrRootClose | Phase::AwaitEventOpenOrRootClose2 => {
                push(CLOSE);
                if self.can_open_event(state) {
                    push(OPEN);
                }
            }
            Phase::AwaitEnd => push(EOS),
            Phase::AwaitArgOpenOrEventClose => {
                push(CLOSE);
                if self.can_open_arg(state) {
                    push(OPEN);
                }
            }
            Phase::InTypeLabel | Phase::InRoleLabel => {
                let trie = if state.phase == Phase::InTypeLabel {
                    &self.tries.types
                } else {
                    self.active_role_trie(state)
                };
                trie.child_tokens(state.label_node).for_each(&mut push);
                // A complete label that another label extends: the span may
                // start here unless its first token would continue the label.
                if trie.label(state.label_node).is_some() {
                    let starts: Vec<&str> = if state.phase == Phase::InTypeLabel {
                        self.trigger_starts(state.trigger_cursor)
                            .map(|i| self.tokens[i].as_str())
                            .collect()
                    } else {
                        self.spans.child_tokens(SpanTrie::ROOT).collect()
                    };
                    for tok in starts {
                        if trie.child(state.label_node, tok).is_none() {
                            push(tok);
                        }
                    }
                }
            }
            Phase::InTriggerSpan | Phase::InArgSpan => {
                if state.phase == Phase::InTriggerSpan {
                    if state.partial_span.is_empty() {
                        self.trigger_starts(state.trigger_cursor)
                            .for_each(|i| push(&self.tokens[i]));
                    } else {
                        self.trigger_continuations(state)
                            .for_each(|i| push(&self.tokens[i]));
                    }
                } else {
                    self.spans.child_tokens(state.span_node).for_each(&mut push);
                }
                if !state.partial_span.is_empty() {
                    push(CLOSE);
                    if state.phase == Phase::InTriggerSpan && self.can_open_arg(state) {
                        push(OPEN);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Advances `state` by `token`, which must be a candidate.
    pub fn step(&self, state: &DecodeState, token: &str) -> Result<DecodeState, DecodeError> {
        if !self.candidate_vocab(state)?.contains(token) {
            return Err(DecodeError::IllegalToken {
                token: token.to_owned(),
                phase: state.phase,
            });
        }
        let mut next = state.clone();
        next.emitted.push(token.to_owned());
        match state.phase {
            Phase::Done => unreachable!("rejected by candidate_vocab"),
            Phase::AwaitRoot => {
                next.depth = 1;
                next.phase = Phase::AwaitEventOpenOrRootClose;
            }
            Phase::AwaitEventOpenOrRootClose | Phase::AwaitEventOpenOrRootClose2 => {
                if token == OPEN {
                    next.depth = 2;
                    next.phase = Phase::InTypeLabel;
                    next.partial_label.clear();
                    next.label_node = LabelTrie::ROOT;
                    next.current_type = None;
                } else {
                    next.depth = 0;
                    next.phase = Phase::AwaitEnd;
                }
            }
            Phase::AwaitEnd => next.phase = Phase::Done,
            Phase::InTypeLabel | Phase::InRoleLabel => {
                let in_type = state.phase == Phase::InTypeLabel;
                let trie = if in_type {
                    &self.tries.types
                } else {
                    self.active_role_trie(state)
                };
                match trie.child(state.label_node, token) {
                    Some(child) => {
                        next.partial_label.push(token.to_owned());
                        next.label_node = child;
                        if !trie.has_children(child) {
                            let label = trie.label(child).expect("trie leaves carry labels");
                            commit_label(&mut next, in_type, label);
                        }
                    }
                    None => {
                        // The span starts while the label sits on a complete
                        // node that has further children.
                        let label = trie.label(state.label_node).expect("checked by candidate_vocab");
                        commit_label(&mut next, in_type, label);
                        self.extend_span(&mut next, token);
                    }
                }
            }
            Phase::InTriggerSpan | Phase::InArgSpan => match token {
                CLOSE | OPEN if state.phase == Phase::InTriggerSpan => {
                    self.place_trigger(&mut next);
                    if token == CLOSE {
                        next.depth = 1;
                        next.phase = Phase::AwaitEventOpenOrRootClose2;
                    } else {
                        next.depth = 3;
                        next.phase = Phase::InRoleLabel;
                        next.partial_label.clear();
                        next.label_node = LabelTrie::ROOT;
                    }
                }
                CLOSE => {
                    next.partial_span.clear();
                    next.span_node = SpanTrie::ROOT;
                    next.depth = 2;
                    next.phase = Phase::AwaitArgOpenOrEventClose;
                }
                _ => self.extend_span(&mut next, token),
            },
            Phase::AwaitArgOpenOrEventClose => {
                if token == OPEN {
                    next.depth = 3;
                    next.phase = Phase::InRoleLabel;
                    next.partial_label.clear();
                    next.label_node = LabelTrie::ROOT;
                } else {
                    next.depth = 1;
                    next.phase = Phase::AwaitEventOpenOrRootClose2;
                }
            }
        }
        Ok(next)
    }
}

impl Constraints {
    fn extend_span(&self, state: &mut DecodeState, token: &str) {
        if state.phase == Phase::InTriggerSpan {
            let len = state.partial_span.len();
            state.span_starts = if len == 0 {
                self.trigger_starts(state.trigger_cursor)
                    .filter(|&i| self.tokens[i] == token)
                    .collect()
            } else {
                state
                    .span_starts
                    .iter()
                    .copied()
                    .filter(|&s| self.tokens.get(s + len).is_some_and(|t| t == token))
                    .collect()
            };
        }
        state.partial_span.push(token.to_owned());
        state.span_node = self
            .spans
            .child(state.span_node, token)
            .expect("candidate spans are input spans");
    }

    // Closes the trigger span at its first occurrence after the cursor.
    fn place_trigger(&self, state: &mut DecodeState) {
        let start = *state.span_starts.iter().min().expect("non-empty trigger");
        state.trigger_cursor = start + state.partial_span.len();
        state.partial_span.clear();
        state.span_starts.clear();
        state.span_node = SpanTrie::ROOT;
    }
}

fn commit_label(state: &mut DecodeState, in_type: bool, label: &str) {
    if in_type {
        state.current_type = Some(label.to_owned());
        state.phase = Phase::InTriggerSpan;
    } else {
        state.phase = Phase::InArgSpan;
    }
    state.partial_span.clear();
    state.span_starts.clear();
    state.span_node = SpanTrie::ROOT;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Greedy,
    Beam { width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeConfig {
    pub mode: DecodeMode,
    /// Bound on the whole output, both sentinels included.
    pub max_length: usize,
    pub constrained: bool,
    pub max_span_len: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            mode: DecodeMode::Greedy,
            max_length: 128,
            constrained: true,
            max_span_len: DEFAULT_MAX_SPAN_LEN,
        }
    }
}

impl DecodeConfig {
    pub fn greedy() -> Self {
        Self::default()
    }

    pub fn beam(width: usize) -> Self {
        DecodeConfig {
            mode: DecodeMode::Beam { width },
            ..Self::default()
        }
    }

    pub fn with_max_length(mut self, max_length: usize) -> Self {
        self.max_length = max_length;
        self
    }

    pub fn unconstrained(mut self) -> Self {
        self.constrained = false;
        self
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        if let DecodeMode::Beam { width: 0 } = self.mode {
            return Err(DecodeError::Config("beam width must be at least 1".into()));
        }
        if self.max_length < 4 {
            return Err(DecodeError::Config("max_length must be at least 4".into()));
        }
        if self.max_span_len == 0 {
            return Err(DecodeError::Config("max_span_len must be positive".into()));
        }
        Ok(())
    }
}

/// A decoded sequence and the log-probability of each emitted token
/// (the final entry belongs to `<eos>`).
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub seq: LinearizedSeq,
    pub step_log_probs: Vec<f64>,
}

impl DecodeOutput {
    pub fn log_prob(&self) -> f64 {
        self.step_log_probs.iter().sum()
    }
}

/// One partial output: automaton state (unused when unconstrained) plus score.
#[derive(Debug, Clone)]
struct Hypothesis {
    state: DecodeState,
    log_prob: f64,
    step_log_probs: Vec<f64>,
}

impl Hypothesis {
    fn done(&self, constrained: bool) -> bool {
        if constrained {
            self.state.is_done()
        } else {
            self.state.emitted.last().is_some_and(|t| t == EOS)
        }
    }

    fn extend(&self, constraints: &Constraints, token: &str, lp: f64, constrained: bool) -> Hypothesis {
        let state = if constrained {
            constraints.step(&self.state, token).expect("token is a candidate")
        } else {
            let mut s = self.state.clone();
            s.emitted.push(token.to_owned());
            s
        };
        let mut step_log_probs = self.step_log_probs.clone();
        step_log_probs.push(lp);
        Hypothesis {
            state,
            log_prob: self.log_prob + lp,
            step_log_probs,
        }
    }

    fn output(self) -> DecodeOutput {
        DecodeOutput {
            seq: self.state.sequence(),
            step_log_probs: self.step_log_probs,
        }
    }
}

/// Higher score first; ties go to the lexicographically smaller sequence.
fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.log_prob
        .total_cmp(&a.log_prob)
        .then_with(|| a.state.emitted.cmp(&b.state.emitted))
}

fn expansions<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    constraints: &Constraints,
    hyp: &Hypothesis,
    constrained: bool,
) -> Result<Vec<(String, f64)>, DecodeError> {
    let step = hyp.state.emitted.len();
    let dist = next_distribution(scorer, input, &hyp.state.prefix())
        .map_err(|source| DecodeError::Scorer { step, source })?;
    let candidates: Vec<String> = if constrained {
        constraints.candidate_vocab(&hyp.state)?.into_iter().collect()
    } else {
        let mut all: Vec<String> = dist.support().map(str::to_owned).collect();
        all.sort();
        all
    };
    Ok(candidates
        .into_iter()
        .map(|tok| {
            let lp = dist.log_prob(&tok);
            (tok, lp)
        })
        .collect())
}

/// Decodes one sentence under `config`.
pub fn constrained_decode<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    schema: &EventSchema,
    config: &DecodeConfig,
) -> Result<DecodeOutput, DecodeError> {
    config.validate()?;
    let constraints = Constraints::new(schema, input, config.max_span_len);
    decode_with(scorer, input, &constraints, config)
}

/// [`constrained_decode`] with prebuilt constraints.
pub fn decode_with<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    constraints: &Constraints,
    config: &DecodeConfig,
) -> Result<DecodeOutput, DecodeError> {
    config.validate()?;
    match config.mode {
        DecodeMode::Greedy => greedy(scorer, input, constraints, config),
        DecodeMode::Beam { width } => beam(scorer, input, constraints, config, width),
    }
}

// Budget for tokens after <bos>.
fn step_budget(config: &DecodeConfig) -> usize {
    config.max_length - 1
}

fn greedy<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    constraints: &Constraints,
    config: &DecodeConfig,
) -> Result<DecodeOutput, DecodeError> {
    let mut hyp = Hypothesis {
        state: DecodeState::new(),
        log_prob: 0.0,
        step_log_probs: Vec::new(),
    };
    for _ in 0..step_budget(config) {
        // Candidates arrive sorted, so keeping the first maximum breaks ties
        // toward the lexicographically smallest token.
        let mut best: Option<(String, f64)> = None;
        for (tok, lp) in expansions(scorer, input, constraints, &hyp, config.constrained)? {
            if best.as_ref().is_none_or(|(_, b)| lp > *b) {
                best = Some((tok, lp));
            }
        }
        let (tok, lp) = best.ok_or(DecodeError::Scorer {
            step: hyp.state.emitted.len(),
            source: ScoreError::Empty,
        })?;
        hyp = hyp.extend(constraints, &tok, lp, config.constrained);
        if hyp.done(config.constrained) {
            return Ok(hyp.output());
        }
    }
    Err(DecodeError::MaxLength {
        max_length: config.max_length,
    })
}

fn beam<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    constraints: &Constraints,
    config: &DecodeConfig,
    width: usize,
) -> Result<DecodeOutput, DecodeError> {
    let mut active = vec![Hypothesis {
        state: DecodeState::new(),
        log_prob: 0.0,
        step_log_probs: Vec::new(),
    }];
    let mut best_finished: Option<Hypothesis> = None;
    for _ in 0..step_budget(config) {
        let mut pool = Vec::new();
        for hyp in &active {
            for (tok, lp) in expansions(scorer, input, constraints, hyp, config.constrained)? {
                pool.push(hyp.extend(constraints, &tok, lp, config.constrained));
            }
        }
        pool.sort_by(rank);
        pool.truncate(width);
        active.clear();
        for hyp in pool {
            if hyp.done(config.constrained) {
                let better = best_finished
                    .as_ref()
                    .is_none_or(|b| rank(&hyp, b) == Ordering::Less);
                if better {
                    best_finished = Some(hyp);
                }
            } else {
                active.push(hyp);
            }
        }
        // Log-probabilities never increase, so no active hypothesis can
        // overtake a finished one that already scores at least as high.
        let settled = match (&best_finished, active.first()) {
            (_, None) => true,
            (Some(done), Some(top)) => done.log_prob >= top.log_prob,
            (None, Some(_)) => false,
        };
        if settled {
            break;
        }
    }
    best_finished
        .map(Hypothesis::output)
        .ok_or(DecodeError::MaxLength {
            max_length: config.max_length,
        })
}

/// Decodes every input independently, in parallel, preserving order.
pub fn decode_batch<S: Scorer + Sync + ?Sized>(
    scorer: &S,
    inputs: &[TokenizedInput],
    schema: &EventSchema,
    config: &DecodeConfig,
) -> Vec<Result<DecodeOutput, DecodeError>> {
    if let Err(e) = config.validate() {
        return inputs.iter().map(|_| Err(e.clone())).collect();
    }
    let tries = SchemaTries::new(schema);
    inputs
        .par_iter()
        .map(|input| {
            let constraints = Constraints::from_parts(tries.clone(), input, config.max_span_len);
            decode_with(scorer, input, &constraints, config)
        })
        .collect()
}

/// Negative log-likelihood of a target sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Nll {
    Finite(f64),
    /// Some target token had probability zero.
    Infinite { position: usize, token: String },
}

impl Nll {
    pub fn value(&self) -> f64 {
        match self {
            Nll::Finite(v) => *v,
            Nll::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Nll::Finite(_))
    }
}

/// `-Σ ln p(y_i | y_<i, x)` over the target body plus `<eos>`.
pub fn sequence_nll<S: Scorer + ?Sized>(
    scorer: &S,
    input: &TokenizedInput,
    target: &LinearizedSeq,
) -> Result<Nll, ScoreError> {
    let mut prefix = vec![BOS.to_owned()];
    let mut total = 0.0;
    for (position, token) in target.decoder_targets().into_iter().enumerate() {
        let lp = next_distribution(scorer, input, &prefix)?.log_prob(&token);
        if lp == f64::NEG_INFINITY {
            return Ok(Nll::Infinite { position, token });
        }
        total -= lp;
        prefix.push(token);
    }
    Ok(Nll::Finite(total.max(0.0)))
}
