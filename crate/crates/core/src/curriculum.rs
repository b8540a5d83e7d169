//! Substructure targets for curriculum training, a synthetic corpus
//! generator, and a two-regime trainer for the n-gram scorer.
//!
//! A substructure is a flat `( label span )` unit: an event type with its
//! trigger, or a role with its argument. Units follow linearization order
//! (each trigger, then its arguments).
//!
//! Epoch counts only act as pass weights here: the full pass counts with
//! weight 1 and the substructure pass with `substructure_epochs /
//! full_epochs`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{
    canonical_order, is_reserved, linearize, CodecError, Cursor, EventRecord, LinearizedSeq, Mention,
    ParseError, ParseErrorKind, CLOSE, OPEN,
};
use crate::dataset::Sentence;
use crate::decoder::{sequence_nll, Nll, ScoreError};
use crate::schema::{tokenize_label, EventSchema, LabelTrie, WordSplit};
use crate::scorers::{train_ngram, NgramConfig, NgramScorer, ScorerError};
use crate::span_index::{tokenize, TokenizedInput};

/// How substructure units become training targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SubstructureMode {
    /// One target per sentence holding every unit under a root.
    #[default]
    Concatenated,
    /// One target per unit, each wrapped in its own root.
    PerUnit,
}

/// The flat `(label, span)` units of `records`, in linearization order.
pub fn substructure_units(records: &[EventRecord]) -> Vec<(String, Mention)> {
    let mut units = Vec::new();
    for rec in canonical_order(records) {
        units.push((rec.event_type.clone(), rec.trigger.clone()));
        for arg in rec.args {
            units.push((arg.role, arg.mention));
        }
    }
    units
}

fn render_unit(out: &mut Vec<String>, label: &str, mention: &Mention) {
    out.push(OPEN.to_owned());
    out.extend(tokenize_label(label));
    out.extend(mention.tokens.iter().cloned());
    out.push(CLOSE.to_owned());
}

fn rooted(units: &[(String, Mention)]) -> LinearizedSeq {
    let mut tokens = vec![OPEN.to_owned()];
    for (label, mention) in units {
        render_unit(&mut tokens, label, mention);
    }
    tokens.push(CLOSE.to_owned());
    LinearizedSeq::new(tokens)
}

/// Builds substructure training pairs for one sentence.
///
/// Concatenated mode always yields exactly one pair (`( )` when there are no
/// events); per-unit mode yields one pair per unit.
pub fn extract_substructures(
    input: &TokenizedInput,
    records: &[EventRecord],
    mode: SubstructureMode,
) -> Vec<(TokenizedInput, LinearizedSeq)> {
    let units = substructure_units(records);
    match mode {
        SubstructureMode::Concatenated => vec![(input.clone(), rooted(&units))],
        SubstructureMode::PerUnit => units
            .iter()
            .map(|u| (input.clone(), rooted(std::slice::from_ref(u))))
            .collect(),
    }
}

/// Trie over every type and role name of `schema`.
pub fn unit_label_trie(schema: &EventSchema) -> LabelTrie {
    let mut labels: BTreeSet<&str> = schema.event_types().collect();
    labels.extend(schema.all_roles());
    LabelTrie::from_labels(labels, &WordSplit)
}

/// Parses a substructure target: a root holding flat `( label span )` units,
/// where a label is any type or role of the schema.
pub fn parse_substructures(seq: &LinearizedSeq, schema: &EventSchema) -> Result<Vec<(String, Mention)>, ParseError> {
    let trie = unit_label_trie(schema);
    let mut cur = Cursor::new(seq.tokens());
    cur.expect(OPEN)?;
    let mut units = Vec::new();
    loop {
        match cur.peek() {
            Some(CLOSE) => {
                cur.expect(CLOSE)?;
                break;
            }
            Some(OPEN) => {
                cur.expect(OPEN)?;
                let (start, consumed, label) = cur.read_label(&trie);
                let Some(label) = label else {
                    let found = if consumed.is_empty() {
                        cur.peek().unwrap_or_default().to_owned()
                    } else {
                        consumed.join(" ")
                    };
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::UnknownType(found),
                    });
                };
                let mention = cur.read_span()?;
                cur.expect(CLOSE)?;
                units.push((label, mention));
            }
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
    Ok(units)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("empty vocabulary")]
    EmptyVocab,
    #[error("vocabulary word {0:?} is not a single plain token")]
    InvalidWord(String),
    #[error("schema has no event types")]
    EmptySchema,
    #[error("invalid synthetic config: {0}")]
    Config(String),
}

/// Shape parameters of [`generate_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_sentences: usize,
    /// Probability of each of the `max_events` event slots being filled.
    pub event_rate: f64,
    pub max_events: usize,
    /// Probability that a permitted role gets an argument.
    pub arg_rate: f64,
    /// Longest argument mention, in tokens.
    pub max_mention_len: usize,
    /// Filler words per sentence, drawn uniformly from this range.
    pub filler: (usize, usize),
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_sentences: 100,
            event_rate: 0.5,
            max_events: 3,
            arg_rate: 0.5,
            max_mention_len: 2,
            filler: (3, 8),
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let rate = |x: f64| (0.0..=1.0).contains(&x);
        if !rate(self.event_rate) || !rate(self.arg_rate) {
            return Err(SynthError::Config("rates must lie in [0, 1]".into()));
        }
        if self.max_mention_len == 0 {
            return Err(SynthError::Config("max_mention_len must be at least 1".into()));
        }
        if self.filler.0 > self.filler.1 {
            return Err(SynthError::Config("filler range is reversed".into()));
        }
        Ok(())
    }
}

/// A small built-in word list for synthetic sentences.
pub const BUILTIN_VOCAB: &[&str] = &[
    "able", "acid", "aged", "also", "area", "army", "away", "baby", "back", "ball", "band", "bank",
    "base", "bath", "bear", "beat", "been", "beer", "bell", "belt", "best", "bill", "bird", "blow",
    "blue", "boat", "body", "bomb", "bond", "bone", "book", "boom", "born", "boss", "both", "bowl",
    "bulk", "burn", "bush", "busy", "cake", "call", "calm", "came", "camp", "card", "care", "case",
    "cash", "cast", "cell", "chat", "chip", "city", "club", "coal", "coat", "code", "cold", "come",
    "cook", "cool", "cope", "copy", "core", "cost", "crew", "crop", "dark", "data", "date", "dawn",
    "days", "dead", "deal", "dean", "dear", "debt", "deep", "deny", "desk", "dial", "diet", "disc",
    "disk", "does", "done", "door", "dose", "down", "draw", "drew", "drop", "drug", "dual", "duke",
    "dust", "duty", "each", "earn", "ease", "east", "easy", "edge", "else", "even", "ever", "evil",
    "exit", "face", "fact", "fail", "fair", "fall", "farm", "fast", "fate", "fear", "feed", "feel",
    "feet", "fell", "felt", "file", "fill", "film", "find", "fine", "fire", "firm", "fish", "five",
    "flat", "flow", "food", "foot", "ford", "form", "fort", "four", "free", "from", "fuel", "full",
    "fund", "gain", "game", "gate", "gave", "gear", "gene", "gift", "girl", "give", "glad", "goal",
    "goes", "gold", "golf", "gone", "good", "gray", "grew", "grey", "grow", "gulf", "hair", "half",
    "hall", "hand", "hang", "hard", "harm", "hate", "have", "head", "hear", "heat", "held", "hell",
    "help", "here", "hero", "high", "hill", "hire", "hold", "hole", "holy", "home", "hope", "host",
    "hour", "huge", "hung", "hunt", "hurt", "idea", "inch", "into", "iron", "item", "jack", "jane",
    "jean", "john", "join", "jump", "jury", "just", "keen", "keep", "kent", "kept", "kick", "kill",
];

/// Generates `config.n_sentences` sentences with planted, schema-valid
/// events. Mention words are distinct within a sentence and never reused as
/// filler, so every mention occurs exactly once. Words that coincide with a
/// schema label token are skipped. Deterministic for a given seed.
pub fn generate_synthetic<S: AsRef<str>>(
    schema: &EventSchema,
    vocab: &[S],
    seed: u64,
    config: &SynthConfig,
) -> Result<Vec<Sentence>, SynthError> {
    config.validate()?;
    if schema.is_empty() {
        return Err(SynthError::EmptySchema);
    }
    if vocab.is_empty() {
        return Err(SynthError::EmptyVocab);
    }
    for w in vocab {
        let w = w.as_ref();
        let toks = tokenize(w);
        if toks.len() != 1 || toks.tokens()[0] != w || is_reserved(w) {
            return Err(SynthError::InvalidWord(w.to_owned()));
        }
    }
    let labels: BTreeSet<String> = schema.label_tokens().into_iter().collect();
    let words: Vec<&str> = vocab
        .iter()
        .map(AsRef::as_ref)
        .filter(|w| !labels.contains(*w))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if words.is_empty() {
        return Err(SynthError::EmptyVocab);
    }
    let types: Vec<&str> = schema.event_types().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(config.n_sentences);
    for i in 0..config.n_sentences {
        out.push(synth_sentence(schema, &types, &words, config, &mut rng, format!("s{i}")));
    }
    Ok(out)
}

enum Piece {
    Word(String),
    Trigger(usize),
    Arg(usize, usize),
}

type PlannedEvent = (String, Vec<String>, Vec<(String, Vec<String>)>);

fn synth_sentence(
    schema: &EventSchema,
    types: &[&str],
    words: &[&str],
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
    id: String,
) -> Sentence {
    let mut pool: Vec<&str> = words.to_vec();
    pool.shuffle(rng);
    let mut take = |n: usize| -> Option<Vec<String>> {
        (pool.len() >= n).then(|| pool.split_off(pool.len() - n).into_iter().map(str::to_owned).collect())
    };

    // Events as (type, trigger words, [(role, words)]), then laid out.
    let mut events: Vec<PlannedEvent> = Vec::new();
    for _ in 0..config.max_events {
        if !rng.random_bool(config.event_rate) {
            continue;
        }
        let ty = *types.choose(rng).expect("schema is non-empty");
        let Some(trigger) = take(1) else { break };
        let mut args = Vec::new();
        for role in schema.roles(ty).unwrap_or_default() {
            if rng.random_bool(config.arg_rate) {
                let len = rng.random_range(1..=config.max_mention_len);
                if let Some(m) = take(len) {
                    args.push((role.clone(), m));
                }
            }
        }
        events.push((ty.to_owned(), trigger, args));
    }

    let mut pieces: Vec<Piece> = Vec::new();
    for (e, (_, _, args)) in events.iter().enumerate() {
        pieces.push(Piece::Trigger(e));
        pieces.extend((0..args.len()).map(|a| Piece::Arg(e, a)));
    }
    let fillers = rng.random_range(config.filler.0..=config.filler.1);
    let mention_words: BTreeSet<&String> = events
        .iter()
        .flat_map(|(_, t, args)| t.iter().chain(args.iter().flat_map(|(_, m)| m.iter())))
        .collect();
    let filler_words: Vec<&str> = words.iter().copied().filter(|w| !mention_words.contains(&w.to_string())).collect();
    for _ in 0..fillers {
        if let Some(w) = filler_words.choose(rng) {
            pieces.push(Piece::Word((*w).to_owned()));
        }
    }
    pieces.shuffle(rng);

    let mut tokens: Vec<String> = Vec::new();
    let mut trigger_at = vec![0; events.len()];
    let mut arg_at: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for piece in &pieces {
        match piece {
            Piece::Word(w) => tokens.push(w.clone()),
            Piece::Trigger(e) => {
                trigger_at[*e] = tokens.len();
                tokens.extend(events[*e].1.iter().cloned());
            }
            Piece::Arg(e, a) => {
                arg_at.insert((*e, *a), tokens.len());
                tokens.extend(events[*e].2[*a].1.iter().cloned());
            }
        }
    }
    let text = if tokens.is_empty() {
        String::new()
    } else {
        format!("{}.", tokens.join(" "))
    };

    let records: Vec<EventRecord> = events
        .iter()
        .enumerate()
        .map(|(e, (ty, trigger, args))| EventRecord {
            event_type: ty.clone(),
            trigger: Mention::at(trigger.iter().cloned(), trigger_at[e]),
            args: args
                .iter()
                .enumerate()
                .map(|(a, (role, m))| crate::codec::Argument {
                    role: role.clone(),
                    mention: Mention::at(m.iter().cloned(), arg_at[&(e, a)]),
                })
                .collect(),
        })
        .collect();
    let input = tokenize(&text);
    let events = canonical_order(&records)
        .into_iter()
        .map(|r| with_char_offsets(r, &input))
        .collect();
    Sentence { id, text, events }
}

fn with_char_offsets(mut rec: EventRecord, input: &TokenizedInput) -> EventRecord {
    let fix = |m: &mut Mention| {
        m.char_start = m
            .token_span()
            .and_then(|(s, e)| input.char_range(s, e))
            .map(|r| r.0);
    };
    fix(&mut rec.trigger);
    rec.args.iter_mut().for_each(|a| fix(&mut a.mention));
    rec
}

/// Corpus counts in the shape of a dataset statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sentences: usize,
    pub events: usize,
    pub arguments: usize,
    pub event_types: usize,
    pub roles: usize,
}

impl DatasetStats {
    pub fn of(sentences: &[Sentence]) -> Self {
        let mut types = BTreeSet::new();
        let mut roles = BTreeSet::new();
        let mut stats = DatasetStats {
            sentences: sentences.len(),
            ..Default::default()
        };
        for ev in sentences.iter().flat_map(|s| &s.events) {
            stats.events += 1;
            stats.arguments += ev.args.len();
            types.insert(ev.event_type.as_str());
            roles.extend(ev.args.iter().map(|a| a.role.as_str()));
        }
        stats.event_types = types.len();
        stats.roles = roles.len();
        stats
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>8}", "#Sents", self.sentences)?;
        writeln!(f, "{:<12}{:>8}", "#Events", self.events)?;
        writeln!(f, "{:<12}{:>8}", "#Args", self.arguments)?;
        writeln!(f, "{:<12}{:>8}", "#Types", self.event_types)?;
        write!(f, "{:<12}{:>8}", "#Roles", self.roles)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurriculumError {
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("sentence {id:?}: {source}")]
    Codec {
        id: String,
        #[source]
        source: CodecError,
    },
    #[error("need at least two sentences to hold one out, got {0}")]
    TooSmall(usize),
    #[error("held-out fraction must lie in (0, 1), got {0}")]
    HeldOut(f64),
    #[error("epoch counts must be positive")]
    Epochs,
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    pub ngram: NgramConfig,
    pub substructure_epochs: u32,
    pub full_epochs: u32,
    pub heldout_fraction: f64,
    pub seed: u64,
    pub mode: SubstructureMode,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            ngram: NgramConfig::default(),
            substructure_epochs: 5,
            full_epochs: 30,
            heldout_fraction: 0.1,
            seed: 0,
            mode: SubstructureMode::Concatenated,
        }
    }
}

impl CurriculumConfig {
    /// Count weight of the substructure pass relative to the full pass.
    pub fn substructure_weight(&self) -> f64 {
        f64::from(self.substructure_epochs) / f64::from(self.full_epochs)
    }
}

/// Total held-out NLL and its per-token average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeldOutNll {
    pub total: f64,
    pub per_token: f64,
    pub tokens: usize,
}

/// Both trained scorers, their held-out scores and the additivity check.
#[derive(Debug, Clone)]
pub struct CurriculumOutcome {
    pub curriculum: NgramScorer,
    pub direct: NgramScorer,
    /// Counts of the substructure pass alone, at its pass weight.
    pub substructure_pass: NgramScorer,
    pub train_ids: Vec<String>,
    pub heldout_ids: Vec<String>,
    pub heldout_curriculum: HeldOutNll,
    pub heldout_direct: HeldOutNll,
    /// Largest `|curriculum - (substructure pass + full pass)|` over all
    /// count cells.
    pub additivity_max_diff: f64,
}

impl CurriculumOutcome {
    /// Count tables add up to within floating-point accumulation error.
    pub fn additivity_holds(&self) -> bool {
        self.additivity_max_diff <= 1e-9
    }
}

impl fmt::Display for CurriculumOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "train {} / held-out {} sentences ({} target tokens)",
            self.train_ids.len(),
            self.heldout_ids.len(),
            self.heldout_direct.tokens
        )?;
        writeln!(f, "{:<12}{:>14}{:>12}", "regime", "NLL", "per-token")?;
        for (name, nll) in [("curriculum", &self.heldout_curriculum), ("direct", &self.heldout_direct)] {
            writeln!(f, "{:<12}{:>14.4}{:>12.4}", name, nll.total, nll.per_token)?;
        }
        write!(f, "count additivity max diff: {:e}", self.additivity_max_diff)
    }
}

/// Splits sentence indices into (train, held-out) with a seeded shuffle.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held = ((n as f64 * fraction).ceil() as usize).clamp(1, n.saturating_sub(1));
    let mut heldout = idx.split_off(n - held);
    idx.sort_unstable();
    heldout.sort_unstable();
    (idx, heldout)
}

fn full_target(s: &Sentence, schema: &EventSchema) -> Result<LinearizedSeq, CurriculumError> {
    linearize(&s.events, Some(schema)).map_err(|source| CurriculumError::Codec {
        id: s.id.clone(),
        source,
    })
}

fn max_table_diff(a: &NgramScorer, b: &NgramScorer, c: &NgramScorer) -> f64 {
    let cell = |m: &NgramScorer, k: usize, ctx: &str, tok: &str| {
        m.counts()[k].get(ctx).and_then(|r| r.get(tok)).copied().unwrap_or(0.0)
    };
    let mut worst: f64 = 0.0;
    for k in 0..a.counts().len() {
        let keys: BTreeSet<(&str, &str)> = [a, b, c]
            .iter()
            .flat_map(|m| {
                m.counts()[k]
                    .iter()
                    .flat_map(|(ctx, row)| row.keys().map(move |t| (ctx.as_str(), t.as_str())))
            })
            .collect();
        for (ctx, tok) in keys {
            let d = (cell(a, k, ctx, tok) - cell(b, k, ctx, tok) - cell(c, k, ctx, tok)).abs();
            worst = worst.max(d);
        }
    }
    worst
}

fn heldout_nll(
    scorer: &NgramScorer,
    pairs: &[(TokenizedInput, LinearizedSeq)],
) -> Result<HeldOutNll, CurriculumError> {
    let nlls: Vec<Result<Nll, ScoreError>> = pairs
        .par_iter()
        .map(|(input, target)| sequence_nll(scorer, input, target))
        .collect();
    let mut total = 0.0;
    for nll in nlls {
        total += nll?.value();
    }
    let tokens: usize = pairs.iter().map(|(_, t)| t.len() + 1).sum();
    Ok(HeldOutNll {
        total,
        per_token: total / tokens as f64,
        tokens,
    })
}

/// Trains the curriculum and direct regimes on a seeded train split and
/// scores both on the held-out full targets.
///
/// The direct scorer is [`train_ngram`] on the full training targets. The
/// curriculum scorer counts the substructure targets at the substructure
/// pass weight, then the full targets at weight 1. Both vocabularies are
/// extended with the schema's label tokens so that held-out targets using
/// labels unseen in training keep a finite NLL.
pub fn curriculum_train(
    corpus: &[Sentence],
    schema: &EventSchema,
    config: &CurriculumConfig,
) -> Result<CurriculumOutcome, CurriculumError> {
    if corpus.len() < 2 {
        return Err(CurriculumError::TooSmall(corpus.len()));
    }
    if !(config.heldout_fraction > 0.0 && config.heldout_fraction < 1.0) {
        return Err(CurriculumError::HeldOut(config.heldout_fraction));
    }
    if config.substructure_epochs == 0 || config.full_epochs == 0 {
        return Err(CurriculumError::Epochs);
    }
    let (train_idx, held_idx) = split_indices(corpus.len(), config.heldout_fraction, config.seed);
    let pairs = |idx: &[usize]| -> Result<Vec<(TokenizedInput, LinearizedSeq)>, CurriculumError> {
        idx.iter()
            .map(|&i| Ok((corpus[i].input(), full_target(&corpus[i], schema)?)))
            .collect()
    };
    let train = pairs(&train_idx)?;
    let heldout = pairs(&held_idx)?;
    let subs: Vec<LinearizedSeq> = train_idx
        .par_iter()
        .flat_map_iter(|&i| {
            let s = &corpus[i];
            extract_substructures(&s.input(), &s.events, config.mode)
                .into_iter()
                .map(|(_, seq)| seq)
        })
        .collect();

    let labels = schema.label_tokens();
    let mut direct = train_ngram(&train, config.ngram)?;
    direct.extend_vocab(labels.iter().cloned());

    let weight = config.substructure_weight();
    let mut curriculum = NgramScorer::empty(config.ngram)?;
    curriculum.add_corpus(&subs, weight);
    curriculum.add_corpus(train.iter().map(|(_, s)| s), 1.0);
    curriculum.extend_vocab(labels.iter().cloned());

    let mut substructure_pass = NgramScorer::empty(config.ngram)?;
    substructure_pass.add_corpus(&subs, weight);
    let additivity_max_diff = max_table_diff(&curriculum, &substructure_pass, &direct);

    Ok(CurriculumOutcome {
        heldout_curriculum: heldout_nll(&curriculum, &heldout)?,
        heldout_direct: heldout_nll(&direct, &heldout)?,
        curriculum,
        direct,
        substructure_pass,
        train_ids: train_idx.iter().map(|&i| corpus[i].id.clone()).collect(),
        heldout_ids: held_idx.iter().map(|&i| corpus[i].id.clone()).collect(),
        additivity_max_diff,
    })
}
