//! Desk-scale scorers standing in for a trained sequence-to-sequence model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{is_reserved, LinearizedSeq, BOS, CLOSE, EOS, OPEN};
use crate::decoder::{output_vocabulary, Scorer, Scores};
use crate::schema::EventSchema;
use crate::span_index::TokenizedInput;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScorerError {
    #[error("empty vocabulary")]
    EmptyVocabulary,
    #[error("smoothing mass {0} outside [0, 1)")]
    Epsilon(f64),
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("invalid n-gram hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("scorer artifact: {0}")]
    Artifact(String),
}

/// Assigns the same score to every token of a fixed vocabulary.
#[derive(Debug, Clone)]
pub struct UniformScorer {
    vocab: Vec<String>,
}

impl UniformScorer {
    pub fn new(vocab: Vec<String>) -> Result<Self, ScorerError> {
        let vocab: Vec<String> = vocab.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if vocab.is_empty() {
            return Err(ScorerError::EmptyVocabulary);
        }
        Ok(UniformScorer { vocab })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }
}

impl Scorer for UniformScorer {
    fn next_scores(&self, _: &TokenizedInput, _: &[String]) -> Scores {
        self.vocab.iter().map(|t| (t.clone(), 0.0)).collect()
    }
}

/// Replays a target sequence: at step `i` the `i`-th target token gets
/// probability `1 - ε` and the rest of the vocabulary shares `ε`. Past the
/// end of the target it is uniform.
#[derive(Debug, Clone)]
pub struct OracleScorer {
    targets: Vec<String>,
    epsilon: f64,
    vocab: Vec<String>,
}

impl OracleScorer {
    pub fn new(target: &LinearizedSeq, epsilon: f64, vocab: Vec<String>) -> Result<Self, ScorerError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(ScorerError::Epsilon(epsilon));
        }
        let targets = target.decoder_targets();
        let mut all: BTreeSet<String> = vocab.into_iter().collect();
        all.extend(targets.iter().cloned());
        Ok(OracleScorer {
            targets,
            epsilon,
            vocab: all.into_iter().collect(),
        })
    }

    /// Oracle over the decoder's output vocabulary for `input`.
    pub fn for_input(
        target: &LinearizedSeq,
        epsilon: f64,
        schema: &EventSchema,
        input: &TokenizedInput,
    ) -> Result<Self, ScorerError> {
        Self::new(target, epsilon, output_vocabulary(schema, input))
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }
}

impl Scorer for OracleScorer {
    fn next_scores(&self, _: &TokenizedInput, prefix: &[String]) -> Scores {
        let step = prefix.len().saturating_sub(1);
        let Some(target) = self.targets.get(step) else {
            return self.vocab.iter().map(|t| (t.clone(), 0.0)).collect();
        };
        let others = self.vocab.len() - 1;
        if self.epsilon == 0.0 || others == 0 {
            return vec![(target.clone(), 0.0)];
        }
        let hit = (1.0 - self.epsilon).ln();
        let miss = (self.epsilon / others as f64).ln();
        self.vocab
            .iter()
            .map(|t| (t.clone(), if t == target { hit } else { miss }))
            .collect()
    }
}

/// A set of oracles keyed by input text, so a whole dataset can be decoded
/// with one scorer.
#[derive(Debug, Clone, Default)]
pub struct OracleLookup {
    oracles: HashMap<String, OracleScorer>,
}

impl OracleLookup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, input: &TokenizedInput, oracle: OracleScorer) {
        self.oracles.insert(input.text().to_owned(), oracle);
    }
}

impl Scorer for OracleLookup {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores {
        match self.oracles.get(input.text()) {
            Some(oracle) => oracle.next_scores(input, prefix),
            None => Vec::new(),
        }
    }
}

/// Scores drawn uniformly from `[0, 1)`, fixed per `(seed, input, prefix)`.
#[derive(Debug, Clone)]
pub struct RandomScorer {
    seed: u64,
    label_tokens: Vec<String>,
}

impl RandomScorer {
    pub fn new(seed: u64, schema: &EventSchema) -> Self {
        RandomScorer {
            seed,
            label_tokens: schema.label_tokens(),
        }
    }
}

impl Scorer for RandomScorer {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores {
        let mut vocab: BTreeSet<&str> = [OPEN, CLOSE, EOS].into_iter().collect();
        vocab.extend(self.label_tokens.iter().map(String::as_str));
        vocab.extend(input.tokens().iter().map(String::as_str).filter(|t| !is_reserved(t)));
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.seed.hash(&mut hasher);
        input.tokens().hash(&mut hasher);
        prefix.hash(&mut hasher);
        let mut rng = ChaCha8Rng::seed_from_u64(hasher.finish());
        vocab
            .into_iter()
            .map(|t| (t.to_owned(), rng.random::<f64>()))
            .collect()
    }
}

/// Hyperparameters of [`NgramScorer`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgramConfig {
    pub order: usize,
    pub alpha: f64,
    pub copy_boost: f64,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: 3,
            alpha: 0.1,
            copy_boost: 4.0,
        }
    }
}

impl NgramConfig {
    fn validate(&self) -> Result<(), ScorerError> {
        if self.order == 0 {
            return Err(ScorerError::Hyperparameter("order must be at least 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ScorerError::Hyperparameter("alpha must be positive".into()));
        }
        if !(self.copy_boost.is_finite() && self.copy_boost >= 1.0) {
            return Err(ScorerError::Hyperparameter("copy_boost must be at least 1".into()));
        }
        Ok(())
    }
}

const ARTIFACT_FORMAT: &str = "structgen-ngram";
const ARTIFACT_VERSION: u32 = 1;

/// Count-based n-gram model over linearized targets with additive smoothing
/// and backoff to shorter contexts when a context was never seen.
///
/// `p(w | h) = (c(h, w) + α) / (c(h) + α V)` at the longest context `h` with
/// `c(h) > 0`, where `V` is the training vocabulary plus the input tokens.
/// Tokens present in the input sentence are then multiplied by `copy_boost`
/// and the distribution renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramScorer {
    format: String,
    version: u32,
    config: NgramConfig,
    vocab: BTreeSet<String>,
    /// `counts[k]` maps a space-joined context of `k` tokens to next-token
    /// counts. Counts are weights: curriculum passes may be fractional.
    counts: Vec<BTreeMap<String, BTreeMap<String, f64>>>,
}

/// Trains an n-gram scorer on the target side of `corpus`.
pub fn train_ngram(
    corpus: &[(TokenizedInput, LinearizedSeq)],
    config: NgramConfig,
) -> Result<NgramScorer, ScorerError> {
    let mut model = NgramScorer::empty(config)?;
    if corpus.is_empty() {
        return Err(ScorerError::EmptyCorpus);
    }
    model.add_corpus(corpus.iter().map(|(_, seq)| seq), 1.0);
    Ok(model)
}

impl NgramScorer {
    /// A model with no counts yet.
    pub fn empty(config: NgramConfig) -> Result<Self, ScorerError> {
        config.validate()?;
        Ok(NgramScorer {
            format: ARTIFACT_FORMAT.to_owned(),
            version: ARTIFACT_VERSION,
            config,
            vocab: [OPEN, CLOSE, EOS].iter().map(|s| s.to_string()).collect(),
            counts: vec![BTreeMap::new(); config.order],
        })
    }

    pub fn config(&self) -> NgramConfig {
        self.config
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    /// Adds tokens to the vocabulary without counting them.
    pub fn extend_vocab<I: IntoIterator<Item = String>>(&mut self, tokens: I) {
        self.vocab.extend(tokens);
    }

    /// Counts every target in `seqs`, each occurrence weighted by `weight`.
    pub fn add_corpus<'a, I>(&mut self, seqs: I, weight: f64)
    where
        I: IntoIterator<Item = &'a LinearizedSeq>,
    {
        let n = self.config.order;
        for seq in seqs {
            let mut history: Vec<String> = vec![BOS.to_owned(); n - 1];
            for tok in seq.decoder_targets() {
                self.vocab.insert(tok.clone());
                for k in 0..n {
                    let ctx = history[history.len() - k..].join(" ");
                    *self.counts[k]
                        .entry(ctx)
                        .or_default()
                        .entry(tok.clone())
                        .or_insert(0.0) += weight;
                }
                history.push(tok);
            }
        }
    }

    /// Count tables, one per context length.
    pub fn counts(&self) -> &[BTreeMap<String, BTreeMap<String, f64>>] {
        &self.counts
    }

    /// Last `k` tokens of the padded history for a decoder prefix.
    fn context(&self, prefix: &[String], k: usize) -> String {
        let body = match prefix.first() {
            Some(first) if first == BOS => &prefix[1..],
            _ => prefix,
        };
        let mut history: Vec<&str> = vec![BOS; self.config.order - 1];
        history.extend(body.iter().map(String::as_str));
        history[history.len() - k..].join(" ")
    }

    fn query_vocab<'a>(&'a self, input: &'a TokenizedInput) -> BTreeSet<&'a str> {
        let mut vocab: BTreeSet<&str> = self.vocab.iter().map(String::as_str).collect();
        vocab.extend(input.tokens().iter().map(String::as_str).filter(|t| !is_reserved(t)));
        vocab
    }

    /// The longest context length whose context has been observed.
    pub fn backoff_order(&self, prefix: &[String]) -> usize {
        (1..self.config.order)
            .rev()
            .find(|&k| self.counts[k].contains_key(&self.context(prefix, k)))
            .unwrap_or(0)
    }

    /// Smoothed probabilities at a fixed context length `k`, before the copy
    /// boost. Unseen contexts give the uniform distribution.
    pub fn distribution_at(&self, input: &TokenizedInput, prefix: &[String], k: usize) -> BTreeMap<String, f64> {
        let vocab = self.query_vocab(input);
        let v = vocab.len() as f64;
        let alpha = self.config.alpha;
        let row = self.counts[k].get(&self.context(prefix, k));
        let total: f64 = row.map_or(0.0, |r| r.values().sum());
        vocab
            .into_iter()
            .map(|tok| {
                let c = row.and_then(|r| r.get(tok)).copied().unwrap_or(0.0);
                (tok.to_owned(), (c + alpha) / (total + alpha * v))
            })
            .collect()
    }

    /// Backed-off distribution before the copy boost.
    pub fn smoothed(&self, input: &TokenizedInput, prefix: &[String]) -> BTreeMap<String, f64> {
        self.distribution_at(input, prefix, self.backoff_order(prefix))
    }

    /// The full next-token distribution, copy boost applied.
    pub fn probabilities(&self, input: &TokenizedInput, prefix: &[String]) -> BTreeMap<String, f64> {
        let mut dist = self.smoothed(input, prefix);
        if self.config.copy_boost != 1.0 {
            let in_input: BTreeSet<&str> = input.tokens().iter().map(String::as_str).collect();
            for (tok, p) in dist.iter_mut() {
                if in_input.contains(tok.as_str()) {
                    *p *= self.config.copy_boost;
                }
            }
            let z: f64 = dist.values().sum();
            dist.values_mut().for_each(|p| *p /= z);
        }
        dist
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scorer tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ScorerError> {
        let model: NgramScorer =
            serde_json::from_str(text).map_err(|e| ScorerError::Artifact(e.to_string()))?;
        if model.format != ARTIFACT_FORMAT || model.version != ARTIFACT_VERSION {
            return Err(ScorerError::Artifact(format!(
                "unsupported artifact {} v{}",
                model.format, model.version
            )));
        }
        model.config.validate()?;
        if model.counts.len() != model.config.order {
            return Err(ScorerError::Artifact("count tables do not match order".into()));
        }
        Ok(model)
    }
}

impl Scorer for NgramScorer {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores {
        self.probabilities(input, prefix)
            .into_iter()
            .map(|(t, p)| (t, p.ln()))
            .collect()
    }
}
