//! Constrained generation of event structures.
//!
//! Events are serialized to a bracketed token sequence, generated one token
//! at a time under a grammar/schema/span automaton, and mapped back to
//! offsets in the source sentence.

pub mod codec;
pub mod curriculum;
pub mod dataset;
pub mod decoder;
pub mod eval;
pub mod fuzz;
pub mod grounding;
pub mod schema;
pub mod scorers;
pub mod span_index;

pub use codec::{
    delinearize, linearize, Argument, CodecError, EventRecord, LinearizedSeq, Mention, ParseError,
    ParseErrorKind,
};
pub use dataset::{DatasetError, Sentence};
pub use decoder::{
    constrained_decode, decode_batch, sequence_nll, Constraints, DecodeConfig, DecodeError,
    DecodeMode, DecodeOutput, DecodeState, Nll, Scorer, Scores,
};
pub use eval::{evaluate, EvalReport, Granularity, Metric};
pub use grounding::ground;
pub use schema::{EventSchema, SchemaError, SchemaTries};
pub use scorers::{train_ngram, NgramConfig, NgramScorer, OracleScorer, RandomScorer, UniformScorer};
pub use span_index::{tokenize, TokenizedInput};
