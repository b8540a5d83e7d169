use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use structgen::codec::{delinearize, linearize, CodecError, LinearizedSeq};
use structgen::curriculum::{
    curriculum_train, generate_synthetic, CurriculumConfig, CurriculumError, DatasetStats, SubstructureMode,
    SynthConfig, BUILTIN_VOCAB,
};
use structgen::dataset::{read_pairs, read_sentences, write_docs, DatasetError, PairDoc, Sentence, SentenceDoc};
use structgen::decoder::{decode_batch, output_vocabulary, DecodeConfig, Scorer, Scores};
use structgen::eval::{evaluate, Granularity};
use structgen::fuzz::{fuzz_decoder, FuzzConfig};
use structgen::grounding::ground;
use structgen::schema::EventSchema;
use structgen::scorers::{NgramConfig, NgramScorer, RandomScorer, ScorerError};
use structgen::span_index::{tokenize, TokenizedInput};

#[derive(Parser)]
#[command(name = "structgen", version, about = "Constrained generation of event structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a schema document.
    SchemaValidate { schema: PathBuf },
    /// Linearize a records document, one sequence per line.
    Encode {
        records: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Emit {id, text, target} lines instead of bare sequences.
        #[arg(long)]
        pairs: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Parse linearized sequences (bare or {id, text, target} lines) into a records document.
    Parse {
        seqs: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Decode sentences into a predictions document.
    Decode(DecodeArgs),
    /// Train n-gram scorers and report held-out NLL for both regimes.
    Train(TrainArgs),
    /// Score predictions against gold records.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value_t = Unit::Token)]
        offsets: Unit,
    },
    /// Generate a synthetic records document.
    Synth {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        event_rate: f64,
        #[arg(long, default_value_t = 0.5)]
        arg_rate: f64,
        /// Word list, one per line; a built-in list otherwise.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Print dataset statistics to stderr.
        #[arg(long)]
        stats: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Decode random inputs with random scorers and check every output.
    Fuzz {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = 500)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long, default_value_t = 1024)]
        max_len: usize,
    },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Token,
    Char,
}

#[derive(Args)]
struct DecodeArgs {
    /// Sentences document; only id and text are used.
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// An n-gram artifact path, `uniform`, or `random:SEED`.
    #[arg(long)]
    scorer: String,
    #[arg(long, conflicts_with = "beam")]
    greedy: bool,
    #[arg(long, value_name = "N")]
    beam: Option<usize>,
    #[arg(long, default_value_t = 128)]
    max_len: usize,
    #[arg(long)]
    no_constraints: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct TrainArgs {
    corpus: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Where to write the selected scorer artifact.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    copy_boost: f64,
    /// Save the curriculum scorer (default).
    #[arg(long, conflicts_with = "direct")]
    curriculum: bool,
    /// Save the directly trained scorer.
    #[arg(long)]
    direct: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    heldout: f64,
    #[arg(long, default_value_t = 5)]
    sub_epochs: u32,
    #[arg(long, default_value_t = 30)]
    full_epochs: u32,
    /// One substructure target per unit instead of one per sentence.
    #[arg(long)]
    per_unit: bool,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Constraint(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io { .. } => 3,
            Failure::Format(_) => 4,
            Failure::Schema(_) => 5,
            Failure::Constraint(_) => 6,
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::UnknownType { .. } | DatasetError::RoleNotPermitted { .. } => Failure::Schema(e.to_string()),
            _ => Failure::Format(e.to_string()),
        }
    }
}

fn codec_failure(id: &str, e: CodecError) -> Failure {
    let msg = format!("sentence {id:?}: {e}");
    match e {
        CodecError::UnknownType { .. } | CodecError::RoleNotPermitted { .. } => Failure::Schema(msg),
        _ => Failure::Format(msg),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|source| Failure::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(out: &Output, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| Failure::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_schema(path: &Path) -> Result<EventSchema, Failure> {
    EventSchema::parse(&read(path)?).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
}

fn load_sentences(path: &Path, schema: &EventSchema) -> Result<Vec<Sentence>, Failure> {
    let sentences = read_sentences(&read(path)?)
        .map_err(|e| Failure::from(e).prefixed(path))?;
    for s in &sentences {
        s.check_schema(schema).map_err(|e| Failure::from(e).prefixed(path))?;
    }
    Ok(sentences)
}

impl Failure {
    fn prefixed(self, path: &Path) -> Failure {
        let p = path.display();
        match self {
            Failure::Format(m) => Failure::Format(format!("{p}: {m}")),
            Failure::Schema(m) => Failure::Schema(format!("{p}: {m}")),
            other => other,
        }
    }
}

fn schema_validate(path: &Path) -> Result<(), Failure> {
    let schema = load_schema(path)?;
    let roles: usize = schema.event_types().map(|t| schema.roles(t).map_or(0, <[_]>::len)).sum();
    println!("ok: {} event types, {} roles", schema.len(), roles);
    Ok(())
}

fn encode(records: &Path, schema_path: &Path, pairs: bool, out: &Output) -> Result<(), Failure> {
    let schema = load_schema(schema_path)?;
    let sentences = load_sentences(records, &schema)?;
    let mut text = String::new();
    let mut docs = Vec::new();
    for s in &sentences {
        let seq = linearize(&s.events, Some(&schema)).map_err(|e| codec_failure(&s.id, e))?;
        if pairs {
            docs.push(PairDoc::new(s.id.clone(), &s.input(), &seq));
        } else {
            text.push_str(&seq.to_string());
            text.push('\n');
        }
    }
    if pairs {
        text = write_docs(&docs);
    }
    write(out, &text)
}

fn parse(seqs: &Path, schema_path: &Path, out: &Output) -> Result<(), Failure> {
    let schema = load_schema(schema_path)?;
    let text = read(seqs)?;
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, input, target) = if line.trim_start().starts_with('{') {
            let pair = read_pairs(line).map_err(|e| Failure::Format(format!("line {line_no}: {e}")))?;
            let pair = pair.into_iter().next().expect("one non-blank line");
            let input = tokenize(&pair.text);
            (pair.id, input, LinearizedSeq::parse(&pair.target))
        } else {
            (line_no.to_string(), tokenize(""), LinearizedSeq::parse(line))
        };
        match delinearize(&target, &schema) {
            Ok(records) => {
                let events = if input.is_empty() { records } else { ground(&records, &input) };
                docs.push(SentenceDoc::from_sentence(&Sentence {
                    id,
                    text: input.text().to_owned(),
                    events,
                }));
            }
            Err(e) => errors.push(format!("line {line_no}: {e}")),
        }
    }
    if !errors.is_empty() {
        return Err(Failure::Format(errors.join("\n")));
    }
    write(out, &write_docs(&docs))
}

/// Scorers selectable from the command line.
enum CliScorer {
    Ngram(NgramScorer),
    Uniform(EventSchema),
    Random(RandomScorer),
}

impl Scorer for CliScorer {
    fn next_scores(&self, input: &TokenizedInput, prefix: &[String]) -> Scores {
        match self {
            CliScorer::Ngram(s) => s.next_scores(input, prefix),
            CliScorer::Random(s) => s.next_scores(input, prefix),
            CliScorer::Uniform(schema) => output_vocabulary(schema, input)
                .into_iter()
                .map(|t| (t, 0.0))
                .collect(),
        }
    }
}

fn load_scorer(source: &str, schema: &EventSchema) -> Result<CliScorer, Failure> {
    if source == "uniform" {
        return Ok(CliScorer::Uniform(schema.clone()));
    }
    if let Some(seed) = source.strip_prefix("random:") {
        let seed = seed
            .parse()
            .map_err(|_| Failure::Usage(format!("bad random scorer seed {seed:?}")))?;
        return Ok(CliScorer::Random(RandomScorer::new(seed, schema)));
    }
    let path = Path::new(source);
    NgramScorer::from_json(&read(path)?)
        .map(CliScorer::Ngram)
        .map_err(|e| Failure::Format(format!("{}: {e}", path.display())))
}

fn decode(args: &DecodeArgs) -> Result<(), Failure> {
    let schema = load_schema(&args.schema)?;
    let docs = structgen::dataset::read_sentence_docs(&read(&args.input)?)
        .map_err(|e| Failure::from(e).prefixed(&args.input))?;
    let scorer = load_scorer(&args.scorer, &schema)?;
    let mut config = match args.beam {
        Some(width) => DecodeConfig::beam(width),
        None => DecodeConfig::greedy(),
    }
    .with_max_length(args.max_len);
    if args.no_constraints {
        config = config.unconstrained();
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let inputs: Vec<TokenizedInput> = docs.iter().map(|d| tokenize(&d.text)).collect();
    let results = decode_batch(&scorer, &inputs, &schema, &config);
    let mut out = Vec::with_capacity(docs.len());
    for ((doc, input), result) in docs.iter().zip(&inputs).zip(results) {
        let mut sentence = Sentence {
            id: doc.id.clone(),
            text: doc.text.clone(),
            events: Vec::new(),
        };
        let mut target = None;
        let mut error = None;
        match result {
            Ok(decoded) => {
                match delinearize(&decoded.seq, &schema) {
                    Ok(records) => sentence.events = ground(&records, input),
                    Err(e) => error = Some(format!("parse: {e}")),
                }
                target = Some(decoded.seq.to_string());
            }
            Err(e) => error = Some(format!("decode: {e}")),
        }
        let mut pred = SentenceDoc::from_sentence(&sentence);
        pred.target = target;
        pred.error = error;
        out.push(pred);
    }
    write(&args.out, &write_docs(&out))
}

fn train(args: &TrainArgs) -> Result<(), Failure> {
    let schema = load_schema(&args.schema)?;
    let corpus = load_sentences(&args.corpus, &schema)?;
    let config = CurriculumConfig {
        ngram: NgramConfig {
            order: args.n,
            alpha: args.alpha,
            copy_boost: args.copy_boost,
        },
        substructure_epochs: args.sub_epochs,
        full_epochs: args.full_epochs,
        heldout_fraction: args.heldout,
        seed: args.seed,
        mode: if args.per_unit {
            SubstructureMode::PerUnit
        } else {
            SubstructureMode::Concatenated
        },
    };
    let outcome = curriculum_train(&corpus, &schema, &config).map_err(|e| match e {
        CurriculumError::Scorer(ScorerError::Hyperparameter(_))
        | CurriculumError::HeldOut(_)
        | CurriculumError::Epochs => Failure::Usage(e.to_string()),
        CurriculumError::Codec { ref id, ref source } => codec_failure(id, source.clone()),
        other => Failure::Format(other.to_string()),
    })?;
    if !outcome.additivity_holds() {
        return Err(Failure::Constraint(format!(
            "count tables are not additive (max diff {:e})",
            outcome.additivity_max_diff
        )));
    }
    let model = if args.direct { &outcome.direct } else { &outcome.curriculum };
    write_file(&args.out, &model.to_json())?;
    println!("{outcome}");
    println!("saved {} scorer to {}", if args.direct { "direct" } else { "curriculum" }, args.out.display());
    Ok(())
}

fn eval(gold: &Path, pred: &Path, json: bool, unit: Unit) -> Result<(), Failure> {
    let gold_s = read_sentences(&read(gold)?).map_err(|e| Failure::from(e).prefixed(gold))?;
    let pred_s = read_sentences(&read(pred)?).map_err(|e| Failure::from(e).prefixed(pred))?;
    let granularity = match unit {
        Unit::Token => Granularity::Token,
        Unit::Char => Granularity::Char,
    };
    let report = evaluate(&gold_s, &pred_s, granularity).map_err(|e| Failure::Format(e.to_string()))?;
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn synth(
    schema_path: &Path,
    seed: u64,
    n: usize,
    event_rate: f64,
    arg_rate: f64,
    vocab: Option<&Path>,
    stats: bool,
    out: &Output,
) -> Result<(), Failure> {
    let schema = load_schema(schema_path)?;
    let words: Vec<String> = match vocab {
        Some(path) => read(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect(),
        None => BUILTIN_VOCAB.iter().map(|w| w.to_string()).collect(),
    };
    let config = SynthConfig {
        n_sentences: n,
        event_rate,
        arg_rate,
        ..Default::default()
    };
    let data = generate_synthetic(&schema, &words, seed, &config).map_err(|e| Failure::Usage(e.to_string()))?;
    if stats {
        eprintln!("{}", DatasetStats::of(&data));
    }
    write(out, &structgen::dataset::write_sentences(&data))
}

fn fuzz(schema_path: &Path, seeds: usize, base_seed: u64, max_len: usize) -> Result<(), Failure> {
    let schema = load_schema(schema_path)?;
    let config = FuzzConfig {
        seeds,
        base_seed,
        decode: DecodeConfig::greedy().with_max_length(max_len),
        ..Default::default()
    };
    config.decode.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let report = fuzz_decoder(&schema, &config);
    println!("decodes: {}", report.decodes);
    println!("completed: {}", report.completed);
    println!("truncated: {}", report.truncated);
    println!("events: {}", report.events);
    println!("violations: {}", report.violations.len());
    for v in &report.violations {
        eprintln!("seed {} {:?}: {} | input {:?} | output {}", v.seed, v.kind, v.detail, v.input, v.output);
    }
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Constraint(format!("{} violations", report.violations.len())))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::SchemaValidate { schema } => schema_validate(&schema),
        Command::Encode {
            records,
            schema,
            pairs,
            out,
        } => encode(&records, &schema, pairs, &out),
        Command::Parse { seqs, schema, out } => parse(&seqs, &schema, &out),
        Command::Decode(args) => decode(&args),
        Command::Train(args) => train(&args),
        Command::Eval {
            gold,
            pred,
            json,
            offsets,
        } => eval(&gold, &pred, json, offsets),
        Command::Synth {
            schema,
            seed,
            n,
            event_rate,
            arg_rate,
            vocab,
            stats,
            out,
        } => synth(&schema, seed, n, event_rate, arg_rate, vocab.as_deref(), stats, &out),
        Command::Fuzz {
            schema,
            seeds,
            base_seed,
            max_len,
        } => fuzz(&schema, seeds, base_seed, max_len),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
