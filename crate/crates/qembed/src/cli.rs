//! The `qembed` command suite.
//!
//! Settings resolve as command-line flags, then `--manifest` values, then
//! defaults. Every command writes a manifest next to its main output.

use std::ffi::OsString;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qembed_core::eval::{evaluate, CircuitScorer, EmbeddingScorer, PairScorer, SimilarityDataset};
use qembed_core::fit::FitConfig;
use qembed_core::loss::{LossKind, DEFAULT_SCALE};
use qembed_core::optim::OptimizerKind;
use qembed_core::pqc::{Ansatz, CATALOG_IDS};
use qembed_core::sampling::{NegativePolicy, PairConfig, DEFAULT_TABLE_SIZE};
use qembed_core::{EmbeddingMode, Vocabulary};

use crate::corpus::{
    build_vocabulary, load_vocabulary, save_vocabulary, CorpusOptions, CorpusSource,
};
use crate::dataset::{load_dataset, DatasetFormat};
use crate::driver::DriveConfig;
use crate::error::{Error, IoContext, Result};
use crate::formats::{
    load_embeddings, load_model, save_embeddings, save_pqc, EmbeddingFile, EmbeddingFormat,
    ModelFile, PqcFile,
};
use crate::manifest::{manifest_path_for, RunManifest};
use crate::pqc_train::{
    ansatz_sweep, fit_vocabulary, train_pqc_both, train_pqc_focal, write_sweep_csv, FitSummary,
    PqcTrainConfig, BOTH_DEFAULT_EPOCHS,
};
use crate::report::{format_table, write_csv, write_pair_scores, EvalRow};
use crate::train::{train_sgns, SgnsConfig};

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Parser)]
#[command(
    name = "qembed",
    version,
    about = "Complex-valued and circuit-based word embeddings"
)]
pub struct Cli {
    /// Replay a run manifest; flags given alongside override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Where to write this run's manifest [default: <output>.manifest.json].
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest_out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count words in a corpus and write a vocabulary file.
    Vocab(VocabArgs),
    /// Train embeddings on a corpus.
    Train(TrainArgs),
    /// Fit one circuit per word to trained complex embeddings.
    Fit(FitArgs),
    /// Evaluate models on word-similarity datasets.
    Eval(EvalArgs),
    /// Fit over a grid of ansatze and layer counts and evaluate each cell.
    Sweep(SweepArgs),
    /// Convert embeddings between binary and text formats.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Real,
    Complex,
    PqcFocal,
    PqcBoth,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VocabArgs {
    /// Plain-text corpus, one sentence per line.
    #[arg(long, visible_alias = "train")]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    /// Keep the original letter case.
    #[arg(long)]
    pub keep_case: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, visible_alias = "train")]
    pub corpus: Option<PathBuf>,
    /// Vocabulary file; built from the corpus with --min-count if absent.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long)]
    pub keep_case: bool,
    #[arg(long, value_enum, default_value_t = Mode::Complex)]
    pub mode: Mode,
    /// real, sigmoid, direct or unnorm-sigmoid [default: real in real mode, else sigmoid].
    #[arg(long)]
    pub loss: Option<String>,
    /// Embedding dimension; a power of two for circuit modes.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negative: usize,
    /// Subsampling threshold; 0 disables.
    #[arg(long, default_value_t = 1e-3)]
    pub sample: f64,
    /// Always use the full window instead of a random shrink per position.
    #[arg(long)]
    pub no_dynamic_window: bool,
    /// Worker threads [default: all cores].
    #[arg(long, env = "QEMBED_THREADS")]
    pub threads: Option<usize>,
    /// Epochs [default: 20 for pqc-both, else 5].
    #[arg(long)]
    pub iter: Option<usize>,
    /// Initial learning rate [default: 0.025 with sgd; with adam 0.001, or 0.01 for circuit modes].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// sgd or adam [default: sgd for real/complex, adam for circuit modes].
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Scaling factor D of the fidelity losses.
    #[arg(long = "scale-D", default_value_t = DEFAULT_SCALE)]
    pub scale_d: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Examples per gradient step.
    #[arg(long, default_value_t = 1)]
    pub batch: usize,
    #[arg(long, default_value_t = DEFAULT_TABLE_SIZE)]
    pub table_size: usize,
    /// Use a 1000-entry lookup table for the sigmoid.
    #[arg(long)]
    pub sigmoid_table: bool,
    #[arg(long, default_value = "A5")]
    pub ansatz: String,
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the context table (embeddings, or circuits for pqc-both).
    #[arg(long)]
    pub save_context: Option<PathBuf>,
    /// Also write the vocabulary used.
    #[arg(long)]
    pub save_vocab: Option<PathBuf>,
    #[arg(long, default_value = "binary")]
    pub format: EmbeddingFormat,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Complex (or real) embedding file to fit.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value = "A5")]
    pub ansatz: String,
    /// Layer count, or a range such as 1..4 with --sweep.
    #[arg(long, default_value = "3")]
    pub layers: String,
    /// Fit iterations per word [default: 5000, or 10000 with --sweep].
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value = "adam")]
    pub optimizer: String,
    /// Stop a word's fit once its infidelity is below this.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = "QEMBED_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// JSON infidelity summary.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Comma-separated ansatz ids: run a sweep instead of a single fit.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Datasets evaluated by --sweep.
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    #[arg(long, default_value = "auto")]
    pub dataset_format: DatasetFormat,
    /// With --sweep, fit the whole vocabulary rather than dataset words.
    #[arg(long)]
    pub all_words: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Comma-separated ansatz ids.
    #[arg(long, default_value = "A5,A14")]
    pub ansatz: String,
    #[arg(long, default_value = "1..4")]
    pub layers: String,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value = "adam")]
    pub optimizer: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = "QEMBED_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    #[arg(long, default_value = "auto")]
    pub dataset_format: DatasetFormat,
    /// Fit the whole vocabulary rather than dataset words only.
    #[arg(long)]
    pub all_words: bool,
    /// CSV table.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Embedding or circuit file; repeatable.
    #[arg(long)]
    pub model: Vec<PathBuf>,
    /// Dataset file; repeatable.
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    #[arg(long, default_value = "auto")]
    pub dataset_format: DatasetFormat,
    /// Context table added to the focal vectors of a single embedding model.
    #[arg(long)]
    pub context: Option<PathBuf>,
    /// CSV report.
    #[arg(long, short, default_value = "eval.csv")]
    pub output: PathBuf,
    /// Per-pair scores as CSV.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExportArgs {
    /// Embedding file, or a circuit file whose prepared states are exported.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format [default: the opposite of the input's].
    #[arg(long)]
    pub format: Option<EmbeddingFormat>,
}

/// Overlays manifest settings on parsed arguments, except where the flag
/// was given on the command line.
fn merge<T: Serialize + DeserializeOwned>(
    parsed: T,
    matches: &ArgMatches,
    manifest: Option<&serde_json::Value>,
) -> Result<T> {
    let Some(serde_json::Value::Object(saved)) = manifest else {
        return Ok(parsed);
    };
    let serde_json::Value::Object(mut out) = serde_json::to_value(&parsed)? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in saved {
        if !out.contains_key(k) {
            return Err(Error::Config(format!("manifest has unknown setting {k:?}")));
        }
        if matches.value_source(k) != Some(ValueSource::CommandLine) {
            out.insert(k.clone(), v.clone());
        }
    }
    Ok(serde_json::from_value(serde_json::Value::Object(out))?)
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("missing required --{flag}")))
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind> {
    OptimizerKind::parse(s)
        .ok_or_else(|| Error::Config(format!("unknown optimizer {s:?} (sgd|adam)")))
}

/// `3`, `1..4` or `1-4`, inclusive.
pub fn parse_layers(s: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::Config(format!("invalid layer range {s:?}"));
    let (lo, hi) = match s.split_once("..").or_else(|| s.split_once('-')) {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim_start_matches('=')
                .trim()
                .parse()
                .map_err(|_| bad())?,
        ),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn ansatz_ids(s: &str) -> Result<Vec<String>> {
    let ids: Vec<String> = s
        .split(',')
        .map(|x| x.trim().to_ascii_uppercase())
        .filter(|x| !x.is_empty())
        .collect();
    if ids.is_empty() {
        return Err(Error::Config("no ansatz ids given".into()));
    }
    for id in &ids {
        if !CATALOG_IDS.contains(&id.as_str()) {
            return Err(qembed_core::Error::UnknownAnsatz(id.clone()).into());
        }
    }
    Ok(ids)
}

fn corpus_options(keep_case: bool) -> CorpusOptions {
    CorpusOptions {
        lowercase: !keep_case,
        ..CorpusOptions::default()
    }
}

fn save_vocab_checked(vocab: &Vocabulary, path: &Path) -> Result<()> {
    save_vocabulary(vocab, path)?;
    let back = load_vocabulary(path)?;
    if back.words() != vocab.words() || back.counts() != vocab.counts() {
        return Err(Error::Format(format!(
            "{}: vocabulary did not read back",
            path.display()
        )));
    }
    Ok(())
}

/// What a finished command reports for its manifest.
struct Outcome {
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    threads: usize,
}

fn run_vocab(a: &VocabArgs) -> Result<Outcome> {
    let corpus = required(&a.corpus, "corpus")?;
    let out = required(&a.output, "output")?;
    if a.min_count == 0 {
        return Err(Error::Config("--min-count must be at least 1".into()));
    }
    if !corpus.is_file() {
        return Err(Error::Config(format!(
            "corpus {} not found",
            corpus.display()
        )));
    }
    let vocab = build_vocabulary(
        &CorpusSource::file(corpus),
        a.min_count,
        corpus_options(a.keep_case),
    )?;
    save_vocab_checked(&vocab, out)?;
    println!("{} words, {} tokens", vocab.len(), vocab.total_tokens());
    Ok(Outcome {
        seed: None,
        inputs: vec![corpus.to_path_buf()],
        outputs: vec![out.to_path_buf()],
        threads: 1,
    })
}

/// Fills mode-dependent defaults so the manifest records actual values.
fn resolve_train(a: &mut TrainArgs) -> Result<()> {
    let circuit = matches!(a.mode, Mode::PqcFocal | Mode::PqcBoth);
    let loss = match (a.mode, a.loss.as_deref()) {
        (Mode::Real, None) => "real".to_string(),
        (Mode::Complex, None) => LossKind::ComplexSigmoidNormalized.name().to_string(),
        (_, Some(s)) => s.to_string(),
        (_, None) => "sigmoid".to_string(),
    };
    let kind =
        LossKind::parse(&loss).ok_or_else(|| Error::Config(format!("unknown loss {loss:?}")))?;
    match a.mode {
        Mode::Real if kind != LossKind::RealSigmoid => {
            return Err(Error::Config("real mode needs --loss real".into()))
        }
        Mode::Complex if !kind.is_complex() => {
            return Err(Error::Config("complex mode needs a complex loss".into()))
        }
        Mode::PqcFocal | Mode::PqcBoth if kind != LossKind::ComplexSigmoidNormalized => {
            return Err(Error::Config(
                "circuit modes train the sigmoid loss only".into(),
            ))
        }
        _ => {}
    }
    a.loss = Some(loss);
    let optimizer = a
        .optimizer
        .clone()
        .unwrap_or_else(|| if circuit { "adam" } else { "sgd" }.to_string());
    let opt = parse_optimizer(&optimizer)?;
    a.optimizer = Some(optimizer);
    a.alpha = Some(a.alpha.unwrap_or(match (opt, circuit) {
        (OptimizerKind::Sgd, _) => 0.025,
        (OptimizerKind::Adam, false) => 0.001,
        (OptimizerKind::Adam, true) => 0.01,
    }));
    a.iter = Some(a.iter.unwrap_or(if a.mode == Mode::PqcBoth {
        BOTH_DEFAULT_EPOCHS
    } else {
        5
    }));
    a.threads = Some(a.threads.unwrap_or_else(default_threads));
    Ok(())
}

fn run_train(a: &TrainArgs) -> Result<Outcome> {
    let corpus = required(&a.corpus, "corpus")?;
    let out = required(&a.output, "output")?;
    if !corpus.is_file() {
        return Err(Error::Config(format!(
            "corpus {} not found",
            corpus.display()
        )));
    }
    let source = CorpusSource::file(corpus);
    let opts = corpus_options(a.keep_case);
    let vocab = match &a.vocab {
        Some(p) => load_vocabulary(p)?,
        None => build_vocabulary(&source, a.min_count, opts)?,
    };
    let threads = a.threads.unwrap_or(1);
    let drive = DriveConfig {
        pairs: PairConfig {
            window: a.window,
            dynamic_window: !a.no_dynamic_window,
            subsample: (a.sample > 0.0).then_some(a.sample),
            negatives: a.negative,
            policy: NegativePolicy::Redraw,
        },
        epochs: a.iter.unwrap_or(5),
        threads,
        seed: a.seed,
        batch: a.batch,
        corpus: opts,
        ..DriveConfig::default()
    };
    let optimizer = parse_optimizer(a.optimizer.as_deref().unwrap_or("sgd"))?;
    let lr = a.alpha.unwrap_or(0.025);
    let words = vocab.words().to_vec();
    let mut outputs = vec![out.to_path_buf()];
    let report = match a.mode {
        Mode::Real | Mode::Complex => {
            let loss = a
                .loss
                .as_deref()
                .and_then(LossKind::parse)
                .unwrap_or(LossKind::ComplexSigmoidNormalized);
            let cfg = SgnsConfig {
                dim: a.size,
                loss,
                scale: a.scale_d,
                lr,
                optimizer,
                sigmoid_table: a.sigmoid_table,
                table_size: a.table_size,
                drive,
            };
            let (m, report) = train_sgns(&source, &vocab, &cfg)?;
            save_embeddings(&EmbeddingFile::new(words.clone(), m.focal)?, out, a.format)?;
            if let Some(p) = &a.save_context {
                save_embeddings(&EmbeddingFile::new(words.clone(), m.context)?, p, a.format)?;
                outputs.push(p.clone());
            }
            report
        }
        Mode::PqcFocal | Mode::PqcBoth => {
            let ansatz = Ansatz::for_dimension(&a.ansatz.to_ascii_uppercase(), a.size, a.layers)?;
            let cfg = PqcTrainConfig {
                scale: a.scale_d,
                lr,
                optimizer,
                table_size: a.table_size,
                drive,
            };
            if a.mode == Mode::PqcFocal {
                let (focal, context, report) = train_pqc_focal(&source, &vocab, &ansatz, &cfg)?;
                save_pqc(&PqcFile::new(words.clone(), focal)?, out)?;
                if let Some(p) = &a.save_context {
                    save_embeddings(&EmbeddingFile::new(words.clone(), context)?, p, a.format)?;
                    outputs.push(p.clone());
                }
                report
            } else {
                let (focal, context, report) = train_pqc_both(&source, &vocab, &ansatz, &cfg)?;
                save_pqc(&PqcFile::new(words.clone(), focal)?, out)?;
                if let Some(p) = &a.save_context {
                    save_pqc(&PqcFile::new(words.clone(), context)?, p)?;
                    outputs.push(p.clone());
                }
                report
            }
        }
    };
    if let Some(p) = &a.save_vocab {
        save_vocab_checked(&vocab, p)?;
        outputs.push(p.clone());
    }
    println!(
        "{} words, {} tokens read, {} examples, mean loss {:.6}",
        vocab.len(),
        report.tokens,
        report.examples,
        report.mean_loss
    );
    let mut inputs = vec![corpus.to_path_buf()];
    inputs.extend(a.vocab.clone());
    Ok(Outcome {
        seed: Some(a.seed),
        inputs,
        outputs,
        threads,
    })
}

fn fit_config(
    iters: usize,
    lr: f64,
    optimizer: &str,
    tolerance: f64,
    seed: u64,
) -> Result<FitConfig> {
    if iters == 0 || !(lr > 0.0) || !(tolerance >= 0.0) {
        return Err(Error::Config(
            "iterations, learning rate and tolerance must be positive".into(),
        ));
    }
    Ok(FitConfig {
        max_iters: iters,
        lr,
        optimizer: parse_optimizer(optimizer)?,
        tolerance,
        seed,
    })
}

fn run_fit(a: &FitArgs) -> Result<Outcome> {
    let input = required(&a.embeddings, "embeddings")?;
    let out = required(&a.output, "output")?;
    let threads = a.threads.unwrap_or(1);
    let layers = parse_layers(&a.layers)?;
    if layers.start() != layers.end() {
        return Err(Error::Config(
            "--layers takes a single value without --sweep".into(),
        ));
    }
    let cfg = fit_config(
        a.iters.unwrap_or(5000),
        a.lr,
        &a.optimizer,
        a.tolerance,
        a.seed,
    )?;
    let file = load_embeddings(input)?.into_complex();
    let ansatz = Ansatz::for_dimension(
        &a.ansatz.to_ascii_uppercase(),
        file.table.dim(),
        *layers.start(),
    )?;
    let (table, results) = fit_vocabulary(&file.table, &ansatz, &cfg, threads)?;
    save_pqc(&PqcFile::new(file.words, table)?, out)?;
    let summary = FitSummary::new(&results);
    print!("{summary}");
    let mut outputs = vec![out.to_path_buf()];
    if let Some(p) = &a.report {
        std::fs::write(p, serde_json::to_string_pretty(&summary)? + "\n").at(p)?;
        outputs.push(p.clone());
    }
    Ok(Outcome {
        seed: Some(a.seed),
        inputs: vec![input.to_path_buf()],
        outputs,
        threads,
    })
}

fn load_datasets(paths: &[PathBuf], format: DatasetFormat) -> Result<Vec<SimilarityDataset>> {
    paths
        .iter()
        .map(|p| {
            let d = load_dataset(p, format)?;
            if d.merged_duplicates > 0 {
                eprintln!(
                    "{}: merged {} duplicate pairs",
                    p.display(),
                    d.merged_duplicates
                );
            }
            Ok(d.dataset)
        })
        .collect()
}

fn run_sweep(a: &SweepArgs) -> Result<Outcome> {
    let input = required(&a.embeddings, "embeddings")?;
    let out = required(&a.output, "output")?;
    let threads = a.threads.unwrap_or(1);
    let ids = ansatz_ids(&a.ansatz)?;
    let layers = parse_layers(&a.layers)?;
    let cfg = fit_config(a.iters, a.lr, &a.optimizer, a.tolerance, a.seed)?;
    let datasets = load_datasets(&a.dataset, a.dataset_format)?;
    let file = load_embeddings(input)?.into_complex();
    let rows = ansatz_sweep(
        &file.words,
        &file.table,
        &ids,
        layers,
        &datasets,
        &cfg,
        threads,
        !a.all_words,
    )?;
    let names: Vec<String> = datasets.iter().map(|d| d.name.clone()).collect();
    write_sweep_csv(&rows, &names, std::fs::File::create(out).at(out)?)?;
    write_sweep_csv(&rows, &names, std::io::stdout().lock())?;
    let mut inputs = vec![input.to_path_buf()];
    inputs.extend(a.dataset.iter().cloned());
    Ok(Outcome {
        seed: Some(a.seed),
        inputs,
        outputs: vec![out.to_path_buf()],
        threads,
    })
}

fn scorer<'a>(
    model: &'a ModelFile,
    vocab: &'a Vocabulary,
    context: Option<&'a EmbeddingFile>,
) -> Result<Box<dyn PairScorer + 'a>> {
    Ok(match model {
        ModelFile::Embeddings(f) => {
            let s = EmbeddingScorer::new(vocab, &f.table)?;
            match context {
                Some(c) => {
                    if c.words != f.words {
                        return Err(Error::Config(
                            "context file has a different word list".into(),
                        ));
                    }
                    Box::new(s.with_context(&c.table)?)
                }
                None => Box::new(s),
            }
        }
        ModelFile::Circuits(f) => {
            if context.is_some() {
                return Err(Error::Config(
                    "--context applies to embedding models only".into(),
                ));
            }
            Box::new(CircuitScorer::new(vocab, &f.table)?)
        }
    })
}

fn run_eval(a: &EvalArgs) -> Result<Outcome> {
    if a.model.is_empty() || a.dataset.is_empty() {
        return Err(Error::Config(
            "need at least one --model and one --dataset".into(),
        ));
    }
    if a.context.is_some() && a.model.len() != 1 {
        return Err(Error::Config("--context needs exactly one --model".into()));
    }
    let datasets = load_datasets(&a.dataset, a.dataset_format)?;
    let context = a.context.as_deref().map(load_embeddings).transpose()?;
    let mut rows = Vec::new();
    for path in &a.model {
        let model = load_model(path)?;
        let words = match &model {
            ModelFile::Embeddings(f) => f.words.clone(),
            ModelFile::Circuits(f) => f.words.clone(),
        };
        let vocab = Vocabulary::from_words(words)?;
        let s = scorer(&model, &vocab, context.as_ref())?;
        for ds in &datasets {
            let report = evaluate(s.as_ref(), ds)?;
            rows.push(EvalRow::new(path.display().to_string(), report, ds));
        }
    }
    print!("{}", format_table(&rows));
    write_csv(&rows, std::fs::File::create(&a.output).at(&a.output)?)?;
    let mut outputs = vec![a.output.clone()];
    if let Some(p) = &a.pairs {
        write_pair_scores(&rows, std::fs::File::create(p).at(p)?)?;
        outputs.push(p.clone());
    }
    let mut inputs = a.model.clone();
    inputs.extend(a.dataset.iter().cloned());
    inputs.extend(a.context.clone());
    Ok(Outcome {
        seed: None,
        inputs,
        outputs,
        threads: 1,
    })
}

fn run_export(a: &ExportArgs) -> Result<Outcome> {
    let input = required(&a.input, "input")?;
    let out = required(&a.output, "output")?;
    let mut magic = [0u8; 4];
    let is_binary = {
        use std::io::Read;
        let n = std::fs::File::open(input)
            .at(input)?
            .read(&mut magic)
            .at(input)?;
        n == 4 && (&magic == crate::formats::EMBEDDING_MAGIC || &magic == crate::formats::PQC_MAGIC)
    };
    let file = match load_model(input)? {
        ModelFile::Embeddings(f) => f,
        ModelFile::Circuits(f) => {
            let states = f.table.prepare_all()?;
            let d = f.table.ansatz().dim();
            let mut re = Vec::with_capacity(states.len() * d);
            let mut im = Vec::with_capacity(states.len() * d);
            for s in &states {
                re.extend(s.iter().map(|z| z.re as f32));
                im.extend(s.iter().map(|z| z.im as f32));
            }
            EmbeddingFile::new(
                f.words,
                qembed_core::embedding::EmbeddingTable::from_parts(
                    d,
                    EmbeddingMode::Complex,
                    re,
                    im,
                )?,
            )?
        }
    };
    let format = a.format.unwrap_or(if is_binary {
        EmbeddingFormat::Text
    } else {
        EmbeddingFormat::Binary
    });
    save_embeddings(&file, out, format)?;
    Ok(Outcome {
        seed: None,
        inputs: vec![input.to_path_buf()],
        outputs: vec![out.to_path_buf()],
        threads: 1,
    })
}

fn subcommand_matches(name: &str) -> Result<ArgMatches> {
    let m = Cli::command()
        .try_get_matches_from(["qembed", name])
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(m.subcommand_matches(name)
        .expect("subcommand parsed")
        .clone())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            // help and version
            e.print()?;
            return Ok(());
        }
        Err(e) => return Err(Error::Config(e.render().to_string().trim_end().to_string())),
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| Error::Config(e.to_string()))?;
    let replay = cli.manifest.as_deref().map(RunManifest::load).transpose()?;
    let (name, sub) = match matches.subcommand() {
        Some((n, m)) => (n.to_string(), m.clone()),
        None => match &replay {
            Some(m) => (m.subcommand.clone(), subcommand_matches(&m.subcommand)?),
            None => return Err(Error::Config("no subcommand given (try --help)".into())),
        },
    };
    if let Some(m) = &replay {
        if m.subcommand != name {
            return Err(Error::Config(format!(
                "manifest is for `{}`, not `{name}`",
                m.subcommand
            )));
        }
    }
    let saved = replay.as_ref().map(|m| &m.config);
    let started = Instant::now();
    let (config, outcome) = match name.as_str() {
        "vocab" => {
            let a = merge(
                VocabArgs::from_arg_matches(&sub).map_err(clap_err)?,
                &sub,
                saved,
            )?;
            let o = run_vocab(&a)?;
            (serde_json::to_value(&a)?, o)
        }
        "train" => {
            let mut a = merge(
                TrainArgs::from_arg_matches(&sub).map_err(clap_err)?,
                &sub,
                saved,
            )?;
            resolve_train(&mut a)?;
            let o = run_train(&a)?;
            (serde_json::to_value(&a)?, o)
        }
        "fit" => {
            let mut a = merge(
                FitArgs::from_arg_matches(&sub).map_err(clap_err)?,
                &sub,
                saved,
            )?;
            a.threads = Some(a.threads.unwrap_or_else(default_threads));
            let o = match a.sweep.clone() {
                Some(ids) => {
                    a.iters = Some(a.iters.unwrap_or(10_000));
                    run_sweep(&SweepArgs {
                        embeddings: a.embeddings.clone(),
                        ansatz: ids,
                        layers: a.layers.clone(),
                        iters: a.iters.unwrap_or(10_000),
                        lr: a.lr,
                        optimizer: a.optimizer.clone(),
                        tolerance: a.tolerance,
                        seed: a.seed,
                        threads: a.threads,
                        dataset: a.dataset.clone(),
                        dataset_format: a.dataset_format,
                        all_words: a.all_words,
                        output: a.output.clone(),
                    })?
                }
                None => {
                    a.iters = Some(a.iters.unwrap_or(5000));
                    run_fit(&a)?
                }
            };
            (serde_json::to_value(&a)?, o)
        }
        "sweep" => {
            let mut a = merge(
                SweepArgs::from_arg_matches(&sub).map_err(clap_err)?,
                &sub,
                saved,
            )?;
            a.threads = Some(a.threads.unwrap_or_else(default_threads));
            let o = run_sweep(&a)?;
            (serde_json::to_value(&a)?, o)
        }
        "eval" => {
            let a = merge(
                EvalArgs::from_arg_matches(&sub).map_err(clap_err)?,
                &sub,
                saved,
            )?;
            let o = run_eval(&a)?;
            (serde_json::to_value(&a)?, o)
        }
        "export" => {
            let a = merge(
                ExportArgs::from_arg_matches(&sub).map_err(clap_err)?,
                &sub,
                saved,
            )?;
            let o = run_export(&a)?;
            (serde_json::to_value(&a)?, o)
        }
        other => return Err(Error::Config(format!("unknown subcommand {other:?}"))),
    };
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: name,
        config,
        seed: outcome.seed,
        inputs: outcome.inputs,
        threads: outcome.threads,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: outcome.outputs,
    };
    let path = cli
        .manifest_out
        .unwrap_or_else(|| manifest_path_for(&manifest.outputs[0]));
    manifest.save(&path)
}

fn clap_err(e: clap::Error) -> Error {
    Error::Config(e.to_string())
}

/// Runs the command line and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qembed: {e}");
            1
        }
    }
}
