//! Multi-threaded epoch loop shared by every corpus trainer.
//!
//! Thread `t` reads byte range `t` of the corpus, generates its own
//! examples from the random stream `(seed, epoch * threads + t + 1)`, and
//! hands batches to the step function. Progress counts in-vocabulary tokens
//! read by all threads against `epochs * total_tokens`.

use std::sync::atomic::{AtomicU64, Ordering};

use qembed_core::rng::stream_rng;
use qembed_core::sampling::{
    NegativeSamplingTable, PairConfig, TrainingExample, TrainingPairStream,
};
use qembed_core::Vocabulary;

use crate::corpus::{CorpusOptions, CorpusSource, IdSentences};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub pairs: PairConfig,
    pub epochs: usize,
    pub threads: usize,
    pub seed: u64,
    pub batch: usize,
    pub corpus: CorpusOptions,
    /// Examples per entry of [`TrainReport::window_losses`].
    pub report_window: usize,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            pairs: PairConfig::default(),
            epochs: 5,
            threads: 1,
            seed: 1,
            batch: 1,
            corpus: CorpusOptions::default(),
            report_window: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub examples: u64,
    /// In-vocabulary tokens read, before subsampling, over all epochs.
    pub tokens: u64,
    /// Mean per-example loss over consecutive windows of thread 0.
    pub window_losses: Vec<f64>,
    pub mean_loss: f64,
}

/// Runs `epochs` passes. `step(state, batch, progress)` returns the summed
/// loss of the batch; `progress` is in `[0, 1]`.
pub fn drive<S, Init, Step>(
    source: &CorpusSource,
    vocab: &Vocabulary,
    table: &NegativeSamplingTable,
    cfg: &DriveConfig,
    init: Init,
    step: Step,
) -> Result<TrainReport>
where
    Init: Fn(usize) -> S + Sync,
    Step: Fn(&mut S, &[TrainingExample], f64) -> Result<f64> + Sync,
{
    if cfg.threads == 0 || cfg.batch == 0 || cfg.epochs == 0 {
        return Err(Error::Config(
            "threads, batch and epochs must be at least 1".into(),
        ));
    }
    if vocab.is_empty() {
        return Err(qembed_core::Error::EmptyVocabulary.into());
    }
    let ranges = source.partitions(cfg.threads)?;
    let planned = (cfg.epochs as u64 * vocab.total_tokens()).max(1) as f64;
    let tokens = AtomicU64::new(0);
    let examples = AtomicU64::new(0);
    let results: Vec<Result<(f64, Vec<f64>)>> = std::thread::scope(|sc| {
        let handles: Vec<_> = ranges
            .iter()
            .enumerate()
            .map(|(t, &(start, end))| {
                let (init, step, tokens, examples) = (&init, &step, &tokens, &examples);
                sc.spawn(move || -> Result<(f64, Vec<f64>)> {
                    let mut state = init(t);
                    let mut batch = Vec::with_capacity(cfg.batch);
                    let mut total_loss = 0.0;
                    let mut windows = Vec::new();
                    let (mut wsum, mut wn) = (0.0, 0usize);
                    for epoch in 0..cfg.epochs {
                        let reader = source.open_range(start, end, cfg.corpus)?;
                        let mut ids = IdSentences::new(reader, vocab);
                        let rng = stream_rng(cfg.seed, (epoch * cfg.threads + t) as u64 + 1);
                        let mut stream =
                            TrainingPairStream::new(&mut ids, vocab, table, cfg.pairs, rng)?;
                        let mut seen = 0;
                        loop {
                            let ex = stream.next_example()?;
                            let read = stream.tokens_read();
                            tokens.fetch_add(read - seen, Ordering::Relaxed);
                            seen = read;
                            let end_of_epoch = ex.is_none();
                            if let Some(e) = ex {
                                batch.push(e);
                            }
                            if batch.len() == cfg.batch || (end_of_epoch && !batch.is_empty()) {
                                let progress =
                                    (tokens.load(Ordering::Relaxed) as f64 / planned).min(1.0);
                                let loss = step(&mut state, &batch, progress)?;
                                examples.fetch_add(batch.len() as u64, Ordering::Relaxed);
                                total_loss += loss;
                                if t == 0 {
                                    wsum += loss;
                                    wn += batch.len();
                                    if wn >= cfg.report_window {
                                        windows.push(wsum / wn as f64);
                                        wsum = 0.0;
                                        wn = 0;
                                    }
                                }
                                batch.clear();
                            }
                            if end_of_epoch {
                                break;
                            }
                        }
                        drop(stream);
                        if let Some(e) = ids.error.take() {
                            return Err(e.into());
                        }
                    }
                    Ok((total_loss, windows))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    });
    let mut report = TrainReport::default();
    let mut loss = 0.0;
    for (t, r) in results.into_iter().enumerate() {
        let (l, w) = r?;
        loss += l;
        if t == 0 {
            report.window_losses = w;
        }
    }
    report.examples = examples.into_inner();
    report.tokens = tokens.into_inner();
    report.mean_loss = if report.examples > 0 {
        loss / report.examples as f64
    } else {
        0.0
    };
    Ok(report)
}
