//! Circuit-based word embeddings: corpus training with the focal word (or
//! both words) realized as a circuit state, and two-stage fitting of one
//! circuit per word to existing complex embeddings.

use std::ops::RangeInclusive;
use std::sync::atomic::{AtomicU32, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use qembed_core::complex::{normalize, ComplexSlice, ComplexVector};
use qembed_core::embedding::EmbeddingTable;
use qembed_core::eval::{evaluate, CircuitScorer, SimilarityDataset};
use qembed_core::fit::{fit_word_pqc, initial_angles, FitConfig, FitResult};
use qembed_core::loss::DEFAULT_SCALE;
use qembed_core::optim::OptimizerKind;
use qembed_core::pqc::{Ansatz, WordCircuitTable};
use qembed_core::pqc_sgns::{both_circuit_gradient, focal_circuit_gradient};
use qembed_core::rng::derive_seed;
use qembed_core::sampling::{NegativeSamplingTable, TrainingExample, DEFAULT_TABLE_SIZE};
use qembed_core::{EmbeddingMode, Vocabulary};

use crate::corpus::CorpusSource;
use crate::driver::{drive, DriveConfig, TrainReport};
use crate::error::{Error, Result};
use crate::shared::SharedRows;
use crate::train::{from_rows, initial_tables, to_rows};

/// Seed mixer for the context angle table of the two-circuit regime.
const CONTEXT_ANGLE_STREAM: u64 = 1;

/// Epochs used by the two-circuit regime unless overridden.
pub const BOTH_DEFAULT_EPOCHS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqcTrainConfig {
    pub scale: f64,
    /// Step size for angles and context components.
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub table_size: usize,
    pub drive: DriveConfig,
}

impl Default for PqcTrainConfig {
    fn default() -> Self {
        PqcTrainConfig {
            scale: DEFAULT_SCALE,
            lr: 0.01,
            optimizer: OptimizerKind::Adam,
            table_size: DEFAULT_TABLE_SIZE,
            drive: DriveConfig::default(),
        }
    }
}

fn angle_table(ansatz: &Ansatz, rows: usize, seed: u64) -> Vec<f64> {
    let p = ansatz.param_count();
    let mut out = Vec::with_capacity(rows * p);
    for w in 0..rows {
        out.extend(initial_angles(p, seed, w as u32));
    }
    out
}

fn check_setup(
    vocab: &Vocabulary,
    ansatz: &Ansatz,
    cfg: &PqcTrainConfig,
) -> Result<NegativeSamplingTable> {
    if !(cfg.lr > 0.0) || !(cfg.scale > 0.0) {
        return Err(Error::Config("learning rate and D must be positive".into()));
    }
    if ansatz.param_count() == 0 {
        return Err(Error::Config("ansatz has no trainable angles".into()));
    }
    Ok(NegativeSamplingTable::build(
        vocab,
        cfg.table_size.max(vocab.len()),
    )?)
}

fn lr_at(cfg: &PqcTrainConfig, progress: f64) -> f64 {
    match cfg.optimizer {
        OptimizerKind::Sgd => cfg.lr * (1.0 - progress).max(crate::train::MIN_LR_FRACTION),
        OptimizerKind::Adam => cfg.lr,
    }
}

fn read_vector(t: &SharedRows<AtomicU32>, row: u32, dim: usize, buf: &mut [f64]) -> ComplexVector {
    t.read(row as usize, buf);
    ComplexVector {
        re: buf[..dim].to_vec(),
        im: buf[dim..].to_vec(),
    }
}

fn flat(g: &ComplexVector) -> Vec<f64> {
    let mut v = g.re.clone();
    v.extend_from_slice(&g.im);
    v
}

/// Focal words are circuit states; context words are free complex vectors
/// normalized inside the loss.
pub fn train_pqc_focal(
    source: &CorpusSource,
    vocab: &Vocabulary,
    ansatz: &Ansatz,
    cfg: &PqcTrainConfig,
) -> Result<(WordCircuitTable, EmbeddingTable, TrainReport)> {
    let table = check_setup(vocab, ansatz, cfg)?;
    let d = ansatz.dim();
    let seed = cfg.drive.seed;
    let angles = SharedRows::<AtomicU64>::new(
        ansatz.param_count(),
        &angle_table(ansatz, vocab.len(), seed),
        cfg.optimizer,
    );
    let (_, c0) = initial_tables(vocab.len(), d, EmbeddingMode::Complex, seed);
    let ctx = SharedRows::<AtomicU32>::new(2 * d, &to_rows(&c0), cfg.optimizer);
    drop(c0);

    let init = |_| (vec![0.0; ansatz.param_count()], vec![0.0; 2 * d]);
    let step = |(theta, buf): &mut (Vec<f64>, Vec<f64>),
                batch: &[TrainingExample],
                progress: f64|
     -> Result<f64> {
        let mut loss = 0.0;
        let mut updates = Vec::with_capacity(batch.len());
        for ex in batch {
            angles.read(ex.focal as usize, theta);
            let c = read_vector(&ctx, ex.context, d, buf);
            let negs: Vec<ComplexVector> = ex
                .negatives
                .iter()
                .map(|&n| read_vector(&ctx, n, d, buf))
                .collect();
            let views: Vec<ComplexSlice<'_>> = negs.iter().map(|v| v.view()).collect();
            let g = focal_circuit_gradient(cfg.scale, ansatz, theta, c.view(), &views)?;
            loss += g.loss;
            updates.push((ex, g));
        }
        let lr = lr_at(cfg, progress);
        for (ex, g) in updates {
            angles.apply(ex.focal as usize, &g.focal_angles, lr);
            ctx.apply(ex.context as usize, &flat(&g.context), lr);
            for (&n, gn) in ex.negatives.iter().zip(&g.negatives) {
                ctx.apply(n as usize, &flat(gn), lr);
            }
        }
        Ok(loss)
    };
    let report = drive(source, vocab, &table, &cfg.drive, init, step)?;
    let focal = WordCircuitTable::new(ansatz.clone(), angles.to_vec())?;
    let context = from_rows(&ctx.to_vec(), d, EmbeddingMode::Complex)?;
    Ok((focal, context, report))
}

/// Focal and context words are both circuit states, with separate angle
/// tables sharing one ansatz.
pub fn train_pqc_both(
    source: &CorpusSource,
    vocab: &Vocabulary,
    ansatz: &Ansatz,
    cfg: &PqcTrainConfig,
) -> Result<(WordCircuitTable, WordCircuitTable, TrainReport)> {
    let table = check_setup(vocab, ansatz, cfg)?;
    let p = ansatz.param_count();
    let seed = cfg.drive.seed;
    let focal =
        SharedRows::<AtomicU64>::new(p, &angle_table(ansatz, vocab.len(), seed), cfg.optimizer);
    let context = SharedRows::<AtomicU64>::new(
        p,
        &angle_table(ansatz, vocab.len(), derive_seed(seed, CONTEXT_ANGLE_STREAM)),
        cfg.optimizer,
    );

    let init = |_| ();
    let step = |_: &mut (), batch: &[TrainingExample], progress: f64| -> Result<f64> {
        let mut loss = 0.0;
        let mut updates = Vec::with_capacity(batch.len());
        for ex in batch {
            let mut f = vec![0.0; p];
            focal.read(ex.focal as usize, &mut f);
            let mut c = vec![0.0; p];
            context.read(ex.context as usize, &mut c);
            let negs: Vec<Vec<f64>> = ex
                .negatives
                .iter()
                .map(|&n| {
                    let mut v = vec![0.0; p];
                    context.read(n as usize, &mut v);
                    v
                })
                .collect();
            let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
            let g = both_circuit_gradient(cfg.scale, ansatz, &f, &c, &refs)?;
            loss += g.loss;
            updates.push((ex, g));
        }
        let lr = lr_at(cfg, progress);
        for (ex, g) in updates {
            focal.apply(ex.focal as usize, &g.focal_angles, lr);
            context.apply(ex.context as usize, &g.context_angles, lr);
            for (&n, gn) in ex.negatives.iter().zip(&g.negative_angles) {
                context.apply(n as usize, gn, lr);
            }
        }
        Ok(loss)
    };
    let report = drive(source, vocab, &table, &cfg.drive, init, step)?;
    Ok((
        WordCircuitTable::new(ansatz.clone(), focal.to_vec())?,
        WordCircuitTable::new(ansatz.clone(), context.to_vec())?,
        report,
    ))
}

/// Distribution of per-word infidelities.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FitSummary {
    pub words: usize,
    pub mean_infidelity: f64,
    pub median_infidelity: f64,
    pub max_infidelity: f64,
    pub fraction_within_1e3: f64,
    pub mean_iterations: f64,
    /// `(upper bound, count)` per decade: `[0, 1e-6)`, `[1e-6, 1e-5)`, ...,
    /// `[1e-1, 1]`.
    pub histogram: Vec<(f64, usize)>,
}

impl FitSummary {
    pub fn new(results: &[FitResult]) -> Self {
        let n = results.len();
        let mut inf: Vec<f64> = results.iter().map(|r| r.final_infidelity).collect();
        inf.sort_by(f64::total_cmp);
        let median = match n {
            0 => 0.0,
            _ if n % 2 == 1 => inf[n / 2],
            _ => 0.5 * (inf[n / 2 - 1] + inf[n / 2]),
        };
        let uppers = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
        let mut histogram: Vec<(f64, usize)> = uppers.iter().map(|&u| (u, 0)).collect();
        for &x in &inf {
            let b = uppers
                .iter()
                .position(|&u| x < u)
                .unwrap_or(uppers.len() - 1);
            histogram[b].1 += 1;
        }
        let denom = n.max(1) as f64;
        FitSummary {
            words: n,
            mean_infidelity: inf.iter().sum::<f64>() / denom,
            median_infidelity: median,
            max_infidelity: inf.last().copied().unwrap_or(0.0),
            fraction_within_1e3: inf.iter().filter(|&&x| x <= 1e-3).count() as f64 / denom,
            mean_iterations: results.iter().map(|r| r.iterations as f64).sum::<f64>() / denom,
            histogram,
        }
    }
}

impl std::fmt::Display for FitSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "words fitted        {}", self.words)?;
        writeln!(f, "mean infidelity     {:.3e}", self.mean_infidelity)?;
        writeln!(f, "median infidelity   {:.3e}", self.median_infidelity)?;
        writeln!(f, "max infidelity      {:.3e}", self.max_infidelity)?;
        writeln!(
            f,
            "within 1e-3         {:.2}%",
            100.0 * self.fraction_within_1e3
        )?;
        writeln!(f, "mean iterations     {:.1}", self.mean_iterations)?;
        let mut lo = 0.0;
        for &(hi, count) in &self.histogram {
            writeln!(f, "  [{lo:.0e}, {hi:.0e})  {count}")?;
            lo = hi;
        }
        Ok(())
    }
}

/// Fits one circuit per row of `targets` (rows normalized first), in
/// parallel. Results do not depend on `threads`.
pub fn fit_vocabulary(
    targets: &EmbeddingTable,
    ansatz: &Ansatz,
    cfg: &FitConfig,
    threads: usize,
) -> Result<(WordCircuitTable, Vec<FitResult>)> {
    let rows: Vec<usize> = (0..targets.rows()).collect();
    let (angles, results) = fit_rows(targets, &rows, ansatz, cfg, threads)?;
    Ok((
        WordCircuitTable::new(ansatz.clone(), angles.concat())?,
        results,
    ))
}

/// Fits the listed rows only; output follows `rows` order.
pub fn fit_rows(
    targets: &EmbeddingTable,
    rows: &[usize],
    ansatz: &Ansatz,
    cfg: &FitConfig,
    threads: usize,
) -> Result<(Vec<Vec<f64>>, Vec<FitResult>)> {
    if targets.dim() != ansatz.dim() {
        return Err(qembed_core::Error::DimensionMismatch(targets.dim(), ansatz.dim()).into());
    }
    let next = AtomicUsize::new(0);
    type Fitted = (Vec<f64>, FitResult);
    let out: Mutex<Vec<Option<Fitted>>> = Mutex::new(vec![None; rows.len()]);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|sc| {
        for _ in 0..threads.max(1) {
            sc.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= rows.len() || failure.lock().unwrap().is_some() {
                    break;
                }
                let row = rows[i];
                let r = normalize(&targets.vector(row))
                    .and_then(|t| fit_word_pqc(&t, ansatz, cfg, row as u32));
                match r {
                    Ok((res, params)) => out.lock().unwrap()[i] = Some((params, res)),
                    Err(e) => {
                        *failure.lock().unwrap() = Some(Error::Format(format!("row {row}: {e}")));
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(out
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|x| x.expect("every row fitted"))
        .unzip())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub ansatz: String,
    pub layers: usize,
    pub params_per_word: usize,
    pub mean_infidelity: f64,
    /// One entry per dataset; `None` when fewer than two pairs are covered.
    pub correlations: Vec<Option<f64>>,
}

/// Fits every `(ansatz, layers)` cell and evaluates the fitted states.
///
/// Only words occurring in `datasets` are fitted when `datasets_only` is
/// set; fits are per word, so correlations are unchanged by this and only
/// the infidelity mean is taken over the smaller set.
#[allow(clippy::too_many_arguments)]
pub fn ansatz_sweep(
    words: &[String],
    targets: &EmbeddingTable,
    ids: &[String],
    layers: RangeInclusive<usize>,
    datasets: &[SimilarityDataset],
    cfg: &FitConfig,
    threads: usize,
    datasets_only: bool,
) -> Result<Vec<SweepRow>> {
    let full = Vocabulary::from_words(words.to_vec())?;
    let rows: Vec<usize> = if datasets_only {
        let mut keep = std::collections::BTreeSet::new();
        for ds in datasets {
            for p in ds.pairs() {
                if let (Some(a), Some(b)) = (full.id(&p.a), full.id(&p.b)) {
                    keep.insert(a as usize);
                    keep.insert(b as usize);
                }
            }
        }
        keep.into_iter().collect()
    } else {
        (0..words.len()).collect()
    };
    let sub = Vocabulary::from_words(rows.iter().map(|&r| words[r].clone()).collect())?;
    let mut out = Vec::new();
    for id in ids {
        for l in layers.clone() {
            let ansatz = Ansatz::for_dimension(id, targets.dim(), l)?;
            let (angles, results) = fit_rows(targets, &rows, &ansatz, cfg, threads)?;
            let table = WordCircuitTable::from_rows(ansatz.clone(), &angles)?;
            let scorer = CircuitScorer::new(&sub, &table)?;
            let correlations = datasets
                .iter()
                .map(|ds| evaluate(&scorer, ds).ok().map(|r| r.spearman))
                .collect();
            out.push(SweepRow {
                ansatz: id.clone(),
                layers: l,
                params_per_word: ansatz.param_count(),
                mean_infidelity: FitSummary::new(&results).mean_infidelity,
                correlations,
            });
        }
    }
    Ok(out)
}

/// CSV with columns `ansatz_id, layers, params, mean_infidelity` and one
/// correlation column per dataset.
pub fn write_sweep_csv<W: std::io::Write>(
    rows: &[SweepRow],
    datasets: &[String],
    w: W,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec![
        "ansatz_id".to_string(),
        "layers".into(),
        "params".into(),
        "mean_infidelity".into(),
    ];
    header.extend(datasets.iter().cloned());
    csv.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.ansatz.clone(),
            r.layers.to_string(),
            r.params_per_word.to_string(),
            format!("{:e}", r.mean_infidelity),
        ];
        rec.extend(
            r.correlations
                .iter()
                .map(|c| c.map(|x| format!("{x:.6}")).unwrap_or_default()),
        );
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, CorpusOptions};
    use qembed_core::eval::ScoredPair;
    use qembed_core::sampling::PairConfig;

    fn toy_cfg() -> PqcTrainConfig {
        PqcTrainConfig {
            table_size: 1000,
            drive: DriveConfig {
                epochs: 1,
                pairs: PairConfig {
                    window: 1,
                    subsample: None,
                    ..PairConfig::default()
                },
                ..DriveConfig::default()
            },
            ..PqcTrainConfig::default()
        }
    }

    #[test]
    fn a5_six_qubits_three_layers_trains_162_angles() {
        let src = CorpusSource::from_text("a b a b");
        let vocab = build_vocabulary(&src, 1, CorpusOptions::default()).unwrap();
        let a = Ansatz::catalog("A5", 6, 3).unwrap();
        let (f, c, _) = train_pqc_focal(&src, &vocab, &a, &toy_cfg()).unwrap();
        assert_eq!(f.row(0).len(), 162);
        assert_eq!(c.dim(), 64);
    }

    #[test]
    fn focal_training_raises_overlap() {
        let src = CorpusSource::from_text(&"a b ".repeat(150));
        let vocab = build_vocabulary(&src, 1, CorpusOptions::default()).unwrap();
        let (a, b) = (
            vocab.id("a").unwrap() as usize,
            vocab.id("b").unwrap() as usize,
        );
        let ansatz = Ansatz::catalog("A14", 2, 1).unwrap();
        let cfg = toy_cfg();
        let theta0 = initial_angles(ansatz.param_count(), cfg.drive.seed, a as u32);
        let (_, c0) = initial_tables(2, 4, EmbeddingMode::Complex, cfg.drive.seed);
        let overlap = |theta: &[f64], ctx: &EmbeddingTable| {
            let psi = ansatz.prepare(theta).unwrap().to_complex_vector();
            qembed_core::complex::fidelity_normalizing(psi.view(), ctx.vector(b).view()).unwrap()
        };
        let before = overlap(&theta0, &c0);
        let (f, c, _) = train_pqc_focal(&src, &vocab, &ansatz, &cfg).unwrap();
        let after = overlap(f.row(a), &c);
        assert!(after > before, "{before} -> {after}");
    }

    #[test]
    fn both_regime_is_deterministic() {
        let src = CorpusSource::from_text(&"a b c ".repeat(20));
        let vocab = build_vocabulary(&src, 1, CorpusOptions::default()).unwrap();
        let ansatz = Ansatz::catalog("A14", 2, 1).unwrap();
        let r1 = train_pqc_both(&src, &vocab, &ansatz, &toy_cfg()).unwrap();
        let r2 = train_pqc_both(&src, &vocab, &ansatz, &toy_cfg()).unwrap();
        assert_eq!(r1.0, r2.0);
        assert_eq!(r1.1, r2.1);
        assert_ne!(r1.0, r1.1);
    }

    fn random_targets(rows: usize, dim: usize, seed: u64) -> EmbeddingTable {
        initial_tables(rows, dim, EmbeddingMode::Complex, seed).0
    }

    #[test]
    fn fits_are_deterministic_and_thread_independent() {
        let t = random_targets(5, 4, 3);
        let a = Ansatz::catalog("A5", 2, 2).unwrap();
        let cfg = FitConfig {
            max_iters: 300,
            ..FitConfig::default()
        };
        let r1 = fit_vocabulary(&t, &a, &cfg, 1).unwrap();
        let r2 = fit_vocabulary(&t, &a, &cfg, 3).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn permuting_rows_permutes_results() {
        let t = random_targets(4, 4, 9);
        let a = Ansatz::catalog("A14", 2, 2).unwrap();
        let cfg = FitConfig {
            max_iters: 200,
            ..FitConfig::default()
        };
        let (p1, r1) = fit_rows(&t, &[0, 1, 2, 3], &a, &cfg, 1).unwrap();
        let (p2, r2) = fit_rows(&t, &[3, 1, 0, 2], &a, &cfg, 2).unwrap();
        for (k, &row) in [3usize, 1, 0, 2].iter().enumerate() {
            assert_eq!(p2[k], p1[row]);
            assert_eq!(r2[k], r1[row]);
        }
    }

    #[test]
    fn zero_rows_are_rejected() {
        let t = EmbeddingTable::zeros(2, 4, EmbeddingMode::Complex);
        let a = Ansatz::catalog("A14", 2, 1).unwrap();
        assert!(fit_vocabulary(&t, &a, &FitConfig::default(), 1).is_err());
    }

    #[test]
    fn summary_histogram() {
        let rs: Vec<FitResult> = [0.0, 5e-7, 2e-4, 0.5, 1.0]
            .iter()
            .enumerate()
            .map(|(i, &x)| FitResult {
                word_id: i as u32,
                final_infidelity: x,
                iterations: 10,
            })
            .collect();
        let s = FitSummary::new(&rs);
        assert_eq!(
            s.histogram.iter().map(|h| h.1).collect::<Vec<_>>(),
            vec![2, 0, 0, 1, 0, 0, 2]
        );
        assert_eq!(s.median_infidelity, 2e-4);
        assert!((s.fraction_within_1e3 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn sweep_table_shape() {
        let words: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let t = random_targets(4, 4, 1);
        let pair = |a: &str, b: &str, h| ScoredPair {
            a: a.into(),
            b: b.into(),
            human: h,
        };
        let ds = SimilarityDataset::new(
            "toy",
            vec![
                pair("a", "b", 1.0),
                pair("a", "c", 2.0),
                pair("b", "d", 3.0),
            ],
        )
        .unwrap();
        let cfg = FitConfig {
            max_iters: 50,
            ..FitConfig::default()
        };
        let ids = vec!["A5".to_string(), "A14".to_string()];
        let rows = ansatz_sweep(&words, &t, &ids, 1..=2, &[ds], &cfg, 1, true).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(
            (
                rows[3].ansatz.as_str(),
                rows[3].layers,
                rows[3].params_per_word
            ),
            ("A14", 2, 16)
        );
        let mut csv = Vec::new();
        write_sweep_csv(&rows, &["toy".into()], &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("ansatz_id,layers,params,mean_infidelity,toy\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
