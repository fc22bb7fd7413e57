//! Skip-gram with negative sampling over real or complex embeddings.
//!
//! Gradients are explicit (see `qembed_core::loss`). Rows live in lock-free
//! shared tables laid out as `[re | im]`; workers update them hogwild.

use std::sync::atomic::AtomicU32;

use qembed_core::complex::{ComplexSlice, ComplexSliceMut};
use qembed_core::embedding::EmbeddingTable;
use qembed_core::loss::{LossKind, Objective, DEFAULT_SCALE};
use qembed_core::optim::OptimizerKind;
use qembed_core::rng::stream_rng;
use qembed_core::sampling::{NegativeSamplingTable, TrainingExample, DEFAULT_TABLE_SIZE};
use qembed_core::{ComplexEmbeddingMatrix, EmbeddingMode, Vocabulary};

use crate::corpus::CorpusSource;
use crate::driver::{drive, DriveConfig, TrainReport};
use crate::error::{Error, Result};
use crate::shared::SharedRows;

/// Random streams reserved for table initialization.
pub(crate) const FOCAL_INIT_STREAM: u64 = u64::MAX;
pub(crate) const CONTEXT_INIT_STREAM: u64 = u64::MAX - 1;

/// Linear decay stops at this fraction of the initial step size.
pub const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub loss: LossKind,
    /// Scaling factor `D`.
    pub scale: f64,
    /// Initial step size; SGD decays it linearly, Adam keeps it fixed.
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub sigmoid_table: bool,
    pub table_size: usize,
    pub drive: DriveConfig,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 64,
            loss: LossKind::ComplexSigmoidNormalized,
            scale: DEFAULT_SCALE,
            lr: 0.025,
            optimizer: OptimizerKind::Sgd,
            sigmoid_table: false,
            table_size: DEFAULT_TABLE_SIZE,
            drive: DriveConfig::default(),
        }
    }
}

impl SgnsConfig {
    pub fn mode(&self) -> EmbeddingMode {
        if self.loss.is_complex() {
            EmbeddingMode::Complex
        } else {
            EmbeddingMode::Real
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.drive.pairs.negatives == 0 {
            return Err(Error::Config("need at least one negative".into()));
        }
        if !(self.lr > 0.0) || !(self.scale > 0.0) {
            return Err(Error::Config("learning rate and D must be positive".into()));
        }
        Ok(())
    }

    /// Step size at `progress` through the planned tokens.
    pub fn lr_at(&self, progress: f64) -> f64 {
        match self.optimizer {
            OptimizerKind::Sgd => self.lr * (1.0 - progress).max(MIN_LR_FRACTION),
            OptimizerKind::Adam => self.lr,
        }
    }
}

pub(crate) fn to_rows(t: &EmbeddingTable) -> Vec<f64> {
    let complex = t.mode() == EmbeddingMode::Complex;
    let mut out = Vec::with_capacity(t.rows() * t.params_per_word());
    for i in 0..t.rows() {
        out.extend(t.row_re(i).iter().map(|&x| x as f64));
        if complex {
            out.extend(t.row_im(i).iter().map(|&x| x as f64));
        }
    }
    out
}

pub(crate) fn from_rows(values: &[f64], dim: usize, mode: EmbeddingMode) -> Result<EmbeddingTable> {
    let width = if mode == EmbeddingMode::Complex {
        2 * dim
    } else {
        dim
    };
    let rows = values.len() / width;
    let mut re = Vec::with_capacity(rows * dim);
    let mut im = vec![0f32; rows * dim];
    for (i, row) in values.chunks_exact(width).enumerate() {
        re.extend(row[..dim].iter().map(|&x| x as f32));
        if mode == EmbeddingMode::Complex {
            for (o, &x) in im[i * dim..(i + 1) * dim].iter_mut().zip(&row[dim..]) {
                *o = x as f32;
            }
        }
    }
    Ok(EmbeddingTable::from_parts(dim, mode, re, im)?)
}

/// Complex view of a `[re | im]` row, or of a real row with zero imaginary part.
pub(crate) fn view<'a>(row: &'a [f64], dim: usize, zeros: &'a [f64]) -> ComplexSlice<'a> {
    if row.len() == 2 * dim {
        ComplexSlice::new(&row[..dim], &row[dim..])
    } else {
        ComplexSlice::new(row, zeros)
    }
}

pub(crate) fn view_mut<'a>(
    row: &'a mut [f64],
    dim: usize,
    scratch: &'a mut [f64],
) -> ComplexSliceMut<'a> {
    if row.len() == 2 * dim {
        let (re, im) = row.split_at_mut(dim);
        ComplexSliceMut::new(re, im)
    } else {
        ComplexSliceMut::new(row, scratch)
    }
}

struct Worker {
    focal: Vec<f64>,
    other: Vec<f64>,
    g_focal: Vec<f64>,
    g_other: Vec<f64>,
    zeros: Vec<f64>,
    scratch_a: Vec<f64>,
    scratch_b: Vec<f64>,
    /// `(is_focal, row)` for each pending gradient in `grads`.
    pending: Vec<(bool, u32)>,
    grads: Vec<f64>,
}

/// Initial focal and context tables, uniform in `(-0.5/d, 0.5/d)`.
pub fn initial_tables(
    rows: usize,
    dim: usize,
    mode: EmbeddingMode,
    seed: u64,
) -> (EmbeddingTable, EmbeddingTable) {
    let focal = EmbeddingTable::random(rows, dim, mode, &mut stream_rng(seed, FOCAL_INIT_STREAM));
    let context =
        EmbeddingTable::random(rows, dim, mode, &mut stream_rng(seed, CONTEXT_INIT_STREAM));
    (focal, context)
}

/// Trains focal and context embeddings on `source`.
///
/// Bit-identical across runs for a fixed seed when `threads == 1`.
pub fn train_sgns(
    source: &CorpusSource,
    vocab: &Vocabulary,
    cfg: &SgnsConfig,
) -> Result<(ComplexEmbeddingMatrix, TrainReport)> {
    cfg.validate()?;
    let (f0, c0) = initial_tables(vocab.len(), cfg.dim, cfg.mode(), cfg.drive.seed);
    train_sgns_from(source, vocab, cfg, f0, c0)
}

/// As [`train_sgns`], from given initial tables.
pub fn train_sgns_from(
    source: &CorpusSource,
    vocab: &Vocabulary,
    cfg: &SgnsConfig,
    focal: EmbeddingTable,
    context: EmbeddingTable,
) -> Result<(ComplexEmbeddingMatrix, TrainReport)> {
    cfg.validate()?;
    let mode = cfg.mode();
    let d = cfg.dim;
    if focal.rows() != vocab.len() || context.rows() != vocab.len() {
        return Err(qembed_core::Error::DimensionMismatch(focal.rows(), vocab.len()).into());
    }
    if focal.dim() != d || context.dim() != d || focal.mode() != mode || context.mode() != mode {
        return Err(Error::Config(
            "initial tables do not match the configured shape".into(),
        ));
    }
    let table = NegativeSamplingTable::build(vocab, cfg.table_size.max(vocab.len()))?;
    let mut objective = Objective::new(cfg.loss, cfg.scale)?;
    if cfg.sigmoid_table {
        objective = objective.with_sigmoid_table();
    }
    let width = if mode == EmbeddingMode::Complex {
        2 * d
    } else {
        d
    };
    let ftab = SharedRows::<AtomicU32>::new(width, &to_rows(&focal), cfg.optimizer);
    let ctab = SharedRows::<AtomicU32>::new(width, &to_rows(&context), cfg.optimizer);
    drop((focal, context));

    let init = |_t: usize| Worker {
        focal: vec![0.0; width],
        other: vec![0.0; width],
        g_focal: vec![0.0; width],
        g_other: vec![0.0; width],
        zeros: vec![0.0; d],
        scratch_a: vec![0.0; d],
        scratch_b: vec![0.0; d],
        pending: Vec::new(),
        grads: Vec::new(),
    };
    let step = |w: &mut Worker, batch: &[TrainingExample], progress: f64| -> Result<f64> {
        let mut loss = 0.0;
        w.pending.clear();
        w.grads.clear();
        for ex in batch {
            ftab.read(ex.focal as usize, &mut w.focal);
            w.g_focal.fill(0.0);
            let terms =
                std::iter::once((ex.context, true)).chain(ex.negatives.iter().map(|&n| (n, false)));
            for (row, positive) in terms {
                ctab.read(row as usize, &mut w.other);
                w.g_other.fill(0.0);
                loss += objective.term_grad(
                    view(&w.focal, d, &w.zeros),
                    view(&w.other, d, &w.zeros),
                    positive,
                    &mut view_mut(&mut w.g_focal, d, &mut w.scratch_a),
                    &mut view_mut(&mut w.g_other, d, &mut w.scratch_b),
                )?;
                w.pending.push((false, row));
                w.grads.extend_from_slice(&w.g_other);
            }
            w.pending.push((true, ex.focal));
            w.grads.extend_from_slice(&w.g_focal);
        }
        if !loss.is_finite() {
            return Err(qembed_core::Error::NonFinite.into());
        }
        let lr = cfg.lr_at(progress);
        for (&(is_focal, row), g) in w.pending.iter().zip(w.grads.chunks_exact(width)) {
            let t = if is_focal { &ftab } else { &ctab };
            t.apply(row as usize, g, lr);
        }
        Ok(loss)
    };
    let report = drive(source, vocab, &table, &cfg.drive, init, step)?;
    let focal = from_rows(&ftab.to_vec(), d, mode)?;
    let context = from_rows(&ctab.to_vec(), d, mode)?;
    Ok((ComplexEmbeddingMatrix::new(focal, context)?, report))
}
