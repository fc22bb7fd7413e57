//! Lock-free parameter rows for hogwild training.
//!
//! Threads read and write rows without synchronization. Each scalar is an
//! atomic accessed with `Relaxed` ordering, so concurrent updates to the
//! same coordinate can be lost but never torn.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use qembed_core::optim::{AdamConfig, OptimizerKind};

/// A float cell stored as raw bits.
pub trait Cell: Send + Sync {
    fn new(x: f64) -> Self;
    fn get(&self) -> f64;
    fn set(&self, x: f64);
}

impl Cell for AtomicU32 {
    fn new(x: f64) -> Self {
        AtomicU32::new((x as f32).to_bits())
    }

    #[inline]
    fn get(&self) -> f64 {
        f32::from_bits(self.load(Ordering::Relaxed)) as f64
    }

    #[inline]
    fn set(&self, x: f64) {
        self.store((x as f32).to_bits(), Ordering::Relaxed)
    }
}

impl Cell for AtomicU64 {
    fn new(x: f64) -> Self {
        AtomicU64::new(x.to_bits())
    }

    #[inline]
    fn get(&self) -> f64 {
        f64::from_bits(self.load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, x: f64) {
        self.store(x.to_bits(), Ordering::Relaxed)
    }
}

pub type F32Rows = SharedRows<AtomicU32>;
pub type F64Rows = SharedRows<AtomicU64>;

enum Update<C> {
    Sgd,
    /// Lazy Adam: moments and step counts only advance for touched rows.
    Adam {
        config: AdamConfig,
        m: Box<[C]>,
        v: Box<[C]>,
        steps: Box<[AtomicU64]>,
    },
}

/// `rows x width` parameters plus optimizer state.
pub struct SharedRows<C> {
    width: usize,
    data: Box<[C]>,
    update: Update<C>,
}

impl<C: Cell> SharedRows<C> {
    pub fn new(width: usize, values: &[f64], optimizer: OptimizerKind) -> Self {
        assert!(width > 0 && values.len().is_multiple_of(width));
        let data: Box<[C]> = values.iter().map(|&x| C::new(x)).collect();
        let update = match optimizer {
            OptimizerKind::Sgd => Update::Sgd,
            OptimizerKind::Adam => Update::Adam {
                config: AdamConfig::default(),
                m: (0..values.len()).map(|_| C::new(0.0)).collect(),
                v: (0..values.len()).map(|_| C::new(0.0)).collect(),
                steps: (0..values.len() / width)
                    .map(|_| AtomicU64::new(0))
                    .collect(),
            },
        };
        SharedRows {
            width,
            data,
            update,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn read(&self, row: usize, out: &mut [f64]) {
        let base = row * self.width;
        for (o, c) in out.iter_mut().zip(&self.data[base..base + self.width]) {
            *o = c.get();
        }
    }

    /// One descent step on `row` with gradient `grad`.
    pub fn apply(&self, row: usize, grad: &[f64], lr: f64) {
        let base = row * self.width;
        match &self.update {
            Update::Sgd => {
                for (c, g) in self.data[base..base + self.width].iter().zip(grad) {
                    c.set(c.get() - lr * g);
                }
            }
            Update::Adam {
                config,
                m,
                v,
                steps,
            } => {
                let t = steps[row].fetch_add(1, Ordering::Relaxed) + 1;
                for (j, &g) in grad.iter().enumerate().take(self.width) {
                    let k = base + j;
                    let (mut mk, mut vk) = (m[k].get(), v[k].get());
                    let d = config.delta(lr, g, &mut mk, &mut vk, t);
                    m[k].set(mk);
                    v[k].set(vk);
                    self.data[k].set(self.data[k].get() + d);
                }
            }
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.data.iter().map(Cell::get).collect()
    }
}
