//! First-order optimizers over flat parameter vectors.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "adam" => Some(OptimizerKind::Adam),
            "sgd" => Some(OptimizerKind::Sgd),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    /// One Adam update of a single coordinate at (1-based) step `t`.
    /// Returns the increment to add to the parameter.
    #[inline]
    pub fn delta(&self, lr: f64, g: f64, m: &mut f64, v: &mut f64, t: u64) -> f64 {
        *m = self.beta1 * *m + (1.0 - self.beta1) * g;
        *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
        let mhat = *m / (1.0 - libm::pow(self.beta1, t as f64));
        let vhat = *v / (1.0 - libm::pow(self.beta2, t as f64));
        -lr * mhat / (libm::sqrt(vhat) + self.eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Adam {
        lr: f64,
        config: AdamConfig,
        m: Vec<f64>,
        v: Vec<f64>,
        t: u64,
    },
    Sgd {
        lr: f64,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n_params: usize, lr: f64) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                config: AdamConfig::default(),
                m: vec![0.0; n_params],
                v: vec![0.0; n_params],
                t: 0,
            },
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        match self {
            Optimizer::Adam {
                lr,
                config,
                m,
                v,
                t,
            } => {
                *t += 1;
                for i in 0..params.len() {
                    params[i] += config.delta(*lr, grad[i], &mut m[i], &mut v[i], *t);
                }
            }
            Optimizer::Sgd { lr } => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= *lr * g;
                }
            }
        }
    }
}
