//! Fitting one circuit per word to a fixed target state.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::complex::{ComplexVector, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::optim::{Optimizer, OptimizerKind};
use crate::pqc::{infidelity_cotangent, vector_jacobian, Ansatz};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_iters: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    /// Stop once the infidelity drops below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: 5000,
            lr: 0.01,
            optimizer: OptimizerKind::Adam,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub word_id: u32,
    /// `1 - F` of the best parameters seen, in `[0, 1]`.
    pub final_infidelity: f64,
    /// Optimizer steps taken.
    pub iterations: usize,
}

/// Angles uniform in `[0, 2 pi)`, drawn from the stream for `word_id`.
pub fn initial_angles(n_params: usize, seed: u64, word_id: u32) -> Vec<f64> {
    let mut rng = stream_rng(seed, word_id as u64);
    (0..n_params)
        .map(|_| rng.gen_range(0.0..core::f64::consts::TAU))
        .collect()
}

/// Maximizes `|<psi(params)|target>|^2` from a seeded random start and
/// returns the best parameters seen.
pub fn fit_word_pqc(
    target: &ComplexVector,
    ansatz: &Ansatz,
    config: &FitConfig,
    word_id: u32,
) -> Result<(FitResult, Vec<f64>)> {
    if target.dim() != ansatz.dim() {
        return Err(Error::DimensionMismatch(target.dim(), ansatz.dim()));
    }
    let dev = (target.norm_sqr() - 1.0).abs();
    if !(dev <= NORM_TOLERANCE) {
        return Err(Error::NotNormalized(dev));
    }
    let amps: Vec<Complex64> = target.to_amplitudes();
    let init = initial_angles(ansatz.param_count(), config.seed, word_id);
    fit_from(&amps, ansatz, config, word_id, init)
}

/// As [`fit_word_pqc`], from explicit starting angles.
pub fn fit_from(
    target: &[Complex64],
    ansatz: &Ansatz,
    config: &FitConfig,
    word_id: u32,
    mut params: Vec<f64>,
) -> Result<(FitResult, Vec<f64>)> {
    ansatz.check_params(&params)?;
    let mut opt = Optimizer::new(config.optimizer, params.len(), config.lr);
    let mut best = params.clone();
    let mut best_inf = f64::INFINITY;
    let mut steps = 0;
    loop {
        let state = ansatz.prepare(&params)?;
        let (inf, cot) = infidelity_cotangent(&state, target)?;
        let inf = inf.max(0.0);
        if inf < best_inf {
            best_inf = inf;
            best.copy_from_slice(&params);
        }
        if best_inf < config.tolerance || steps >= config.max_iters {
            break;
        }
        let grad = vector_jacobian(ansatz, &params, &state, &cot)?;
        opt.step(&mut params, &grad);
        steps += 1;
    }
    Ok((
        FitResult {
            word_id,
            final_infidelity: best_inf.min(1.0),
            iterations: steps,
        },
        best,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::normalize;

    #[test]
    fn realizable_target_is_recovered() {
        let a = Ansatz::catalog("A5", 3, 2).unwrap();
        let truth = initial_angles(a.param_count(), 99, 0);
        let target = ComplexVector::from_amplitudes(a.prepare(&truth).unwrap().amplitudes());
        let cfg = FitConfig {
            max_iters: 5000,
            ..FitConfig::default()
        };
        let (res, _) = fit_word_pqc(&target, &a, &cfg, 3).unwrap();
        assert!(res.final_infidelity <= 1e-6, "{res:?}");
    }

    #[test]
    fn deterministic_per_word() {
        let a = Ansatz::catalog("A14", 2, 2).unwrap();
        let t = normalize(
            &ComplexVector::new(
                alloc::vec![0.3, -0.1, 0.5, 0.2],
                alloc::vec![0.1, 0.4, -0.3, 0.0],
            )
            .unwrap(),
        )
        .unwrap();
        let cfg = FitConfig {
            max_iters: 200,
            ..FitConfig::default()
        };
        let r1 = fit_word_pqc(&t, &a, &cfg, 7).unwrap();
        let r2 = fit_word_pqc(&t, &a, &cfg, 7).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn rejects_bad_targets() {
        let a = Ansatz::catalog("A5", 2, 1).unwrap();
        let wrong_dim = ComplexVector::from_real(alloc::vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            fit_word_pqc(&wrong_dim, &a, &FitConfig::default(), 0),
            Err(Error::DimensionMismatch(2, 4))
        ));
        let unnorm = ComplexVector::from_real(alloc::vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            fit_word_pqc(&unnorm, &a, &FitConfig::default(), 0),
            Err(Error::NotNormalized(_))
        ));
    }
}
