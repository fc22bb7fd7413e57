//! Reverse-mode (adjoint) gradients through a prepared circuit state.
//!
//! For a real objective `f(psi)` the caller supplies the cotangent
//! `g_j = df/d Re(psi_j) + i df/d Im(psi_j)`; then
//! `df/d theta_k = Re <lambda_k| dU_k |phi_{k-1}>` with
//! `lambda_k = U_{k+1}^dag ... U_L^dag g`. Both `phi` and `lambda` are
//! walked backwards by applying inverse gates, so memory stays at two
//! statevectors.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::ansatz::Ansatz;
use super::state::{apply_block, apply_unchecked, block_expectation, StateVector};
use crate::error::{Error, Result};

/// Pulls the cotangent `g` at the prepared `state` back to the angles.
pub fn vector_jacobian(
    ansatz: &Ansatz,
    params: &[f64],
    state: &StateVector,
    cotangent: &[Complex64],
) -> Result<Vec<f64>> {
    if cotangent.len() != state.dim() {
        return Err(Error::DimensionMismatch(cotangent.len(), state.dim()));
    }
    if state.dim() != ansatz.dim() {
        return Err(Error::DimensionMismatch(state.dim(), ansatz.dim()));
    }
    let gates = ansatz.circuit(params)?;
    let mut grad = vec![0.0; params.len()];
    let mut phi = state.amplitudes().to_vec();
    let mut lambda = cotangent.to_vec();
    for (gate, slot) in gates.iter().rev() {
        let inv = gate.inverse();
        apply_unchecked(&mut phi, &inv);
        if let (Some(k), Some(dm)) = (slot, gate.derivative()) {
            grad[*k] = block_expectation(&lambda, &phi, &dm, gate.target(), gate.control()).re;
        }
        apply_block(&mut lambda, &inv.matrix(), inv.target(), inv.control());
    }
    Ok(grad)
}

/// Value and angle gradient of `objective(psi(params))`. The closure returns
/// the objective value and its cotangent at the state.
pub fn value_and_gradient<F>(
    ansatz: &Ansatz,
    params: &[f64],
    objective: F,
) -> Result<(f64, Vec<f64>)>
where
    F: FnOnce(&StateVector) -> Result<(f64, Vec<Complex64>)>,
{
    let state = ansatz.prepare(params)?;
    let (value, cot) = objective(&state)?;
    let grad = vector_jacobian(ansatz, params, &state, &cot)?;
    Ok((value, grad))
}

/// Infidelity `1 - |<psi|target>|^2` and its cotangent `-2 conj(z) target`,
/// where `z = <psi|target>`.
pub fn infidelity_cotangent(
    state: &StateVector,
    target: &[Complex64],
) -> Result<(f64, Vec<Complex64>)> {
    if target.len() != state.dim() {
        return Err(Error::DimensionMismatch(target.len(), state.dim()));
    }
    let z: Complex64 = state
        .amplitudes()
        .iter()
        .zip(target)
        .map(|(a, t)| a.conj() * t)
        .sum();
    let zc = z.conj();
    let cot = target.iter().map(|t| -2.0 * zc * t).collect();
    Ok((1.0 - z.norm_sqr(), cot))
}
