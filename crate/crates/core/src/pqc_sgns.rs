//! Skip-gram losses where words are realized as prepared circuit states.
//!
//! * focal-only: the focal word is `psi(theta_f)`, context and negatives are
//!   arbitrary complex vectors normalized inside the score;
//! * both roles: every word in the sample is a prepared state, and the
//!   overlap is used without a normalization step.
//!
//! Both use the scaled-fidelity sigmoid loss.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::{ComplexSlice, ComplexVector};
use crate::error::Result;
use crate::loss::{LossKind, Objective};
use crate::pqc::{vector_jacobian, Ansatz, StateVector};

/// Gradients of one focal-circuit sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalCircuitGradient {
    pub loss: f64,
    pub focal_angles: Vec<f64>,
    pub context: ComplexVector,
    pub negatives: Vec<ComplexVector>,
}

/// Gradients of one sample where every word is a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct BothCircuitGradient {
    pub loss: f64,
    pub focal_angles: Vec<f64>,
    pub context_angles: Vec<f64>,
    pub negative_angles: Vec<Vec<f64>>,
}

pub fn focal_objective(scale: f64) -> Result<Objective> {
    Objective::new(LossKind::ComplexSigmoidNormalized, scale)
}

pub fn both_objective(scale: f64) -> Result<Objective> {
    Ok(Objective::new(LossKind::ComplexSigmoidNormalized, scale)?.with_unit_inputs())
}

fn cotangent(g: &ComplexVector) -> Vec<Complex64> {
    g.re.iter()
        .zip(&g.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect()
}

pub fn focal_circuit_loss(
    scale: f64,
    ansatz: &Ansatz,
    focal_angles: &[f64],
    context: ComplexSlice<'_>,
    negatives: &[ComplexSlice<'_>],
) -> Result<f64> {
    let psi = ansatz.prepare(focal_angles)?.to_complex_vector();
    focal_objective(scale)?.sample_loss(psi.view(), context, negatives)
}

pub fn focal_circuit_gradient(
    scale: f64,
    ansatz: &Ansatz,
    focal_angles: &[f64],
    context: ComplexSlice<'_>,
    negatives: &[ComplexSlice<'_>],
) -> Result<FocalCircuitGradient> {
    let state = ansatz.prepare(focal_angles)?;
    let psi = state.to_complex_vector();
    let (loss, g) = focal_objective(scale)?.sample_gradient(psi.view(), context, negatives)?;
    let focal_angles = vector_jacobian(ansatz, focal_angles, &state, &cotangent(&g.focal))?;
    Ok(FocalCircuitGradient {
        loss,
        focal_angles,
        context: g.context,
        negatives: g.negatives,
    })
}

pub fn both_circuit_loss(
    scale: f64,
    ansatz: &Ansatz,
    focal: &[f64],
    context: &[f64],
    negatives: &[&[f64]],
) -> Result<f64> {
    let obj = both_objective(scale)?;
    let f = ansatz.prepare(focal)?.to_complex_vector();
    let c = ansatz.prepare(context)?.to_complex_vector();
    let ns: Vec<ComplexVector> = negatives
        .iter()
        .map(|p| Ok(ansatz.prepare(p)?.to_complex_vector()))
        .collect::<Result<_>>()?;
    let views: Vec<ComplexSlice<'_>> = ns.iter().map(|v| v.view()).collect();
    obj.sample_loss(f.view(), c.view(), &views)
}

pub fn both_circuit_gradient(
    scale: f64,
    ansatz: &Ansatz,
    focal: &[f64],
    context: &[f64],
    negatives: &[&[f64]],
) -> Result<BothCircuitGradient> {
    let obj = both_objective(scale)?;
    let fs = ansatz.prepare(focal)?;
    let cs = ansatz.prepare(context)?;
    let nss: Vec<StateVector> = negatives
        .iter()
        .map(|p| ansatz.prepare(p))
        .collect::<Result<_>>()?;
    let f = fs.to_complex_vector();
    let c = cs.to_complex_vector();
    let ns: Vec<ComplexVector> = nss.iter().map(|s| s.to_complex_vector()).collect();
    let views: Vec<ComplexSlice<'_>> = ns.iter().map(|v| v.view()).collect();
    let (loss, g) = obj.sample_gradient(f.view(), c.view(), &views)?;
    let negative_angles = negatives
        .iter()
        .zip(&nss)
        .zip(&g.negatives)
        .map(|((p, s), gn)| vector_jacobian(ansatz, p, s, &cotangent(gn)))
        .collect::<Result<_>>()?;
    Ok(BothCircuitGradient {
        loss,
        focal_angles: vector_jacobian(ansatz, focal, &fs, &cotangent(&g.focal))?,
        context_angles: vector_jacobian(ansatz, context, &cs, &cotangent(&g.context))?,
        negative_angles,
    })
}
