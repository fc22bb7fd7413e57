//! Exact statevector simulation of parameterised circuits.

pub mod adjoint;
pub mod ansatz;
pub mod gate;
pub mod state;

use alloc::vec::Vec;

use num_complex::Complex64;

pub use adjoint::{infidelity_cotangent, value_and_gradient, vector_jacobian};
pub use ansatz::{catalog_layer, catalog_params_per_layer, Ansatz, Op, CATALOG_IDS};
pub use gate::Gate;
pub use state::StateVector;

use crate::error::{Error, Result};

/// `|<psi(a)|psi(b)>|^2` from the two prepared statevectors.
pub fn pqc_fidelity(ansatz: &Ansatz, params_a: &[f64], params_b: &[f64]) -> Result<f64> {
    let a = ansatz.prepare(params_a)?;
    let b = ansatz.prepare(params_b)?;
    a.fidelity(&b)
}

/// The same overlap read off the composed circuit `U_b^dag U_a |0...0>`:
/// the probability of measuring all zeros.
pub fn pqc_fidelity_inverse_circuit(
    ansatz: &Ansatz,
    params_a: &[f64],
    params_b: &[f64],
) -> Result<f64> {
    let ua = ansatz.circuit(params_a)?;
    let ub = ansatz.circuit(params_b)?;
    let mut state = StateVector::zero(ansatz.n_qubits())?;
    for (g, _) in &ua {
        state.apply_trusted(g);
    }
    for (g, _) in ub.iter().rev() {
        state.apply_trusted(&g.inverse());
    }
    Ok(state.amplitudes()[0].norm_sqr())
}

/// One angle row per word, all sharing a single ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct WordCircuitTable {
    ansatz: Ansatz,
    angles: Vec<f64>,
}

impl WordCircuitTable {
    /// `angles.len()` must be a multiple of the ansatz parameter count.
    pub fn new(ansatz: Ansatz, angles: Vec<f64>) -> Result<Self> {
        let p = ansatz.param_count();
        if p == 0 || !angles.len().is_multiple_of(p) {
            return Err(Error::ParamCount {
                expected: p,
                got: angles.len(),
            });
        }
        if angles.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(WordCircuitTable { ansatz, angles })
    }

    pub fn from_rows(ansatz: Ansatz, rows: &[Vec<f64>]) -> Result<Self> {
        for r in rows {
            ansatz.check_params(r)?;
        }
        Self::new(ansatz, rows.concat())
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    pub fn rows(&self) -> usize {
        self.angles.len() / self.ansatz.param_count()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.ansatz.param_count();
        &self.angles[i * p..(i + 1) * p]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let p = self.ansatz.param_count();
        &mut self.angles[i * p..(i + 1) * p]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn prepare(&self, i: usize) -> Result<StateVector> {
        self.ansatz.prepare(self.row(i))
    }

    pub fn prepare_all(&self) -> Result<Vec<Vec<Complex64>>> {
        (0..self.rows())
            .map(|i| Ok(self.prepare(i)?.into_amplitudes()))
            .collect()
    }
}

/// Prepares one state per parameter row.
pub fn prepare_all(ansatz: &Ansatz, rows: &[Vec<f64>]) -> Result<Vec<Vec<Complex64>>> {
    rows.iter()
        .map(|p| Ok(ansatz.prepare(p)?.into_amplitudes()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use alloc::vec;
    use rand::Rng;

    #[test]
    fn identical_params_have_unit_fidelity() {
        let a = Ansatz::catalog("A5", 4, 2).unwrap();
        let mut rng = stream_rng(1, 1);
        let p: Vec<f64> = (0..a.param_count())
            .map(|_| rng.gen_range(0.0..core::f64::consts::TAU))
            .collect();
        assert!((pqc_fidelity(&a, &p, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!((pqc_fidelity_inverse_circuit(&a, &p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_ry_against_matrix_oracle() {
        // |+> then RY(pi): RY(pi)|+> = (cos(pi/2) - sin(pi/2), sin(pi/2) + cos(pi/2))/sqrt2
        //                            = (-1, 1)/sqrt2 = -|->, so <+|RY(pi)|+> = 0.
        let a = Ansatz::custom("ry", 1, 1, vec![Op::Ry(0)]).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let theta = core::f64::consts::PI;
        let (c, s) = (libm::cos(theta / 2.0), libm::sin(theta / 2.0));
        let out = [c * h - s * h, s * h + c * h];
        let overlap = h * out[0] + h * out[1];
        let oracle = overlap * overlap;
        assert!(oracle.abs() < 1e-15);
        assert!((pqc_fidelity(&a, &[0.0], &[theta]).unwrap() - oracle).abs() < 1e-12);
        assert!(
            (pqc_fidelity_inverse_circuit(&a, &[0.0], &[theta]).unwrap() - oracle).abs() < 1e-12
        );
        // theta = pi/2
        let theta = core::f64::consts::FRAC_PI_2;
        let (c, s) = (libm::cos(theta / 2.0), libm::sin(theta / 2.0));
        let out = [c * h - s * h, s * h + c * h];
        let ov = h * out[0] + h * out[1];
        assert!((pqc_fidelity(&a, &[0.0], &[theta]).unwrap() - ov * ov).abs() < 1e-12);
    }

    #[test]
    fn statevector_and_inverse_circuit_agree() {
        let mut rng = stream_rng(2, 2);
        for id in ["A5", "A14", "A2", "A11"] {
            let a = Ansatz::catalog(id, 4, 3).unwrap();
            for _ in 0..10 {
                let p: Vec<f64> = (0..a.param_count())
                    .map(|_| rng.gen_range(0.0..core::f64::consts::TAU))
                    .collect();
                let q: Vec<f64> = (0..a.param_count())
                    .map(|_| rng.gen_range(0.0..core::f64::consts::TAU))
                    .collect();
                let f1 = pqc_fidelity(&a, &p, &q).unwrap();
                let f2 = pqc_fidelity_inverse_circuit(&a, &p, &q).unwrap();
                assert!((f1 - f2).abs() < 1e-10);
            }
        }
    }
}
