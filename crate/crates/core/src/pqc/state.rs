//! Dense statevector. Qubit 0 is the least significant bit of the
//! amplitude index.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::gate::{Gate, Mat2};
use crate::complex::ComplexVector;
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n_qubits: usize,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidConfig("qubit count must be in 1..=24"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amps, n_qubits })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(StateVector {
            n_qubits: n.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn to_complex_vector(&self) -> ComplexVector {
        ComplexVector::from_amplitudes(&self.amps)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        check_gate(gate, self.n_qubits)?;
        apply_unchecked(&mut self.amps, gate);
        Ok(())
    }

    pub fn apply_all<'a, I: IntoIterator<Item = &'a Gate>>(&mut self, gates: I) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }
}

impl StateVector {
    pub(crate) fn apply_trusted(&mut self, gate: &Gate) {
        apply_unchecked(&mut self.amps, gate);
    }
}

pub(crate) fn check_gate(gate: &Gate, n_qubits: usize) -> Result<()> {
    let t = gate.target();
    if t >= n_qubits {
        return Err(Error::InvalidQubit { qubit: t, n_qubits });
    }
    if let Some(c) = gate.control() {
        if c >= n_qubits {
            return Err(Error::InvalidQubit { qubit: c, n_qubits });
        }
        if c == t {
            return Err(Error::RepeatedQubit(c));
        }
    }
    Ok(())
}

/// Applies `gate` to raw amplitudes whose qubit indices were already checked.
pub(crate) fn apply_unchecked(amps: &mut [Complex64], gate: &Gate) {
    apply_block(amps, &gate.matrix(), gate.target(), gate.control());
}

#[inline]
pub(crate) fn apply_block(amps: &mut [Complex64], m: &Mat2, target: usize, control: Option<usize>) {
    let tbit = 1usize << target;
    let cmask = control.map_or(0, |c| 1usize << c);
    for i in 0..amps.len() {
        if i & tbit != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tbit;
        let (a, b) = (amps[i], amps[j]);
        amps[i] = m[0][0] * a + m[0][1] * b;
        amps[j] = m[1][0] * a + m[1][1] * b;
    }
}

/// `<lambda| M_full |phi>` where `M_full` applies `m` on `target` inside the
/// control-1 subspace and is zero elsewhere.
#[inline]
pub(crate) fn block_expectation(
    lambda: &[Complex64],
    phi: &[Complex64],
    m: &Mat2,
    target: usize,
    control: Option<usize>,
) -> Complex64 {
    let tbit = 1usize << target;
    let cmask = control.map_or(0, |c| 1usize << c);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..phi.len() {
        if i & tbit != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tbit;
        let (a, b) = (phi[i], phi[j]);
        acc += lambda[i].conj() * (m[0][0] * a + m[0][1] * b);
        acc += lambda[j].conj() * (m[1][0] * a + m[1][1] * b);
    }
    acc
}
