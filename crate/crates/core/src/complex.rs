//! Complex vectors stored as parallel real and imaginary arrays.
//!
//! The inner product is conjugate-linear in its first argument:
//! `<u|v> = sum_j conj(u_j) v_j`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `| ||v||^2 - 1 |` for a vector to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Borrowed complex vector.
#[derive(Debug, Clone, Copy)]
pub struct ComplexSlice<'a> {
    pub re: &'a [f64],
    pub im: &'a [f64],
}

/// Mutably borrowed complex vector, used as a gradient accumulator.
#[derive(Debug)]
pub struct ComplexSliceMut<'a> {
    pub re: &'a mut [f64],
    pub im: &'a mut [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        ComplexVector {
            re: vec![0.0; dim],
            im: vec![0.0; dim],
        }
    }

    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch(re.len(), im.len()));
        }
        if re.is_empty() {
            return Err(Error::DimensionMismatch(0, 1));
        }
        if re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexVector { re, im })
    }

    /// A vector with zero imaginary parts.
    pub fn from_real(re: Vec<f64>) -> Result<Self> {
        let im = vec![0.0; re.len()];
        Self::new(re, im)
    }

    pub fn from_amplitudes(amps: &[Complex64]) -> Self {
        ComplexVector {
            re: amps.iter().map(|z| z.re).collect(),
            im: amps.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_amplitudes(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn get(&self, j: usize) -> Complex64 {
        Complex64::new(self.re[j], self.im[j])
    }

    pub fn view(&self) -> ComplexSlice<'_> {
        ComplexSlice {
            re: &self.re,
            im: &self.im,
        }
    }

    pub fn view_mut(&mut self) -> ComplexSliceMut<'_> {
        ComplexSliceMut {
            re: &mut self.re,
            im: &mut self.im,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.view().norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Multiplies every component by `e^{i theta}`.
    pub fn rotate_phase(&self, theta: f64) -> Self {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        let mut out = self.clone();
        for j in 0..self.dim() {
            out.re[j] = c * self.re[j] - s * self.im[j];
            out.im[j] = s * self.re[j] + c * self.im[j];
        }
        out
    }
}

impl<'a> ComplexSlice<'a> {
    pub fn new(re: &'a [f64], im: &'a [f64]) -> Self {
        debug_assert_eq!(re.len(), im.len());
        ComplexSlice { re, im }
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn to_vector(&self) -> ComplexVector {
        ComplexVector {
            re: self.re.to_vec(),
            im: self.im.to_vec(),
        }
    }
}

impl<'a> ComplexSliceMut<'a> {
    pub fn new(re: &'a mut [f64], im: &'a mut [f64]) -> Self {
        debug_assert_eq!(re.len(), im.len());
        ComplexSliceMut { re, im }
    }

    pub fn fill_zero(&mut self) {
        self.re.iter_mut().for_each(|x| *x = 0.0);
        self.im.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// `(Re <u|v>, Im <u|v>)` without dimension checks.
#[inline]
pub fn inner_parts(u: ComplexSlice<'_>, v: ComplexSlice<'_>) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for j in 0..u.re.len() {
        re += u.re[j] * v.re[j] + u.im[j] * v.im[j];
        im += u.re[j] * v.im[j] - u.im[j] * v.re[j];
    }
    (re, im)
}

/// Real dot product of the real parts.
#[inline]
pub fn real_dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_dims(u: ComplexSlice<'_>, v: ComplexSlice<'_>) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(())
}

fn check_normalized(v: ComplexSlice<'_>) -> Result<()> {
    let dev = (v.norm_sqr() - 1.0).abs();
    if !(dev <= NORM_TOLERANCE) {
        return Err(Error::NotNormalized(dev));
    }
    Ok(())
}

pub fn inner_product(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    check_dims(u.view(), v.view())?;
    let (re, im) = inner_parts(u.view(), v.view());
    Ok(Complex64::new(re, im))
}

/// Squared magnitude of the inner product, `|<u|v>|^2`, with no normalization.
pub fn overlap_sqr(u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    check_dims(u.view(), v.view())?;
    let (a, b) = inner_parts(u.view(), v.view());
    Ok(a * a + b * b)
}

/// Fidelity `|<u|v>|^2` of two normalized vectors.
pub fn fidelity(u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    check_dims(u.view(), v.view())?;
    check_normalized(u.view())?;
    check_normalized(v.view())?;
    let (a, b) = inner_parts(u.view(), v.view());
    Ok((a * a + b * b).min(1.0))
}

/// Fidelity after normalizing both inputs.
pub fn fidelity_normalizing(u: ComplexSlice<'_>, v: ComplexSlice<'_>) -> Result<f64> {
    check_dims(u, v)?;
    let nu = u.norm_sqr();
    let nv = v.norm_sqr();
    if nu <= 0.0 || nv <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let (a, b) = inner_parts(u, v);
    Ok(((a * a + b * b) / (nu * nv)).min(1.0))
}

/// `D (2 F(u, v) - 1)`, in `[-D, D]` for normalized inputs.
pub fn scaled_fidelity_normalized(u: &ComplexVector, v: &ComplexVector, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::InvalidConfig("scaling factor must be positive"));
    }
    Ok(scale * (2.0 * fidelity(u, v)? - 1.0))
}

/// `2 |<u|v>|^2 - D` for arbitrary (unnormalized) inputs.
pub fn scaled_overlap_unnormalized(
    u: &ComplexVector,
    v: &ComplexVector,
    scale: f64,
) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::InvalidConfig("scaling factor must be positive"));
    }
    Ok(2.0 * overlap_sqr(u, v)? - scale)
}

pub fn normalize(v: &ComplexVector) -> Result<ComplexVector> {
    let n2 = v.norm_sqr();
    if !n2.is_finite() {
        return Err(Error::NonFinite);
    }
    if n2 <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let inv = 1.0 / libm::sqrt(n2);
    Ok(ComplexVector {
        re: v.re.iter().map(|x| x * inv).collect(),
        im: v.im.iter().map(|x| x * inv).collect(),
    })
}

/// Cosine similarity of two real vectors.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let nu = real_dot(u, u);
    let nv = real_dot(v, v);
    if nu <= 0.0 || nv <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(real_dot(u, v) / libm::sqrt(nu * nv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn cv(re: &[f64], im: &[f64]) -> ComplexVector {
        ComplexVector::new(re.to_vec(), im.to_vec()).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let e0 = cv(&[1.0, 0.0, 0.0], &[0.0; 3]);
        assert_eq!(inner_product(&e0, &e0).unwrap(), Complex64::new(1.0, 0.0));
        let a = cv(&[1.0, 0.0], &[0.0, 0.0]);
        let b = cv(&[0.0, 1.0], &[0.0, 0.0]);
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
        // conj(i) * 1 = -i
        let i0 = cv(&[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(inner_product(&i0, &a).unwrap(), Complex64::new(0.0, -1.0));
        assert!(matches!(
            inner_product(&a, &e0),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let a = cv(&[1.0, 0.0], &[0.0, 0.0]);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        let plus = cv(&[S, S], &[0.0, 0.0]);
        assert!((fidelity(&a, &plus).unwrap() - 0.5).abs() < 1e-15);
        let u = cv(&[S, 0.0], &[0.0, S]);
        let v = cv(&[S, 0.0], &[0.0, -S]);
        assert!(fidelity(&u, &v).unwrap().abs() < 1e-15);
        let big = cv(&[2.0, 0.0], &[0.0, 0.0]);
        assert!(matches!(fidelity(&big, &a), Err(Error::NotNormalized(_))));
        assert!((fidelity_normalizing(big.view(), plus.view()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scaled_variants() {
        let a = cv(&[1.0, 0.0], &[0.0, 0.0]);
        let b = cv(&[0.0, 1.0], &[0.0, 0.0]);
        let plus = cv(&[S, S], &[0.0, 0.0]);
        assert!((scaled_fidelity_normalized(&a, &a, 3.5).unwrap() - 3.5).abs() < 1e-15);
        assert!((scaled_fidelity_normalized(&a, &b, 3.5).unwrap() + 3.5).abs() < 1e-15);
        assert!(scaled_fidelity_normalized(&a, &plus, 7.0).unwrap().abs() < 1e-14);

        // |<u|v>|^2 = D when u = v = sqrt(sqrt(D)) e0
        let d = 3.5;
        let r = libm::sqrt(libm::sqrt(d));
        let u = cv(&[r, 0.0], &[0.0, 0.0]);
        assert!((scaled_overlap_unnormalized(&u, &u, d).unwrap() - d).abs() < 1e-12);
        assert!((scaled_overlap_unnormalized(&u, &b, d).unwrap() + d).abs() < 1e-15);
        let h = libm::sqrt(libm::sqrt(d / 2.0));
        let w = cv(&[h, 0.0], &[0.0, 0.0]);
        assert!(scaled_overlap_unnormalized(&w, &w, d).unwrap().abs() < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        let v = cv(&[3.0, 4.0], &[0.0, 0.0]);
        let n = normalize(&v).unwrap();
        assert!((n.re[0] - 0.6).abs() < 1e-15 && (n.re[1] - 0.8).abs() < 1e-15);
        let again = normalize(&n).unwrap();
        for j in 0..2 {
            assert!((again.re[j] - n.re[j]).abs() < 1e-12);
        }
        assert_eq!(normalize(&ComplexVector::zeros(2)), Err(Error::ZeroNorm));
    }

    fn unit_vector(dim: usize) -> impl Strategy<Value = ComplexVector> {
        proptest::collection::vec(-1.0f64..1.0, 2 * dim)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
            .prop_map(move |v| {
                let raw = ComplexVector::new(v[..dim].to_vec(), v[dim..].to_vec()).unwrap();
                normalize(&raw).unwrap()
            })
    }

    proptest! {
        #[test]
        fn fidelity_symmetric_and_bounded(u in unit_vector(8), v in unit_vector(8)) {
            let f1 = fidelity(&u, &v).unwrap();
            let f2 = fidelity(&v, &u).unwrap();
            prop_assert!((f1 - f2).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&f1));
            prop_assert!((fidelity(&u, &u).unwrap() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn fidelity_phase_invariant(u in unit_vector(6), v in unit_vector(6), theta in 0.0f64..6.3) {
            let f = fidelity(&u, &v).unwrap();
            let g = fidelity(&u.rotate_phase(theta), &v).unwrap();
            prop_assert!((f - g).abs() <= 1e-12);
        }

        #[test]
        fn scaled_fidelity_in_range(u in unit_vector(4), v in unit_vector(4), d in 0.1f64..10.0) {
            let s = scaled_fidelity_normalized(&u, &v, d).unwrap();
            prop_assert!(s >= -d - 1e-12 && s <= d + 1e-12);
        }
    }
}
