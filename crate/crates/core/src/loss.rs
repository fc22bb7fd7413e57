//! Skip-gram negative-sampling losses and their explicit gradients.
//!
//! Every loss is a sum of per-pair terms: one positive term for the true
//! (focal, context) pair and one negative term per sampled negative. Each
//! term is a link function applied to a pair score:
//!
//! | kind                         | score `s(u, w)`          | positive      | negative     |
//! |------------------------------|--------------------------|---------------|--------------|
//! | `RealSigmoid`                | `u . w` (real parts)     | `-log s(s)`   | `-log s(-s)` |
//! | `ComplexSigmoidNormalized`   | `D (2 F(u, w) - 1)`      | `-log s(s)`   | `-log s(-s)` |
//! | `ComplexSigmoidUnnormalized` | `2 |<u|w>|^2 - D`        | `-log s(s)`   | `-log s(-s)` |
//! | `ComplexDirect`              | `F(u, w)`                | `-log p`      | `-log(1-p)`  |
//!
//! where `F` is the fidelity of the normalized vectors and `p` is `F`
//! clamped to `[eps, 1 - eps]`. Normalization happens inside the score, so
//! gradients flow through it.

use alloc::vec::Vec;

use crate::complex::{inner_parts, real_dot, ComplexSlice, ComplexSliceMut, ComplexVector};
use crate::error::{Error, Result};

/// Default scaling factor `D`.
pub const DEFAULT_SCALE: f64 = 3.5;
/// Clamp for probabilities in the direct loss.
pub const DIRECT_EPS: f64 = 1e-7;

const SIGMOID_TABLE_SIZE: usize = 1000;
const SIGMOID_TABLE_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    RealSigmoid,
    ComplexSigmoidNormalized,
    ComplexDirect,
    ComplexSigmoidUnnormalized,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::RealSigmoid,
        LossKind::ComplexSigmoidNormalized,
        LossKind::ComplexDirect,
        LossKind::ComplexSigmoidUnnormalized,
    ];

    pub fn is_complex(self) -> bool {
        self != LossKind::RealSigmoid
    }

    /// Whether the score normalizes its inputs.
    pub fn normalizes(self) -> bool {
        matches!(
            self,
            LossKind::ComplexSigmoidNormalized | LossKind::ComplexDirect
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::RealSigmoid => "real",
            LossKind::ComplexSigmoidNormalized => "sigmoid",
            LossKind::ComplexDirect => "direct",
            LossKind::ComplexSigmoidUnnormalized => "unnorm-sigmoid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        LossKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow; `-log sigmoid(x) = softplus(-x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Precomputed sigmoid on `[-6, 6]`, saturating outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidTable {
    values: Vec<f64>,
}

impl SigmoidTable {
    pub fn new() -> Self {
        let values = (0..SIGMOID_TABLE_SIZE)
            .map(|i| {
                let x = (i as f64 / SIGMOID_TABLE_SIZE as f64 * 2.0 - 1.0) * SIGMOID_TABLE_MAX;
                sigmoid(x)
            })
            .collect();
        SigmoidTable { values }
    }

    #[inline]
    pub fn get(&self, x: f64) -> f64 {
        if x >= SIGMOID_TABLE_MAX {
            return 1.0;
        }
        if x <= -SIGMOID_TABLE_MAX {
            return 0.0;
        }
        let i = ((x + SIGMOID_TABLE_MAX) * (SIGMOID_TABLE_SIZE as f64 / SIGMOID_TABLE_MAX / 2.0))
            as usize;
        self.values[i.min(SIGMOID_TABLE_SIZE - 1)]
    }
}

impl Default for SigmoidTable {
    fn default() -> Self {
        Self::new()
    }
}

/// A loss variant together with its constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub kind: LossKind,
    /// Scaling factor `D` of the sigmoid variants.
    pub scale: f64,
    /// Skip the normalization inside the score; for inputs that are unit
    /// norm by construction (prepared circuit states).
    pub unit_inputs: bool,
    sigmoid_table: Option<SigmoidTable>,
}

/// Gradient of one sample's loss with respect to every argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGradient {
    pub focal: ComplexVector,
    pub context: ComplexVector,
    pub negatives: Vec<ComplexVector>,
}

struct Score {
    s: f64,
    a: f64,
    b: f64,
    fid: f64,
    nu: f64,
    nw: f64,
}

impl Objective {
    pub fn new(kind: LossKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidConfig("scaling factor D must be positive"));
        }
        Ok(Objective {
            kind,
            scale,
            unit_inputs: false,
            sigmoid_table: None,
        })
    }

    pub fn with_unit_inputs(mut self) -> Self {
        self.unit_inputs = true;
        self
    }

    /// Use the precomputed sigmoid for gradient coefficients.
    pub fn with_sigmoid_table(mut self) -> Self {
        self.sigmoid_table = Some(SigmoidTable::new());
        self
    }

    #[inline]
    fn sig(&self, x: f64) -> f64 {
        match &self.sigmoid_table {
            Some(t) => t.get(x),
            None => sigmoid(x),
        }
    }

    fn score(&self, u: ComplexSlice<'_>, w: ComplexSlice<'_>) -> Result<Score> {
        if u.dim() != w.dim() {
            return Err(Error::DimensionMismatch(u.dim(), w.dim()));
        }
        if self.kind == LossKind::RealSigmoid {
            let s = real_dot(u.re, w.re);
            return Ok(Score {
                s,
                a: 0.0,
                b: 0.0,
                fid: 0.0,
                nu: 1.0,
                nw: 1.0,
            });
        }
        let (a, b) = inner_parts(u, w);
        let p = a * a + b * b;
        if self.kind == LossKind::ComplexSigmoidUnnormalized {
            return Ok(Score {
                s: 2.0 * p - self.scale,
                a,
                b,
                fid: p,
                nu: 1.0,
                nw: 1.0,
            });
        }
        let (nu, nw) = if self.unit_inputs {
            (1.0, 1.0)
        } else {
            (u.norm_sqr(), w.norm_sqr())
        };
        if nu <= 0.0 || nw <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let fid = p / (nu * nw);
        let s = match self.kind {
            LossKind::ComplexSigmoidNormalized => self.scale * (2.0 * fid - 1.0),
            _ => fid,
        };
        Ok(Score {
            s,
            a,
            b,
            fid,
            nu,
            nw,
        })
    }

    /// Loss value and `d loss / d score` for one pair.
    fn link(&self, s: f64, positive: bool) -> (f64, f64) {
        match self.kind {
            LossKind::ComplexDirect => {
                let p = s.clamp(DIRECT_EPS, 1.0 - DIRECT_EPS);
                let inside = s > DIRECT_EPS && s < 1.0 - DIRECT_EPS;
                if positive {
                    (-libm::log(p), if inside { -1.0 / s } else { 0.0 })
                } else {
                    (-libm::log1p(-p), if inside { 1.0 / (1.0 - s) } else { 0.0 })
                }
            }
            _ => {
                if positive {
                    (softplus(-s), self.sig(s) - 1.0)
                } else {
                    (softplus(s), self.sig(s))
                }
            }
        }
    }

    /// One pair's contribution to the loss.
    pub fn term(&self, u: ComplexSlice<'_>, w: ComplexSlice<'_>, positive: bool) -> Result<f64> {
        let sc = self.score(u, w)?;
        Ok(self.link(sc.s, positive).0)
    }

    /// Adds the gradient of one pair term to `gu` (focal) and `gw` (other
    /// side) and returns the term's loss.
    pub fn term_grad(
        &self,
        u: ComplexSlice<'_>,
        w: ComplexSlice<'_>,
        positive: bool,
        gu: &mut ComplexSliceMut<'_>,
        gw: &mut ComplexSliceMut<'_>,
    ) -> Result<f64> {
        let sc = self.score(u, w)?;
        let (loss, c) = self.link(sc.s, positive);
        if c == 0.0 {
            return Ok(loss);
        }
        let d = u.dim();
        match self.kind {
            LossKind::RealSigmoid => {
                for j in 0..d {
                    gu.re[j] += c * w.re[j];
                    gw.re[j] += c * u.re[j];
                }
                return Ok(loss);
            }
            LossKind::ComplexSigmoidUnnormalized => {
                // s = 2P - D
                accumulate_overlap(u, w, sc.a, sc.b, 2.0 * c, 0.0, 0.0, gu, gw);
            }
            LossKind::ComplexSigmoidNormalized | LossKind::ComplexDirect => {
                let ds_dfid = if self.kind == LossKind::ComplexDirect {
                    1.0
                } else {
                    2.0 * self.scale
                };
                let k = c * ds_dfid;
                let pc = k / (sc.nu * sc.nw);
                let (uc, wc) = if self.unit_inputs {
                    (0.0, 0.0)
                } else {
                    (k * 2.0 * sc.fid / sc.nu, k * 2.0 * sc.fid / sc.nw)
                };
                accumulate_overlap(u, w, sc.a, sc.b, pc, uc, wc, gu, gw);
            }
        }
        Ok(loss)
    }

    pub fn sample_loss(
        &self,
        focal: ComplexSlice<'_>,
        context: ComplexSlice<'_>,
        negatives: &[ComplexSlice<'_>],
    ) -> Result<f64> {
        let mut total = self.term(focal, context, true)?;
        for &n in negatives {
            total += self.term(focal, n, false)?;
        }
        Ok(total)
    }

    /// Loss and full gradient of one (focal, context, negatives) sample.
    pub fn sample_gradient(
        &self,
        focal: ComplexSlice<'_>,
        context: ComplexSlice<'_>,
        negatives: &[ComplexSlice<'_>],
    ) -> Result<(f64, SampleGradient)> {
        let d = focal.dim();
        let mut g = SampleGradient {
            focal: ComplexVector::zeros(d),
            context: ComplexVector::zeros(d),
            negatives: negatives.iter().map(|_| ComplexVector::zeros(d)).collect(),
        };
        let mut total = self.term_grad(
            focal,
            context,
            true,
            &mut g.focal.view_mut(),
            &mut g.context.view_mut(),
        )?;
        for (n, gn) in negatives.iter().zip(g.negatives.iter_mut()) {
            total += self.term_grad(
                focal,
                *n,
                false,
                &mut g.focal.view_mut(),
                &mut gn.view_mut(),
            )?;
        }
        Ok((total, g))
    }
}

/// Adds `pc * dP/du - uc * u` to `gu` and `pc * dP/dw - wc * w` to `gw`,
/// where `P = |<u|w>|^2 = a^2 + b^2`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn accumulate_overlap(
    u: ComplexSlice<'_>,
    w: ComplexSlice<'_>,
    a: f64,
    b: f64,
    pc: f64,
    uc: f64,
    wc: f64,
    gu: &mut ComplexSliceMut<'_>,
    gw: &mut ComplexSliceMut<'_>,
) {
    let (a2, b2) = (2.0 * pc * a, 2.0 * pc * b);
    for j in 0..u.re.len() {
        let (ur, ui, wr, wi) = (u.re[j], u.im[j], w.re[j], w.im[j]);
        gu.re[j] += a2 * wr + b2 * wi - uc * ur;
        gu.im[j] += a2 * wi - b2 * wr - uc * ui;
        gw.re[j] += a2 * ur - b2 * ui - wc * wr;
        gw.im[j] += a2 * ui + b2 * ur - wc * wi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const LN2: f64 = core::f64::consts::LN_2;

    fn zeros(d: usize) -> ComplexVector {
        ComplexVector::zeros(d)
    }

    fn e(d: usize, j: usize) -> ComplexVector {
        let mut v = zeros(d);
        v.re[j] = 1.0;
        v
    }

    #[test]
    fn real_sigmoid_at_zero_scores() {
        let o = Objective::new(LossKind::RealSigmoid, 3.5).unwrap();
        let f = e(4, 0);
        let c = e(4, 1);
        let negs: Vec<_> = (0..5).map(|_| e(4, 2)).collect();
        let views: Vec<_> = negs.iter().map(|v| v.view()).collect();
        let l = o.sample_loss(f.view(), c.view(), &views).unwrap();
        assert!((l - 6.0 * LN2).abs() < 1e-12);
        assert!((l - 4.158_883).abs() < 1e-6);
        assert!((o.sample_loss(f.view(), c.view(), &[]).unwrap() - LN2).abs() < 1e-12);
    }

    #[test]
    fn real_sigmoid_limit() {
        let o = Objective::new(LossKind::RealSigmoid, 3.5).unwrap();
        let mut f = e(2, 0);
        f.re[0] = 100.0;
        let c = e(2, 0);
        let mut n = e(2, 0);
        n.re[0] = -1.0;
        let l = o.sample_loss(f.view(), c.view(), &[n.view()]).unwrap();
        assert!(l > 0.0 && l < 1e-40);
    }

    #[test]
    fn real_sigmoid_closed_form_gradient() {
        let o = Objective::new(LossKind::RealSigmoid, 3.5).unwrap();
        let f = ComplexVector::from_real(vec![0.3, -0.2, 0.5]).unwrap();
        let c = ComplexVector::from_real(vec![0.1, 0.4, -0.7]).unwrap();
        let n = ComplexVector::from_real(vec![-0.6, 0.2, 0.2]).unwrap();
        let (_, g) = o.sample_gradient(f.view(), c.view(), &[n.view()]).unwrap();
        let sfc = sigmoid(real_dot(&f.re, &c.re));
        let sfn = sigmoid(real_dot(&f.re, &n.re));
        for j in 0..3 {
            let expect = (sfc - 1.0) * c.re[j] + sfn * n.re[j];
            assert!((g.focal.re[j] - expect).abs() < 1e-15);
            assert_eq!(g.focal.im[j], 0.0);
        }
    }

    #[test]
    fn complex_sigmoid_examples() {
        let o = Objective::new(LossKind::ComplexSigmoidNormalized, 3.5).unwrap();
        let f = e(4, 0);
        // -log sigmoid(3.5) = softplus(-3.5)
        let expect = libm::log1p(libm::exp(-3.5));
        assert!((expect - 0.029_750).abs() < 1e-6);
        assert!((o.term(f.view(), f.view(), true).unwrap() - expect).abs() < 1e-15);
        let orth = e(4, 1);
        assert!((o.term(f.view(), orth.view(), false).unwrap() - expect).abs() < 1e-15);

        // F = 1/2 everywhere -> six terms of log 2
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut half = zeros(4);
        half.re[0] = s;
        half.re[1] = s;
        let negs = vec![half.view(); 5];
        let l = o.sample_loss(f.view(), half.view(), &negs).unwrap();
        assert!((l - 6.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn direct_examples() {
        let o = Objective::new(LossKind::ComplexDirect, 3.5).unwrap();
        let f = e(4, 2);
        assert!(o.term(f.view(), f.view(), true).unwrap() < 1e-6);
        assert!(o.term(f.view(), e(4, 3).view(), false).unwrap() < 1e-6);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut half = zeros(4);
        half.re[2] = s;
        half.im[0] = s;
        let negs = vec![half.view(); 5];
        let l = o.sample_loss(f.view(), half.view(), &negs).unwrap();
        assert!((l - 6.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn zero_norm_in_normalized_modes() {
        for kind in [LossKind::ComplexSigmoidNormalized, LossKind::ComplexDirect] {
            let o = Objective::new(kind, 3.5).unwrap();
            assert_eq!(
                o.term(zeros(3).view(), e(3, 0).view(), true),
                Err(Error::ZeroNorm)
            );
        }
        // the unnormalized score is defined at zero
        let o = Objective::new(LossKind::ComplexSigmoidUnnormalized, 3.5).unwrap();
        assert!(o.term(zeros(3).view(), e(3, 0).view(), true).is_ok());
    }

    #[test]
    fn sigmoid_table_close_to_exact() {
        let t = SigmoidTable::new();
        for i in -700..700 {
            let x = i as f64 / 100.0;
            assert!((t.get(x) - sigmoid(x)).abs() < 0.01);
        }
    }

    #[test]
    fn parse_names() {
        for k in LossKind::ALL {
            assert_eq!(LossKind::parse(k.name()), Some(k));
        }
        assert!(Objective::new(LossKind::RealSigmoid, 0.0).is_err());
    }
}
