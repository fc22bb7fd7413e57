//! Gate set. Rotations follow `R_A(theta) = exp(-i theta A / 2)`; controlled
//! gates act on the target when the control qubit is `|1>`.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Crx {
        control: usize,
        target: usize,
        angle: f64,
    },
    Crz {
        control: usize,
        target: usize,
        angle: f64,
    },
    Cx {
        control: usize,
        target: usize,
    },
    Cz {
        control: usize,
        target: usize,
    },
}

fn rx(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

fn ry(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn rz(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]
}

fn drx(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    [
        [Complex64::new(-s / 2.0, 0.0), Complex64::new(0.0, -c / 2.0)],
        [Complex64::new(0.0, -c / 2.0), Complex64::new(-s / 2.0, 0.0)],
    ]
}

fn dry(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    [
        [Complex64::new(-s / 2.0, 0.0), Complex64::new(-c / 2.0, 0.0)],
        [Complex64::new(c / 2.0, 0.0), Complex64::new(-s / 2.0, 0.0)],
    ]
}

fn drz(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    // d/dtheta e^{-i theta/2} = (-i/2) e^{-i theta/2}
    [
        [Complex64::new(-s / 2.0, -c / 2.0), ZERO],
        [ZERO, Complex64::new(-s / 2.0, c / 2.0)],
    ]
}

impl Gate {
    pub fn target(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => q,
            Gate::Crx { target, .. }
            | Gate::Crz { target, .. }
            | Gate::Cx { target, .. }
            | Gate::Cz { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Crx { control, .. }
            | Gate::Crz { control, .. }
            | Gate::Cx { control, .. }
            | Gate::Cz { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            Gate::Crx { angle, .. } | Gate::Crz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// The 2x2 block applied to the target qubit.
    pub fn matrix(&self) -> Mat2 {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        match *self {
            Gate::H(_) => [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ],
            Gate::Rx(_, a) | Gate::Crx { angle: a, .. } => rx(a),
            Gate::Ry(_, a) => ry(a),
            Gate::Rz(_, a) | Gate::Crz { angle: a, .. } => rz(a),
            Gate::Cx { .. } => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Cz { .. } => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// Derivative of [`Gate::matrix`] with respect to the angle.
    pub fn derivative(&self) -> Option<Mat2> {
        match *self {
            Gate::Rx(_, a) | Gate::Crx { angle: a, .. } => Some(drx(a)),
            Gate::Ry(_, a) => Some(dry(a)),
            Gate::Rz(_, a) | Gate::Crz { angle: a, .. } => Some(drz(a)),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, a) => Gate::Rx(q, -a),
            Gate::Ry(q, a) => Gate::Ry(q, -a),
            Gate::Rz(q, a) => Gate::Rz(q, -a),
            Gate::Crx {
                control,
                target,
                angle,
            } => Gate::Crx {
                control,
                target,
                angle: -angle,
            },
            Gate::Crz {
                control,
                target,
                angle,
            } => Gate::Crz {
                control,
                target,
                angle: -angle,
            },
            g => g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    #[test]
    fn inverse_blocks_multiply_to_identity() {
        for g in [
            Gate::Rx(0, 0.7),
            Gate::Ry(0, -1.3),
            Gate::Rz(0, 2.9),
            Gate::Crx {
                control: 1,
                target: 0,
                angle: 0.4,
            },
            Gate::H(0),
        ] {
            let p = mul(&g.inverse().matrix(), &g.matrix());
            assert!((p[0][0] - ONE).norm() < 1e-15 && (p[1][1] - ONE).norm() < 1e-15);
            assert!(p[0][1].norm() < 1e-15 && p[1][0].norm() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for make in [
            (|a| Gate::Rx(0, a)) as fn(f64) -> Gate,
            |a| Gate::Ry(0, a),
            |a| Gate::Rz(0, a),
        ] {
            let a = 0.83;
            let d = make(a).derivative().unwrap();
            let (p, m) = (make(a + h).matrix(), make(a - h).matrix());
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (p[i][j] - m[i][j]) / (2.0 * h);
                    assert!((fd - d[i][j]).norm() < 1e-9);
                }
            }
        }
    }
}
