//! Embedding matrices for the focal and context roles.
//!
//! Rows are stored as `f32` in split layout: one `|V| x d` array of real
//! parts and one of imaginary parts per role.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::complex::{ComplexSlice, ComplexVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingMode {
    Real,
    Complex,
}

impl EmbeddingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingMode::Real => "real",
            EmbeddingMode::Complex => "complex",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "real" => Some(EmbeddingMode::Real),
            "complex" => Some(EmbeddingMode::Complex),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Focal,
    Context,
}

/// One role's embeddings: `rows` complex vectors of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    mode: EmbeddingMode,
    re: Vec<f32>,
    im: Vec<f32>,
}

impl EmbeddingTable {
    pub fn zeros(rows: usize, dim: usize, mode: EmbeddingMode) -> Self {
        EmbeddingTable {
            dim,
            mode,
            re: vec![0.0; rows * dim],
            im: vec![0.0; rows * dim],
        }
    }

    /// Builds a table from row-major arrays. Real mode requires all-zero
    /// imaginary parts.
    pub fn from_parts(dim: usize, mode: EmbeddingMode, re: Vec<f32>, im: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "embedding dimension must be at least 1",
            ));
        }
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch(re.len(), im.len()));
        }
        if !re.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch(re.len(), dim));
        }
        if re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if mode == EmbeddingMode::Real && im.iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidConfig(
                "real-mode table has nonzero imaginary parts",
            ));
        }
        Ok(EmbeddingTable { dim, mode, re, im })
    }

    /// Uniform initialization in `(-0.5/d, 0.5/d)` for every stored component.
    pub fn random<R: Rng>(rows: usize, dim: usize, mode: EmbeddingMode, rng: &mut R) -> Self {
        let half = 0.5 / dim as f32;
        let mut t = Self::zeros(rows, dim, mode);
        for x in t.re.iter_mut() {
            *x = rng.gen_range(-half..half);
        }
        if mode == EmbeddingMode::Complex {
            for x in t.im.iter_mut() {
                *x = rng.gen_range(-half..half);
            }
        }
        t
    }

    pub fn rows(&self) -> usize {
        self.re.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.mode
    }

    /// Trainable reals per word: `d` in real mode, `2d` in complex mode.
    pub fn params_per_word(&self) -> usize {
        match self.mode {
            EmbeddingMode::Real => self.dim,
            EmbeddingMode::Complex => 2 * self.dim,
        }
    }

    pub fn row_re(&self, row: usize) -> &[f32] {
        &self.re[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_im(&self, row: usize) -> &[f32] {
        &self.im[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_mut(&mut self, row: usize) -> (&mut [f32], &mut [f32]) {
        let r = row * self.dim..(row + 1) * self.dim;
        (&mut self.re[r.clone()], &mut self.im[r])
    }

    pub fn re(&self) -> &[f32] {
        &self.re
    }

    pub fn im(&self) -> &[f32] {
        &self.im
    }

    pub fn into_parts(self) -> (Vec<f32>, Vec<f32>) {
        (self.re, self.im)
    }

    pub fn vector(&self, row: usize) -> ComplexVector {
        ComplexVector {
            re: self.row_re(row).iter().map(|&x| x as f64).collect(),
            im: self.row_im(row).iter().map(|&x| x as f64).collect(),
        }
    }

    /// Reinterprets a real table as complex (imaginary parts stay zero).
    pub fn into_complex(mut self) -> Self {
        self.mode = EmbeddingMode::Complex;
        self
    }
}

/// Focal and context embeddings for a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEmbeddingMatrix {
    pub focal: EmbeddingTable,
    pub context: EmbeddingTable,
}

impl ComplexEmbeddingMatrix {
    pub fn new(focal: EmbeddingTable, context: EmbeddingTable) -> Result<Self> {
        if focal.rows() != context.rows() {
            return Err(Error::DimensionMismatch(focal.rows(), context.rows()));
        }
        if focal.dim() != context.dim() {
            return Err(Error::DimensionMismatch(focal.dim(), context.dim()));
        }
        if focal.mode() != context.mode() {
            return Err(Error::InvalidConfig("focal and context modes differ"));
        }
        Ok(ComplexEmbeddingMatrix { focal, context })
    }

    pub fn rows(&self) -> usize {
        self.focal.rows()
    }

    pub fn dim(&self) -> usize {
        self.focal.dim()
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.focal.mode()
    }

    pub fn table(&self, role: Role) -> &EmbeddingTable {
        match role {
            Role::Focal => &self.focal,
            Role::Context => &self.context,
        }
    }
}

/// Widens an `f32` row into `f64` scratch buffers.
pub fn widen_row(re: &[f32], im: &[f32], out_re: &mut [f64], out_im: &mut [f64]) {
    for (o, &x) in out_re.iter_mut().zip(re) {
        *o = x as f64;
    }
    for (o, &x) in out_im.iter_mut().zip(im) {
        *o = x as f64;
    }
}

impl<'a> From<&'a ComplexVector> for ComplexSlice<'a> {
    fn from(v: &'a ComplexVector) -> Self {
        v.view()
    }
}
