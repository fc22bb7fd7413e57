//! Core math for complex-valued word embeddings.
//!
//! Everything in this crate is allocation-only (`no_std` + `alloc`): the
//! vocabulary and sampling tables, the four skip-gram losses with explicit
//! gradients, an exact statevector simulator for parameterised circuits with
//! adjoint differentiation, per-word circuit fitting, and rank statistics
//! for similarity evaluation. File formats, corpus streaming, threading and
//! the command line live in the `qembed` crate.
#![cfg_attr(not(test), no_std)]
// `!(x <= tol)` rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod complex;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod fit;
pub mod loss;
pub mod optim;
pub mod pqc;
pub mod pqc_sgns;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod vocab;

pub use complex::{ComplexSlice, ComplexSliceMut, ComplexVector};
pub use embedding::{ComplexEmbeddingMatrix, EmbeddingMode, Role};
pub use error::{Error, Result};
pub use vocab::Vocabulary;
