//! Corpus IO, model formats, multi-threaded trainers and the `qembed`
//! command line, on top of `qembed-core`.

// `!(x > 0.0)` rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod driver;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pqc_train;
pub mod report;
pub mod shared;
pub mod train;

pub use error::{Error, Result};
