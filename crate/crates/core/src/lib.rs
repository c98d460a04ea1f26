//! Pinching constants and numerical certification of the algebraic lemmas
//! behind the gap theorems for hypersurfaces with constant mean curvature and
//! constant scalar curvature in space forms.
//!
//! Modules, bottom-up:
//! - [`constants`]: closed forms for `α`, `α̊`, `α_k`, `β`, `B_n`, `δ`, `λ_k`.
//! - [`spectrum`]: the trace-free spectrum manifold, `φ`, `η`, `σ`, Lemma 1/2 margins
//!   and the counterexample search.
//! - [`envelope`]: the one-dimensional `f(η)` certification.
//! - [`gap`]: Simons balance, band inequalities, classification, model hypersurfaces.
//! - [`suites`] and [`cli`]: verification suites and the command-line reports.

// `!(x > 0.0)` is used deliberately so NaN is rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod envelope;
pub mod error;
pub mod gap;
pub mod range;
pub mod report;
pub mod spectrum;
pub mod suites;

pub use error::{Error, Result};
