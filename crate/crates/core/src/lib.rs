//! Quadrature squeezing of light emitted by a single two-level atom.
//!
//! The crate models the field emitted during spontaneous decay of an atom
//! prepared in a superposition of ground and excited state. The emitted
//! field is a superposition of vacuum and one photon, which is quadrature
//! squeezed for suitable preparation. Modules:
//!
//! - [`fock`]: truncated Fock-space states, ladder operators, quadrature
//!   statistics and the beam-splitter loss channel.
//! - [`superposition`]: closed forms for the vacuum/one-photon superposition
//!   and for squeezed vacuum.
//! - [`jc`]: resonant Jaynes-Cummings evolution, transient variances and the
//!   dipole-squeezing criterion.
//! - [`wigner`]: Wigner functions on rectangular phase-space grids.
//! - [`homodyne`]: Monte-Carlo balanced homodyne detection.
//! - [`budget`]: temporal-mode overlap and detection-efficiency bookkeeping.
//!
//! All quadratures follow `X1 = (a + a†)/2`, `X2 = i(a† - a)/2`, so the
//! vacuum variance is 1/4 and decibels are referenced to 0.25.
//!
//! Data-parallel loops (grid evaluation, sample shards, sweeps) run on rayon
//! when the `parallel` feature is enabled (default). Every loop produces the
//! same output in the same order under [`Execution::Sequential`].

// `!(x > 0.0)` guards reject NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod error;
pub mod exec;
pub mod fock;
pub mod hermite;
pub mod homodyne;
pub mod jc;
pub mod quad;
pub mod superposition;
pub mod wigner;

pub use error::{Error, Result};
pub use exec::Execution;

/// Complex scalar used for all amplitudes and matrix elements.
pub type C64 = num_complex::Complex64;

/// Variance of either quadrature in the vacuum state.
pub const VACUUM_VARIANCE: f64 = 0.25;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
