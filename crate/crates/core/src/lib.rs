//! Numerics for Favard length of self-similar disc systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds similarity systems, their generation-`n` disc clouds
//!   and degenerate triangle configurations.
//! * [`intervals`] and [`step`] hold the two exact one-dimensional data
//!   structures everything else is measured with.
//! * [`projection`] sweeps disc clouds into projection multiplicity functions
//!   and measures supports, level sets and Favard integrals.
//! * [`quadrature`] is a small registry of interchangeable integration rules.
//! * [`fourier`] evaluates the trinomial, its self-similar products and the
//!   Riesz products that dominate them.
//! * [`zeros`] locates and continues complex zeros of the trinomial.
//! * [`tiling`] scans products of rescaled trinomials for the single-critical
//!   factor structure.
//!
//! Fourier convention used throughout: `f̂(x) = ∫ f(s) e^{-isx} ds`, so that
//! `‖f‖² = (1/2π) ‖f̂‖²`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fourier;
pub mod geometry;
pub mod intervals;
pub mod projection;
pub mod quadrature;
pub mod step;
pub mod tiling;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
