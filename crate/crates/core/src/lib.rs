//! Effective degrees of freedom (EDoF) for near-field XL-MIMO links.
//!
//! The crate evaluates the trace-ratio EDoF
//! $\varepsilon = \mathrm{tr}^2(\mathbf R)/\|\mathbf R\|_F^2$ for dipole and patch
//! arrays, continuous apertures (CAP) and linear arrays, under scalar and
//! dyadic Green's-function channels. Each quantity can be reached through
//! several independent routes (explicit matrices, aperture quadrature,
//! dense sampling and asymptotic closed forms) so they can check each other.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod closedform;
pub mod coupling;
pub mod edof;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod numerics;
pub mod workbench;

pub use error::{Error, Result};
pub use numerics::matrix::ComplexMatrix;
