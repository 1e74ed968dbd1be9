//! Numerical laboratory for the Hilbert transform along variable flat curves
//! `(t, P(x1) γ(t))`.
//!
//! The crate is `no_std` (it needs `alloc`). Every routine is a pure function
//! of its inputs, so callers may fan work out across threads freely.
//!
//! - [`curves`]: curve families, derivative evaluators and condition checks.
//! - [`poly`]: polynomials, roots, dyadic rescaling and the exceptional sets `E_k`.
//! - [`oscquad`]: the ω normalization, the ratio Υ and oscillatory quadrature for `J^r`.
//! - [`kernels`]: the TT* kernel `𝕃_k`, Schur row integrals and decay fits.
//! - [`opnorm`]: discretized `S_u`, its dyadic pieces, norm estimation and the 2D operator.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;
pub mod curves;
pub mod error;
pub mod fit;
pub mod intervals;
pub mod kernels;
pub mod opnorm;
pub mod oscquad;
pub mod poly;
pub mod quad;
pub mod rng;

pub use curves::{Condition, ConditionReport, Curve, CurveFamily, Parity, Status};
pub use error::{Error, Result};
pub use fit::{fit_decay, DecayFit};
pub use intervals::IntervalUnion;
pub use num_complex::Complex64;
pub use poly::{Polynomial, RootData};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
