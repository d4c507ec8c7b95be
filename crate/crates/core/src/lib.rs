//! Multiphoton bunching with partially distinguishable photons.
//!
//! The numerical core is generic over the real scalar through [`Real`]
//! (implemented for `f32` and `f64`); the aliases below fix `f64`, which is
//! what the experiment drivers use.

// Negated comparisons are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuits;
pub mod distinguishability;
pub mod error;
pub mod experiments;
pub mod interferometry;
pub mod linalg;
pub mod matrix;
pub mod permanent;
pub mod rng;
pub mod scalar;

pub use distinguishability::{GramMatrix, InternalStateSet};
pub use error::{Error, Result};
pub use interferometry::{BunchingInstance, Interferometer, OutcomeSpec, OutputSubset};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
pub type Matrix = ComplexMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type Gram = GramMatrix<f64>;
pub type States = InternalStateSet<f64>;
pub type Network = Interferometer<f64>;
pub type Instance = BunchingInstance<f64>;
