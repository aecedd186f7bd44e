//! Spectral curves, band edges, Bloch eigenfunctions and Volterra pole flows of the
//! elliptic difference Lamé operator
//!
//! ```text
//! (LΨ)(x) = θ₁(x-ℓη)/θ₁(x) Ψ(x+η) + θ₁(x+ℓη)/θ₁(x) Ψ(x-η)
//! ```
//!
//! Modules, bottom up: [`theta`] and [`numbers`] (special functions), [`lame`]
//! (operators and the double-Bloch linear system), [`curve`] (spectral curve and band
//! edges), [`bloch`] (finite-matrix oracle for rational η), [`volterra`] (pole dynamics)
//! and [`suites`] (identity checks used by the CLI).

pub mod bloch;
pub mod curve;
pub mod error;
pub mod lame;
pub mod linalg;
pub mod numbers;
pub mod poly;
pub mod suites;
pub mod theta;
pub mod volterra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use theta::{EllipticParams, ThetaEvaluator};
