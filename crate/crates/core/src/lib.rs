// SPDX-License-Identifier: Apache-2.0

//! Non-perturbative simulation of harmonic-oscillator particle detectors
//! coupled to a massless scalar field in a 1+1 dimensional cavity.
//!
//! Every Hamiltonian in scope is quadratic in ladder operators and every state
//! is a zero-mean Gaussian, so the whole detector + field dynamics reduces to
//! a linear matrix ODE for a symplectic matrix `S(τ)`:
//!
//! ```text
//! dS/dτ = Ω F_sym(τ) S(τ),   S(τ_i) = I,   σ(τ) = S σ₀ Sᵀ
//! ```
//!
//! An independent route integrates the nonlinear normal-ordering equations for
//! the squeezing generators `C(τ)`, `D(τ)` and rebuilds the covariance matrix
//! from a Takagi factorisation; the two must agree.
//!
//! Module map:
//!
//! - [`gaussian`]: covariance matrices, symplectic eigenvalues, detector
//!   observables and entanglement measures.
//! - [`cavity`]: cavity modes, worldlines, switching and the coupling matrices
//!   `w(τ)`, `g(τ)`, `F(τ)`.
//! - [`evolver`]: integration of the symplectic ODE and the matrix-exponential
//!   solution for time-independent generators.
//! - [`oracle`]: the `C`/`D` squeezing equations, Takagi factorisation and
//!   covariance reconstruction.
//! - [`scenario`]: the four canned experiments plus mode-convergence logic.
//! - [`config`] and [`runner`]: scenario files, CSV/JSON output, exit codes.
//!
//! All numerical kernels are generic over the real scalar type (`f32` or
//! `f64`); scenario drivers run in `f64`.

#![forbid(unsafe_code)]

pub mod cavity;
pub mod config;
pub mod error;
pub mod evolver;
pub mod gaussian;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod runner;
pub mod scenario;

use nalgebra::{Complex, RealField};

pub use error::{Error, Result};

/// Real scalar usable by every numerical kernel in this crate.
///
/// Implemented for `f32` and `f64`.
pub trait Real: RealField + Copy + num_traits::ToPrimitive {}

impl<T> Real for T where T: RealField + Copy + num_traits::ToPrimitive {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Complex scalar built on [`Real`].
pub type Cplx<T> = Complex<T>;

pub type CovarianceMatrix64 = gaussian::CovarianceMatrix<f64>;
pub type CovarianceMatrix32 = gaussian::CovarianceMatrix<f32>;
pub type SymplecticMatrix64 = gaussian::SymplecticMatrix<f64>;
pub type SymplecticMatrix32 = gaussian::SymplecticMatrix<f32>;
pub type SymplecticForm64 = gaussian::SymplecticForm<f64>;
pub type System64 = cavity::System<f64>;
pub type CavityConfig64 = cavity::CavityConfig<f64>;
pub type DetectorConfig64 = cavity::DetectorConfig<f64>;
pub type IntegratorConfig64 = evolver::IntegratorConfig<f64>;
pub type EvolutionTrajectory64 = evolver::EvolutionTrajectory<f64>;
pub type SqueezeState64 = oracle::SqueezeState<f64>;
