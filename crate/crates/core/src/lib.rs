//! Fourier-Galerkin semidiscretization of periodic Benjamin-type equations
//!
//! ```text
//! u_t - L u_x + f(u)_x = 0,   x in [-L pi, L pi),
//! l(xi) = delta |xi|^{2m} - gamma |xi|^{2r},   f(u) = u^{q+1} / (q+1)
//! ```
//!
//! The nonlinear Galerkin term is evaluated pseudospectrally on a padded grid
//! large enough that no aliasing reaches the retained modes, so the coefficient
//! ODEs integrated here are exactly those of the Galerkin scheme. Time
//! integration uses exponential integrators (ETDRK4 by default) that treat the
//! stiff diagonal linear part exactly.
//!
//! Modules:
//! - [`model`]: equation parameters, symbol and nonlinearity
//! - [`spectral`]: truncated Fourier fields, transforms, dealiased powers, norms
//! - [`semidiscrete`]: right-hand sides of the nonlinear and linearized systems
//! - [`timestep`]: ETDRK4 / IFRK4 integrators
//! - [`invariants`]: mass, L2 and energy functionals and their drift
//! - [`initdata`]: initial-condition generators, Petviashvili solitary waves
//! - [`harness`]: convergence studies and soliton propagation tests
//! - [`snapshot`]: plain-text field serialization

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod harness;
pub mod initdata;
pub mod invariants;
pub mod model;
pub mod semidiscrete;
pub mod snapshot;
pub mod spectral;
pub mod timestep;

mod fft;

pub use error::{Error, Result};
pub use harness::{ConvergenceReport, IntegratorPolicy, SolitonReport};
pub use initdata::{InitialDataSpec, PetviashviliReport};
pub use invariants::InvariantRecord;
pub use model::ModelParams;
pub use semidiscrete::{LinearMultipliers, Semidiscrete};
pub use spectral::{PhysicalField, SpectralField};
pub use timestep::{IntegratorConfig, Method};

pub use num_complex::Complex64;
