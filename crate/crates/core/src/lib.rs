//! Numerical construction of a strictly monotone heteroclinic solution of
//! `-Δu = f(u)` in the strip `(0,1) × ℝ`, joining `0` to the minimal
//! zero-action profile `φ` of the cross-section problem.
//!
//! The crate is `no_std` (it needs `alloc`); transcendental functions come
//! from `libm`. File formats and the command line live in `heterocyl-cli`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod cross_section;
pub mod cylinder;
pub mod descent;
pub mod diagnostics;
pub mod euler;
pub mod nonlinearity;
pub mod quadrature;
pub mod tridiag;

mod error;
#[cfg(test)]
mod test_support;

pub use cross_section::{CrossSectionProfile, LambdaStarResult};
pub use cylinder::{CylinderField, HeteroclinicReport, SolverConfig, TruncatedSolveReport};
pub use diagnostics::{HamiltonianTrace, StabilityReport};
pub use error::Error;
pub use euler::{DomainKind, EulerFlow, ExtendedSolution, ThetaField, Window};

pub use nonlinearity::{Nonlinearity, QuinticParams};

pub type Result<T, E = Error> = core::result::Result<T, E>;
