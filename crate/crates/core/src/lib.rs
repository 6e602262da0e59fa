//! Numerical toolkit for fractional integrals and their commutators on
//! weighted Morrey and amalgam spaces.
//!
//! Everything lives on a uniform cell-centered grid over `[-L, L]^n`
//! (`n ∈ {1, 2}`); functions are piecewise constant on cells. On top of the
//! grid sit weights and their characteristics, Orlicz averages, the norm
//! functionals, the Riesz potential and commutators, two-weight condition
//! scans and a harness that estimates best observed constants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod error;
pub mod exponents;
pub mod functions;
pub mod grid;
pub mod operators;
pub mod orlicz;
pub mod quadrature;
pub mod spaces;
pub mod trend;
pub mod verify;
pub mod weights;

pub mod cli;

pub use error::{Error, Result};
pub use exponents::ExponentSet;
pub use grid::{Cube, CubeFamily, GridFunction, GridSpec};
pub use operators::RieszKernel;
pub use orlicz::YoungFunction;
pub use weights::{Weight, WeightSpec};
