//! Construction and verification of isotropically realizable two-dimensional
//! strain fields for the incompressible Stokes equation.
//!
//! A divergence-free velocity field `U` (given through a stream function)
//! determines a symmetric trace-free strain `e(U)`. The crate answers, in
//! several regimes, whether a positive scalar viscosity `mu` and a pressure
//! `p` exist with `-Div(mu e(U)) + grad p = 0`:
//!
//! - [`local`] builds `mu > 0` and `p` on a square around any point where
//!   `e(U)` does not vanish, by solving two semilinear hyperbolic Cauchy
//!   problems along characteristics.
//! - [`wave`] handles periodic perturbations of an affine field: it rewrites
//!   realizability as a semilinear wave equation, maps it to canonical form
//!   through a global characteristic diffeomorphism, truncates the periodic
//!   coefficients to compactly supported ones, and integrates the canonical
//!   equation with a leapfrog scheme with blow-up detection, reconstructing
//!   `mu = exp(u)` on a disk.
//! - [`laminate`] decides realizability exactly for two-phase rank-one
//!   laminate strain fields.
//! - [`casebook`] covers the singular examples: a periodic strain realizable
//!   in the plane but not in the torus, and the vanishing-strain family with
//!   separated variables.
//!
//! Symbolic fields ([`expr`]) carry exact derivatives to the orders the
//! constructions need; every pipeline is cross-checked by finite-difference
//! residual oracles ([`stokes`], [`fd`]).

pub mod casebook;
pub mod charfamily;
pub mod error;
pub mod expr;
pub mod fd;
pub mod field;
pub mod grid;
pub mod interp;
pub mod laminate;
pub mod local;
pub mod quad;
pub mod stokes;
pub mod wave;

pub use error::{Error, Result};
pub use expr::{parse_expression, ScalarFieldExpr, Var};
pub use field::{Matrix2, StrainField, VelocityField};
pub use grid::{Grid2D, ScalarGrid};
pub use stokes::{realization_residual, ResidualReport, StokesResidual, ViscositySpec};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
