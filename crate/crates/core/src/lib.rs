//! Exact hypothesis checking, energy minimization and regularity
//! diagnostics for degenerate anisotropic integrals.
//!
//! The library splits into five layers:
//!
//! - [`rational`] / [`exponents`]: exact-rational exponent calculus and the
//!   admissibility checks of the sup-norm theorem;
//! - [`integrand`] / [`presets`] / [`verify`]: the weighted power-sum energy
//!   density family, its closed-form evaluators and sampled structural checks;
//! - [`grid`] / [`field`] / [`solver`]: discrete Dirichlet energies on uniform
//!   grids and deterministic descent minimization;
//! - [`diagnostics`]: the empirical side of the proof chain (envelope, cutoff,
//!   Caccioppoli ratios, embedding ratios, the Moser sequence, `A(r)` and the
//!   sup-norm bound fits);
//! - [`reduce`]: bit-reproducible parallel reductions used by everything above.

pub mod diagnostics;
pub mod error;
pub mod exponents;
pub mod field;
pub mod grid;
pub mod integrand;
pub mod presets;
pub mod rational;
pub mod reduce;
pub mod solver;
pub mod verify;

pub use error::{CoreError, Result};
