//! Exact-arithmetic laboratory for the anisotropic Ising model on finite
//! triangular lattices.
//!
//! The crate computes partition functions of convex lattice shapes by the
//! spinor (transfer-matrix determinant) method, extracts bulk, surface and
//! corner free energies as exact Laurent series in the elliptic nome,
//! verifies closed-form product and summation formulas for them, and
//! reproduces the logarithmic corner singularities of the critical limit
//! numerically, including the Cardy–Peschel conformal prediction.
//!
//! Layout:
//!
//! * [`series`] — truncated Laurent series over Gaussian rationals;
//! * [`product`] — Euler-product exponents, period-24 pattern fitting and
//!   the product-to-sum conversion formula;
//! * [`shapes`] — convex shapes on the triangular lattice and their
//!   site/edge/corner counts;
//! * [`trivar`] — truncated trivariate Laurent polynomials (oracle scalar);
//! * [`spinor`] — transfer-matrix factor chains, exact determinants and the
//!   brute-force partition-function oracle;
//! * [`extract`] — solving shape families for the free-energy split;
//! * [`formulas`] — closed-form product/summation evaluators and the
//!   inversion-identity suite;
//! * [`critical`] — floating-point elliptic evaluation, conjugate-nome
//!   forms, singular-coefficient fits and the square-lattice reduction.

pub mod critical;
pub mod error;
pub mod extract;
pub mod fieldops;
pub mod formulas;
pub mod identities;
pub mod product;
pub mod report;
pub mod scalar;
pub mod series;
pub mod shapes;
pub mod spinor;
pub mod trivar;

pub use error::{Error, Result};
pub use scalar::{GaussRat, Rat};
pub use series::{Exp, Series};
