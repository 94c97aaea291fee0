//! Complex-coefficient polynomials, rational functions and transfer matrices.
//!
//! Everything is expressed in the Laplace variable `s`, with rates measured
//! in units of a reference linewidth (κ_ref = 1).

mod matrix;
mod poly;
mod rational;

pub use matrix::{Flavor, Port, RationalMatrix};
pub use poly::{poly_roots, ComplexPoly, DEFAULT_ROOT_TOL};
pub use rational::{rf_arith, rf_eval, ArithOp, RationalFunction, DEFAULT_CANCEL_TOL};
