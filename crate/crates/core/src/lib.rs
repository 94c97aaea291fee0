//! Coherent feedback amplification of phase-preserving linear quantum
//! amplifiers.
//!
//! The crate models a nondegenerate parametric amplifier (NDPA) as a matrix of
//! complex-coefficient transfer functions, closes a passive coherent feedback
//! loop around its idler port (ideal or lossy), and analyzes the result:
//! pole stability, gain and bandwidth, sensitivity to plant fluctuations,
//! added noise, and seeded Monte Carlo robustness experiments.
//!
//! ```
//! use qfa::models::{build_beam_splitter, build_detuned_ndpa};
//! use qfa::interconnect::close_ideal_feedback;
//!
//! let plant = build_detuned_ndpa(1.0, 5.0).unwrap();
//! let controller = build_beam_splitter(0.1).unwrap();
//! let closed = close_ideal_feedback(&plant, &controller).unwrap();
//! let gain = closed.signal_gain_at(0.0).unwrap().norm();
//! assert!((gain - 8.7754).abs() < 1e-3);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod format;
pub mod interconnect;
pub mod models;
pub mod tfcore;

pub use error::{Error, Result};
pub use num_complex::Complex64;
