//! Detection-time toolkit for mobile points on a hyperbolic disk.
//!
//! Points are placed on the disk `B_O(R)` by a Poisson process whose radial
//! density is proportional to `sinh(alpha r)`, and then diffuse with a radial
//! drift toward the boundary and a radius-dependent angular diffusivity,
//! reflecting at `R`. A fixed target sits at `(R, 0)`; a point detects it on
//! first entry into the ball of radius `R` around the target.
//!
//! The crate provides the geometric primitives, the point-process sampler,
//! the trajectory integrator, closed-form hitting/exit formulas used as
//! oracles, detection-region constructions with measure quadrature,
//! Pareto-sum tail machinery, and the experiment harness (tail curves and
//! exponent fits). Everything is deterministic given a seed: random streams
//! are keyed by `(seed, stream id)` with a counter-based generator, so
//! results do not depend on scheduling.
//!
//! The crate is `no_std`-compatible (`alloc` required); the `std` feature
//! (default) only switches math intrinsics and error-trait plumbing.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)`-style comparisons are deliberate: they reject NaN along
// with the out-of-range sign. Pinned oracle constants keep their full
// reference digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod analytics;
pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod heavytail;
pub mod kernels;
pub mod regions;
pub mod rng;
pub mod sampling;

pub use geometry::{ModelParams, PolarPoint};

use core::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Model or simulation parameters violate an invariant.
    InvalidParams(&'static str),
    /// An argument lies outside the domain of the operation.
    OutOfDomain(&'static str),
    /// A root-finding bracket is empty or inverted.
    Bracket(&'static str),
    /// A trajectory or formula produced a non-finite value.
    NonFinite(&'static str),
    /// Quadrature failed to reach the requested tolerance.
    Quadrature { achieved: f64, requested: f64 },
    /// Sum-tail bound queried below its calibrated validity threshold.
    ThresholdBelowCalibrated { l: f64, frak_l: f64 },
    /// Not enough usable data (e.g. a degenerate curve for a fit).
    Degenerate(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(s) => write!(f, "invalid parameters: {s}"),
            Error::OutOfDomain(s) => write!(f, "argument out of domain: {s}"),
            Error::Bracket(s) => write!(f, "root bracket invalid: {s}"),
            Error::NonFinite(s) => write!(f, "non-finite value in {s}"),
            Error::Quadrature {
                achieved,
                requested,
            } => write!(
                f,
                "quadrature error {achieved:.3e} exceeds requested {requested:.3e}"
            ),
            Error::ThresholdBelowCalibrated { l, frak_l } => write!(
                f,
                "L = {l} is below the calibrated validity threshold {frak_l:.6}"
            ),
            Error::Degenerate(s) => write!(f, "degenerate input: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
