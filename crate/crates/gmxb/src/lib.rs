//! Pricing engine for variable-annuity guarantee riders (GMxB).
//!
//! Variable annuities are investment contracts sold with optional guarantees
//! (riders) such as minimum accumulation (GMAB), withdrawal (GMWB), lifelong
//! withdrawal (GLWB), income (GMIB) and death (GMDB) benefits. The fair fee
//! for such a guarantee is the rate charged on the wealth account that makes
//! the risk-neutral contract value equal the upfront premium under a given
//! policyholder withdrawal strategy (static, optimal, or threshold-based).
//!
//! The primary solver walks the Bellman recursion backward in time on a
//! (wealth × benefit-base) lattice, computing expectations between event
//! dates with Gauss-Hermite quadrature on cubic-spline interpolated value
//! slices, and applying withdrawal/ratchet/penalty jump conditions through
//! bi-cubic spline interpolation ([`solver::ghqc`]). Two independent
//! validators are provided: a Crank-Nicolson finite-difference solver for the
//! one-dimensional Black-Scholes PDE ([`solver::pde`]) and a forward Monte
//! Carlo pricer for static strategies ([`solver::mc`]). Fair-fee root search
//! and Greeks (likelihood method and bump-and-reprice) live in [`analysis`].
//!
//! All numerical kernels are generic over the scalar type via [`Scalar`];
//! the crate-level alias [`Real`] (`f64`) is what the solvers and the CLI
//! use in practice.

use core::fmt::{Debug, Display};
use core::iter::Sum;
use core::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub mod analysis;
pub mod analytic;
pub mod benchmarks;
mod error;
pub mod lattice;
pub mod model;
pub mod numerics;
pub mod riders;
pub mod solver;

pub use error::EngineError;

/// Floating-point scalar the engine is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Default scalar used by the solvers and the CLI.
pub type Real = f64;

pub type Result<T, E = EngineError> = core::result::Result<T, E>;

/// Shorthand for lifting an `f64` constant into the generic scalar type.
#[inline]
pub(crate) fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}
