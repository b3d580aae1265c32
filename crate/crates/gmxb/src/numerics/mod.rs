//! Shared numerical kernels: Gauss-Hermite quadrature, natural cubic splines,
//! bi-cubic interpolation on uniform grids, bracketed root finding and
//! tridiagonal linear solves.
//!
//! Everything here is a pure function of its inputs; built values are
//! immutable and safe to evaluate from concurrent callers.

mod bicubic;
pub(crate) mod fastmath;
mod quadrature;
mod rootfind;
mod spline;
pub mod tridiag;

pub use bicubic::{local_cubic_uniform, BicubicSpline2D};
pub(crate) use bicubic::{axis_stencil, stencil_apply};
pub use quadrature::GaussHermite;
pub use rootfind::{find_root, RootResult};
pub use spline::CubicSpline1D;
