//! The dependence coefficient ρ* and its covariance κ.
//!
//! κ(X, Y) is the covariance-like functional obtained by replacing squared
//! differences with absolute differences in the squared covariance; ρ* is its
//! normalized version, lying in [0, 1], zero iff X and Y are independent and
//! one iff they are linearly related.
//!
//! Modules, roughly bottom-up:
//!
//! - [`dist`]: discrete and parametric distributions with the mid-point CDF.
//! - [`kernel`]: the doubly centered absolute-difference kernel h_F.
//! - [`eigen`]: its spectral decomposition (dense and tridiagonal routes).
//! - [`estimate`]: V- and U-statistic estimators, component correlations.
//! - [`infer`]: permutation and asymptotic independence tests.
//! - [`grade`]: rank/grade versions and K-sample Cramér–von Mises statistics.
//! - [`analyze`]: observation weights, Fréchet support curves, demo data, plots.

pub mod analyze;
pub mod dist;
pub mod eigen;
mod error;
pub mod estimate;
pub mod grade;
pub mod infer;
pub mod kernel;
pub mod sum;

pub use error::{Error, Result};
