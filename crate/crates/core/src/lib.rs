//! Hyperspectral image segmentation by alternating minimization.
//!
//! The model scores a partition of the image into `k` segments by a
//! per-segment data term (a regularized Mahalanobis distance of each spectrum
//! to the segment mean, plus a `log det` penalty on the segment covariance)
//! and a boundary-length term. Covariance eigenvalues are floored at `eps^2`,
//! which keeps the energy bounded below and the covariances invertible; the
//! [`gammalab`] module contains numerical experiments showing what breaks
//! when the floor is removed.
//!
//! Module map:
//! - [`linalg`]: small symmetric-matrix numerics (Jacobi eigendecomposition,
//!   SPD projection, Mahalanobis norm, log-determinant).
//! - [`energy`]: discrete evaluation of the segmentation energies and the
//!   interface-counting perimeter.
//! - [`estimation`]: per-segment mean and covariance updates, including the
//!   closed-form per-direction eigenvalue minimizer.
//! - [`segmentation`]: the alternating-minimization driver (ICM label sweeps
//!   plus parameter updates) with a monotone energy trace.
//! - [`gammalab`]: degenerate-image construction and the eps-floor
//!   experiments (unbounded descent without the floor, exact recovery with).
//! - [`preprocess`]: PCA reduction that drops variation-free directions.
//! - [`io`] / [`synth`]: file formats and the synthetic test-cube generator.

pub mod energy;
pub mod error;
pub mod estimation;
pub mod gammalab;
pub mod io;
pub mod linalg;
pub mod preprocess;
pub mod segmentation;
pub mod synth;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
