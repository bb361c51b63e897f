//! Photon-number statistics of multi-mode parametric downconversion.
//!
//! A joint spectral distribution function (SDF) is split into independent
//! two-mode squeezers through its Schmidt decomposition. Each squeezer has a
//! thermal marginal; the total photon-number distribution (PND) of one beam is
//! the convolution of those marginals.
//!
//! Pipeline overview:
//!
//! * [`sdf`] builds and normalizes kernels (analytic Gaussians or tabulated grids),
//!   [`kernel_io`] reads and writes them.
//! * [`schmidt`] computes the Schmidt spectrum, either by dense SVD of the
//!   discretized kernel or analytically for Gaussians via Mehler's formula.
//! * [`stats`] maps a spectrum and a coupling constant onto a [`stats::SqueezerBank`]
//!   and produces PNDs, reference distributions and distances.
//! * [`coupling`] infers the coupling constant from mean photon numbers and fits the
//!   square-root pump-power law.
//! * [`loss`] models binomial detection loss and inverts it with non-negative least squares.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod kernel_io;
pub mod loss;
pub mod nnls;
pub mod output;
pub mod schmidt;
pub mod sdf;
pub mod stats;

pub use error::{Error, Result, Warning};
pub use schmidt::SchmidtSpectrum;
pub use sdf::{GaussianParams, SpectralKernel};
pub use stats::{Pnd, SqueezerBank, Truncation};
