//! Fisher information of one-dimensional wave functions in position and
//! momentum space, and its behaviour under free-particle evolution.
//!
//! * [`grid`]: uniform lattices, sampled wave functions, the unitary Fourier
//!   transform `psi -> psi~` and moments.
//! * [`fisher`]: density-form and amplitude-form Fisher estimators and the
//!   uncertainty product `I_x I_p`.
//! * [`analytic`]: the closed-form family of Gaussian derivatives
//!   `psi^(k)(x, t)`, used as exact reference values.
//! * [`propagator`]: exact spectral free evolution with spreading-aware grids.
//! * [`series`]: product trajectories, threshold crossings and decay fits.
//!
//! Units are natural (`hbar = m = 1`).

pub mod analytic;
pub mod error;
mod fft;
pub mod fisher;
pub mod grid;
pub mod propagator;
pub mod series;

pub use error::{Error, Result};
pub use fft::next_smooth_even;
pub use rustfft::num_complex::Complex64;
