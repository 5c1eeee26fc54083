//! Periodic pseudospectral toolbox on the cube `[-πL, πL)³`.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * Memory order is x-fastest: index `i + N (j + N k)` for `(x_i, y_j, z_k)`.
//! * Grid coordinates are `x_i = (i - N/2) dx` with `dx = 2πL/N`, so the
//!   point set is symmetric under sign flips (up to the periodic image of
//!   the `i = 0` plane) and the origin is a grid point.
//! * Per-axis wavenumbers are integers scaled by `1/L`, stored in FFT order
//!   `0, 1, …, N/2-1, -N/2, …, -1`.
//! * The forward FFT is the plain unnormalized DFT sum; the inverse carries
//!   the `1/N³` factor. A physical-space plane wave `A e^{i k·x}` therefore
//!   has a stored coefficient of modulus `|A| N³`.
//! * Dealiasing uses the 2/3 rule with a strict per-axis cutoff: mode `m` is
//!   retained iff `|m| < N/3`, i.e. `3|m| < N` in integers.

mod fft;
mod field;
mod grid;
mod helmholtz;
mod ops;
mod potential;
mod spectrum;

pub use fft::SpectralOps;
pub use field::{ComplexField3D, RealField3D, VectorField3D};
pub use grid::SpectralGrid;
pub use helmholtz::HelmholtzParts;
pub use potential::{continued_potential, trap_shape, SATURATION_END_FACTOR, SATURATION_START_FACTOR};
pub use spectrum::{spectrum_slope, ShellBin};
