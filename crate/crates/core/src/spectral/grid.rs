use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Cubic periodic grid of `N³` points on `[-πL, πL)³` with the wavenumber
/// bookkeeping for the 2/3-rule pseudospectral method.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    n: usize,
    length: f64,
    dx: f64,
    coords: Vec<f64>,
    modes: Vec<i32>,
    wavenumbers: Vec<f64>,
    axis_keep: Vec<bool>,
}

impl SpectralGrid {
    /// Build a grid with `n` points per axis and domain scale `length` (`L`).
    ///
    /// `n` must be even and at least 8 so the dealiased basis still contains
    /// the `|m| = 2` modes; powers of two give the fastest transforms.
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::invalid(format!(
                "grid size N = {n} too small: the 2/3 rule needs N >= 8 to retain |m| <= 2"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("grid size N = {n} must be even")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(format!(
                "domain scale L = {length} must be positive and finite"
            )));
        }
        let dx = 2.0 * PI * length / n as f64;
        let half = (n / 2) as f64;
        let coords = (0..n).map(|i| (i as f64 - half) * dx).collect();
        let modes: Vec<i32> = (0..n)
            .map(|i| {
                if i < n / 2 {
                    i as i32
                } else {
                    i as i32 - n as i32
                }
            })
            .collect();
        let wavenumbers = modes.iter().map(|&m| m as f64 / length).collect();
        // Strict |m| < N/3, in exact integer arithmetic.
        let axis_keep = modes.iter().map(|&m| 3 * m.unsigned_abs() < n as u32).collect();
        Ok(SpectralGrid {
            n,
            length,
            dx,
            coords,
            modes,
            wavenumbers,
            axis_keep,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain scale `L`; the cube side is `2πL`.
    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Domain volume `(2πL)³`.
    #[inline]
    pub fn volume(&self) -> f64 {
        let side = 2.0 * PI * self.length;
        side * side * side
    }

    /// Flat index for `(i, j, k)`, x-fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Per-axis grid coordinates `x_i = (i - N/2) dx`.
    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Per-axis signed integer wavenumbers in FFT order.
    #[inline]
    pub fn modes(&self) -> &[i32] {
        &self.modes
    }

    /// Per-axis wavenumbers `m/L` in FFT order.
    #[inline]
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Per-axis 2/3-rule retention flags, index-aligned with `wavenumbers`.
    #[inline]
    pub fn axis_keep(&self) -> &[bool] {
        &self.axis_keep
    }

    /// True iff the mode at `(i, j, k)` survives dealiasing.
    #[inline]
    pub fn keep(&self, i: usize, j: usize, k: usize) -> bool {
        self.axis_keep[i] && self.axis_keep[j] && self.axis_keep[k]
    }

    /// Number of retained modes per axis, `2⌈N/3⌉ - 1`.
    pub fn retained_per_axis(&self) -> usize {
        self.axis_keep.iter().filter(|&&b| b).count()
    }

    /// Nominal per-axis Galerkin cutoff `N/(3L)`: retained modes satisfy
    /// `|k| < k_max` on each axis.
    #[inline]
    pub fn k_max(&self) -> f64 {
        self.n as f64 / (3.0 * self.length)
    }

    /// Largest retained integer mode per axis.
    #[inline]
    pub fn max_retained_mode(&self) -> i32 {
        self.n.div_ceil(3) as i32 - 1
    }
}
