use super::grid::SpectralGrid;
use crate::util::det_sum_by;
use num_complex::Complex64;

/// Scalar complex field on an `N³` grid, x-fastest. Used for both
/// physical-space fields and their spectral representations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField3D {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexField3D {
    pub fn zeros(n: usize) -> Self {
        ComplexField3D {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n * n],
        }
    }

    /// Sample `f(x, y, z)` on the grid.
    pub fn from_fn<F>(grid: &SpectralGrid, mut f: F) -> Self
    where
        F: FnMut(f64, f64, f64) -> Complex64,
    {
        let n = grid.n();
        let c = grid.coords();
        let mut data = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data.push(f(c[i], c[j], c[k]));
                }
            }
        }
        ComplexField3D { n, data }
    }

    pub fn from_vec(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n * n, "field length must be N³");
        ComplexField3D { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub(crate) fn data_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.data
    }

    /// Volume average of `|f|²` (deterministic reduction).
    pub fn mean_abs2(&self) -> f64 {
        det_sum_by(self.data.len(), |i| self.data[i].norm_sqr()) / self.data.len() as f64
    }

    /// True iff every component is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Pointwise density `|f|²` as a real field.
    pub fn abs2(&self) -> RealField3D {
        RealField3D {
            n: self.n,
            data: self.data.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    /// Copy the contents of `other` (same size) without reallocating.
    pub fn copy_from(&mut self, other: &Self) {
        assert_eq!(self.n, other.n, "field size mismatch");
        self.data.clone_from_slice(&other.data);
    }
}

/// Scalar real field on an `N³` grid, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField3D {
    n: usize,
    data: Vec<f64>,
}

impl RealField3D {
    pub fn zeros(n: usize) -> Self {
        RealField3D {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn<F>(grid: &SpectralGrid, mut f: F) -> Self
    where
        F: FnMut(f64, f64, f64) -> f64,
    {
        let n = grid.n();
        let c = grid.coords();
        let mut data = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data.push(f(c[i], c[j], c[k]));
                }
            }
        }
        RealField3D { n, data }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n * n, "field length must be N³");
        RealField3D { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Volume average (deterministic reduction).
    pub fn mean(&self) -> f64 {
        det_sum_by(self.data.len(), |i| self.data[i]) / self.data.len() as f64
    }

    /// Volume average of the square (deterministic reduction).
    pub fn mean_sq(&self) -> f64 {
        det_sum_by(self.data.len(), |i| self.data[i] * self.data[i]) / self.data.len() as f64
    }

    /// Lift to a complex field with zero imaginary part.
    pub fn to_complex(&self) -> ComplexField3D {
        ComplexField3D {
            n: self.n,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

/// Three-component real vector field on an `N³` grid.
#[derive(Debug, Clone)]
pub struct VectorField3D {
    pub x: RealField3D,
    pub y: RealField3D,
    pub z: RealField3D,
}

impl VectorField3D {
    pub fn zeros(n: usize) -> Self {
        VectorField3D {
            x: RealField3D::zeros(n),
            y: RealField3D::zeros(n),
            z: RealField3D::zeros(n),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn component(&self, axis: usize) -> &RealField3D {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis out of range"),
        }
    }

    /// Volume average of `|w|²` (deterministic reduction).
    pub fn mean_sq(&self) -> f64 {
        let len = self.x.data().len();
        det_sum_by(len, |i| {
            let (a, b, c) = (self.x.data()[i], self.y.data()[i], self.z.data()[i]);
            a * a + b * b + c * c
        }) / len as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_is_x_fastest() {
        let g = SpectralGrid::new(8, 1.0).unwrap();
        let f = RealField3D::from_fn(&g, |x, _, _| x);
        // Consecutive entries along the fastest index step by dx in x.
        assert!((f.data()[1] - f.data()[0] - g.dx()).abs() < 1e-15);
        // Stepping j leaves x unchanged.
        assert_eq!(f.data()[0], f.data()[8]);
    }

    #[test]
    fn mean_abs2_of_uniform_field() {
        let g = SpectralGrid::new(8, 1.0).unwrap();
        let f = ComplexField3D::from_fn(&g, |_, _, _| Complex64::new(0.6, 0.8));
        assert!((f.mean_abs2() - 1.0).abs() < 1e-14);
    }
}
