//! Spectral derivatives: exact in the dealiased band.

use super::fft::SpectralOps;
use super::field::{ComplexField3D, RealField3D, VectorField3D};
use num_complex::Complex64;

impl SpectralOps {
    /// Spectral gradient of a real scalar field (the field is dealiased
    /// before differentiation).
    pub fn gradient(&self, f: &RealField3D) -> VectorField3D {
        let mut hat = f.to_complex();
        self.forward_inplace(&mut hat);
        self.dealias_inplace(&mut hat);
        VectorField3D {
            x: self.derivative_axis_from_hat(&hat, 0).re_part(),
            y: self.derivative_axis_from_hat(&hat, 1).re_part(),
            z: self.derivative_axis_from_hat(&hat, 2).re_part(),
        }
    }

    /// Spectral gradient of a complex field, one component per axis.
    pub fn gradient_complex(&self, f: &ComplexField3D) -> [ComplexField3D; 3] {
        let mut hat = f.clone();
        self.forward_inplace(&mut hat);
        self.dealias_inplace(&mut hat);
        [
            self.derivative_axis_from_hat(&hat, 0),
            self.derivative_axis_from_hat(&hat, 1),
            self.derivative_axis_from_hat(&hat, 2),
        ]
    }

    /// Spectral Laplacian of a real scalar field.
    pub fn laplacian(&self, f: &RealField3D) -> RealField3D {
        let mut hat = f.to_complex();
        self.forward_inplace(&mut hat);
        self.dealias_inplace(&mut hat);
        self.apply_minus_k2(&mut hat);
        self.inverse_inplace(&mut hat);
        hat.re_part()
    }

    /// Spectral Laplacian of a complex field.
    pub fn laplacian_complex(&self, f: &ComplexField3D) -> ComplexField3D {
        let mut hat = f.clone();
        self.forward_inplace(&mut hat);
        self.dealias_inplace(&mut hat);
        self.apply_minus_k2(&mut hat);
        self.inverse_inplace(&mut hat);
        hat
    }

    /// Multiply a spectral field by -k² in place.
    pub(crate) fn apply_minus_k2(&self, hat: &mut ComplexField3D) {
        let n = self.grid().n();
        let kv = self.grid().wavenumbers();
        let data = hat.data_mut();
        for k in 0..n {
            let kz2 = kv[k] * kv[k];
            for j in 0..n {
                let kyz2 = kv[j] * kv[j] + kz2;
                let base = n * (j + n * k);
                for i in 0..n {
                    let k2 = kv[i] * kv[i] + kyz2;
                    data[base + i] *= -k2;
                }
            }
        }
    }

    /// ∂/∂axis of a spectral field, returned in physical space.
    fn derivative_axis_from_hat(&self, hat: &ComplexField3D, axis: usize) -> ComplexField3D {
        let n = self.grid().n();
        let kv = self.grid().wavenumbers();
        let src = hat.data();
        let mut out = ComplexField3D::zeros(n);
        {
            let dst = out.data_mut();
            for k in 0..n {
                for j in 0..n {
                    let base = n * (j + n * k);
                    let kjk = match axis {
                        1 => kv[j],
                        2 => kv[k],
                        _ => 0.0,
                    };
                    if axis == 0 {
                        for i in 0..n {
                            let z = src[base + i];
                            dst[base + i] = Complex64::new(-kv[i] * z.im, kv[i] * z.re);
                        }
                    } else {
                        for i in 0..n {
                            let z = src[base + i];
                            dst[base + i] = Complex64::new(-kjk * z.im, kjk * z.re);
                        }
                    }
                }
            }
        }
        self.inverse_inplace(&mut out);
        out
    }
}

impl ComplexField3D {
    /// Real part as a real field.
    pub fn re_part(&self) -> RealField3D {
        RealField3D::from_vec(self.n(), self.data().iter().map(|z| z.re).collect())
    }
}
