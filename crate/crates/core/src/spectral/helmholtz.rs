//! Helmholtz (compressible/incompressible) decomposition of a vector field.

use super::fft::SpectralOps;
use super::field::{ComplexField3D, VectorField3D};
use num_complex::Complex64;

/// Result of a Helmholtz decomposition.
///
/// The spatial mean (the k = 0 mode) belongs to neither projector — it is
/// excluded from both parts and reported separately, so
/// `w = compressible + incompressible + mean` after dealiasing.
#[derive(Debug, Clone)]
pub struct HelmholtzParts {
    /// Curl-free part: spectral projection onto k̂ (k̂·ŵ).
    pub compressible: VectorField3D,
    /// Divergence-free remainder.
    pub incompressible: VectorField3D,
    /// Volume-mean vector (k = 0 mode).
    pub mean: [f64; 3],
}

impl SpectralOps {
    /// Decompose `w` into curl-free and divergence-free parts plus the mean.
    /// The input is dealiased before projection. Both projectors are
    /// idempotent and mutually annihilating in exact arithmetic.
    pub fn helmholtz_decompose(&self, w: &VectorField3D) -> HelmholtzParts {
        let n = self.grid().n();
        assert_eq!(w.n(), n, "field/grid size mismatch");
        let n3 = self.grid().len() as f64;

        let mut hx = w.x.to_complex();
        let mut hy = w.y.to_complex();
        let mut hz = w.z.to_complex();
        self.forward_inplace(&mut hx);
        self.forward_inplace(&mut hy);
        self.forward_inplace(&mut hz);
        self.dealias_inplace(&mut hx);
        self.dealias_inplace(&mut hy);
        self.dealias_inplace(&mut hz);

        let mean = [
            hx.data()[0].re / n3,
            hy.data()[0].re / n3,
            hz.data()[0].re / n3,
        ];

        let mut cx = ComplexField3D::zeros(n);
        let mut cy = ComplexField3D::zeros(n);
        let mut cz = ComplexField3D::zeros(n);

        let kv = self.grid().wavenumbers();
        for k in 0..n {
            let kz = kv[k];
            for j in 0..n {
                let ky = kv[j];
                let base = n * (j + n * k);
                #[allow(clippy::needless_range_loop)] // index arithmetic shared with kv
                for i in 0..n {
                    let kx = kv[i];
                    let k2 = kx * kx + ky * ky + kz * kz;
                    let idx = base + i;
                    if k2 == 0.0 {
                        // Mean mode: excluded from both projections.
                        hx.data_mut()[idx] = Complex64::new(0.0, 0.0);
                        hy.data_mut()[idx] = Complex64::new(0.0, 0.0);
                        hz.data_mut()[idx] = Complex64::new(0.0, 0.0);
                        continue;
                    }
                    let dot = kx * hx.data()[idx] + ky * hy.data()[idx] + kz * hz.data()[idx];
                    let f = dot / k2;
                    let px = kx * f;
                    let py = ky * f;
                    let pz = kz * f;
                    cx.data_mut()[idx] = px;
                    cy.data_mut()[idx] = py;
                    cz.data_mut()[idx] = pz;
                    hx.data_mut()[idx] -= px;
                    hy.data_mut()[idx] -= py;
                    hz.data_mut()[idx] -= pz;
                }
            }
        }

        for h in [&mut cx, &mut cy, &mut cz, &mut hx, &mut hy, &mut hz] {
            self.inverse_inplace(h);
        }

        HelmholtzParts {
            compressible: VectorField3D {
                x: cx.re_part(),
                y: cy.re_part(),
                z: cz.re_part(),
            },
            incompressible: VectorField3D {
                x: hx.re_part(),
                y: hy.re_part(),
                z: hz.re_part(),
            },
            mean,
        }
    }
}
