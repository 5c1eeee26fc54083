//! Isotropic shell spectra.

use super::fft::SpectralOps;
use super::field::VectorField3D;

/// One spherical shell of the energy spectrum.
#[derive(Debug, Clone, Copy)]
pub struct ShellBin {
    /// Shell centre wavenumber, an integer multiple of 1/L.
    pub k: f64,
    /// Shell energy: (1/2) Σ |ŵ(k')|² over modes with |k'| in the shell.
    pub energy: f64,
}

impl SpectralOps {
    /// Shell-binned energy spectrum of a vector field.
    ///
    /// Shells have width 1/L and are centred on integer multiples of 1/L:
    /// mode k' falls in shell `round(|k'| L)`. Coefficients use the physical
    /// normalization (stored DFT / N³), so the shell energies sum to
    /// `(1/2)⟨|w|²⟩` exactly (up to roundoff) by Parseval's identity.
    pub fn shell_spectrum(&self, w: &VectorField3D) -> Vec<ShellBin> {
        let n = self.grid().n();
        assert_eq!(w.n(), n, "field/grid size mismatch");
        let hx = self.forward(&w.x.to_complex());
        let hy = self.forward(&w.y.to_complex());
        let hz = self.forward(&w.z.to_complex());

        let modes = self.grid().modes();
        let corner = (3.0f64).sqrt() * (n as f64 / 2.0);
        let nshells = corner.round() as usize + 1;
        let mut energy = vec![0.0f64; nshells];

        let n3 = self.grid().len() as f64;
        let inv_n6 = 1.0 / (n3 * n3);
        for k in 0..n {
            let mz = modes[k] as i64;
            for j in 0..n {
                let my = modes[j] as i64;
                let myz = my * my + mz * mz;
                let base = n * (j + n * k);
                #[allow(clippy::needless_range_loop)] // index arithmetic shared with modes
                for i in 0..n {
                    let mx = modes[i] as i64;
                    let m2 = (mx * mx + myz) as f64;
                    let shell = m2.sqrt().round() as usize;
                    let e = hx.data()[base + i].norm_sqr()
                        + hy.data()[base + i].norm_sqr()
                        + hz.data()[base + i].norm_sqr();
                    energy[shell] += 0.5 * e * inv_n6;
                }
            }
        }

        let inv_l = 1.0 / self.grid().length();
        energy
            .into_iter()
            .enumerate()
            .map(|(s, e)| ShellBin {
                k: s as f64 * inv_l,
                energy: e,
            })
            .collect()
    }
}

/// Least-squares slope of log E(k) vs log k over shells with
/// `k_lo <= k <= k_hi` (shells with non-positive energy are skipped).
pub fn spectrum_slope(spectrum: &[ShellBin], k_lo: f64, k_hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = spectrum
        .iter()
        .filter(|b| b.k >= k_lo && b.k <= k_hi && b.energy > 0.0 && b.k > 0.0)
        .map(|b| (b.k.ln(), b.energy.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Some(crate::util::linear_fit(&xs, &ys).1)
}
