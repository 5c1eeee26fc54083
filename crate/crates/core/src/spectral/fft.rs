use super::field::ComplexField3D;
use super::grid::SpectralGrid;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    // Rotation buffer reused across transforms; sized lazily per grid.
    static ROTATE: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

/// FFT plans and spectral operators bound to one grid.
///
/// The 3D transform runs as three rounds of "FFT the contiguous axis, then
/// rotate axes (x,y,z) → (y,z,x)", so every 1D pass works on unit-stride
/// lines and the layout returns to x-fastest after the third round.
pub struct SpectralOps {
    grid: SpectralGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralOps {
    pub fn new(grid: SpectralGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        SpectralOps { grid, fwd, inv }
    }

    #[inline]
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward_inplace(&self, f: &mut ComplexField3D) {
        assert_eq!(f.n(), self.grid.n(), "field/grid size mismatch");
        self.transform(f.data_vec_mut(), &self.fwd);
    }

    /// Inverse DFT with the 1/N³ normalization, in place.
    pub fn inverse_inplace(&self, f: &mut ComplexField3D) {
        assert_eq!(f.n(), self.grid.n(), "field/grid size mismatch");
        self.transform(f.data_vec_mut(), &self.inv);
        let scale = 1.0 / self.grid.len() as f64;
        for z in f.data_mut() {
            *z *= scale;
        }
    }

    pub fn forward(&self, f: &ComplexField3D) -> ComplexField3D {
        let mut out = f.clone();
        self.forward_inplace(&mut out);
        out
    }

    pub fn inverse(&self, f: &ComplexField3D) -> ComplexField3D {
        let mut out = f.clone();
        self.inverse_inplace(&mut out);
        out
    }

    fn transform(&self, data: &mut Vec<Complex64>, plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        ROTATE.with(|cell| {
            let mut rot = cell.borrow_mut();
            if rot.len() != data.len() {
                rot.resize(data.len(), Complex64::new(0.0, 0.0));
            }
            line_ffts(plan, n, data);
            rotate_axes(n, data, &mut rot);
            line_ffts(plan, n, &mut rot);
            rotate_axes(n, &rot, data);
            line_ffts(plan, n, data);
            rotate_axes(n, data, &mut rot);
            // Final layout lives in the scratch; swap the allocations.
            std::mem::swap(data, &mut *rot);
        });
    }

    /// Zero every mode outside the 2/3-rule band, in place. Operates on a
    /// field in spectral representation.
    pub fn dealias_inplace(&self, hat: &mut ComplexField3D) {
        assert_eq!(hat.n(), self.grid.n(), "field/grid size mismatch");
        let n = self.grid.n();
        let keep = self.grid.axis_keep();
        let data = hat.data_mut();
        for k in 0..n {
            for j in 0..n {
                let plane_keep = keep[j] && keep[k];
                let base = n * (j + n * k);
                if !plane_keep {
                    for v in &mut data[base..base + n] {
                        *v = Complex64::new(0.0, 0.0);
                    }
                } else {
                    for (i, v) in data[base..base + n].iter_mut().enumerate() {
                        if !keep[i] {
                            *v = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
    }

    /// 2/3-rule projection of a spectral field (pure version).
    pub fn dealias(&self, hat: &ComplexField3D) -> ComplexField3D {
        let mut out = hat.clone();
        self.dealias_inplace(&mut out);
        out
    }

    /// Project a physical-space field onto the dealiased band.
    pub fn band_project(&self, f: &ComplexField3D) -> ComplexField3D {
        let mut hat = self.forward(f);
        self.dealias_inplace(&mut hat);
        self.inverse_inplace(&mut hat);
        hat
    }
}

fn line_ffts(plan: &Arc<dyn Fft<f64>>, n: usize, data: &mut [Complex64]) {
    let scratch_len = plan.get_inplace_scratch_len();
    data.par_chunks_mut(n * n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, slab| {
            plan.process_with_scratch(slab, scratch);
        },
    );
}

/// dst[y + N(z + N x)] = src[x + N(y + N z)], i.e. an (N² × N) transpose.
/// Tiled so the stride-N reads of one q-block are reused by the next x
/// values sharing their cache lines.
fn rotate_axes(n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    const TX: usize = 4; // complex values per 64-byte cache line
    const QT: usize = 128;
    let nn = n * n;
    dst.par_chunks_mut(nn * TX).enumerate().for_each(|(bx, slab)| {
        let x0 = bx * TX;
        let xs = slab.len() / nn;
        let mut q0 = 0;
        while q0 < nn {
            let q1 = (q0 + QT).min(nn);
            for dx in 0..xs {
                let x = x0 + dx;
                let out = &mut slab[dx * nn + q0..dx * nn + q1];
                let mut s = x + n * q0;
                for d in out.iter_mut() {
                    *d = src[s];
                    s += n;
                }
            }
            q0 = q1;
        }
    });
}
