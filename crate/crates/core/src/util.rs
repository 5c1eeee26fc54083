//! Deterministic reductions.
//!
//! Sums that feed back into the dynamics (densities, energies) must not
//! depend on thread scheduling, otherwise seeded runs stop being bit
//! reproducible. All reductions here use a fixed chunk partition with
//! compensated (Neumaier) accumulation inside each chunk and across the
//! ordered partials, so the result is independent of how rayon schedules
//! the chunks.

use rayon::prelude::*;

const CHUNK: usize = 8192;

#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of `f(i)` for `i` in `0..len`, deterministic under
/// parallel execution.
pub fn det_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if len <= CHUNK {
        let mut acc = Neumaier::default();
        for i in 0..len {
            acc.add(f(i));
        }
        return acc.value();
    }
    let nchunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(len);
            let mut acc = Neumaier::default();
            for i in start..end {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut acc = Neumaier::default();
    for p in partials {
        acc.add(p);
    }
    acc.value()
}

/// Compensated sum of a slice, deterministic under parallel execution.
pub fn det_sum(xs: &[f64]) -> f64 {
    det_sum_by(xs.len(), |i| xs[i])
}

/// Least-squares line fit `y = a + b x`; returns `(a, b)`.
/// Requires at least two points with distinct x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}
