//! Field diagnostics: Madelung variables, energy decomposition, density
//! statistics.
//!
//! Energies are reported per unit volume (volume averages of the energy
//! density). The total follows the Hamiltonian quadrature
//! `E = ⟨ħ²/2m |∇ψ|² + g/2 |ψ|⁴ + V |ψ|²⟩`, and the five-way split is
//!
//! * `kinetic_comp` + `kinetic_inc`: `½⟨ρ v²⟩` through the Helmholtz
//!   decomposition of the density-weighted velocity `w = √ρ v`; the k = 0
//!   (mean flow) kinetic term is accounted in the incompressible part,
//! * `quantum`: `ħ²/(2m²) ⟨(∇√ρ)²⟩`,
//! * `interaction`: `g/(2m²) ⟨ρ²⟩`,
//! * `trap`: `⟨ρ V⟩/m`,
//!
//! with `ρ = m|ψ|²` and `v = j/ρ` regularized at low density.

use crate::error::{Error, Result};
use crate::gpe::PhysicalParams;
use crate::spectral::{ComplexField3D, RealField3D, SpectralGrid, SpectralOps, VectorField3D};
use crate::util::det_sum_by;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Low-density regularization for velocities: `v = j/(ρ + ε)` with
/// `ε = DENSITY_FLOOR_FRACTION × ρ₀`.
pub const DENSITY_FLOOR_FRACTION: f64 = 1e-6;

/// Five-way energy decomposition, per unit volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// Hamiltonian quadrature, evaluated independently of the split.
    pub total: f64,
    /// Incompressible kinetic energy (includes the mean-flow mode).
    pub kinetic_inc: f64,
    /// Compressible kinetic energy.
    pub kinetic_comp: f64,
    /// Quantum-pressure energy.
    pub quantum: f64,
    /// Interaction energy.
    pub interaction: f64,
    /// Trap potential energy.
    pub trap: f64,
}

impl EnergyBreakdown {
    /// Sum of the five components; equals `total` up to the closure error
    /// of the Madelung split.
    pub fn component_sum(&self) -> f64 {
        self.kinetic_inc + self.kinetic_comp + self.quantum + self.interaction + self.trap
    }
}

/// One recorded sample of a time series of breakdowns.
#[derive(Debug, Clone, Copy)]
pub struct EnergySample {
    pub t: f64,
    pub omega: f64,
    /// Volume-mean of |ψ|² (conserved by the Hamiltonian strokes).
    pub mass: f64,
    pub energy: EnergyBreakdown,
}

pub type EnergySeries = Vec<EnergySample>;

/// Mass density and regularized velocity from the Madelung transform:
/// `ρ = m |ψ|²`, `v = j/(ρ + ε)`.
pub fn madelung(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    params: &PhysicalParams,
) -> (RealField3D, VectorField3D) {
    let j = momentum_density(ops, psi, params);
    let mut rho = psi.abs2();
    for x in rho.data_mut() {
        *x *= params.mass();
    }
    let eps = DENSITY_FLOOR_FRACTION * params.rho0();
    let n = psi.n();
    let mut v = VectorField3D::zeros(n);
    for axis in 0..3 {
        let (dst, src) = match axis {
            0 => (v.x.data_mut(), j.x.data()),
            1 => (v.y.data_mut(), j.y.data()),
            _ => (v.z.data_mut(), j.z.data()),
        };
        for i in 0..dst.len() {
            dst[i] = src[i] / (rho.data()[i] + eps);
        }
    }
    (rho, v)
}

/// Mass-current density `j = ħ Im(ψ* ∇ψ)` (equivalently
/// `-iħ/2 (ψ*∇ψ - ψ∇ψ*)`).
pub fn momentum_density(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    params: &PhysicalParams,
) -> VectorField3D {
    let grad = ops.gradient_complex(psi);
    let hbar = params.hbar();
    let n = psi.n();
    let mut j = VectorField3D::zeros(n);
    for (axis, g_axis) in grad.iter().enumerate() {
        let dst = match axis {
            0 => j.x.data_mut(),
            1 => j.y.data_mut(),
            _ => j.z.data_mut(),
        };
        let g = g_axis.data();
        let p = psi.data();
        for i in 0..dst.len() {
            dst[i] = hbar * (p[i].conj() * g[i]).im;
        }
    }
    j
}

/// Density-weighted velocity `w = √ρ v = j/√(ρ + ε)`, the field whose
/// Helmholtz parts split the kinetic energy.
pub fn weighted_velocity(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    params: &PhysicalParams,
) -> VectorField3D {
    let j = momentum_density(ops, psi, params);
    weighted_velocity_from(psi, params, j)
}

fn weighted_velocity_from(
    psi: &ComplexField3D,
    params: &PhysicalParams,
    mut j: VectorField3D,
) -> VectorField3D {
    let eps = DENSITY_FLOOR_FRACTION * params.rho0();
    let m = params.mass();
    let p = psi.data();
    for axis in 0..3 {
        let dst = match axis {
            0 => j.x.data_mut(),
            1 => j.y.data_mut(),
            _ => j.z.data_mut(),
        };
        for i in 0..dst.len() {
            let rho = m * p[i].norm_sqr();
            dst[i] /= (rho + eps).sqrt();
        }
    }
    j
}

/// Hamiltonian energy per unit volume,
/// `⟨ħ²/2m |∇ψ|² + g/2 |ψ|⁴ + V |ψ|²⟩`, with the gradient term evaluated
/// spectrally by Parseval (one forward transform).
pub fn total_energy(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    potential: &RealField3D,
    params: &PhysicalParams,
) -> f64 {
    let mut hat = psi.clone();
    ops.forward_inplace(&mut hat);
    ops.dealias_inplace(&mut hat);
    let e_lap = gradient_energy_from_hat(ops, &hat, params);
    let p = psi.data();
    let v = potential.data();
    let half_g = 0.5 * params.g();
    let e_loc = det_sum_by(p.len(), |i| {
        let a2 = p[i].norm_sqr();
        (half_g * a2 + v[i]) * a2
    }) / p.len() as f64;
    e_lap + e_loc
}

/// `ħ²/2m ⟨|∇ψ|²⟩` from a dealiased spectral field.
pub(crate) fn gradient_energy_from_hat(
    ops: &SpectralOps,
    hat: &ComplexField3D,
    params: &PhysicalParams,
) -> f64 {
    let grid = ops.grid();
    let n = grid.n();
    let kv = grid.wavenumbers();
    let data = hat.data();
    let sum = det_sum_by(data.len(), |idx| {
        let i = idx % n;
        let j = (idx / n) % n;
        let k = idx / (n * n);
        let k2 = kv[i] * kv[i] + kv[j] * kv[j] + kv[k] * kv[k];
        k2 * data[idx].norm_sqr()
    });
    let n3 = grid.len() as f64;
    0.5 * params.hbar() * params.hbar_over_m() * sum / (n3 * n3)
}

/// Full five-way decomposition plus the independent Hamiltonian total.
pub fn energy_breakdown(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    potential: &RealField3D,
    params: &PhysicalParams,
) -> EnergyBreakdown {
    let grid = ops.grid();
    let n = grid.n();
    let n3 = grid.len() as f64;
    let inv_n6 = 1.0 / (n3 * n3);
    let m = params.mass();
    let hbar = params.hbar();

    // Spectral ψ: gradient energy and ∇ψ in one pass.
    let mut hat = psi.clone();
    ops.forward_inplace(&mut hat);
    ops.dealias_inplace(&mut hat);
    let e_lap = gradient_energy_from_hat(ops, &hat, params);
    let grad = [
        derivative_from_hat(ops, &hat, 0),
        derivative_from_hat(ops, &hat, 1),
        derivative_from_hat(ops, &hat, 2),
    ];

    let p = psi.data();
    let len = p.len();

    // Local (pointwise) energies.
    let v = potential.data();
    let half_g = 0.5 * params.g();
    let e_int = det_sum_by(len, |i| {
        let a2 = p[i].norm_sqr();
        half_g * a2 * a2
    }) / len as f64;
    let e_trap = det_sum_by(len, |i| v[i] * p[i].norm_sqr()) / len as f64;

    // Quantum pressure: spectral gradient of √ρ.
    let sqrt_rho = RealField3D::from_vec(
        n,
        p.iter().map(|z| (m * z.norm_sqr()).sqrt()).collect(),
    );
    let mut srhat = sqrt_rho.to_complex();
    ops.forward_inplace(&mut srhat);
    ops.dealias_inplace(&mut srhat);
    let kv = grid.wavenumbers();
    let sr = srhat.data();
    let e_q = {
        let sum = det_sum_by(len, |idx| {
            let i = idx % n;
            let j = (idx / n) % n;
            let k = idx / (n * n);
            let k2 = kv[i] * kv[i] + kv[j] * kv[j] + kv[k] * kv[k];
            k2 * sr[idx].norm_sqr()
        });
        0.5 * params.hbar_over_m() * (hbar / m) * sum * inv_n6
    };

    // Kinetic split: Helmholtz projection of ŵ, energies summed spectrally.
    let mut j_field = VectorField3D::zeros(n);
    for (axis, g_axis) in grad.iter().enumerate() {
        let dst = match axis {
            0 => j_field.x.data_mut(),
            1 => j_field.y.data_mut(),
            _ => j_field.z.data_mut(),
        };
        let g = g_axis.data();
        for i in 0..len {
            dst[i] = hbar * (p[i].conj() * g[i]).im;
        }
    }
    let w = weighted_velocity_from(psi, params, j_field);
    let mut wx = w.x.to_complex();
    let mut wy = w.y.to_complex();
    let mut wz = w.z.to_complex();
    ops.forward_inplace(&mut wx);
    ops.forward_inplace(&mut wy);
    ops.forward_inplace(&mut wz);
    ops.dealias_inplace(&mut wx);
    ops.dealias_inplace(&mut wy);
    ops.dealias_inplace(&mut wz);

    let keep = grid.axis_keep();
    let (mut e_comp, mut e_inc) = (0.0f64, 0.0f64);
    {
        let (dx, dy, dz) = (wx.data(), wy.data(), wz.data());
        for k in 0..n {
            let kz = kv[k];
            for j in 0..n {
                let ky = kv[j];
                let base = n * (j + n * k);
                let plane_keep = keep[j] && keep[k];
                if !plane_keep {
                    continue;
                }
                for i in 0..n {
                    if !keep[i] {
                        continue;
                    }
                    let idx = base + i;
                    let kx = kv[i];
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 == 0.0 {
                        // Mean flow: assigned to the incompressible bucket.
                        e_inc += 0.5
                            * (dx[idx].norm_sqr() + dy[idx].norm_sqr() + dz[idx].norm_sqr())
                            * inv_n6;
                        continue;
                    }
                    let dot = kx * dx[idx] + ky * dy[idx] + kz * dz[idx];
                    let comp = dot.norm_sqr() / k2;
                    let tot = dx[idx].norm_sqr() + dy[idx].norm_sqr() + dz[idx].norm_sqr();
                    e_comp += 0.5 * comp * inv_n6;
                    e_inc += 0.5 * (tot - comp) * inv_n6;
                }
            }
        }
    }

    EnergyBreakdown {
        total: e_lap + e_int + e_trap,
        kinetic_inc: e_inc,
        kinetic_comp: e_comp,
        quantum: e_q,
        interaction: e_int,
        trap: e_trap,
    }
}

/// ∂/∂axis of a dealiased spectral field, in physical space.
fn derivative_from_hat(ops: &SpectralOps, hat: &ComplexField3D, axis: usize) -> ComplexField3D {
    let grid = ops.grid();
    let n = grid.n();
    let kv = grid.wavenumbers();
    let src = hat.data();
    let mut out = ComplexField3D::zeros(n);
    {
        let dst = out.data_mut();
        for k in 0..n {
            for j in 0..n {
                let base = n * (j + n * k);
                for i in 0..n {
                    let kk = match axis {
                        0 => kv[i],
                        1 => kv[j],
                        _ => kv[k],
                    };
                    let z = src[base + i];
                    dst[base + i] = Complex64::new(-kk * z.im, kk * z.re);
                }
            }
        }
    }
    ops.inverse_inplace(&mut out);
    out
}

/// Sampling region for density statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfRegion {
    /// Sphere `r < 0.8 πL` where the trap is exactly harmonic.
    TrapInterior,
    /// Whole periodic box.
    FullDomain,
}

/// Histogram of the mass density over a region.
#[derive(Debug, Clone)]
pub struct DensityPdf {
    /// Bin edges, length `len(counts) + 1`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Normalized density: `density[i] = counts[i]/(n_samples · width_i)`,
    /// so the PDF integrates to 1.
    pub density: Vec<f64>,
    pub n_samples: u64,
}

/// Histogram of `ρ = m|ψ|²` over the requested region.
///
/// Degenerate (all-equal) samples produce a single synthetic-width bin
/// rather than an error. `bins` must be at least 2.
pub fn density_pdf(
    grid: &SpectralGrid,
    psi: &ComplexField3D,
    params: &PhysicalParams,
    bins: usize,
    region: PdfRegion,
) -> Result<DensityPdf> {
    if bins < 2 {
        return Err(Error::invalid(format!(
            "density_pdf needs bins >= 2, got {bins}"
        )));
    }
    let n = grid.n();
    let c = grid.coords();
    let r_c2 = {
        let r_c = 0.8 * PI * grid.length();
        r_c * r_c
    };
    let m = params.mass();
    let mut samples: Vec<f64> = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                if region == PdfRegion::TrapInterior {
                    let r2 = c[i] * c[i] + c[j] * c[j] + c[k] * c[k];
                    if r2 >= r_c2 {
                        continue;
                    }
                }
                samples.push(m * psi.data()[grid.idx(i, j, k)].norm_sqr());
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::invalid("density_pdf: empty sampling region"));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n_samples = samples.len() as u64;

    if hi == lo {
        // Degenerate field: one bin of synthetic width keeps ∫pdf = 1.
        // The density divides by the representable edge difference (not
        // the nominal width) so the unit integral is exact.
        let h = 1e-9 * lo.abs().max(1.0);
        let edges = vec![lo - 0.5 * h, lo + 0.5 * h];
        let width = edges[1] - edges[0];
        return Ok(DensityPdf {
            edges,
            counts: vec![n_samples],
            density: vec![1.0 / width],
            n_samples,
        });
    }

    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &s in &samples {
        let mut b = ((s - lo) / width) as usize;
        if b >= bins {
            b = bins - 1; // right edge inclusive in the last bin
        }
        counts[b] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|b| lo + b as f64 * width).collect();
    let density: Vec<f64> = counts
        .iter()
        .map(|&cnt| cnt as f64 / (n_samples as f64 * width))
        .collect();
    Ok(DensityPdf {
        edges,
        counts,
        density,
        n_samples,
    })
}
