//! Stochastic Ginzburg-Landau relaxation for the thermalization strokes:
//!
//! ```text
//! ∂ψ/∂t = (ħ/2m)∇²ψ - (1/ħ)(g|ψ|² + V - μ)ψ + η(r, t)
//! ```
//!
//! with complex white noise `⟨η(r,t) η*(r',t')⟩ = (2Θ/ħ) δ(r-r') δ(t-t')`
//! where `Θ = k_B T` in code units. Integration is Euler-Maruyama with the
//! deterministic drift evaluated pseudospectrally and the noise injected
//! directly on the retained spectral modes, so each mode is an exact
//! discrete Ornstein-Uhlenbeck process in the linear regime. The sampled
//! equilibrium is the grand-canonical classical-field ensemble
//! `P[ψ] ∝ exp(-(E - μN)/Θ)` truncated to the dealiased band.
//!
//! A slow feedback loop steers the chemical potential toward a target mean
//! density: `μ ← μ - γ(ρ̄ - ρ_m) dt`. Stationarity of the total energy over
//! a trailing window decides convergence; hitting the step cap flags the
//! result as non-stationary rather than failing.

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::gpe::{PhysicalParams, WaveFunction};
use crate::spectral::{ComplexField3D, RealField3D, SpectralGrid, SpectralOps};
use crate::util::linear_fit;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Bath and relaxation parameters for one thermalization stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// `Θ = k_B T` in code energy units. Zero gives noiseless projected
    /// gradient descent of the free energy.
    pub temperature: f64,
    /// Initial chemical potential.
    pub mu0: f64,
    /// Gain of the density servo `μ ← μ - γ(ρ̄ - ρ_m) dt`; 0 disables it.
    pub gamma: f64,
    /// Target volume-mean mass density `ρ_m`.
    pub rho_target: f64,
    /// Euler-Maruyama step in relaxation time units.
    pub dt: f64,
}

impl BathParams {
    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::invalid(format!(
                "bath temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !self.mu0.is_finite() {
            return Err(Error::invalid("initial chemical potential must be finite".to_string()));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::invalid(format!(
                "servo gain gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if !self.rho_target.is_finite() || self.rho_target <= 0.0 {
            return Err(Error::invalid(format!(
                "target density must be > 0, got {}",
                self.rho_target
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::invalid(format!("time step must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Convergence test: least-squares slope of the total energy over a
/// trailing window of samples, normalized by the window mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityCriterion {
    /// Never stop before this many steps.
    pub min_steps: u64,
    /// Give up (and flag non-stationary) after this many steps.
    pub max_steps: u64,
    /// Steps between energy samples.
    pub sample_stride: u64,
    /// Number of trailing samples in the fit.
    pub window: usize,
    /// Accept when `|slope| · T_window / |mean| <` this.
    pub rel_slope_tol: f64,
}

impl Default for StationarityCriterion {
    fn default() -> Self {
        StationarityCriterion {
            min_steps: 2_000,
            max_steps: 200_000,
            sample_stride: 10,
            window: 2_000,
            rel_slope_tol: 1e-3,
        }
    }
}

impl StationarityCriterion {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::invalid(format!(
                "stationarity window must be >= 2 samples, got {}",
                self.window
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::invalid("sample stride must be >= 1".to_string()));
        }
        if self.max_steps < self.min_steps {
            return Err(Error::invalid(format!(
                "max_steps ({}) must be >= min_steps ({})",
                self.max_steps, self.min_steps
            )));
        }
        if !self.rel_slope_tol.is_finite() || self.rel_slope_tol <= 0.0 {
            return Err(Error::invalid("relative slope tolerance must be > 0".to_string()));
        }
        Ok(())
    }
}

/// One entry of the thermalization trace.
#[derive(Debug, Clone, Copy)]
pub struct ThermalSample {
    pub step: u64,
    pub t: f64,
    pub e_total: f64,
    pub rho_mean: f64,
    pub mu: f64,
}

/// Output of a thermalization stroke.
#[derive(Debug, Clone)]
pub struct ThermalizeResult {
    pub state: WaveFunction,
    /// Chemical potential at exit.
    pub mu: f64,
    /// False iff the step cap was hit before the energy went stationary.
    pub stationary: bool,
    /// Steps actually taken.
    pub steps: u64,
    pub trace: Vec<ThermalSample>,
}

/// Relax `wf` against a bath at fixed trap potential.
///
/// The noise sequence is fully determined by `(seed, stream)`: modes are
/// visited in storage order and the generator is ChaCha8 with the stream
/// selecting an independent substream for ensemble members.
#[allow(clippy::too_many_arguments)]
pub fn thermalize(
    ops: &SpectralOps,
    mut wf: WaveFunction,
    potential: &RealField3D,
    params: &PhysicalParams,
    bath: &BathParams,
    crit: &StationarityCriterion,
    seed: u64,
    stream: u64,
) -> Result<ThermalizeResult> {
    bath.validate()?;
    crit.validate()?;
    let grid = ops.grid();
    if potential.n() != grid.n() || wf.psi.n() != grid.n() {
        return Err(Error::invalid("field size does not match the grid".to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    // Per-component noise std on stored (unnormalized-DFT) coefficients:
    // physical variance Θ dt/(ħ V_box) per component, scaled by N³.
    let n3 = grid.len() as f64;
    let v_box = grid.volume();
    let sigma = n3 * (bath.temperature * bath.dt / (params.hbar() * v_box)).sqrt();

    let mut hat = wf.psi.clone();
    ops.forward_inplace(&mut hat);
    ops.dealias_inplace(&mut hat);

    let mut psi = ComplexField3D::zeros(grid.n());
    let mut nl = ComplexField3D::zeros(grid.n());
    let mut prev_psi = wf.psi.clone();
    let mut mu = bath.mu0;
    let mut trace: Vec<ThermalSample> = Vec::new();
    let mut stationary = false;
    let dt = bath.dt;
    let g = params.g();
    let m = params.mass();
    let inv_hbar = 1.0 / params.hbar();
    let half_hbar_over_m = 0.5 * params.hbar_over_m();
    let kv = grid.wavenumbers();
    let n = grid.n();

    let mut step: u64 = 0;
    loop {
        // Physical mirror of the current spectral state.
        psi.copy_from(&hat);
        ops.inverse_inplace(&mut psi);
        let n_mean = psi.mean_abs2();
        let rho_mean = m * n_mean;
        if !rho_mean.is_finite() {
            let t_prev = if step == 0 { wf.t } else { wf.t - dt };
            return Err(Error::NonFinite {
                step,
                t: wf.t,
                state: Box::new(WaveFunction { psi: prev_psi, t: t_prev }),
            });
        }
        prev_psi.copy_from(&psi);

        if step.is_multiple_of(crit.sample_stride) {
            let e_total = diagnostics::total_energy(ops, &psi, potential, params);
            trace.push(ThermalSample {
                step,
                t: wf.t,
                e_total,
                rho_mean,
                mu,
            });
            if step >= crit.min_steps && trace.len() >= crit.window {
                let tail = &trace[trace.len() - crit.window..];
                if window_is_stationary(tail, crit.rel_slope_tol) {
                    stationary = true;
                    break;
                }
            }
        }
        if step >= crit.max_steps {
            break;
        }

        // Drift: local part in physical space, kinetic part in spectral space.
        {
            let dst = nl.data_mut();
            let src = psi.data();
            let v = potential.data();
            for i in 0..dst.len() {
                let z = src[i];
                dst[i] = -inv_hbar * (g * z.norm_sqr() + v[i] - mu) * z;
            }
        }
        ops.forward_inplace(&mut nl);
        ops.dealias_inplace(&mut nl);
        {
            let h = hat.data_mut();
            let d = nl.data();
            for kk in 0..n {
                let kz2 = kv[kk] * kv[kk];
                for jj in 0..n {
                    let kyz2 = kv[jj] * kv[jj] + kz2;
                    let base = n * (jj + n * kk);
                    #[allow(clippy::needless_range_loop)] // index arithmetic shared with kv
                    for ii in 0..n {
                        let idx = base + ii;
                        let k2 = kv[ii] * kv[ii] + kyz2;
                        h[idx] += dt * (d[idx] - half_hbar_over_m * k2 * h[idx]);
                    }
                }
            }
        }
        if sigma > 0.0 {
            inject_noise(&mut rng, grid, &mut hat, sigma);
        }

        mu -= bath.gamma * (rho_mean - bath.rho_target) * dt;
        wf.t += dt;
        step += 1;
    }

    wf.psi = psi;
    Ok(ThermalizeResult {
        state: wf,
        mu,
        stationary,
        steps: step,
        trace,
    })
}

/// `|slope| · T_window / |mean| < tol` on the trailing samples.
fn window_is_stationary(tail: &[ThermalSample], tol: f64) -> bool {
    let xs: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.e_total).collect();
    let (_, slope) = linear_fit(&xs, &ys);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let t_window = xs[xs.len() - 1] - xs[0];
    if mean == 0.0 {
        return slope.abs() * t_window < tol;
    }
    (slope * t_window / mean).abs() < tol
}

/// Add independent complex Gaussian noise of per-component std `sigma` to
/// every retained mode, visiting modes in storage order (deterministic for
/// a given generator state).
pub(crate) fn inject_noise(
    rng: &mut ChaCha8Rng,
    grid: &SpectralGrid,
    hat: &mut ComplexField3D,
    sigma: f64,
) {
    let keep = grid.axis_keep();
    let n = grid.n();
    let data = hat.data_mut();
    for k in 0..n {
        if !keep[k] {
            continue;
        }
        for j in 0..n {
            if !keep[j] {
                continue;
            }
            let base = n * (j + n * k);
            for i in 0..n {
                if !keep[i] {
                    continue;
                }
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                data[base + i] += Complex64::new(sigma * re, sigma * im);
            }
        }
    }
}

/// Grand-canonical free energy per unit volume, `F/V = ⟨e⟩ - μ ⟨|ψ|²⟩`.
/// Non-increasing under the Θ = 0 flow at fixed μ.
pub fn free_energy_density(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    potential: &RealField3D,
    params: &PhysicalParams,
    mu: f64,
) -> f64 {
    diagnostics::total_energy(ops, psi, potential, params) - mu * psi.mean_abs2()
}

/// Mean mass density over the central ball `r < r0`. Errors if the ball
/// contains no grid points.
pub fn density_mean_in_trap(
    grid: &SpectralGrid,
    psi: &ComplexField3D,
    params: &PhysicalParams,
    r0: f64,
) -> Result<f64> {
    if !r0.is_finite() || r0 <= 0.0 {
        return Err(Error::invalid(format!("sampling radius must be > 0, got {r0}")));
    }
    let n = grid.n();
    let c = grid.coords();
    let r02 = r0 * r0;
    let m = params.mass();
    let mut sum = 0.0;
    let mut count: u64 = 0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let r2 = c[i] * c[i] + c[j] * c[j] + c[k] * c[k];
                if r2 < r02 {
                    sum += m * psi.data()[grid.idx(i, j, k)].norm_sqr();
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid(format!(
            "no grid points inside sampling radius {r0}"
        )));
    }
    Ok(sum / count as f64)
}
