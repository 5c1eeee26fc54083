//! Hamiltonian (Gross-Pitaevskii) evolution for the work strokes:
//!
//! ```text
//! iħ ∂ψ/∂t = [ -ħ²/(2m) ∇²  +  g|ψ|²  +  V(r, t) ] ψ
//! ```
//!
//! Time stepping is classical RK4 with the right-hand side evaluated
//! pseudospectrally (kinetic term in spectral space, nonlinear products in
//! physical space, dealiased). To keep the norm drift of RK4 at the
//! round-off floor over long runs, the integration is performed in a frame
//! rotating at a fixed reference chemical potential `μ_ref` (the GP
//! chemical potential of the stroke's initial state); the lab-frame phase
//! `e^{-i μ_ref t/ħ}` is restored exactly after every step. This is a pure
//! gauge choice — observables are unchanged — but it removes the dominant
//! `O((μ dt/ħ)⁶)` per-step amplitude error of RK4 on the bulk phase.

use crate::diagnostics::{self, EnergySample, EnergySeries};
use crate::error::{Error, Result};
use crate::spectral::{continued_potential, ComplexField3D, RealField3D, SpectralOps};
use crate::util::det_sum_by;
use num_complex::Complex64;

/// Fixed unit system: `ħ/m`, with `m = 1`, `ρ₀ = 1`, `g₀ = 1` so that the
/// sound speed at full coupling is 1 and the healing length is
/// `ξ = ħ/√(2 m ρ₀ g₀) ≈ 0.0707` box-length units.
pub const HBAR_OVER_M: f64 = 0.1;

/// Physical constants of a run. Everything except the interaction
/// multiplier `α` is pinned by the unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    alpha: f64,
    g0: f64,
    rho0: f64,
    m: f64,
    hbar_over_m: f64,
}

impl PhysicalParams {
    /// `alpha` scales the interaction, `g = α g₀`, and must lie in (0, 1].
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
            return Err(Error::invalid(format!(
                "interaction multiplier alpha must satisfy 0 < alpha <= 1, got {alpha}"
            )));
        }
        Ok(PhysicalParams {
            alpha,
            g0: 1.0,
            rho0: 1.0,
            m: 1.0,
            hbar_over_m: HBAR_OVER_M,
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Effective coupling `g = α g₀`.
    #[inline]
    pub fn g(&self) -> f64 {
        self.alpha * self.g0
    }

    #[inline]
    pub fn g0(&self) -> f64 {
        self.g0
    }

    #[inline]
    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.m
    }

    #[inline]
    pub fn hbar_over_m(&self) -> f64 {
        self.hbar_over_m
    }

    #[inline]
    pub fn hbar(&self) -> f64 {
        self.hbar_over_m * self.m
    }

    /// Bulk sound speed `c = √(g ρ₀ / m)`; equals `√α` in code units.
    pub fn sound_speed(&self) -> f64 {
        (self.g() * self.rho0 / self.m).sqrt()
    }

    /// Healing length `ξ = ħ/√(2 m ρ₀ g)`; scales as `α^{-1/2}`.
    pub fn healing_length(&self) -> f64 {
        self.hbar() / (2.0 * self.m * self.rho0 * self.g()).sqrt()
    }
}

/// Linear trap-frequency ramp `ω(t)` over a stroke of duration `tau`.
///
/// The number of steps is `round(tau/dt)` (at least 1) and the effective
/// step is adjusted to `tau/n_steps` so the stroke ends exactly at `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeSchedule {
    omega_start: f64,
    omega_end: f64,
    tau: f64,
    dt: f64,
    n_steps: u64,
}

impl StrokeSchedule {
    pub fn new(omega_start: f64, omega_end: f64, tau: f64, dt: f64) -> Result<Self> {
        for (name, v) in [
            ("omega_start", omega_start),
            ("omega_end", omega_end),
            ("tau", tau),
            ("dt", dt),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if omega_start < 0.0 || omega_end < 0.0 {
            return Err(Error::invalid(format!(
                "trap frequencies must be >= 0, got omega_start = {omega_start}, omega_end = {omega_end}"
            )));
        }
        if tau <= 0.0 {
            return Err(Error::invalid(format!("stroke duration tau must be > 0, got {tau}")));
        }
        if dt <= 0.0 || dt > tau {
            return Err(Error::invalid(format!(
                "time step must satisfy 0 < dt <= tau, got dt = {dt}, tau = {tau}"
            )));
        }
        let n_steps = ((tau / dt).round() as u64).max(1);
        Ok(StrokeSchedule {
            omega_start,
            omega_end,
            tau,
            dt: tau / n_steps as f64,
            n_steps,
        })
    }

    #[inline]
    pub fn omega_start(&self) -> f64 {
        self.omega_start
    }

    #[inline]
    pub fn omega_end(&self) -> f64 {
        self.omega_end
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Effective step, `tau / n_steps`.
    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn n_steps(&self) -> u64 {
        self.n_steps
    }

    /// `ω` at stroke-local time `t`, clamped to the ramp's endpoints.
    pub fn omega_at(&self, t: f64) -> f64 {
        let s = (t / self.tau).clamp(0.0, 1.0);
        self.omega_start + (self.omega_end - self.omega_start) * s
    }
}

/// A wave function tagged with its simulation time.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub psi: ComplexField3D,
    pub t: f64,
}

/// GP chemical potential of a state,
/// `μ = ⟨ħ²/2m |∇ψ|² + (g|ψ|² + V)|ψ|²⟩ / ⟨|ψ|²⟩`.
pub fn chemical_potential(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    potential: &RealField3D,
    params: &PhysicalParams,
) -> f64 {
    let mut hat = psi.clone();
    ops.forward_inplace(&mut hat);
    ops.dealias_inplace(&mut hat);
    let e_lap = diagnostics::gradient_energy_from_hat(ops, &hat, params);
    let p = psi.data();
    let v = potential.data();
    let g = params.g();
    let e_loc = det_sum_by(p.len(), |i| {
        let a2 = p[i].norm_sqr();
        (g * a2 + v[i]) * a2
    }) / p.len() as f64;
    (e_lap + e_loc) / psi.mean_abs2()
}

/// Literal GP right-hand side `∂ψ/∂t = (1/iħ)[H ψ]`, dealiased. Allocates;
/// intended for tests and one-off evaluations — the stepper uses an
/// allocation-free internal path.
pub fn gpe_rhs(
    ops: &SpectralOps,
    psi: &ComplexField3D,
    potential: &RealField3D,
    params: &PhysicalParams,
) -> ComplexField3D {
    let mut hat = psi.clone();
    let mut out = ComplexField3D::zeros(psi.n());
    rhs_core(
        ops,
        params,
        potential,
        1.0, // potential used as-is
        0.0, // no gauge shift
        psi,
        &mut hat,
        &mut out,
    );
    out
}

/// Gauged RHS into `out`: `out = -(i/ħ)[(ħ²k²/2m)ψ̂ + F{(g|ψ|² + ω²·U - μ_ref)ψ}]∨`
/// where `U` is the unit-frequency trap and `∨` denotes the dealiased
/// inverse transform. `hat` is scratch. 3 FFTs.
#[allow(clippy::too_many_arguments)]
fn rhs_core(
    ops: &SpectralOps,
    params: &PhysicalParams,
    trap_unit: &RealField3D,
    omega_sq: f64,
    mu_ref: f64,
    input: &ComplexField3D,
    hat: &mut ComplexField3D,
    out: &mut ComplexField3D,
) {
    let grid = ops.grid();
    let n = grid.n();

    hat.copy_from(input);
    ops.forward_inplace(hat);
    ops.dealias_inplace(hat);

    // Local part in physical space.
    let g = params.g();
    {
        let dst = out.data_mut();
        let src = input.data();
        let tu = trap_unit.data();
        for i in 0..dst.len() {
            let z = src[i];
            dst[i] = (g * z.norm_sqr() + omega_sq * tu[i] - mu_ref) * z;
        }
    }
    ops.forward_inplace(out);
    ops.dealias_inplace(out);

    // Combine in spectral space and return to physical space.
    let kv = grid.wavenumbers();
    let pref_kin = 0.5 * params.hbar_over_m(); // (ħ²k²/2m)/ħ = (ħ/2m)k²
    let inv_hbar = 1.0 / params.hbar();
    {
        let dst = out.data_mut();
        let src = hat.data();
        for k in 0..n {
            let kz2 = kv[k] * kv[k];
            for j in 0..n {
                let kyz2 = kv[j] * kv[j] + kz2;
                let base = n * (j + n * k);
                for i in 0..n {
                    let k2 = kv[i] * kv[i] + kyz2;
                    let val = pref_kin * k2 * src[base + i] + inv_hbar * dst[base + i];
                    dst[base + i] = Complex64::new(val.im, -val.re); // × (-i)
                }
            }
        }
    }
    ops.inverse_inplace(out);
}

/// RK4 stepper for one stroke, integrating in the `μ_ref` gauge frame.
/// Owns its scratch buffers; one instance per stroke.
pub struct GpeStepper<'a> {
    ops: &'a SpectralOps,
    params: PhysicalParams,
    /// Unit-frequency trap `½ m R(r)²`; the instantaneous potential is
    /// `ω² ×` this field.
    trap_unit: RealField3D,
    mu_ref: f64,
    dt: f64,
    /// Exact lab-frame phase restored after each step.
    phase_per_step: Complex64,
    hat: ComplexField3D,
    k: ComplexField3D,
    stage: ComplexField3D,
    acc: ComplexField3D,
}

impl<'a> GpeStepper<'a> {
    pub fn new(ops: &'a SpectralOps, params: PhysicalParams, dt: f64, mu_ref: f64) -> Self {
        let n = ops.grid().n();
        GpeStepper {
            ops,
            params,
            trap_unit: continued_potential(ops.grid(), 1.0, params.mass()),
            mu_ref,
            dt,
            phase_per_step: Complex64::from_polar(1.0, -mu_ref * dt / params.hbar()),
            hat: ComplexField3D::zeros(n),
            k: ComplexField3D::zeros(n),
            stage: ComplexField3D::zeros(n),
            acc: ComplexField3D::zeros(n),
        }
    }

    #[inline]
    pub fn mu_ref(&self) -> f64 {
        self.mu_ref
    }

    /// Advance `psi` by one step of `dt`, sampling the trap frequency at
    /// the three RK4 substep times `(t, t + dt/2, t + dt)`.
    pub fn step(&mut self, psi: &mut ComplexField3D, omegas: (f64, f64, f64)) {
        let dt = self.dt;
        let phase = self.phase_per_step;
        let (w0, wh, w1) = omegas;
        let Self {
            ops,
            params,
            trap_unit,
            mu_ref,
            hat,
            k,
            stage,
            acc,
            ..
        } = self;
        let (ops, params, mu_ref) = (*ops, *params, *mu_ref);

        // k1
        rhs_core(ops, &params, trap_unit, w0 * w0, mu_ref, psi, hat, k);
        acc.copy_from(k);
        axpy(stage, psi, k, 0.5 * dt);
        // k2
        rhs_core(ops, &params, trap_unit, wh * wh, mu_ref, stage, hat, k);
        acc_add(acc, k, 2.0);
        axpy(stage, psi, k, 0.5 * dt);
        // k3
        rhs_core(ops, &params, trap_unit, wh * wh, mu_ref, stage, hat, k);
        acc_add(acc, k, 2.0);
        axpy(stage, psi, k, dt);
        // k4
        rhs_core(ops, &params, trap_unit, w1 * w1, mu_ref, stage, hat, k);
        acc_add(acc, k, 1.0);

        let w = dt / 6.0;
        let dst = psi.data_mut();
        let a = acc.data();
        for i in 0..dst.len() {
            dst[i] = (dst[i] + w * a[i]) * phase;
        }
    }
}

/// `dst = base + c·k`, all same size.
fn axpy(dst: &mut ComplexField3D, base: &ComplexField3D, k: &ComplexField3D, c: f64) {
    let d = dst.data_mut();
    let b = base.data();
    let s = k.data();
    for i in 0..d.len() {
        d[i] = b[i] + c * s[i];
    }
}

/// `acc += c·k`.
fn acc_add(acc: &mut ComplexField3D, k: &ComplexField3D, c: f64) {
    let d = acc.data_mut();
    let s = k.data();
    for i in 0..d.len() {
        d[i] += c * s[i];
    }
}

/// Output of one work stroke.
#[derive(Debug, Clone)]
pub struct StrokeResult {
    pub state: WaveFunction,
    /// Energy samples at stroke start, every `record_stride` steps, and at
    /// the final step.
    pub series: EnergySeries,
}

/// Integrate one stroke of the trap-frequency ramp.
///
/// `record_stride` is in steps; 0 records only the endpoints. On a
/// non-finite field the run aborts with [`Error::NonFinite`] carrying the
/// last finite state.
pub fn run_adiabatic_stroke(
    ops: &SpectralOps,
    mut wf: WaveFunction,
    schedule: &StrokeSchedule,
    params: &PhysicalParams,
    record_stride: usize,
) -> Result<StrokeResult> {
    let grid = ops.grid();
    let trap_unit = continued_potential(grid, 1.0, params.mass());
    let mut v_scratch = RealField3D::zeros(grid.n());
    potential_at(&trap_unit, schedule.omega_start(), &mut v_scratch);
    let mu_ref = chemical_potential(ops, &wf.psi, &v_scratch, params);
    let dt = schedule.dt();
    let mut stepper = GpeStepper::new(ops, *params, dt, mu_ref);

    let mut series: EnergySeries = Vec::new();
    record_sample(ops, params, schedule, &trap_unit, &wf, 0.0, &mut v_scratch, &mut series);

    let mut prev = wf.psi.clone();
    for step in 0..schedule.n_steps() {
        let t0 = step as f64 * dt;
        let omegas = (
            schedule.omega_at(t0),
            schedule.omega_at(t0 + 0.5 * dt),
            schedule.omega_at(t0 + dt),
        );
        prev.copy_from(&wf.psi);
        stepper.step(&mut wf.psi, omegas);
        let t_now = wf.t + dt;
        if !wf.psi.mean_abs2().is_finite() {
            return Err(Error::NonFinite {
                step: step + 1,
                t: t_now,
                state: Box::new(WaveFunction { psi: prev, t: wf.t }),
            });
        }
        wf.t = t_now;
        let is_last = step + 1 == schedule.n_steps();
        if is_last || (record_stride > 0 && (step + 1) % record_stride as u64 == 0) {
            record_sample(
                ops,
                params,
                schedule,
                &trap_unit,
                &wf,
                t0 + dt,
                &mut v_scratch,
                &mut series,
            );
        }
    }

    Ok(StrokeResult { state: wf, series })
}

#[allow(clippy::too_many_arguments)]
fn record_sample(
    ops: &SpectralOps,
    params: &PhysicalParams,
    schedule: &StrokeSchedule,
    trap_unit: &RealField3D,
    wf: &WaveFunction,
    local_t: f64,
    v_scratch: &mut RealField3D,
    series: &mut EnergySeries,
) {
    let omega = schedule.omega_at(local_t);
    potential_at(trap_unit, omega, v_scratch);
    series.push(EnergySample {
        t: wf.t,
        omega,
        mass: wf.psi.mean_abs2(),
        energy: diagnostics::energy_breakdown(ops, &wf.psi, v_scratch, params),
    });
}

/// `out = ω² × trap_unit`.
fn potential_at(trap_unit: &RealField3D, omega: f64, out: &mut RealField3D) {
    let w2 = omega * omega;
    let src = trap_unit.data();
    let dst = out.data_mut();
    for i in 0..dst.len() {
        dst[i] = w2 * src[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;

    fn setup(n: usize) -> (SpectralOps, PhysicalParams) {
        let grid = SpectralGrid::new(n, 1.0).unwrap();
        (SpectralOps::new(grid), PhysicalParams::new(1.0).unwrap())
    }

    #[test]
    fn params_reject_out_of_range_alpha() {
        for bad in [0.0, -0.5, 1.0001, f64::NAN, f64::INFINITY] {
            assert!(PhysicalParams::new(bad).is_err(), "alpha = {bad} accepted");
        }
        assert!(PhysicalParams::new(1.0).is_ok());
        assert!(PhysicalParams::new(1e-6).is_ok());
    }

    #[test]
    fn unit_system_identities() {
        let p = PhysicalParams::new(1.0).unwrap();
        // c(1) = 1, and ħ/m = √2 c ξ ties the healing length to 0.1/√2.
        assert!((p.sound_speed() - 1.0).abs() < 1e-15);
        assert!((2.0f64.sqrt() * p.sound_speed() * p.healing_length() - HBAR_OVER_M).abs() < 1e-16);
        // Scalings with α.
        for alpha in [0.04, 0.25, 0.64] {
            let q = PhysicalParams::new(alpha).unwrap();
            assert!((q.sound_speed() - alpha.sqrt() * p.sound_speed()).abs() < 1e-15);
            assert!(
                (q.healing_length() - p.healing_length() / alpha.sqrt()).abs()
                    < 1e-15 * q.healing_length()
            );
            assert!((q.g() - alpha).abs() < 1e-16);
        }
    }

    #[test]
    fn schedule_validation_and_ramp() {
        assert!(StrokeSchedule::new(0.3, 0.4, 0.0, 0.1).is_err());
        assert!(StrokeSchedule::new(0.3, 0.4, 1.0, 0.0).is_err());
        assert!(StrokeSchedule::new(0.3, 0.4, 1.0, 2.0).is_err());
        assert!(StrokeSchedule::new(-0.1, 0.4, 1.0, 0.1).is_err());
        assert!(StrokeSchedule::new(0.3, f64::NAN, 1.0, 0.1).is_err());

        let s = StrokeSchedule::new(0.2, 0.6, 1.0, 0.3).unwrap();
        assert_eq!(s.n_steps(), 3);
        assert!((s.dt() - 1.0 / 3.0).abs() < 1e-16);
        assert!((s.omega_at(0.0) - 0.2).abs() < 1e-15);
        assert!((s.omega_at(1.0) - 0.6).abs() < 1e-15);
        assert!((s.omega_at(0.5) - 0.4).abs() < 1e-15);
        // Clamped outside the stroke.
        assert_eq!(s.omega_at(-1.0), 0.2);
        assert_eq!(s.omega_at(2.0), 0.6);
    }

    #[test]
    fn uniform_state_is_stationary_up_to_the_exact_bulk_phase() {
        let (ops, params) = setup(8);
        let a = (params.rho0() / params.mass()).sqrt();
        let psi0 = ComplexField3D::from_fn(ops.grid(), |_, _, _| Complex64::new(a, 0.0));
        let schedule = StrokeSchedule::new(0.0, 0.0, 2.5, 2.5e-3).unwrap();
        let wf = WaveFunction { psi: psi0.clone(), t: 0.0 };
        let out = run_adiabatic_stroke(&ops, wf, &schedule, &params, 0).unwrap();
        // ψ(t) = ψ0 e^{-i g|ψ0|² t/ħ}
        let mu = params.g() * a * a;
        let t = schedule.tau();
        let expect = Complex64::from_polar(a, -mu * t / params.hbar());
        let mut worst = 0.0f64;
        for z in out.state.psi.data() {
            worst = worst.max((z - expect).norm());
        }
        assert!(worst < 1e-9, "max deviation from exact phase: {worst}");
        // Mass is conserved to round-off.
        let drift = (out.state.psi.mean_abs2() - a * a).abs() / (a * a);
        assert!(drift < 1e-13, "mass drift {drift}");
    }

    #[test]
    fn plane_wave_acquires_the_bogoliubov_free_particle_phase() {
        let (ops, params) = setup(16);
        let a = 0.7;
        let kx = 2.0;
        let psi0 = ComplexField3D::from_fn(ops.grid(), |x, _, _| {
            Complex64::from_polar(a, kx * x)
        });
        let schedule = StrokeSchedule::new(0.0, 0.0, 0.5, 1e-3).unwrap();
        let wf = WaveFunction { psi: psi0.clone(), t: 0.0 };
        let out = run_adiabatic_stroke(&ops, wf, &schedule, &params, 0).unwrap();
        // Exact: Ω = ħk²/2m + g a²/ħ (plane wave keeps uniform density).
        let omega_exact =
            0.5 * params.hbar_over_m() * kx * kx + params.g() * a * a / params.hbar();
        let t = schedule.tau();
        let mut worst = 0.0f64;
        for (z, z0) in out.state.psi.data().iter().zip(psi0.data()) {
            let expect = z0 * Complex64::from_polar(1.0, -omega_exact * t);
            worst = worst.max((z - expect).norm());
        }
        assert!(worst < 1e-9, "max deviation {worst}");
    }

    #[test]
    fn rk4_is_fourth_order_in_dt() {
        let (ops, params) = setup(16);
        let psi0 = ComplexField3D::from_fn(ops.grid(), |x, y, z| {
            Complex64::new(
                1.0 + 0.05 * x.cos() + 0.03 * (y + z).cos(),
                0.02 * y.sin(),
            )
        });
        let tau = 0.4;
        let run = |dt: f64| {
            let schedule = StrokeSchedule::new(0.3, 0.3, tau, dt).unwrap();
            let wf = WaveFunction { psi: psi0.clone(), t: 0.0 };
            run_adiabatic_stroke(&ops, wf, &schedule, &params, 0)
                .unwrap()
                .state
                .psi
        };
        let reference = run(0.00125);
        let err = |dt: f64| {
            let psi = run(dt);
            let mut e = 0.0f64;
            for (a, b) in psi.data().iter().zip(reference.data()) {
                e = e.max((a - b).norm());
            }
            e
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let ratio = e1 / e2;
        assert!(
            (10.0..26.0).contains(&ratio),
            "expected ~16x error reduction per halving, got {ratio} (e1 = {e1:.3e}, e2 = {e2:.3e})"
        );
    }

    #[test]
    fn trapped_state_conserves_mass_and_energy_at_fixed_omega() {
        let (ops, params) = setup(16);
        let psi0 = ComplexField3D::from_fn(ops.grid(), |x, y, z| {
            Complex64::new(
                1.0 + 0.04 * x.cos() + 0.02 * (y - z).cos(),
                0.03 * (x + y).sin(),
            )
        });
        let schedule = StrokeSchedule::new(0.33, 0.33, 1.0, 2.5e-3).unwrap();
        let wf = WaveFunction { psi: psi0, t: 0.0 };
        let out = run_adiabatic_stroke(&ops, wf, &schedule, &params, 0).unwrap();
        let first = &out.series[0];
        let last = out.series.last().unwrap();
        // Budget: < 1e-10 relative per 1e3 steps; this run is 400 steps.
        let mass_drift = (last.mass - first.mass).abs() / first.mass;
        assert!(mass_drift < 4e-11, "mass drift {mass_drift}");
        let e_drift = (last.energy.total - first.energy.total).abs() / first.energy.total.abs();
        assert!(e_drift < 1e-9, "energy drift {e_drift}");
    }

    #[test]
    fn stroke_records_endpoints_and_stride_samples() {
        let (ops, params) = setup(8);
        let a = 1.0;
        let psi0 = ComplexField3D::from_fn(ops.grid(), |_, _, _| Complex64::new(a, 0.0));
        let schedule = StrokeSchedule::new(0.30, 0.35, 0.1, 1e-3).unwrap();
        assert_eq!(schedule.n_steps(), 100);
        let wf = WaveFunction { psi: psi0, t: 5.0 };
        let out = run_adiabatic_stroke(&ops, wf, &schedule, &params, 10).unwrap();
        // start + 10 stride hits (the last of which is the final step).
        assert_eq!(out.series.len(), 11);
        assert!((out.series[0].omega - 0.30).abs() < 1e-15);
        assert!((out.series.last().unwrap().omega - 0.35).abs() < 1e-15);
        assert!((out.series[0].t - 5.0).abs() < 1e-15);
        assert!((out.state.t - 5.1).abs() < 1e-12);
        for w in out.series.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].omega > w[0].omega);
        }
    }

    #[test]
    fn non_finite_field_aborts_with_last_good_state() {
        let (ops, params) = setup(8);
        let mut psi0 = ComplexField3D::from_fn(ops.grid(), |_, _, _| Complex64::new(1.0, 0.0));
        psi0.data_mut()[17] = Complex64::new(f64::NAN, 0.0);
        let schedule = StrokeSchedule::new(0.3, 0.3, 1.0, 0.1).unwrap();
        let wf = WaveFunction { psi: psi0, t: 0.0 };
        match run_adiabatic_stroke(&ops, wf, &schedule, &params, 0) {
            Err(Error::NonFinite { step, state, .. }) => {
                assert_eq!(step, 1);
                assert_eq!(state.t, 0.0);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn gpe_rhs_matches_exact_rate_for_uniform_state() {
        let (ops, params) = setup(8);
        let a = 1.3;
        let psi = ComplexField3D::from_fn(ops.grid(), |_, _, _| Complex64::new(a, 0.0));
        let v = RealField3D::zeros(8);
        let rhs = gpe_rhs(&ops, &psi, &v, &params);
        // ∂ψ/∂t = -(i/ħ) g a² ψ: purely imaginary, magnitude g a³/ħ.
        let expect = -params.g() * a * a * a / params.hbar();
        for z in rhs.data() {
            assert!(z.re.abs() < 1e-12);
            assert!((z.im - expect).abs() < 1e-12 * expect.abs());
        }
    }

    #[test]
    fn chemical_potential_of_uniform_state_is_g_rho() {
        let (ops, params) = setup(8);
        let psi = ComplexField3D::from_fn(ops.grid(), |_, _, _| Complex64::new(1.0, 0.0));
        let v = RealField3D::zeros(8);
        let mu = chemical_potential(&ops, &psi, &v, &params);
        assert!((mu - params.g()).abs() < 1e-13);
    }
}
