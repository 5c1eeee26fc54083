//! Benchmarks for the per-step hot paths: 3D FFT round trips, one RK4
//! work-stroke step, one stochastic thermalization step, and the full
//! energy decomposition. Run with `cargo bench -p becotto-bench`.

use becotto_core::diagnostics::energy_breakdown;
use becotto_core::gpe::{run_adiabatic_stroke, PhysicalParams, StrokeSchedule, WaveFunction};
use becotto_core::otto::uniform_state;
use becotto_core::sgle::{thermalize, BathParams, StationarityCriterion};
use becotto_core::spectral::{continued_potential, ComplexField3D, SpectralGrid, SpectralOps};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 32;

fn setup() -> (SpectralOps, PhysicalParams) {
    let grid = SpectralGrid::new(N, 1.0).unwrap();
    (SpectralOps::new(grid), PhysicalParams::new(1.0).unwrap())
}

fn random_field(ops: &SpectralOps, seed: u64) -> ComplexField3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField3D::from_fn(ops.grid(), |_, _, _| {
        Complex64::new(1.0 + 0.05 * rng.gen_range(-1.0..1.0), 0.05 * rng.gen_range(-1.0..1.0))
    })
}

fn bench_fft(c: &mut Criterion) {
    let (ops, _) = setup();
    let f = random_field(&ops, 1);
    c.bench_function("fft3_forward_inverse_32", |b| {
        b.iter_batched(
            || f.clone(),
            |mut x| {
                ops.forward_inplace(&mut x);
                ops.inverse_inplace(&mut x);
                x
            },
            BatchSize::LargeInput,
        )
    });
}

fn bench_rk4_step(c: &mut Criterion) {
    let (ops, params) = setup();
    let f = random_field(&ops, 2);
    // One stroke of exactly one step = one RK4 application (12 FFTs).
    let schedule = StrokeSchedule::new(0.337613, 0.334638, 2.5e-3, 2.5e-3).unwrap();
    c.bench_function("rk4_stroke_step_32", |b| {
        b.iter_batched(
            || WaveFunction { psi: f.clone(), t: 0.0 },
            |wf| run_adiabatic_stroke(&ops, wf, &schedule, &params, 0).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn bench_sgle_step(c: &mut Criterion) {
    let (ops, params) = setup();
    let potential = continued_potential(ops.grid(), 0.337613, params.mass());
    let bath = BathParams {
        temperature: 1e-4,
        mu0: 1.0,
        gamma: 1.0,
        rho_target: 1.0,
        dt: 2.5e-3,
    };
    // Run a fixed 8-step chunk (amortizes the entry/exit transforms).
    let crit = StationarityCriterion {
        min_steps: 0,
        max_steps: 8,
        sample_stride: u64::MAX,
        window: usize::MAX,
        rel_slope_tol: 1e-3,
    };
    let wf0 = uniform_state(ops.grid(), 1.0, &params);
    c.bench_function("sgle_8_steps_32", |b| {
        b.iter_batched(
            || wf0.clone(),
            |wf| thermalize(&ops, wf, &potential, &params, &bath, &crit, 7, 0).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn bench_energy_breakdown(c: &mut Criterion) {
    let (ops, params) = setup();
    let potential = continued_potential(ops.grid(), 0.337613, params.mass());
    let f = random_field(&ops, 3);
    c.bench_function("energy_breakdown_32", |b| {
        b.iter(|| energy_breakdown(&ops, &f, &potential, &params))
    });
}

fn bench_helmholtz(c: &mut Criterion) {
    let (ops, params) = setup();
    let f = random_field(&ops, 4);
    let w = becotto_core::diagnostics::weighted_velocity(&ops, &f, &params);
    c.bench_function("helmholtz_decompose_32", |b| {
        b.iter(|| ops.helmholtz_decompose(&w))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_fft, bench_rk4_step, bench_sgle_step, bench_energy_breakdown, bench_helmholtz
}
criterion_main!(benches);
