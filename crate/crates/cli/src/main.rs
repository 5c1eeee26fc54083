//! Command-line driver for the condensate Otto-cycle engine.
//!
//! Every invocation resolves a configuration (defaults ← config file ←
//! `--set` overrides), creates a locked run directory, echoes the resolved
//! config there, and emits CSVs plus binary checkpoints.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical abort,
//! 4 finished without reaching stationarity.

use becotto_core::diagnostics::{
    density_pdf, energy_breakdown, weighted_velocity, EnergySample, PdfRegion,
};
use becotto_core::error::Error as CoreError;
use becotto_core::gpe::{
    chemical_potential, run_adiabatic_stroke, PhysicalParams, StrokeSchedule, WaveFunction,
};
use becotto_core::io::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use becotto_core::io::config::RunConfig;
use becotto_core::io::csv;
use becotto_core::io::rundir::RunDir;
use becotto_core::otto::{
    ensemble_run_with, lambda_change_point, mc_efficiency_distribution, otto_reference,
    sweep_alpha, sweep_hot_temperature, sweep_omega_ratio, tlambda_sweep, uniform_state,
    CycleOutput, EnsembleOutcome, MassPolicy,
};
use becotto_core::sgle::{thermalize, BathParams, ThermalizeResult};
use becotto_core::spectral::{
    continued_potential, spectrum_slope, SpectralGrid, SpectralOps,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "becotto",
    version,
    about = "Quantum Otto cycle on a trapped interacting condensate: \
             spectral GPE strokes, stochastic thermalization, energy and \
             efficiency diagnostics."
)]
struct Cli {
    /// Config file (flat `key = value`; missing keys take defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. --set n=32 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Run directory name under out_dir (default: derived from the
    /// subcommand, e.g. `thermalize-hot`, `cycle-chain0`).
    #[arg(long, global = true)]
    run_name: Option<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    /// Stiff trap ω_h with the hot bath.
    Hot,
    /// Soft trap ω_c with the cold bath.
    Cold,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    /// ω_h → ω_c ramp (work extraction).
    Expand,
    /// ω_c → ω_h ramp.
    Compress,
}

#[derive(Clone, Copy, ValueEnum)]
enum MassPolicyArg {
    /// Keep the mean density target fixed as α varies.
    FixedTotalMass,
    /// Keep the trap-center density fixed (target ∝ α^{3/2}).
    FixedCentralDensity,
}

impl From<MassPolicyArg> for MassPolicy {
    fn from(v: MassPolicyArg) -> Self {
        match v {
            MassPolicyArg::FixedTotalMass => MassPolicy::FixedTotalMass,
            MassPolicyArg::FixedCentralDensity => MassPolicy::FixedCentralDensity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    /// Points inside the harmonic region of the trap.
    Trap,
    /// Every grid point.
    Full,
}

#[derive(Subcommand)]
enum Cmd {
    /// Relax a state against a bath at fixed trap until stationary.
    Thermalize {
        /// Which (trap, bath) pair to use.
        #[arg(long, value_enum, default_value = "hot")]
        side: Side,
        /// Starting state (default: uniform at the target density).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run one adiabatic work stroke (a linear trap-frequency ramp).
    Stroke {
        #[arg(long, value_enum)]
        direction: Direction,
        /// Starting state (default: thermalize at the stroke's start
        /// side first).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run one full cycle from a hot-equilibrated state.
    Cycle {
        /// Hot-equilibrated input (default: fresh hot thermalization).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Noise-stream chain id (vary for independent repetitions).
        #[arg(long, default_value_t = 0)]
        chain: u64,
    },
    /// Run n_cycles sequential cycles and the Monte Carlo efficiency
    /// statistics.
    Ensemble {
        /// Hot-equilibrated input (default: fresh hot thermalization).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Noise-stream chain id (vary for independent repetitions).
        #[arg(long, default_value_t = 0)]
        chain: u64,
    },
    /// Parameter sweeps, one cycle chain per point.
    Sweep {
        #[command(subcommand)]
        what: SweepCmd,
    },
    /// Offline analyses of checkpoints and cycle tables.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Interaction-strength sweep: g = α g₀.
    Alpha {
        /// α values, e.g. --values 1.0,0.5,0.2
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value = "fixed-total-mass")]
        mass_policy: MassPolicyArg,
    },
    /// Trap-frequency-ratio sweep at fixed ω_h: ω_c = ratio · ω_h.
    Omega {
        /// ω_c/ω_h ratios in (0, 1], e.g. --ratios 0.9,0.95,0.99
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<f64>,
    },
    /// Hot-bath temperature sweep at fixed T_c.
    Temperature {
        /// T_h values in condensation-temperature units.
        #[arg(long = "t-hots", value_delimiter = ',', required = true)]
        t_hots: Vec<f64>,
    },
    /// Condensation-temperature calibration: thermalize along an
    /// ascending temperature ladder in the soft trap and locate the knee
    /// of the central-density order parameter.
    Tlambda {
        /// Bath temperatures in code units, strictly ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        thetas: Vec<f64>,
        /// Sampling-ball radius for the order parameter. Keep large enough
        /// to cover a few hundred grid points (≥ 1.0 on a 32³ grid).
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        /// Post-equilibration measurement chunks per temperature.
        #[arg(long, default_value_t = 4)]
        chunks: u32,
        /// Steps per measurement chunk.
        #[arg(long, default_value_t = 2000)]
        chunk_steps: u64,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Shell spectra of the density-weighted velocity (total,
    /// compressible, incompressible) plus the log-log slope over
    /// shells 4..16.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
    },
    /// Histogram of the mass density.
    Pdf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[arg(long, value_enum, default_value = "trap")]
        region: RegionArg,
    },
    /// Five-way energy decomposition of a checkpoint.
    Energy {
        #[arg(long)]
        input: PathBuf,
    },
    /// Monte Carlo efficiency distribution from a cycle table
    /// (cycles.csv produced by `cycle`/`ensemble`).
    EfficiencyStats {
        #[arg(long)]
        records: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidInput(_)
        | CoreError::Config(_)
        | CoreError::Stats(_)
        | CoreError::Checkpoint(_) => 2,
        CoreError::NonFinite { .. } => 3,
        CoreError::Io(_) => 1,
    }
}

/// Resolved configuration plus the machinery built from it.
struct Ctx {
    cfg: RunConfig,
    ops: SpectralOps,
    params: PhysicalParams,
    dir: RunDir,
}

impl Ctx {
    fn new(cli: &Cli, default_name: String) -> Result<Self, CoreError> {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_overrides(&cli.set)?;
        let name = cli.run_name.clone().unwrap_or(default_name);
        let dir = RunDir::create(&cfg.out_dir.join(name))?;
        dir.write_text("config.txt", &cfg.to_text())?;
        dir.write_text("seed.txt", &format!("{}\n", cfg.seed))?;
        let grid = SpectralGrid::new(cfg.n, cfg.box_scale)?;
        let ops = SpectralOps::new(grid);
        let params = PhysicalParams::new(cfg.alpha)?;
        eprintln!("run directory: {}", dir.path().display());
        Ok(Ctx { cfg, ops, params, dir })
    }

    fn load_input(&self, path: &Path) -> Result<WaveFunction, CoreError> {
        let (psi, meta) = load_checkpoint(path)?;
        if meta.n as usize != self.cfg.n {
            return Err(CoreError::Config(format!(
                "input checkpoint is {}³ but the config says n = {}",
                meta.n, self.cfg.n
            )));
        }
        if meta.box_scale != self.cfg.box_scale {
            return Err(CoreError::Config(format!(
                "input checkpoint has l = {} but the config says l = {}",
                meta.box_scale, self.cfg.box_scale
            )));
        }
        if meta.alpha != self.cfg.alpha {
            return Err(CoreError::Config(format!(
                "input checkpoint has alpha = {} but the config says alpha = {}",
                meta.alpha, self.cfg.alpha
            )));
        }
        Ok(WaveFunction { psi, t: meta.t })
    }

    fn save_state(
        &self,
        name: &str,
        wf: &WaveFunction,
        omega: f64,
        mu: f64,
        temperature: f64,
    ) -> Result<(), CoreError> {
        let meta = CheckpointMeta {
            n: self.cfg.n as u32,
            box_scale: self.cfg.box_scale,
            t: wf.t,
            omega,
            alpha: self.cfg.alpha,
            mu,
            temperature,
        };
        save_checkpoint(&wf.psi, &meta, &self.dir.file(name))
    }

    fn write_csv<F>(&self, name: &str, f: F) -> Result<(), CoreError>
    where
        F: FnOnce(&mut BufWriter<std::fs::File>) -> Result<(), CoreError>,
    {
        let mut w = BufWriter::new(self.dir.create_file(name)?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<u8, CoreError> {
    match &cli.cmd {
        Cmd::Thermalize { side, input } => cmd_thermalize(&cli, *side, input.clone()),
        Cmd::Stroke { direction, input } => cmd_stroke(&cli, *direction, input.clone()),
        Cmd::Cycle { input, chain } => cmd_ensemble(&cli, input.clone(), *chain, Some(1), "cycle"),
        Cmd::Ensemble { input, chain } => cmd_ensemble(&cli, input.clone(), *chain, None, "ensemble"),
        Cmd::Sweep { what } => cmd_sweep(&cli, what),
        Cmd::Analyze { what } => cmd_analyze(&cli, what),
    }
}

fn bath_for(cfg: &RunConfig, theta: f64, mu0: f64) -> BathParams {
    BathParams {
        temperature: theta,
        mu0,
        gamma: cfg.gamma,
        rho_target: cfg.rho_target,
        dt: cfg.dt_bath,
    }
}

fn cmd_thermalize(cli: &Cli, side: Side, input: Option<PathBuf>) -> Result<u8, CoreError> {
    let tag = match side {
        Side::Hot => "hot",
        Side::Cold => "cold",
    };
    let ctx = Ctx::new(cli, format!("thermalize-{tag}"))?;
    let cfg = &ctx.cfg;
    let (omega, theta) = match side {
        Side::Hot => (cfg.omega_hot, cfg.theta_hot()),
        Side::Cold => (cfg.omega_cold, cfg.theta_cold()),
    };
    let potential = continued_potential(ctx.ops.grid(), omega, ctx.params.mass());
    let (wf, mu0) = match &input {
        Some(p) => {
            let wf = ctx.load_input(p)?;
            let mu = chemical_potential(&ctx.ops, &wf.psi, &potential, &ctx.params);
            (wf, mu)
        }
        None => {
            let wf = uniform_state(ctx.ops.grid(), cfg.rho_target, &ctx.params);
            let mu = ctx.params.g() * cfg.rho_target / (ctx.params.mass() * ctx.params.mass());
            (wf, mu)
        }
    };
    let res = thermalize(
        &ctx.ops,
        wf,
        &potential,
        &ctx.params,
        &bath_for(cfg, theta, mu0),
        &cfg.stationarity(),
        cfg.seed,
        0,
    )?;
    report_thermalize(&res, tag);
    ctx.write_csv("trace.csv", |w| csv::write_thermal_trace(w, &res.trace))?;
    ctx.save_state("final.ckpt", &res.state, omega, res.mu, theta)?;
    Ok(if res.stationary { 0 } else { 4 })
}

fn report_thermalize(res: &ThermalizeResult, tag: &str) {
    if res.stationary {
        println!(
            "{tag} bath: stationary after {} steps (mu = {:.6e})",
            res.steps, res.mu
        );
    } else {
        println!(
            "{tag} bath: hit the step cap at {} steps without stationarity (mu = {:.6e})",
            res.steps, res.mu
        );
    }
}

fn cmd_stroke(cli: &Cli, direction: Direction, input: Option<PathBuf>) -> Result<u8, CoreError> {
    let tag = match direction {
        Direction::Expand => "expand",
        Direction::Compress => "compress",
    };
    let ctx = Ctx::new(cli, format!("stroke-{tag}"))?;
    let cfg = &ctx.cfg;
    let (w0, w1, theta_prep) = match direction {
        Direction::Expand => (cfg.omega_hot, cfg.omega_cold, cfg.theta_hot()),
        Direction::Compress => (cfg.omega_cold, cfg.omega_hot, cfg.theta_cold()),
    };
    let mut prep_stationary = true;
    let wf = match &input {
        Some(p) => ctx.load_input(p)?,
        None => {
            // No input: equilibrate at the stroke's starting trap first.
            let potential = continued_potential(ctx.ops.grid(), w0, ctx.params.mass());
            let wf0 = uniform_state(ctx.ops.grid(), cfg.rho_target, &ctx.params);
            let mu0 = ctx.params.g() * cfg.rho_target / (ctx.params.mass() * ctx.params.mass());
            let prep = thermalize(
                &ctx.ops,
                wf0,
                &potential,
                &ctx.params,
                &bath_for(cfg, theta_prep, mu0),
                &cfg.stationarity(),
                cfg.seed,
                0,
            )?;
            report_thermalize(&prep, "preparation");
            prep_stationary = prep.stationary;
            ctx.write_csv("prep_trace.csv", |w| csv::write_thermal_trace(w, &prep.trace))?;
            ctx.save_state("prep.ckpt", &prep.state, w0, prep.mu, theta_prep)?;
            prep.state
        }
    };
    let schedule = StrokeSchedule::new(w0, w1, cfg.tau_stroke, cfg.dt_stroke)?;
    let out = match run_adiabatic_stroke(&ctx.ops, wf, &schedule, &ctx.params, cfg.record_stride) {
        Ok(out) => out,
        Err(CoreError::NonFinite { step, t, state }) => {
            // Keep the last finite state for post-mortem, then abort.
            ctx.save_state("abort.ckpt", &state, schedule.omega_at(t - state.t), 0.0, 0.0)?;
            return Err(CoreError::NonFinite { step, t, state });
        }
        Err(e) => return Err(e),
    };
    let e0 = out.series.first().expect("endpoints recorded").energy.total;
    let e1 = out.series.last().expect("endpoints recorded").energy.total;
    println!(
        "{tag} stroke: omega {w0} -> {w1} over tau = {}, steps = {}, \
         E {e0:.8e} -> {e1:.8e}, work = {:.8e}",
        schedule.tau(),
        schedule.n_steps(),
        e0 - e1
    );
    ctx.write_csv("stroke.csv", |w| csv::write_energy_series(w, &out.series))?;
    ctx.save_state("final.ckpt", &out.state, w1, 0.0, 0.0)?;
    Ok(if prep_stationary { 0 } else { 4 })
}

/// Shared driver for `cycle` (one cycle, no statistics) and `ensemble`.
fn cmd_ensemble(
    cli: &Cli,
    input: Option<PathBuf>,
    chain: u64,
    n_override: Option<u32>,
    name: &str,
) -> Result<u8, CoreError> {
    let ctx = Ctx::new(cli, format!("{name}-chain{chain}"))?;
    let cfg = &ctx.cfg;
    let cc = cfg.cycle_config();
    let n_cycles = n_override.unwrap_or(cfg.n_cycles);
    let initial = match &input {
        Some(p) => Some(ctx.load_input(p)?),
        None => None,
    };

    let theta_h = cfg.theta_hot();
    let theta_c = cfg.theta_cold();
    let save_cycle = |out: &CycleOutput| -> Result<(), CoreError> {
        let c = out.record.cycle;
        ctx.write_csv(&format!("expansion-{c}.csv"), |w| {
            csv::write_energy_series(w, &out.expansion_series)
        })?;
        ctx.write_csv(&format!("compression-{c}.csv"), |w| {
            csv::write_energy_series(w, &out.compression_series)
        })?;
        ctx.write_csv(&format!("cold-trace-{c}.csv"), |w| {
            csv::write_thermal_trace(w, &out.cold_trace)
        })?;
        ctx.write_csv(&format!("hot-trace-{c}.csv"), |w| {
            csv::write_thermal_trace(w, &out.hot_trace)
        })?;
        // Stroke-boundary checkpoints: enough to re-run any stroke alone.
        ctx.save_state(
            &format!("post-expansion-{c}.ckpt"),
            &out.post_expansion,
            cfg.omega_cold,
            0.0,
            0.0,
        )?;
        ctx.save_state(
            &format!("post-cold-{c}.ckpt"),
            &out.post_cold,
            cfg.omega_cold,
            out.mu_cold,
            theta_c,
        )?;
        ctx.save_state(
            &format!("post-compression-{c}.ckpt"),
            &out.post_compression,
            cfg.omega_hot,
            0.0,
            0.0,
        )?;
        ctx.save_state(
            &format!("cycle-{c}.ckpt"),
            &out.state,
            cfg.omega_hot,
            out.mu_hot,
            theta_h,
        )?;
        let r = &out.record;
        println!(
            "cycle {c}: W = {:.6e}, Q_h = {:.6e}, eta = {:.6e} \
             (baths stationary: cold {}, hot {})",
            r.work_net, r.heat_hot, r.efficiency, r.cold_stationary, r.hot_stationary
        );
        Ok(())
    };

    let outcome = ensemble_run_with(&ctx.ops, &ctx.params, &cc, n_cycles, chain, initial, save_cycle)?;

    if !outcome.prep_trace.is_empty() {
        ctx.write_csv("prep_trace.csv", |w| csv::write_thermal_trace(w, &outcome.prep_trace))?;
    }
    ctx.write_csv("cycles.csv", |w| csv::write_cycle_records(w, &outcome.records))?;
    if let Some(state) = &outcome.state {
        ctx.save_state("final.ckpt", state, cfg.omega_hot, 0.0, theta_h)?;
    }
    if let Some(reason) = &outcome.aborted {
        eprintln!("chain aborted: {reason}");
    }

    // Monte Carlo statistics once at least two cycles completed.
    if name == "ensemble" {
        if outcome.records.len() >= 2 {
            let works: Vec<f64> = outcome.records.iter().map(|r| r.work_net).collect();
            let heats: Vec<f64> = outcome.records.iter().map(|r| r.heat_hot).collect();
            let dist = mc_efficiency_distribution(&works, &heats, cfg.n_mc, cfg.seed)?;
            let eta_ref = otto_reference(cfg.omega_cold, cfg.omega_hot)?;
            ctx.write_csv("efficiency.csv", |w| {
                csv::write_efficiency_summary(w, &dist, eta_ref)
            })?;
            ctx.write_csv("eta_samples.csv", |w| csv::write_samples(w, "eta", &dist.samples))?;
            println!(
                "efficiency: mean = {:.6e} +- {:.6e} (ideal reference {:.6e}, \
                 {} rejected draws)",
                dist.mean, dist.std, eta_ref, dist.n_rejected
            );
        } else {
            eprintln!(
                "statistics refused: need >= 2 completed cycles, have {}",
                outcome.records.len()
            );
        }
    }

    let nonstat = !outcome.prep_stationary
        || outcome
            .records
            .iter()
            .any(|r| !r.cold_stationary || !r.hot_stationary);
    Ok(if outcome.aborted.is_some() {
        3
    } else if nonstat {
        4
    } else {
        0
    })
}

fn cmd_sweep(cli: &Cli, what: &SweepCmd) -> Result<u8, CoreError> {
    match what {
        SweepCmd::Alpha { values, mass_policy } => {
            let ctx = Ctx::new(cli, "sweep-alpha".to_string())?;
            let cc = ctx.cfg.cycle_config();
            let points = sweep_alpha(&ctx.ops, &cc, values, (*mass_policy).into(), ctx.cfg.n_cycles)?;
            finish_sweep(&ctx, "alpha", &points, |_| {
                otto_reference(ctx.cfg.omega_cold, ctx.cfg.omega_hot)
            })
        }
        SweepCmd::Omega { ratios } => {
            let ctx = Ctx::new(cli, "sweep-omega".to_string())?;
            let cc = ctx.cfg.cycle_config();
            let points = sweep_omega_ratio(&ctx.ops, &ctx.params, &cc, ratios, ctx.cfg.n_cycles)?;
            finish_sweep(&ctx, "omega_ratio", &points, |r| {
                otto_reference(r * ctx.cfg.omega_hot, ctx.cfg.omega_hot)
            })
        }
        SweepCmd::Temperature { t_hots } => {
            let ctx = Ctx::new(cli, "sweep-temperature".to_string())?;
            let cc = ctx.cfg.cycle_config();
            // Configured in T_λ units, handed over in code units.
            let thetas: Vec<f64> = t_hots.iter().map(|t| t * ctx.cfg.theta_lambda).collect();
            let points = sweep_hot_temperature(&ctx.ops, &ctx.params, &cc, &thetas, ctx.cfg.n_cycles)?;
            finish_sweep(&ctx, "theta_hot", &points, |_| {
                otto_reference(ctx.cfg.omega_cold, ctx.cfg.omega_hot)
            })
        }
        SweepCmd::Tlambda { thetas, r0, chunks, chunk_steps } => {
            let ctx = Ctx::new(cli, "sweep-tlambda".to_string())?;
            let cfg = &ctx.cfg;
            // The calibration runs in the soft trap, where the transition
            // sits lowest.
            let potential = continued_potential(ctx.ops.grid(), cfg.omega_cold, ctx.params.mass());
            let mu0 = ctx.params.g() * cfg.rho_target / (ctx.params.mass() * ctx.params.mass());
            let bath = bath_for(cfg, 0.0, mu0);
            let pts = tlambda_sweep(
                &ctx.ops,
                &ctx.params,
                &potential,
                &bath,
                &cfg.stationarity(),
                thetas,
                *r0,
                *chunks,
                *chunk_steps,
                cfg.seed,
            )?;
            ctx.write_csv("lambda.csv", |w| csv::write_lambda_points(w, &pts))?;
            let curve: Vec<(f64, f64)> = pts.iter().map(|p| (p.theta, p.order_param)).collect();
            match lambda_change_point(&curve) {
                Some(knee) => {
                    println!("condensation knee: theta_lambda = {knee:.6e} code units");
                    ctx.dir.write_text("theta_lambda.txt", &format!("{knee:?}\n"))?;
                }
                None => eprintln!("no change point detected (need >= 5 points)"),
            }
            let nonstat = pts.iter().any(|p| !p.stationary);
            if nonstat {
                eprintln!("warning: some temperatures did not reach stationarity");
            }
            Ok(if nonstat { 4 } else { 0 })
        }
    }
}

/// Write the flattened per-cycle table plus a per-point summary with
/// Monte Carlo efficiency statistics, then map flags to the exit code.
fn finish_sweep<F>(
    ctx: &Ctx,
    label: &str,
    points: &[(f64, EnsembleOutcome)],
    eta_ref_of: F,
) -> Result<u8, CoreError>
where
    F: Fn(f64) -> Result<f64, CoreError>,
{
    ctx.write_csv("sweep.csv", |w| csv::write_sweep_records(w, label, points))?;
    ctx.write_csv("summary.csv", |w| {
        writeln!(
            w,
            "{label},n_completed,work_mean,work_std,heat_mean,heat_std,\
             eta_mc_mean,eta_mc_std,eta_reference"
        )?;
        for (x, outcome) in points {
            let n_ok = outcome.records.len();
            let eta_ref = eta_ref_of(*x)?;
            if n_ok >= 2 {
                let works: Vec<f64> = outcome.records.iter().map(|r| r.work_net).collect();
                let heats: Vec<f64> = outcome.records.iter().map(|r| r.heat_hot).collect();
                let d = mc_efficiency_distribution(&works, &heats, ctx.cfg.n_mc, ctx.cfg.seed)?;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    csv::fmt_f64(*x),
                    n_ok,
                    csv::fmt_f64(d.work_mean),
                    csv::fmt_f64(d.work_std),
                    csv::fmt_f64(d.heat_mean),
                    csv::fmt_f64(d.heat_std),
                    csv::fmt_f64(d.mean),
                    csv::fmt_f64(d.std),
                    csv::fmt_f64(eta_ref),
                )?;
            } else {
                eprintln!(
                    "{label} = {x}: statistics refused ({n_ok} completed cycles)"
                );
                writeln!(
                    w,
                    "{},{},nan,nan,nan,nan,nan,nan,{}",
                    csv::fmt_f64(*x),
                    n_ok,
                    csv::fmt_f64(eta_ref),
                )?;
            }
        }
        Ok(())
    })?;
    let any_abort = points.iter().any(|(_, o)| o.aborted.is_some());
    let any_nonstat = points.iter().any(|(_, o)| {
        !o.prep_stationary
            || o.records.iter().any(|r| !r.cold_stationary || !r.hot_stationary)
    });
    for (x, o) in points {
        if let Some(reason) = &o.aborted {
            eprintln!("{label} = {x}: {reason}");
        }
    }
    Ok(if any_abort {
        3
    } else if any_nonstat {
        4
    } else {
        0
    })
}

fn cmd_analyze(cli: &Cli, what: &AnalyzeCmd) -> Result<u8, CoreError> {
    match what {
        AnalyzeCmd::Spectrum { input } => {
            let ctx = Ctx::new(cli, "analyze-spectrum".to_string())?;
            let wf = ctx.load_input(input)?;
            let w = weighted_velocity(&ctx.ops, &wf.psi, &ctx.params);
            let parts = ctx.ops.helmholtz_decompose(&w);
            let total = ctx.ops.shell_spectrum(&w);
            let comp = ctx.ops.shell_spectrum(&parts.compressible);
            let inc = ctx.ops.shell_spectrum(&parts.incompressible);
            ctx.write_csv("spectrum.csv", |out| {
                writeln!(out, "k,e_total,e_compressible,e_incompressible")?;
                for s in 0..total.len() {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        csv::fmt_f64(total[s].k),
                        csv::fmt_f64(total[s].energy),
                        csv::fmt_f64(comp[s].energy),
                        csv::fmt_f64(inc[s].energy),
                    )?;
                }
                Ok(())
            })?;
            let lo = 4.0 / ctx.cfg.box_scale;
            let hi = 16.0 / ctx.cfg.box_scale;
            match spectrum_slope(&comp, lo, hi) {
                Some(slope) => println!(
                    "compressible-spectrum log-log slope over k in [{lo}, {hi}]: {slope:.4}"
                ),
                None => println!("not enough populated shells in [{lo}, {hi}] for a slope"),
            }
            Ok(0)
        }
        AnalyzeCmd::Pdf { input, bins, region } => {
            let ctx = Ctx::new(cli, "analyze-pdf".to_string())?;
            let wf = ctx.load_input(input)?;
            let region = match region {
                RegionArg::Trap => PdfRegion::TrapInterior,
                RegionArg::Full => PdfRegion::FullDomain,
            };
            let pdf = density_pdf(ctx.ops.grid(), &wf.psi, &ctx.params, *bins, region)?;
            ctx.write_csv("pdf.csv", |w| csv::write_pdf(w, &pdf))?;
            println!("histogram over {} samples in {} bins", pdf.n_samples, pdf.counts.len());
            Ok(0)
        }
        AnalyzeCmd::Energy { input } => {
            let ctx = Ctx::new(cli, "analyze-energy".to_string())?;
            let (psi, meta) = load_checkpoint(input)?;
            if meta.n as usize != ctx.cfg.n {
                return Err(CoreError::Config(format!(
                    "checkpoint is {}³ but the config says n = {}",
                    meta.n, ctx.cfg.n
                )));
            }
            let params = PhysicalParams::new(meta.alpha)?;
            let potential = continued_potential(ctx.ops.grid(), meta.omega, params.mass());
            let e = energy_breakdown(&ctx.ops, &psi, &potential, &params);
            let sample = EnergySample {
                t: meta.t,
                omega: meta.omega,
                mass: psi.mean_abs2(),
                energy: e,
            };
            ctx.write_csv("energy.csv", |w| csv::write_energy_series(w, &vec![sample]))?;
            println!("t = {}, omega = {}, alpha = {}", meta.t, meta.omega, meta.alpha);
            println!("  total        {:+.10e}", e.total);
            println!("  kinetic_inc  {:+.10e}", e.kinetic_inc);
            println!("  kinetic_comp {:+.10e}", e.kinetic_comp);
            println!("  quantum      {:+.10e}", e.quantum);
            println!("  interaction  {:+.10e}", e.interaction);
            println!("  trap         {:+.10e}", e.trap);
            println!("  component sum - total = {:+.3e}", e.component_sum() - e.total);
            Ok(0)
        }
        AnalyzeCmd::EfficiencyStats { records } => {
            let ctx = Ctx::new(cli, "analyze-efficiency".to_string())?;
            let (works, heats) = read_cycle_table(records)?;
            let dist = mc_efficiency_distribution(&works, &heats, ctx.cfg.n_mc, ctx.cfg.seed)?;
            let eta_ref = otto_reference(ctx.cfg.omega_cold, ctx.cfg.omega_hot)?;
            ctx.write_csv("efficiency.csv", |w| {
                csv::write_efficiency_summary(w, &dist, eta_ref)
            })?;
            ctx.write_csv("eta_samples.csv", |w| csv::write_samples(w, "eta", &dist.samples))?;
            println!(
                "efficiency from {} cycles: mean = {:.6e} +- {:.6e} \
                 ({} draws, {} rejected)",
                works.len(),
                dist.mean,
                dist.std,
                dist.n_mc,
                dist.n_rejected
            );
            Ok(0)
        }
    }
}

/// Pull (work_net, heat_hot) columns out of a cycles.csv.
fn read_cycle_table(path: &PathBuf) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Stats(format!("{}: empty table", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter().position(|c| *c == name).ok_or_else(|| {
            CoreError::Stats(format!("{}: missing column `{name}`", path.display()))
        })
    };
    let iw = find("work_net")?;
    let iq = find("heat_hot")?;
    let mut works = Vec::new();
    let mut heats = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64, CoreError> {
            fields
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CoreError::Stats(format!(
                        "{}: row {}: cannot parse column {i}",
                        path.display(),
                        no + 2
                    ))
                })
        };
        works.push(get(iw)?);
        heats.push(get(iq)?);
    }
    Ok((works, heats))
}
