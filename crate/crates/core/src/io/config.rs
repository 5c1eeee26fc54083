//! Run configuration: a flat `key = value` text format with documented
//! keys, defaults for every key, strict validation, and a full-precision
//! echo for provenance.

use crate::error::{Error, Result};
use crate::otto::CycleConfig;
use crate::sgle::StationarityCriterion;
use std::path::{Path, PathBuf};

/// Complete parameter set for a run.
///
/// Temperatures are configured in condensation-temperature units
/// (`t_hot`, `t_cold`) and converted to code units through
/// `theta_lambda`, the calibrated code-unit value of `k_B T_λ` for the
/// configured grid (see the temperature-sweep calibration in the README).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Grid points per dimension (`n`).
    pub n: usize,
    /// Unit length scale; the domain is a cube of side 2πL (`l`).
    pub box_scale: f64,
    /// Interaction multiplier in (0, 1] (`alpha`).
    pub alpha: f64,
    /// Expanded-trap frequency (`omega_cold`).
    pub omega_cold: f64,
    /// Compressed-trap frequency (`omega_hot`).
    pub omega_hot: f64,
    /// Hot bath temperature in units of T_λ (`t_hot`).
    pub t_hot: f64,
    /// Cold bath temperature in units of T_λ (`t_cold`).
    pub t_cold: f64,
    /// Code-unit k_B·T_λ for this grid (`theta_lambda`).
    pub theta_lambda: f64,
    /// Work stroke duration (`tau_stroke`).
    pub tau_stroke: f64,
    /// Work stroke time step (`dt_stroke`).
    pub dt_stroke: f64,
    /// Thermalization time step (`dt_bath`).
    pub dt_bath: f64,
    /// Density servo gain (`gamma`).
    pub gamma: f64,
    /// Mean mass density target (`rho_target`).
    pub rho_target: f64,
    /// Stationarity: minimum steps before testing (`stat_min_steps`).
    pub stat_min_steps: u64,
    /// Stationarity: hard step cap (`stat_max_steps`).
    pub stat_max_steps: u64,
    /// Stationarity: energy sampling stride in steps (`stat_stride`).
    pub stat_stride: u64,
    /// Stationarity: trailing window length in samples (`stat_window`).
    pub stat_window: usize,
    /// Stationarity: relative slope tolerance (`stat_tol`).
    pub stat_tol: f64,
    /// Cycles per chain (`n_cycles`).
    pub n_cycles: u32,
    /// Monte Carlo draws for the efficiency distribution (`n_mc`).
    pub n_mc: u64,
    /// Base RNG seed (`seed`).
    pub seed: u64,
    /// Energy recording stride in steps, 0 = endpoints only
    /// (`record_stride`).
    pub record_stride: usize,
    /// Base directory for run outputs (`out_dir`).
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    /// Production defaults: 64³ grid, dt = 2.5×10⁻³, working-point trap
    /// frequencies, bath temperatures 0.012/0.003 T_λ.
    fn default() -> Self {
        RunConfig {
            n: 64,
            box_scale: 1.0,
            alpha: 1.0,
            omega_cold: 0.334638,
            omega_hot: 0.337613,
            t_hot: 0.012,
            t_cold: 0.003,
            theta_lambda: THETA_LAMBDA_64,
            tau_stroke: 48.0,
            dt_stroke: 2.5e-3,
            dt_bath: 2.5e-3,
            gamma: 1.0,
            rho_target: 1.0,
            stat_min_steps: 2_000,
            stat_max_steps: 200_000,
            stat_stride: 10,
            stat_window: 2_000,
            stat_tol: 1e-3,
            n_cycles: 4,
            n_mc: 100_000,
            seed: 1,
            record_stride: 40,
            out_dir: PathBuf::from("runs"),
        }
    }
}

/// Calibrated code-unit k_B·T_λ on the default 64³ grid (α = 1,
/// trap at the default ω_c). The condensation temperature of the
/// truncated classical field depends on the retained-mode count, so this
/// constant is per-resolution; recalibrate with the temperature sweep
/// when changing `n`. Current value: knee of the central-density ladder
/// from `sweep tlambda`, thetas 0.0015–0.030, 5×2000-step averaging chunks.
pub const THETA_LAMBDA_64: f64 = 8.7e-3;

/// Companion calibration for 32³ desk-scale runs (knee of the central-density
/// ladder produced by `sweep tlambda`, thetas 0.002–0.075, 5×2500-step
/// averaging chunks).
pub const THETA_LAMBDA_32: f64 = 1.5e-2;

impl RunConfig {
    /// Parse a flat `key = value` document on top of the defaults.
    /// `#` starts a comment; blank lines are skipped; keys may appear at
    /// most once; unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{}`",
                    lineno + 1,
                    line
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            seen.push(key.to_string());
            cfg.set_key(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Apply `key=value` overrides (e.g. from CLI flags) on top of the
    /// current values, then revalidate.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::Config(format!("override `{item}`: expected key=value"))
            })?;
            self.set_key(key.trim(), value.trim())?;
        }
        self.validate()
    }

    /// Set one key from its text value. Unknown keys and malformed values
    /// are errors; range checks happen in [`RunConfig::validate`].
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse::<T>().map_err(|_| {
                Error::Config(format!(
                    "key `{key}`: cannot parse `{value}` as {}",
                    std::any::type_name::<T>()
                ))
            })
        }
        match key {
            "n" => self.n = num(key, value)?,
            "l" => self.box_scale = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "omega_cold" => self.omega_cold = num(key, value)?,
            "omega_hot" => self.omega_hot = num(key, value)?,
            "t_hot" => self.t_hot = num(key, value)?,
            "t_cold" => self.t_cold = num(key, value)?,
            "theta_lambda" => self.theta_lambda = num(key, value)?,
            "tau_stroke" => self.tau_stroke = num(key, value)?,
            "dt_stroke" => self.dt_stroke = num(key, value)?,
            "dt_bath" => self.dt_bath = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "rho_target" => self.rho_target = num(key, value)?,
            "stat_min_steps" => self.stat_min_steps = num(key, value)?,
            "stat_max_steps" => self.stat_max_steps = num(key, value)?,
            "stat_stride" => self.stat_stride = num(key, value)?,
            "stat_window" => self.stat_window = num(key, value)?,
            "stat_tol" => self.stat_tol = num(key, value)?,
            "n_cycles" => self.n_cycles = num(key, value)?,
            "n_mc" => self.n_mc = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "record_stride" => self.record_stride = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!("unknown key `{other}`")));
            }
        }
        Ok(())
    }

    /// Check every invariant, naming the violated one.
    pub fn validate(&self) -> Result<()> {
        crate::spectral::SpectralGrid::new(self.n, self.box_scale)?;
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "alpha: need 0 < alpha <= 1, got {}",
                self.alpha
            )));
        }
        if !(self.theta_lambda.is_finite() && self.theta_lambda > 0.0) {
            return Err(Error::Config(format!(
                "theta_lambda: need a positive code-unit scale, got {}",
                self.theta_lambda
            )));
        }
        for (name, v) in [("t_hot", self.t_hot), ("t_cold", self.t_cold)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name}: need >= 0, got {v}")));
            }
        }
        if self.n_cycles == 0 {
            return Err(Error::Config("n_cycles: need >= 1".to_string()));
        }
        if self.n_mc == 0 {
            return Err(Error::Config("n_mc: need >= 1".to_string()));
        }
        // The cycle/bath/stationarity invariants are owned by those types.
        self.cycle_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Hot bath temperature in code units.
    pub fn theta_hot(&self) -> f64 {
        self.t_hot * self.theta_lambda
    }

    /// Cold bath temperature in code units.
    pub fn theta_cold(&self) -> f64 {
        self.t_cold * self.theta_lambda
    }

    pub fn stationarity(&self) -> StationarityCriterion {
        StationarityCriterion {
            min_steps: self.stat_min_steps,
            max_steps: self.stat_max_steps,
            sample_stride: self.stat_stride,
            window: self.stat_window,
            rel_slope_tol: self.stat_tol,
        }
    }

    pub fn cycle_config(&self) -> CycleConfig {
        CycleConfig {
            omega_cold: self.omega_cold,
            omega_hot: self.omega_hot,
            theta_hot: self.theta_hot(),
            theta_cold: self.theta_cold(),
            tau_stroke: self.tau_stroke,
            dt_stroke: self.dt_stroke,
            dt_bath: self.dt_bath,
            gamma: self.gamma,
            rho_target: self.rho_target,
            stationarity: self.stationarity(),
            record_stride: self.record_stride,
            seed: self.seed,
        }
    }

    /// Serialize as the same flat format, with round-trip-exact floats.
    /// `from_text(to_text(c)) == c` for any valid config.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(1024);
        s.push_str("# resolved run configuration\n");
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("n", format!("{}", self.n));
        kv("l", format!("{:?}", self.box_scale));
        kv("alpha", format!("{:?}", self.alpha));
        kv("omega_cold", format!("{:?}", self.omega_cold));
        kv("omega_hot", format!("{:?}", self.omega_hot));
        kv("t_hot", format!("{:?}", self.t_hot));
        kv("t_cold", format!("{:?}", self.t_cold));
        kv("theta_lambda", format!("{:?}", self.theta_lambda));
        kv("tau_stroke", format!("{:?}", self.tau_stroke));
        kv("dt_stroke", format!("{:?}", self.dt_stroke));
        kv("dt_bath", format!("{:?}", self.dt_bath));
        kv("gamma", format!("{:?}", self.gamma));
        kv("rho_target", format!("{:?}", self.rho_target));
        kv("stat_min_steps", format!("{}", self.stat_min_steps));
        kv("stat_max_steps", format!("{}", self.stat_max_steps));
        kv("stat_stride", format!("{}", self.stat_stride));
        kv("stat_window", format!("{}", self.stat_window));
        kv("stat_tol", format!("{:?}", self.stat_tol));
        kv("n_cycles", format!("{}", self.n_cycles));
        kv("n_mc", format!("{}", self.n_mc));
        kv("seed", format!("{}", self.seed));
        kv("record_stride", format!("{}", self.record_stride));
        kv("out_dir", self.out_dir.display().to_string());
        s
    }
}
