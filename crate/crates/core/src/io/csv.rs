//! CSV emission. All floating-point values are written with 17
//! significant digits (`{:.16e}`), which round-trips every f64 exactly.

use crate::diagnostics::{DensityPdf, EnergySeries};
use crate::error::Result;
use crate::otto::{CycleRecord, EfficiencyDistribution, EnsembleOutcome, LambdaPoint};
use crate::sgle::ThermalSample;
use std::io::Write;

/// Full-precision float formatting shared by every writer.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Energy series of a work stroke:
/// `t,omega,e_total,e_kin_inc,e_kin_comp,e_quantum,e_int,e_trap,mass`.
pub fn write_energy_series<W: Write>(w: &mut W, series: &EnergySeries) -> Result<()> {
    writeln!(w, "t,omega,e_total,e_kin_inc,e_kin_comp,e_quantum,e_int,e_trap,mass")?;
    for s in series {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.omega),
            fmt_f64(s.energy.total),
            fmt_f64(s.energy.kinetic_inc),
            fmt_f64(s.energy.kinetic_comp),
            fmt_f64(s.energy.quantum),
            fmt_f64(s.energy.interaction),
            fmt_f64(s.energy.trap),
            fmt_f64(s.mass),
        )?;
    }
    Ok(())
}

/// Thermalization trace: `step,t,e_total,rho_mean,mu`.
pub fn write_thermal_trace<W: Write>(w: &mut W, trace: &[ThermalSample]) -> Result<()> {
    writeln!(w, "step,t,e_total,rho_mean,mu")?;
    for s in trace {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.step,
            fmt_f64(s.t),
            fmt_f64(s.e_total),
            fmt_f64(s.rho_mean),
            fmt_f64(s.mu),
        )?;
    }
    Ok(())
}

/// Per-cycle records, one row each.
pub fn write_cycle_records<W: Write>(w: &mut W, records: &[CycleRecord]) -> Result<()> {
    writeln!(
        w,
        "cycle,e_exp_start,e_exp_end,e_comp_start,e_comp_end,\
         work_expansion,work_compression,work_net,heat_hot,heat_cold,\
         efficiency,cold_stationary,hot_stationary"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cycle,
            fmt_f64(r.energies.e_exp_start),
            fmt_f64(r.energies.e_exp_end),
            fmt_f64(r.energies.e_comp_start),
            fmt_f64(r.energies.e_comp_end),
            fmt_f64(r.work_expansion),
            fmt_f64(r.work_compression),
            fmt_f64(r.work_net),
            fmt_f64(r.heat_hot),
            fmt_f64(r.heat_cold),
            fmt_f64(r.efficiency),
            r.cold_stationary,
            r.hot_stationary,
        )?;
    }
    Ok(())
}

/// Shell spectrum: `k,energy` with integer-centered shells of width 1/L.
pub fn write_spectrum<W: Write>(w: &mut W, shells: &[f64]) -> Result<()> {
    writeln!(w, "k,energy")?;
    for (k, e) in shells.iter().enumerate() {
        writeln!(w, "{k},{}", fmt_f64(*e))?;
    }
    Ok(())
}

/// Density histogram: `bin_lo,bin_hi,count,density`.
pub fn write_pdf<W: Write>(w: &mut W, pdf: &DensityPdf) -> Result<()> {
    writeln!(w, "bin_lo,bin_hi,count,density")?;
    for i in 0..pdf.counts.len() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(pdf.edges[i]),
            fmt_f64(pdf.edges[i + 1]),
            pdf.counts[i],
            fmt_f64(pdf.density[i]),
        )?;
    }
    Ok(())
}

/// Efficiency summary: `stat,value` rows.
pub fn write_efficiency_summary<W: Write>(
    w: &mut W,
    d: &EfficiencyDistribution,
    eta_reference: f64,
) -> Result<()> {
    writeln!(w, "stat,value")?;
    for (k, v) in [
        ("eta_mean", d.mean),
        ("eta_std", d.std),
        ("eta_min", d.min),
        ("eta_max", d.max),
        ("eta_reference", eta_reference),
        ("work_mean", d.work_mean),
        ("work_std", d.work_std),
        ("heat_mean", d.heat_mean),
        ("heat_std", d.heat_std),
    ] {
        writeln!(w, "{k},{}", fmt_f64(v))?;
    }
    writeln!(w, "n_mc,{}", d.n_mc)?;
    writeln!(w, "n_rejected,{}", d.n_rejected)?;
    Ok(())
}

/// One named column of raw samples (e.g. the Monte Carlo η draws).
pub fn write_samples<W: Write>(w: &mut W, name: &str, xs: &[f64]) -> Result<()> {
    writeln!(w, "{name}")?;
    for x in xs {
        writeln!(w, "{}", fmt_f64(*x))?;
    }
    Ok(())
}

/// Condensation-sweep points: `theta,order_param,stationary`.
pub fn write_lambda_points<W: Write>(w: &mut W, pts: &[LambdaPoint]) -> Result<()> {
    writeln!(w, "theta,order_param,stationary")?;
    for p in pts {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(p.theta),
            fmt_f64(p.order_param),
            p.stationary
        )?;
    }
    Ok(())
}

/// Flattened sweep output: every completed cycle of every point, labeled
/// by the sweep variable.
pub fn write_sweep_records<W: Write>(
    w: &mut W,
    label: &str,
    points: &[(f64, EnsembleOutcome)],
) -> Result<()> {
    writeln!(
        w,
        "{label},cycle,work_net,heat_hot,heat_cold,efficiency,aborted"
    )?;
    for (x, outcome) in points {
        for r in &outcome.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(*x),
                r.cycle,
                fmt_f64(r.work_net),
                fmt_f64(r.heat_hot),
                fmt_f64(r.heat_cold),
                fmt_f64(r.efficiency),
                outcome.aborted.is_some(),
            )?;
        }
    }
    Ok(())
}
