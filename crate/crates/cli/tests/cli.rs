//! End-to-end tests of the `becotto` binary: exit codes, artifact layout,
//! determinism, and the analyze pipeline, all at tiny grid sizes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn becotto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_becotto"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small, fast parameter set: 8³ grid, few steps everywhere, step caps
/// that force quick exits.
fn fast_args(out_dir: &Path) -> Vec<String> {
    [
        "n=8",
        "tau_stroke=0.05",
        "dt_stroke=0.01",
        "dt_bath=0.01",
        "stat_min_steps=0",
        "stat_max_steps=60",
        "stat_stride=10",
        "stat_window=1000000",
        "n_cycles=2",
        "n_mc=2000",
        "theta_lambda=8e-3",
    ]
    .iter()
    .flat_map(|kv| ["--set".to_string(), kv.to_string()])
    .chain([
        "--set".to_string(),
        format!("out_dir={}", out_dir.display()),
    ])
    .collect()
}

fn run_fast(subcmd: &[&str], out_dir: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<String> = subcmd.iter().map(|s| s.to_string()).collect();
    args.extend(fast_args(out_dir));
    args.extend(extra.iter().map(|s| s.to_string()));
    let args_ref: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    becotto(&args_ref)
}

#[test]
fn validation_errors_exit_2() {
    let out = becotto(&["thermalize", "--set", "alpha=0"]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("alpha"));

    let out = becotto(&["thermalize", "--set", "no_such_key=1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no_such_key"));

    let out = becotto(&["thermalize", "--set", "omega_cold=0.9"]);
    assert_eq!(code(&out), 2);

    // Unknown flags are usage errors, also 2.
    let out = becotto(&["thermalize", "--bogus-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn thermalize_writes_artifacts_and_flags_nonstationarity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fast(&["thermalize", "--side", "hot"], dir.path(), &[]);
    // The tiny step cap cannot reach stationarity: exit 4, outputs intact.
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let run = dir.path().join("thermalize-hot");
    for f in ["config.txt", "seed.txt", "trace.csv", "final.ckpt", "final.ckpt.txt"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    // The echoed config must itself parse and reflect the overrides.
    let echo = std::fs::read_to_string(run.join("config.txt")).unwrap();
    assert!(echo.contains("n = 8"));
    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,t,e_total,rho_mean,mu"));
    assert!(trace.lines().count() > 2);
}

#[test]
fn stroke_consumes_thermalize_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fast(&["thermalize", "--side", "hot"], dir.path(), &[]);
    assert_eq!(code(&out), 4);
    let ckpt = dir.path().join("thermalize-hot/final.ckpt");
    let out = run_fast(
        &["stroke", "--direction", "expand"],
        dir.path(),
        &["--input", ckpt.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let run = dir.path().join("stroke-expand");
    assert!(run.join("stroke.csv").exists());
    assert!(run.join("final.ckpt").exists());
    // With an input there is no preparation stage.
    assert!(!run.join("prep.ckpt").exists());
    let series = std::fs::read_to_string(run.join("stroke.csv")).unwrap();
    assert!(series.starts_with("t,omega,e_total,"));

    // Grid-size mismatch between input and config is a validation error.
    let out = becotto(&[
        "stroke",
        "--direction",
        "expand",
        "--input",
        ckpt.to_str().unwrap(),
        "--set",
        "n=16",
        "--set",
        &format!("out_dir={}", dir.path().join("x").display()),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("8"));
}

#[test]
fn cycle_emits_boundary_checkpoints_and_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fast(&["cycle"], dir.path(), &[]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out)); // caps force non-stationary
    let run = dir.path().join("cycle-chain0");
    for f in [
        "prep_trace.csv",
        "expansion-0.csv",
        "compression-0.csv",
        "cold-trace-0.csv",
        "hot-trace-0.csv",
        "post-expansion-0.ckpt",
        "post-cold-0.ckpt",
        "post-compression-0.ckpt",
        "cycle-0.ckpt",
        "cycles.csv",
        "final.ckpt",
    ] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let cycles = std::fs::read_to_string(run.join("cycles.csv")).unwrap();
    assert_eq!(cycles.lines().count(), 2); // header + one record
}

#[test]
fn identical_runs_reproduce_bit_identical_checkpoints() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = run_fast(&["ensemble"], dir_a.path(), &[]);
    let b = run_fast(&["ensemble"], dir_b.path(), &[]);
    assert_eq!(code(&a), 4, "stderr: {}", stderr(&a));
    assert_eq!(code(&b), 4);
    for name in ["cycle-0.ckpt", "cycle-1.ckpt", "final.ckpt"] {
        let pa = dir_a.path().join("ensemble-chain0").join(name);
        let pb = dir_b.path().join("ensemble-chain0").join(name);
        let ba = std::fs::read(&pa).unwrap();
        let bb = std::fs::read(&pb).unwrap();
        assert_eq!(ba, bb, "{name} differs between identical runs");
    }
    // A different seed must change the trajectory.
    let dir_c = tempfile::tempdir().unwrap();
    let c = run_fast(&["ensemble"], dir_c.path(), &["--set", "seed=2"]);
    assert_eq!(code(&c), 4);
    let bc = std::fs::read(dir_c.path().join("ensemble-chain0/final.ckpt")).unwrap();
    let ba = std::fs::read(dir_a.path().join("ensemble-chain0/final.ckpt")).unwrap();
    assert_ne!(bc, ba);
}

#[test]
fn ensemble_writes_efficiency_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fast(&["ensemble"], dir.path(), &[]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let run = dir.path().join("ensemble-chain0");
    let eff = std::fs::read_to_string(run.join("efficiency.csv")).unwrap();
    assert!(eff.starts_with("stat,value"));
    assert!(eff.contains("eta_mean"));
    let samples = std::fs::read_to_string(run.join("eta_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 2001); // header + n_mc
}

#[test]
fn analyze_pipeline_reads_checkpoints_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fast(&["thermalize", "--side", "hot"], dir.path(), &[]);
    assert_eq!(code(&out), 4);
    let ckpt = dir.path().join("thermalize-hot/final.ckpt");
    let ckpt = ckpt.to_str().unwrap();

    let out = run_fast(&["analyze", "spectrum"], dir.path(), &["--input", ckpt]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let spec = std::fs::read_to_string(dir.path().join("analyze-spectrum/spectrum.csv")).unwrap();
    assert!(spec.starts_with("k,e_total,e_compressible,e_incompressible"));

    let out = run_fast(
        &["analyze", "pdf"],
        dir.path(),
        &["--input", ckpt, "--bins", "16", "--region", "full"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let pdf = std::fs::read_to_string(dir.path().join("analyze-pdf/pdf.csv")).unwrap();
    assert!(pdf.starts_with("bin_lo,bin_hi,count,density"));

    let out = run_fast(&["analyze", "energy"], dir.path(), &["--input", ckpt]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("interaction"));

    // Efficiency statistics from a hand-written cycle table.
    let table = dir.path().join("cycles.csv");
    std::fs::write(
        &table,
        "cycle,work_net,heat_hot\n0,1.0e0,2.0e0\n1,1.1e0,2.1e0\n2,0.9e0,1.9e0\n",
    )
    .unwrap();
    let out = run_fast(
        &["analyze", "efficiency-stats"],
        dir.path(),
        &["--records", table.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let eff =
        std::fs::read_to_string(dir.path().join("analyze-efficiency/efficiency.csv")).unwrap();
    assert!(eff.contains("eta_mean"));

    // A table with a missing column is a named validation error.
    std::fs::write(&table, "cycle,work_net\n0,1.0\n").unwrap();
    let out = run_fast(
        &["analyze", "efficiency-stats"],
        dir.path(),
        &["--records", table.to_str().unwrap(), "--run-name", "eff2"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("heat_hot"));
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path: PathBuf = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        format!(
            "n = 8\nseed = 11\ntau_stroke = 0.05\ndt_stroke = 0.01\ndt_bath = 0.01\n\
             stat_min_steps = 0\nstat_max_steps = 40\nstat_window = 1000000\n\
             out_dir = {}\n",
            dir.path().join("runs").display()
        ),
    )
    .unwrap();
    let out = becotto(&[
        "thermalize",
        "--side",
        "cold",
        "--config",
        cfg_path.to_str().unwrap(),
        "--set",
        "seed=12",
        "--run-name",
        "t1",
    ]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let echo = std::fs::read_to_string(dir.path().join("runs/t1/config.txt")).unwrap();
    assert!(echo.contains("seed = 12"), "override should win: {echo}");
    assert!(echo.contains("n = 8"));
    let seed = std::fs::read_to_string(dir.path().join("runs/t1/seed.txt")).unwrap();
    assert_eq!(seed.trim(), "12");
}

#[test]
fn lock_file_blocks_directory_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("thermalize-hot");
    std::fs::create_dir_all(&run).unwrap();
    std::fs::write(run.join(".lock"), b"").unwrap();
    let out = run_fast(&["thermalize", "--side", "hot"], dir.path(), &[]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("locked"), "stderr: {}", stderr(&out));
}
