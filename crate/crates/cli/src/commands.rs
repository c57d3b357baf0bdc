use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use swflow_core::checks::{corrupted_table, run_checks, Level};
use swflow_core::clifford::standard_table;
use swflow_core::fields::{self, Configuration};
use swflow_core::functional::{energy_lower_bound, energy_weitzenbock, excess_report};
use swflow_core::gaugefix::full_gauge_fix;
use swflow_core::optimize::{minimize, ps_diagnostics, Record, Termination};

use crate::config::ExperimentConfig;

/// Failure classes of a command, mapped to exit codes by `main`.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input; nothing was written. Exit 2.
    Input(anyhow::Error),
    /// Anything that went wrong after the input was accepted. Exit 1.
    Runtime(anyhow::Error),
    /// Some invariant check failed. Exit 1.
    ChecksFailed(usize),
}

pub const HISTORY_HEADER: [&str; 7] = [
    "iter",
    "energy",
    "grad_norm",
    "phi_linf",
    "excess_measure",
    "radial_excess",
    "gauge_step_distance",
];

#[derive(Serialize)]
struct PsSummary {
    summable: bool,
    quartile_ratio: f64,
    geometric_ratio: f64,
    final_radial_excess: f64,
}

/// Contents of `summary.json`. Non-finite numbers are written as `null`.
#[derive(Serialize)]
struct Summary<'a> {
    termination: Termination,
    iterations: usize,
    recorded_iterates: usize,
    final_energy: f64,
    final_grad_norm: f64,
    phi_linf: f64,
    excess_measure: f64,
    radial_excess: f64,
    eta_norm: f64,
    energy_lower_bound: f64,
    ps_diagnostics: Option<PsSummary>,
    wall_time_seconds: f64,
    config: &'a ExperimentConfig,
}

fn write_history(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HISTORY_HEADER)?;
    for r in records {
        w.write_record([
            r.iter.to_string(),
            r.energy.to_string(),
            r.grad_norm.to_string(),
            r.phi_linf.to_string(),
            r.excess_measure.to_string(),
            r.radial_excess.to_string(),
            r.gauge_step_distance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(config_path: &Path) -> Result<(), Failure> {
    let exp = ExperimentConfig::load(config_path).map_err(Failure::Input)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let init = exp.initial(base).map_err(Failure::Input)?;
    let out_dir = exp.output_dir_from(base);

    let started = Instant::now();
    let traj = minimize(&init, &exp.minimize)
        .context("solver failed")
        .map_err(Failure::Runtime)?;
    let wall = started.elapsed().as_secs_f64();

    let last = *traj.last();
    let excess = excess_report(&traj.final_config).map_err(|e| Failure::Runtime(e.into()))?;
    let summary = Summary {
        termination: traj.termination,
        iterations: traj.iterations,
        recorded_iterates: traj.records.len(),
        final_energy: last.energy,
        final_grad_norm: last.grad_norm,
        phi_linf: last.phi_linf,
        excess_measure: excess.excess_measure,
        radial_excess: excess.radial_excess,
        eta_norm: excess.eta_norm,
        energy_lower_bound: energy_lower_bound(&traj.final_config),
        ps_diagnostics: ps_diagnostics(&traj).ok().map(|d| PsSummary {
            summable: d.summable,
            quartile_ratio: d.quartile_ratio,
            geometric_ratio: d.geometric_ratio,
            final_radial_excess: d.final_radial_excess,
        }),
        wall_time_seconds: wall,
        config: &exp,
    };

    let write = || -> Result<()> {
        std::fs::create_dir_all(&out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        write_history(&out_dir.join("history.csv"), &traj.records)?;
        fields::save(&traj.final_config, out_dir.join("final.json"))?;
        let text = serde_json::to_string_pretty(&summary)?;
        std::fs::write(out_dir.join("summary.json"), text + "\n")?;
        Ok(())
    };
    write().map_err(Failure::Runtime)?;

    eprintln!(
        "{} after {} iterations: energy {:.12e}, grad norm {:.3e}, |phi|_inf {:.6}",
        traj.termination.as_str(),
        traj.iterations,
        last.energy,
        last.grad_norm,
        last.phi_linf
    );
    Ok(())
}

pub fn check(level: Level, corrupt_clifford: bool) -> Result<(), Failure> {
    let tbl = if corrupt_clifford {
        corrupted_table()
    } else {
        standard_table()
    };
    let started = Instant::now();
    let results = run_checks(level, &tbl);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "{} of {} checks passed in {:.2} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::ChecksFailed(failed))
    }
}

#[derive(Serialize)]
struct GaugeFixSummary {
    residual: f64,
    winding: [i64; 4],
    harmonic: [f64; 4],
    energy_before: f64,
    energy_after: f64,
    relative_energy_drift: f64,
}

/// `<out stem>.report.json` next to `out`.
pub fn report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.report.json"))
}

pub fn gaugefix(input: &Path, output: &Path) -> Result<(), Failure> {
    let cfg: Configuration = fields::load(input)
        .with_context(|| format!("cannot load {}", input.display()))
        .map_err(Failure::Input)?;
    let runtime = |e: swflow_core::Error| Failure::Runtime(e.into());
    let (fixed, report) = full_gauge_fix(&cfg).map_err(runtime)?;
    let before = energy_weitzenbock(&cfg).map_err(runtime)?;
    let after = energy_weitzenbock(&fixed).map_err(runtime)?;
    let drift = (after - before).abs() / before.abs().max(f64::MIN_POSITIVE);
    let summary = GaugeFixSummary {
        residual: report.residual,
        winding: report.winding,
        harmonic: report.harmonic,
        energy_before: before,
        energy_after: after,
        relative_energy_drift: drift,
    };
    let write = || -> Result<()> {
        fields::save(&fixed, output).with_context(|| format!("cannot write {}", output.display()))?;
        let text = serde_json::to_string_pretty(&summary)?;
        std::fs::write(report_path(output), text + "\n")?;
        Ok(())
    };
    write().map_err(Failure::Runtime)?;
    println!(
        "residual {:.3e}, winding {:?}, energy drift {:.3e}",
        report.residual, report.winding, drift
    );
    Ok(())
}
