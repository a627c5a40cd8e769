//! Batch front end. Each subcommand reads one scenario file, runs the
//! matching analysis, and drops CSV (and optionally SVG) artifacts into an
//! output directory.
//!
//! [`execute`] is the process-level entry point: it resolves the output
//! directory, delegates to [`run`], and on failure records the error both on
//! stderr and in a machine-readable `errors.txt` next to the other outputs.
//! Exit codes: 0 success, 2 configuration trouble, 3 numerical trouble,
//! 1 filesystem trouble.

use std::ffi::OsStr;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{
    ConfigError, EquilibriaSpec, NameListSpec, OptimizeSpec, R0Spec, Scenario, ScenarioConfig,
    SimulateSpec, StabilitySpec, SweepSpec,
};
use crate::control::{forward_backward_sweep, ControlError, OCSolution, SweepOptions};
use crate::dynamics::{integrate_rk4, Trajectory};
use crate::equilibria::{chemo_dose_threshold, equilibria_for};
use crate::model::ModelVariant;
use crate::output::g17;
use crate::plot::{line_chart, Series};
use crate::reproduction::{endemic_sensitivity, r0, r0_elasticities, r0_vs_dose_curve};
use crate::state::SystemState;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("subcommand `{subcommand}` does not match the `[{section}]` block in the config")]
    ScenarioMismatch {
        subcommand: String,
        section: &'static str,
    },
    #[error("grid value {value} for `{parameter}`: {reason}")]
    BadGridValue {
        parameter: String,
        value: f64,
        reason: String,
    },
    #[error("bad `[{section}]` settings: {reason}")]
    BadSettings {
        section: &'static str,
        reason: String,
    },
    #[error("{context}: {message}")]
    Numerical {
        context: &'static str,
        message: String,
    },
    #[error("cannot write `{path}`: {reason}")]
    Io { path: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::ScenarioMismatch { .. }
            | CliError::BadGridValue { .. }
            | CliError::BadSettings { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_)
            | CliError::ScenarioMismatch { .. }
            | CliError::BadGridValue { .. }
            | CliError::BadSettings { .. } => "config",
            CliError::Numerical { .. } => "numerical",
            CliError::Io { .. } => "io",
        }
    }
}

fn numerical(context: &'static str, message: impl std::fmt::Display) -> CliError {
    CliError::Numerical {
        context,
        message: message.to_string(),
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    /// `key=value` overrides applied after the file is read.
    pub sets: Vec<String>,
    pub out: Option<PathBuf>,
    pub plots: bool,
    /// Sweep worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

/// Output directory precedence: `--out`, then `CHEMOVIRO_OUT`, then `./out`.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<&OsStr>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = env {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

/// Runs a subcommand, reporting failures in `errors.txt` under the resolved
/// output directory. Returns the process exit code.
pub fn execute(subcommand: &str, opts: &RunOptions) -> i32 {
    let out_dir = resolve_out_dir(
        opts.out.as_deref(),
        std::env::var_os("CHEMOVIRO_OUT").as_deref(),
    );
    match run(subcommand, opts, &out_dir) {
        Ok(artifacts) => {
            for path in &artifacts {
                println!("wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            // Best effort: the error file must not mask the original failure.
            let _ = write_error_file(&out_dir, subcommand, &e);
            e.exit_code()
        }
    }
}

/// Loads the scenario, applies `--set` overrides, checks that the file's
/// scenario block matches `subcommand`, runs it, and returns the artifact
/// paths in the order they were written.
pub fn run(
    subcommand: &str,
    opts: &RunOptions,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = ScenarioConfig::load(&opts.config)?;
    for spec in &opts.sets {
        cfg.apply_set(spec)?;
    }
    if cfg.scenario.section() != subcommand {
        return Err(CliError::ScenarioMismatch {
            subcommand: subcommand.to_string(),
            section: cfg.scenario.section(),
        });
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut art = Artifacts {
        dir: out_dir.to_path_buf(),
        written: Vec::new(),
    };
    match cfg.scenario.clone() {
        Scenario::Simulate(spec) => run_simulate(&cfg, &spec, opts.plots, &mut art)?,
        Scenario::Equilibria(spec) => run_equilibria(&cfg, &spec, &mut art)?,
        Scenario::Stability(spec) => run_stability(&cfg, &spec, &mut art)?,
        Scenario::R0(spec) => run_r0(&cfg, &spec, opts.plots, &mut art)?,
        Scenario::Elasticity(spec) => run_elasticity(&cfg, &spec, &mut art)?,
        Scenario::EndemicSensitivity(spec) => run_endemic_sensitivity(&cfg, &spec, &mut art)?,
        Scenario::Optimize(spec) => run_optimize(&cfg, &spec, opts.plots, &mut art)?,
        Scenario::Sweep(spec) => run_sweep(&cfg, &spec, opts.workers, &mut art)?,
    }
    Ok(art.written)
}

fn write_error_file(out_dir: &Path, subcommand: &str, err: &CliError) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let message = err.to_string().replace('\n', "; ");
    let text = format!(
        "subcommand = {subcommand}\nkind = {}\nexit_code = {}\nmessage = {message}\n",
        err.kind(),
        err.exit_code()
    );
    fs::write(out_dir.join("errors.txt"), text)
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        self.written.push(path);
        Ok(())
    }
}

/// Quote a CSV field when it contains the delimiter or quotes.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Projects the six-component initial state onto a variant's state vector.
fn project_initial(variant: &ModelVariant, full: &SystemState) -> Vec<f64> {
    let map = variant.column_map();
    let arr = full.as_array();
    let mut x = vec![0.0; variant.dim()];
    for (full_idx, slot) in map.iter().enumerate() {
        if let Some(j) = slot {
            x[*j] = arr[full_idx];
        }
    }
    x
}

fn trajectory_chart(traj: &Trajectory) -> Result<String, CliError> {
    let labels = traj.variant.labels();
    let mut series = Vec::with_capacity(labels.len());
    for (j, label) in labels.iter().enumerate() {
        let points = traj
            .times
            .iter()
            .zip(traj.states.iter())
            .map(|(t, s)| (*t, s[j]))
            .collect();
        series.push(Series::new(*label, points));
    }
    line_chart("state trajectories", "time (days)", "level", &series)
        .map_err(|e| numerical("plot", e))
}

fn run_simulate(
    cfg: &ScenarioConfig,
    spec: &SimulateSpec,
    plots: bool,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    let variant = spec.variant.to_variant();
    let x0 = project_initial(&variant, &cfg.initial);
    let traj = integrate_rk4(&variant, &cfg.params, &x0, (0.0, spec.days), spec.dt)
        .map_err(|e| numerical("integration", e))?;
    if !traj.violations.is_empty() {
        println!(
            "note: {} invariant-region breaches along the trajectory",
            traj.violations.len()
        );
    }
    art.write(&format!("trajectory_{}.csv", variant.tag()), &traj.to_csv())?;
    if plots {
        let svg = trajectory_chart(&traj)?;
        art.write(&format!("trajectory_{}.svg", variant.tag()), &svg)?;
    }
    Ok(())
}

fn run_equilibria(
    cfg: &ScenarioConfig,
    spec: &EquilibriaSpec,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    let variant = spec.variant.to_variant();
    let set = equilibria_for(&variant, &cfg.params).map_err(|e| numerical("equilibria", e))?;
    let mut header: Vec<String> = ["label", "kind", "verdict", "max_re", "residual"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(variant.labels().iter().map(|l| l.to_string()));
    for k in 1..=variant.dim() {
        header.push(format!("eig{k}_re"));
        header.push(format!("eig{k}_im"));
    }
    let mut csv = header.join(",");
    csv.push('\n');
    for r in &set.reports {
        let mut row = vec![
            r.label.to_string(),
            r.kind.to_string(),
            r.verdict.to_string(),
            g17(r.max_real_part()),
            g17(r.residual),
        ];
        row.extend(r.point.iter().map(|v| g17(*v)));
        for (re, im) in &r.eigenvalues {
            row.push(g17(*re));
            row.push(g17(*im));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    art.write(&format!("equilibria_{}.csv", variant.tag()), &csv)?;
    let mut notes = set.notes.join("\n");
    if !notes.is_empty() {
        notes.push('\n');
    }
    art.write(&format!("equilibria_{}_notes.txt", variant.tag()), &notes)?;
    Ok(())
}

fn run_stability(
    cfg: &ScenarioConfig,
    spec: &StabilitySpec,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    // Reject bad grids before doing any work.
    for &v in &spec.grid {
        let mut p = cfg.params.clone();
        p.set(&spec.parameter, v)
            .map_err(|e| CliError::Config(ConfigError::Param(e)))?;
        p.validate().map_err(|e| CliError::BadGridValue {
            parameter: spec.parameter.clone(),
            value: v,
            reason: e.to_string(),
        })?;
    }
    let variant = spec.variant.to_variant();
    let mut csv = String::from("value,label,kind,max_re,verdict\n");
    for &v in &spec.grid {
        let mut p = cfg.params.clone();
        p.set(&spec.parameter, v).expect("grid validated above");
        let set = equilibria_for(&variant, &p).map_err(|e| numerical("equilibria", e))?;
        for r in &set.reports {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                g17(v),
                r.label,
                r.kind,
                g17(r.max_real_part()),
                r.verdict
            ));
        }
    }
    art.write(&format!("stability_{}.csv", spec.parameter), &csv)?;
    if spec.parameter == "q" {
        let text = match chemo_dose_threshold(&cfg.params) {
            Some(t) => format!(
                "q_star = {}\nwithin_mtd = {}\n",
                g17(t.q_star),
                t.within_mtd
            ),
            None => "q_star = none\n".to_string(),
        };
        art.write("stability_threshold.txt", &text)?;
    }
    Ok(())
}

fn run_r0(
    cfg: &ScenarioConfig,
    spec: &R0Spec,
    plots: bool,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    let rep = r0(&cfg.params);
    let mut csv = String::from("R0,U_star,E_T_star,C_star,spectral_radius_check,at_tumour_free\n");
    csv.push_str(&format!(
        "{},{},{},{},{},{}\n",
        g17(rep.value),
        g17(rep.u_star),
        g17(rep.e_t_star),
        g17(rep.c_star),
        g17(rep.spectral_radius_check),
        rep.at_tumour_free
    ));
    art.write("r0.csv", &csv)?;

    let curve = r0_vs_dose_curve(&cfg.params, &spec.dose_grid)
        .map_err(|e| numerical("dose curve", e))?;
    let mut csv = String::from("q,R0\n");
    for (q, value) in &curve.rows {
        csv.push_str(&format!("{},{}\n", g17(*q), g17(*value)));
    }
    art.write("r0_vs_dose.csv", &csv)?;
    println!(
        "R0 strictly decreasing across the dose grid: {}",
        curve.strictly_decreasing
    );
    if plots {
        let series = vec![Series::new("R0", curve.rows.clone())];
        let svg = line_chart(
            "reproduction number vs infusion rate",
            "q (mg per day)",
            "R0",
            &series,
        )
        .map_err(|e| numerical("plot", e))?;
        art.write("r0_vs_dose.svg", &svg)?;
    }
    Ok(())
}

fn run_elasticity(
    cfg: &ScenarioConfig,
    spec: &NameListSpec,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    let names: Vec<&str> = spec.parameters.iter().map(String::as_str).collect();
    let table =
        r0_elasticities(&cfg.params, &names).map_err(|e| numerical("elasticities", e))?;
    if table.rows.is_empty() {
        return Err(numerical(
            "elasticities",
            format!("no rows computed ({} failures)", table.failures.len()),
        ));
    }
    let mut csv = String::from("parameter,elasticity,sensitivity,method\n");
    for r in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.parameter,
            g17(r.elasticity),
            g17(r.sensitivity),
            r.method
        ));
    }
    art.write("elasticity.csv", &csv)?;
    let mut failures = String::from("parameter,reason\n");
    for (name, reason) in &table.failures {
        failures.push_str(&format!("{},{}\n", name, csv_field(reason)));
    }
    art.write("elasticity_failures.csv", &failures)?;
    Ok(())
}

fn run_endemic_sensitivity(
    cfg: &ScenarioConfig,
    spec: &NameListSpec,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for name in &spec.parameters {
        match endemic_sensitivity(&cfg.params, name) {
            Ok(r) => rows.push(r),
            Err(e) => failed.push((name.clone(), e.to_string())),
        }
    }
    if rows.is_empty() {
        return Err(numerical(
            "endemic sensitivity",
            "no parameter produced an index",
        ));
    }
    let mut csv = String::from(
        "parameter,tumour_burden_elasticity,Gamma_U,Gamma_I,Gamma_V,Gamma_EV,Gamma_ET,Gamma_C,condition_estimate\n",
    );
    for r in &rows {
        let mut fields = vec![r.parameter.clone(), g17(r.combined_tumour)];
        fields.extend(r.per_component.iter().map(|v| g17(*v)));
        fields.push(g17(r.condition_estimate));
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    art.write("endemic_sensitivity.csv", &csv)?;
    let mut failures = String::from("parameter,reason\n");
    for (name, reason) in &failed {
        failures.push_str(&format!("{},{}\n", name, csv_field(reason)));
    }
    art.write("endemic_sensitivity_failures.csv", &failures)?;
    Ok(())
}

fn control_chart(sol: &OCSolution) -> Result<String, CliError> {
    let t = &sol.controls.times;
    let pair = |ys: &[f64]| t.iter().copied().zip(ys.iter().copied()).collect();
    let series = vec![
        Series::new("u1 (virions/day)", pair(&sol.controls.u1)),
        Series::new("u2 (mg/day)", pair(&sol.controls.u2)),
    ];
    line_chart("dosing schedules", "time (days)", "dose rate", &series)
        .map_err(|e| numerical("plot", e))
}

fn burden_chart(sol: &OCSolution) -> Result<String, CliError> {
    let t = &sol.controls.times;
    let col = |j: usize| {
        t.iter()
            .copied()
            .zip(sol.states.iter().map(|s| s[j]))
            .collect()
    };
    let series = vec![Series::new("U", col(0)), Series::new("I", col(1))];
    line_chart("tumour burden under dosing", "time (days)", "cells", &series)
        .map_err(|e| numerical("plot", e))
}

fn run_optimize(
    cfg: &ScenarioConfig,
    spec: &OptimizeSpec,
    plots: bool,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    let init = [cfg.initial.u, cfg.initial.i, cfg.initial.v, cfg.initial.c];
    let opts = SweepOptions {
        n: spec.n,
        relaxation: spec.relaxation,
        tolerance: spec.tolerance,
        max_iterations: spec.max_iterations,
    };
    let sol = forward_backward_sweep(&cfg.params, init, &opts).map_err(|e| match e {
        // Option errors are config mistakes, not numerics.
        ControlError::MeshTooCoarse { .. }
        | ControlError::BadRelaxation { .. }
        | ControlError::BadTolerance { .. } => CliError::BadSettings {
            section: "optimize",
            reason: e.to_string(),
        },
        other => numerical("forward-backward sweep", other),
    })?;
    art.write("optimal_solution.csv", &sol.to_csv())?;
    art.write("convergence.csv", &sol.convergence_csv())?;
    println!(
        "objective J = {:.6e} after {} iterations (converged: {})",
        sol.objective, sol.iterations, sol.converged
    );
    if plots {
        art.write("controls.svg", &control_chart(&sol)?)?;
        art.write("tumour_burden.svg", &burden_chart(&sol)?)?;
    }
    if !sol.converged {
        // Artifacts above stay on disk for diagnosis.
        return Err(numerical(
            "forward-backward sweep",
            format!("no convergence after {} iterations", sol.iterations),
        ));
    }
    Ok(())
}

struct CellSummary {
    last: Vec<f64>,
    r0: f64,
}

fn run_sweep(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    workers: Option<usize>,
    art: &mut Artifacts,
) -> Result<(), CliError> {
    // Axis names must resolve before any cell runs.
    for (name, _) in &spec.axes {
        cfg.params
            .get(name)
            .map_err(|e| CliError::Config(ConfigError::Param(e)))?;
    }
    let counts: Vec<usize> = spec.axes.iter().map(|(_, g)| g.len()).collect();
    let total: usize = counts.iter().product();
    // Row-major cell order: the last declared axis varies fastest.
    let cells: Vec<Vec<f64>> = (0..total)
        .map(|mut k| {
            let mut values = vec![0.0; spec.axes.len()];
            for ai in (0..spec.axes.len()).rev() {
                values[ai] = spec.axes[ai].1[k % counts[ai]];
                k /= counts[ai];
            }
            values
        })
        .collect();

    let variant = spec.variant.to_variant();
    let run_cell = |values: &Vec<f64>| -> Result<CellSummary, String> {
        let mut p = cfg.params.clone();
        for ((name, _), v) in spec.axes.iter().zip(values) {
            p.set(name, *v).map_err(|e| e.to_string())?;
        }
        p.validate().map_err(|e| e.to_string())?;
        let x0 = project_initial(&variant, &cfg.initial);
        let traj = integrate_rk4(&variant, &p, &x0, (0.0, spec.days), spec.dt)
            .map_err(|e| e.to_string())?;
        Ok(CellSummary {
            last: traj.last_state().to_vec(),
            r0: r0(&p).value,
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| numerical("worker pool", e))?;
    let results: Vec<Result<CellSummary, String>> =
        pool.install(|| cells.par_iter().map(run_cell).collect());

    let axis_names: Vec<&str> = spec.axes.iter().map(|(n, _)| n.as_str()).collect();
    let map = variant.column_map();
    let mut csv = axis_names.join(",");
    csv.push_str(",U,I,V,E_V,E_T,C,tumour_burden,R0\n");
    let mut failures = axis_names.join(",");
    failures.push_str(",reason\n");
    let mut failed = 0usize;
    for (k, result) in results.iter().enumerate() {
        let coords: Vec<String> = cells[k].iter().map(|v| g17(*v)).collect();
        match result {
            Ok(cell) => {
                let mut fields = coords;
                for slot in &map {
                    fields.push(match slot {
                        Some(j) => g17(cell.last[*j]),
                        None => String::new(),
                    });
                }
                let burden = map[0].map_or(0.0, |j| cell.last[j])
                    + map[1].map_or(0.0, |j| cell.last[j]);
                fields.push(g17(burden));
                fields.push(g17(cell.r0));
                csv.push_str(&fields.join(","));
                csv.push('\n');
            }
            Err(reason) => {
                failed += 1;
                let mut fields = coords;
                fields.push(csv_field(reason));
                failures.push_str(&fields.join(","));
                failures.push('\n');
            }
        }
    }
    art.write("sweep_results.csv", &csv)?;
    art.write("sweep_failures.csv", &failures)?;
    println!("sweep: {} cells, {} failed", total, failed);
    if total > 0 && failed == total {
        return Err(numerical("sweep", "every cell failed"));
    }
    Ok(())
}
