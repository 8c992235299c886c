use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{DiagnoseTarget, ScenarioConfig, ScenarioKind};
use super::output::{format_option, format_value, sibling_path, sweep_output_path, CsvTable};
use super::presets::{build_initial, build_matrix, build_two_level};
use super::{config_hash, Event, EventKind, RunRecord, ScenarioError};
use crate::diagnostics::{
    annotate_sampled, annotate_trajectory, DiagnosticsConfig, DiagnosticsSeries,
};
use crate::dynamics::quadrature::{cumulative, DEFAULT_TOL};
use crate::dynamics::{
    det_ode_solve, evolve, uniform_grid, EvolutionProblem, TimeDependentMatrix, Trajectory,
};
use crate::error::Error;
use crate::quantum::{
    exact_det_u, schrodinger_problem, unitarity_check, unitarity_defect, QuantumProblem,
};

/// Tolerance on `‖U*U − I‖_F` and `||det U| − 1|` before a unitarity event is logged.
const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory prefixed to relative output paths.
    pub output_dir: Option<PathBuf>,
    /// Worker threads for sweeps; `None` lets the pool decide.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

/// Everything a scenario produces, before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub files: Vec<OutputFile>,
    pub events: Vec<Event>,
}

/// Runs one configuration (ignoring any sweep table) and writes its files.
pub fn run_scenario(
    config: &ScenarioConfig,
    options: &RunOptions,
) -> Result<RunRecord, ScenarioError> {
    let start = Instant::now();
    let out = execute(config)?;
    let outputs = write_files(&out.files, options)?;
    Ok(RunRecord {
        scenario: config.scenario,
        config_hash: config_hash(config),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        events: out.events,
        outputs,
    })
}

/// Runs every point of the sweep table in parallel. Each point writes its own
/// files, named after the swept value; writes happen in sweep order after all
/// points finish.
pub fn run_sweep(
    config: &ScenarioConfig,
    options: &RunOptions,
) -> Result<RunRecord, ScenarioError> {
    let start = Instant::now();
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| ScenarioError::validation("sweep", "missing [sweep] table"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| ScenarioError::validation("threads", e.to_string()))?;
    let results: Vec<Result<ScenarioOutput, ScenarioError>> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .map(|&value| {
                let mut point = config.with_parameter(sweep.parameter, value);
                point.sweep = None;
                point.output_path = sweep_output_path(&config.output_path, sweep.parameter, value);
                execute(&point)
            })
            .collect()
    });
    let mut events = Vec::new();
    let mut outputs = Vec::new();
    for (index, result) in results.into_iter().enumerate() {
        let out = result?;
        outputs.extend(write_files(&out.files, options)?);
        events.extend(out.events.into_iter().map(|mut e| {
            e.sweep_index = Some(index);
            e
        }));
    }
    Ok(RunRecord {
        scenario: config.scenario,
        config_hash: config_hash(config),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        events,
        outputs,
    })
}

fn write_files(files: &[OutputFile], options: &RunOptions) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut written = Vec::with_capacity(files.len());
    for file in files {
        let path = match &options.output_dir {
            Some(dir) if file.path.is_relative() => dir.join(&file.path),
            _ => file.path.clone(),
        };
        let io = |source| ScenarioError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(&path, &file.contents).map_err(io)?;
        written.push(path);
    }
    Ok(written)
}

/// Computes a scenario's output files and event log without writing anything.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let mut events = Vec::new();
    let grid = uniform_grid(config.t0, config.tf, config.n_steps);
    let mut files = match config.scenario {
        ScenarioKind::ClassicalDet => classical_det(config, &grid, &mut events)?,
        ScenarioKind::QuantumDetU => quantum_det_u(config, &grid, &mut events)?,
        ScenarioKind::ContinuitySweep => continuity_sweep(config, &grid, &mut events)?,
        ScenarioKind::CrossingReport => crossing_report(config, &grid, &mut events)?,
    };
    if config.plot_script {
        let script = plot_script(&files[0]);
        files.push(script);
    }
    Ok(ScenarioOutput { files, events })
}

/// Maps problem-construction failures onto the configuration key at fault.
fn setup_error(e: Error) -> ScenarioError {
    match e {
        Error::InvalidParameter { name, reason } => ScenarioError::Validation {
            field: name,
            message: reason,
        },
        Error::Singular { .. } => {
            ScenarioError::validation("initial", format!("initial state is singular: {e}"))
        }
        other => ScenarioError::Numeric(other),
    }
}

fn classical_problem(config: &ScenarioConfig) -> Result<EvolutionProblem<f64>, ScenarioError> {
    let a = build_matrix(&config.generator, config.seed, 0)?;
    let n = a.dim();
    let b = match &config.generator_b {
        Some(spec) => build_matrix(spec, config.seed, 1)?,
        None => TimeDependentMatrix::zero(n),
    };
    let m0 = build_initial(config.initial.as_ref(), n, config.t0, config.seed)?;
    EvolutionProblem::new(a, b, config.feedback_kind(), m0, config.t0, config.tf)
        .map_err(setup_error)
}

/// Integrates, turning a failed integration into an event and no samples.
fn integrate<T: crate::Scalar>(
    problem: &EvolutionProblem<T>,
    n_steps: usize,
    events: &mut Vec<Event>,
) -> Option<Trajectory<T>> {
    match evolve(problem, n_steps) {
        Ok(traj) => {
            if let Some(ev) = traj.event {
                events.push(Event::new(
                    EventKind::Singularity,
                    Some(ev.time),
                    format!(
                        "integration halted: |det M| = {:e} below threshold {:e}",
                        ev.det_abs, ev.threshold
                    ),
                ));
            }
            Some(traj)
        }
        Err(e) => {
            events.push(Event::new(
                EventKind::NumericError,
                None,
                format!("integration failed: {e}"),
            ));
            None
        }
    }
}

fn classical_det(
    config: &ScenarioConfig,
    grid: &[f64],
    events: &mut Vec<Event>,
) -> Result<Vec<OutputFile>, ScenarioError> {
    let problem = classical_problem(config)?;
    let mut table = CsvTable::new(&[
        "t",
        "det_matrix",
        "det_scalar_ode",
        "det_liouville",
        "abs_error",
    ]);
    if let Some(traj) = integrate(&problem, config.n_steps, events) {
        let tau = |t: f64| problem.generator_trace(t);
        let det0 = traj.dets[0];
        let scalar = det_ode_solve(&tau, problem.feedback().gamma(), problem.dim(), det0, grid)?;
        if let Some(b) = scalar.blow_up {
            events.push(Event::new(
                EventKind::BlowUp,
                Some(b.detected_at),
                format!(
                    "scalar determinant law exceeded guard after t = {}; pole estimate t* = {}",
                    b.last_time, b.time_estimate
                ),
            ));
        }
        let integrals = cumulative(&tau, &traj.times, DEFAULT_TOL)?;
        for (k, &t) in traj.times.iter().enumerate() {
            let det = traj.dets[k];
            let liouville = det0 * integrals[k].exp();
            table.push(vec![
                format_value(t),
                format_value(det),
                format_option(scalar.values.get(k).copied()),
                format_value(liouville),
                format_value((det - liouville).abs()),
            ]);
        }
    }
    Ok(vec![OutputFile {
        path: config.output_path.clone(),
        contents: table.to_csv(),
    }])
}

fn quantum_det_u(
    config: &ScenarioConfig,
    _grid: &[f64],
    events: &mut Vec<Event>,
) -> Result<Vec<OutputFile>, ScenarioError> {
    let h = build_matrix(&config.generator, config.seed, 0)?.to_complex();
    let q =
        QuantumProblem::new(h.clone(), config.hbar, config.t0, config.tf).map_err(setup_error)?;
    let problem = schrodinger_problem(&q)?;
    let mut table = CsvTable::new(&[
        "t",
        "re_det_u",
        "im_det_u",
        "re_det_u_exact",
        "im_det_u_exact",
        "unitarity_defect",
    ]);
    if let Some(traj) = integrate(&problem, config.n_steps, events) {
        let exact = exact_det_u(&h, config.hbar, config.t0, &traj.times)?;
        let report = unitarity_check(&traj, UNITARITY_TOL);
        if !report.passes {
            events.push(Event::new(
                EventKind::UnitarityDefect,
                None,
                format!(
                    "max ‖U*U − I‖_F = {:e}, max ||det U| − 1| = {:e} (tolerance {:e})",
                    report.max_unitarity_defect, report.max_det_modulus_defect, report.tolerance
                ),
            ));
        }
        for (k, &t) in traj.times.iter().enumerate() {
            let (d, e): (Complex64, Complex64) = (traj.dets[k], exact[k]);
            table.push(vec![
                format_value(t),
                format_value(d.re),
                format_value(d.im),
                format_value(e.re),
                format_value(e.im),
                format_value(unitarity_defect(&traj.states[k])),
            ]);
        }
    }
    Ok(vec![OutputFile {
        path: config.output_path.clone(),
        contents: table.to_csv(),
    }])
}

fn continuity_sweep(
    config: &ScenarioConfig,
    grid: &[f64],
    events: &mut Vec<Event>,
) -> Result<Vec<OutputFile>, ScenarioError> {
    let diag = DiagnosticsConfig {
        alpha: config.alpha,
        derivative_mode: config.derivative_mode.into(),
        fd_step: None,
        near_singular_threshold: config.near_singular_threshold,
    };
    let series: Option<DiagnosticsSeries<f64>> = match config.diagnose {
        DiagnoseTarget::Trajectory => {
            let problem = classical_problem(config)?;
            match integrate(&problem, config.n_steps, events) {
                Some(traj) => Some(annotate_trajectory(&traj, &problem, &diag)?),
                None => None,
            }
        }
        DiagnoseTarget::Generator => {
            let source = build_matrix(&config.generator, config.seed, 0)?;
            let traj = Trajectory::sample(&source, grid)?;
            Some(annotate_sampled(&traj, &source, &diag)?)
        }
    };
    let mut table = CsvTable::new(&[
        "t",
        "continuity_functional",
        "relative_rate_norm",
        "lyapunov_signed",
        "lyapunov_rate",
        "near_singular_flag",
        "abs_det",
    ]);
    if let Some(s) = series {
        let flagged: Vec<f64> = s
            .times
            .iter()
            .zip(&s.near_singular_flags)
            .filter_map(|(&t, &f)| f.then_some(t))
            .collect();
        if let Some(&first) = flagged.first() {
            events.push(Event::new(
                EventKind::NearSingular,
                Some(first),
                format!(
                    "{} samples with |det| ≤ {:e}",
                    flagged.len(),
                    config.near_singular_threshold
                ),
            ));
        }
        for k in 0..s.times.len() {
            table.push(vec![
                format_value(s.times[k]),
                format_value(s.continuity_functional[k]),
                format_option(s.relative_rate_norm[k]),
                format_option(s.lyapunov_signed[k]),
                format_option(s.lyapunov_rate[k]),
                u8::from(s.near_singular_flags[k]).to_string(),
                format_value(s.dets[k].abs()),
            ]);
        }
    }
    Ok(vec![OutputFile {
        path: config.output_path.clone(),
        contents: table.to_csv(),
    }])
}

fn crossing_report(
    config: &ScenarioConfig,
    grid: &[f64],
    events: &mut Vec<Event>,
) -> Result<Vec<OutputFile>, ScenarioError> {
    let h = build_two_level(&config.generator)?
        .ok_or_else(|| ScenarioError::validation("generator", "needs a two-level preset"))?;
    let exact = exact_det_u(&h.complex_evaluator(), config.hbar, config.t0, grid)?;
    let mut series = CsvTable::new(&["t", "det_h", "re_det_u_exact", "im_det_u_exact"]);
    for (&t, e) in grid.iter().zip(&exact) {
        series.push(vec![
            format_value(t),
            format_value(h.det(t)),
            format_value(e.re),
            format_value(e.im),
        ]);
    }
    let crossings = h.crossings(grid)?;
    let mut table = CsvTable::new(&["index", "t_crossing"]);
    for (i, &t) in crossings.iter().enumerate() {
        events.push(Event::new(
            EventKind::LevelCrossing,
            Some(t),
            format!("det H changes sign at t = {t}"),
        ));
        table.push(vec![i.to_string(), format_value(t)]);
    }
    Ok(vec![
        OutputFile {
            path: config.output_path.clone(),
            contents: series.to_csv(),
        },
        OutputFile {
            path: sibling_path(&config.output_path, ".crossings", "csv"),
            contents: table.to_csv(),
        },
    ])
}

/// Gnuplot script plotting every column of `data` against the first.
fn plot_script(data: &OutputFile) -> OutputFile {
    let name = file_name(&data.path);
    let columns = data
        .contents
        .lines()
        .next()
        .map_or(1, |h| h.split(',').count());
    let contents = format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set term pngcairo size 1000,600\n\
         set output '{stem}.png'\n\
         plot for [i=2:{columns}] '{name}' using 1:i with lines\n",
        stem = name.trim_end_matches(".csv"),
    );
    OutputFile {
        path: sibling_path(&data.path, "", "gp"),
        contents,
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
