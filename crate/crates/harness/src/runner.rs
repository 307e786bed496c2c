//! Executes a [`RunPlan`] into a run directory.
//!
//! A run directory holds `config.json`, `meta.json`, `inrun.json`, the
//! diagnostics or trajectory CSV, optionally `iterates.csv`, and `report.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use moaccel::diagnostics::{criticality_residual, Recorder, StepCheck};
use moaccel::mavd::{self, IntegrateConfig, StepRule};
use moaccel::problem::{default_start, pareto_reference};
use moaccel::solver::{self, Discard};
use moaccel::{Config64, Jos1_64, Problem, Quadratic64, RefOrigin, Refs64, Row64};
use serde::{Deserialize, Serialize};

use crate::config::{Mode, ProblemKind, ProblemSpec, RunPlan};
use crate::report::{emit_report, Report};
use crate::tables::{fmt17, write_iterates, DiagnosticsCsv, TrajectoryCsv, TrajectoryRow};

pub const CONFIG_FILE: &str = "config.json";
pub const META_FILE: &str = "meta.json";
pub const INRUN_FILE: &str = "inrun.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const ITERATES_FILE: &str = "iterates.csv";
pub const REPORT_FILE: &str = "report.json";

pub fn build_problem(spec: &ProblemSpec) -> Result<Box<dyn Problem<f64>>> {
    Ok(match spec.kind {
        ProblemKind::Jos1 => Box::new(Jos1_64::new(spec.n)?),
        ProblemKind::Quadratic => Box::new(Quadratic64::new(spec.n, spec.m, spec.seed)?),
    })
}

pub fn solver_config(plan: &RunPlan, problem: &dyn Problem<f64>) -> Config64 {
    let mut config = Config64::for_problem(problem).with_momentum(plan.a, plan.b);
    if let Some(s) = plan.s {
        config.s = s;
    }
    config.eps = plan.eps;
    config.k_max = plan.k_max;
    config.subproblem_tol = plan.subproblem_tol;
    config.store_iterates = plan.store_iterates;
    config
}

pub fn step_rule(plan: &RunPlan) -> StepRule<f64> {
    plan.dt.map_or(StepRule::DecadeDoubling, StepRule::Fixed)
}

pub fn integrate_config(plan: &RunPlan) -> IntegrateConfig<f64> {
    IntegrateConfig {
        step: step_rule(plan),
        sample_every: plan.sample_every,
        tol: plan.subproblem_tol,
        ..IntegrateConfig::new(plan.alpha, plan.t_end)
    }
}

/// Final point of an identical run without diagnostics.
pub fn tail_point(plan: &RunPlan, problem: &dyn Problem<f64>, x0: &[f64]) -> moaccel::Result<Vec<f64>> {
    match plan.mode {
        Mode::MagGm | Mode::Msd => {
            let mut config = solver_config(plan, problem);
            config.store_iterates = false;
            let result = if plan.mode == Mode::MagGm {
                solver::run(problem, &config, x0, &mut Discard)?
            } else {
                solver::run_msd(problem, &config, x0, &mut Discard)?
            };
            Ok(result.final_state.x_cur)
        }
        Mode::Mavd => {
            let refs = Refs64::new(vec![x0.to_vec()], RefOrigin::UserSupplied)?;
            let mut cfg = integrate_config(plan);
            cfg.sample_every = usize::MAX;
            let summary = mavd::integrate(problem, &cfg, x0, &refs, &mut |_| Ok(()))?;
            Ok(summary.final_state.x)
        }
    }
}

/// Analytic Pareto points (when available) plus, if requested, the tail point.
pub fn reference_set(plan: &RunPlan, problem: &dyn Problem<f64>, x0: &[f64]) -> moaccel::Result<Refs64> {
    let has_sampler = plan.refs > 0 && problem.pareto_sample(1).is_some();
    if has_sampler && !plan.tail_ref {
        return pareto_reference(problem, plan.refs, None);
    }
    let tail = tail_point(plan, problem, x0)?;
    let mut refs = pareto_reference(problem, if has_sampler { plan.refs } else { 0 }, Some(&tail))?;
    if refs.position(RefOrigin::TrajectoryTail).is_none() {
        refs.push(tail, RefOrigin::TrajectoryTail)?;
    }
    Ok(refs)
}

/// Run facts that the report needs but the CSV does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mode: String,
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub lipschitz: f64,
    pub s: Option<f64>,
    pub level_radius: Option<f64>,
    pub reference_origins: Vec<String>,
    pub tail_ref: Option<usize>,
    pub termination: String,
    pub iterations: usize,
    pub wall_time: f64,
    pub final_criticality_residual: Option<f64>,
    pub error: Option<String>,
}

/// Checks that can only be made while running. Floats are stored as strings so
/// that infinities survive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct InRun {
    pub sigma_one_step_worst: Option<String>,
    pub sigma_one_step_at_k: Option<usize>,
    pub worst_subproblem_residual: Option<String>,
    pub selection_worst_consistency: Option<String>,
    pub selection_fallbacks: Option<usize>,
}

impl InRun {
    fn from_step_check(check: &StepCheck) -> Self {
        Self {
            sigma_one_step_worst: Some(fmt17(check.worst_violation)),
            sigma_one_step_at_k: Some(check.at_k),
            worst_subproblem_residual: Some(fmt17(check.worst_subproblem_residual)),
            ..Self::default()
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub document: String,
    pub mode: String,
    pub problem: String,
    pub n: usize,
    pub m: usize,
}

fn problem_label(spec: &ProblemSpec) -> &'static str {
    match spec.kind {
        ProblemKind::Jos1 => "jos1",
        ProblemKind::Quadratic => "quadratic",
    }
}

struct Outcome {
    termination: String,
    iterations: usize,
    final_x: Option<Vec<f64>>,
    error: Option<String>,
    inrun: InRun,
}

fn abort(error: impl std::fmt::Display) -> Outcome {
    Outcome {
        termination: format!("aborted: {error}"),
        iterations: 0,
        final_x: None,
        error: Some(error.to_string()),
        inrun: InRun::default(),
    }
}

fn run_discrete(plan: &RunPlan, problem: &dyn Problem<f64>, refs: &Refs64, x0: &[f64], dir: &Path) -> Result<Outcome> {
    let config = solver_config(plan, problem);
    let mut csv = DiagnosticsCsv::create(&dir.join(DIAGNOSTICS_FILE), problem.num_objectives(), refs.len())?;
    let recorder = Recorder::new(problem, refs, config.a, config.b, config.s, config.subproblem_tol, &mut csv);
    let mut recorder = match recorder {
        Ok(r) => r,
        Err(e) => return Ok(abort(e)),
    };
    let result = if plan.mode == Mode::MagGm {
        solver::run(problem, &config, x0, &mut recorder)
    } else {
        solver::run_msd(problem, &config, x0, &mut recorder)
    };
    let inrun = InRun::from_step_check(&recorder.step_check());
    drop(recorder);
    let rows = csv.rows();
    csv.finish().context("flushing diagnostics")?;
    Ok(match result {
        Ok(run) => {
            if let Some(iterates) = &run.iterates {
                write_iterates(&dir.join(ITERATES_FILE), iterates)?;
            }
            Outcome {
                termination: run.termination.as_str().to_string(),
                iterations: run.iterations,
                final_x: Some(run.final_state.x_cur),
                error: None,
                inrun,
            }
        }
        Err(e) => Outcome {
            iterations: rows,
            inrun,
            ..abort(e)
        },
    })
}

fn run_continuous(plan: &RunPlan, problem: &dyn Problem<f64>, refs: &Refs64, x0: &[f64], dir: &Path) -> Result<Outcome> {
    let mut csv = TrajectoryCsv::create(&dir.join(TRAJECTORY_FILE), problem.dim(), problem.num_objectives(), refs.len())?;
    let mut write_error = None;
    let result = mavd::integrate(problem, &integrate_config(plan), x0, refs, &mut |sample| {
        csv.push(&TrajectoryRow::from(sample)).map_err(|e| {
            write_error = Some(e.to_string());
            moaccel::Error::Sink(e)
        })
    });
    csv.flush().context("flushing trajectory")?;
    if let Some(e) = write_error {
        bail!("writing {}: {e}", dir.join(TRAJECTORY_FILE).display());
    }
    Ok(match result {
        Ok(summary) => Outcome {
            termination: "t_end_reached".into(),
            iterations: summary.steps,
            final_x: Some(summary.final_state.x),
            error: None,
            inrun: InRun {
                selection_worst_consistency: Some(fmt17(summary.worst_consistency)),
                selection_fallbacks: Some(summary.fallback_count),
                ..InRun::default()
            },
        },
        Err(e) => abort(e),
    })
}

/// Runs `plan` into `dir` and writes the report. Solver failures are recorded
/// as an aborted termination in the report; only I/O problems return `Err`.
pub fn run_plan(plan: &RunPlan, dir: &Path) -> Result<Report> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let echo = ConfigEcho {
        document: plan.to_document(),
        mode: plan.mode.to_string(),
        problem: problem_label(&plan.problem).into(),
        n: plan.problem.n,
        m: plan.problem.m,
    };
    write_json(&dir.join(CONFIG_FILE), &echo)?;
    for stale in [DIAGNOSTICS_FILE, TRAJECTORY_FILE, ITERATES_FILE, REPORT_FILE, INRUN_FILE] {
        let path = dir.join(stale);
        if path.exists() {
            fs::remove_file(&path).with_context(|| format!("removing {}", path.display()))?;
        }
    }

    let started = Instant::now();
    let problem = build_problem(&plan.problem)?;
    let problem = problem.as_ref();
    let x0 = default_start::<f64>(problem.dim());
    let (refs, outcome) = match reference_set(plan, problem, &x0) {
        Ok(refs) => {
            let outcome = match plan.mode {
                Mode::MagGm | Mode::Msd => run_discrete(plan, problem, &refs, &x0, dir)?,
                Mode::Mavd => run_continuous(plan, problem, &refs, &x0, dir)?,
            };
            (Some(refs), outcome)
        }
        Err(e) => (None, abort(format!("building reference set: {e}"))),
    };
    let final_crit = outcome
        .final_x
        .as_ref()
        .and_then(|x| criticality_residual(problem, x, plan.subproblem_tol).ok());
    let wall_time = started.elapsed().as_secs_f64();

    let meta = RunMeta {
        mode: plan.mode.to_string(),
        problem: problem.name().to_string(),
        n: problem.dim(),
        m: problem.num_objectives(),
        lipschitz: problem.lipschitz(),
        s: (plan.mode != Mode::Mavd).then(|| solver_config(plan, problem).s),
        level_radius: problem.level_radius(&x0),
        reference_origins: refs
            .as_ref()
            .map(|r| r.origins().iter().map(|o| o.as_str().to_string()).collect())
            .unwrap_or_default(),
        tail_ref: refs.as_ref().and_then(|r| r.position(RefOrigin::TrajectoryTail)),
        termination: outcome.termination,
        iterations: outcome.iterations,
        wall_time,
        final_criticality_residual: final_crit,
        error: outcome.error,
    };
    write_json(&dir.join(META_FILE), &meta)?;
    write_json(&dir.join(INRUN_FILE), &outcome.inrun)?;
    emit_report(dir)
}

/// Runs every labelled plan in `base/<label>`, at most `workers` at a time.
pub fn run_sweep(plans: &[(String, RunPlan)], base: &Path, workers: usize) -> Result<Vec<(String, PathBuf, Result<Report>)>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("starting worker pool")?;
    Ok(pool.install(|| {
        plans
            .par_iter()
            .map(|(label, plan)| {
                let dir = base.join(label);
                let report = run_plan(plan, &dir);
                (label.clone(), dir, report)
            })
            .collect()
    }))
}

/// In-memory discrete run used by the acceptance suite: rows, references and the in-run check.
pub struct DiscreteRun {
    pub rows: Vec<Row64>,
    pub refs: Refs64,
    pub step_check: StepCheck,
    pub result: moaccel::Result<moaccel::RunResult<f64>>,
}

pub fn collect_discrete(
    problem: &dyn Problem<f64>,
    config: &Config64,
    x0: &[f64],
    refs: Refs64,
    descent: bool,
) -> moaccel::Result<DiscreteRun> {
    let mut rows: Vec<Row64> = Vec::new();
    let (result, step_check) = {
        let mut recorder = Recorder::new(problem, &refs, config.a, config.b, config.s, config.subproblem_tol, &mut rows)?;
        let result = if descent {
            solver::run_msd(problem, config, x0, &mut recorder)
        } else {
            solver::run(problem, config, x0, &mut recorder)
        };
        (result, recorder.step_check())
    };
    Ok(DiscreteRun {
        rows,
        refs,
        step_check,
        result,
    })
}
