//! Reports recomputed from a run directory.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use moaccel::diagnostics::rate_fit;
use serde_json::{json, Value};

use crate::config::{parse_config, Mode};
use crate::invariants::{accelerated_invariants, descent_invariants, trajectory_invariants, DiscreteParams, InvariantResult};
use crate::runner::{read_json, step_rule, ConfigEcho, InRun, RunMeta, CONFIG_FILE, DIAGNOSTICS_FILE, INRUN_FILE, META_FILE, REPORT_FILE, TRAJECTORY_FILE};
use crate::tables::{fmt17, read_diagnostics, read_trajectory};

/// Fit window for the discrete merit series, in iterations.
pub const DISCRETE_RATE_WINDOW: (f64, f64) = (1e2, 1e4);
/// Lower end of the fit window for the continuous series `t^{2α/3}·û₀(x(t))`.
pub const CONTINUOUS_RATE_START: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// `None` when the window holds too few positive values to fit.
    pub rate_slope: Option<f64>,
    pub rate_window: (f64, f64),
    pub invariant_results: Vec<InvariantResult>,
    pub termination: String,
    pub wall_time: f64,
    pub config_echo: String,
}

impl Report {
    pub fn aborted(&self) -> bool {
        self.termination.starts_with("aborted")
    }

    /// True when every invariant held and the run finished.
    pub fn passed(&self) -> bool {
        !self.aborted() && self.invariant_results.iter().all(|r| r.passed)
    }

    pub fn failed_invariants(&self) -> impl Iterator<Item = &InvariantResult> {
        self.invariant_results.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rate_slope": self.rate_slope.map(fmt17),
            "rate_window": [fmt17(self.rate_window.0), fmt17(self.rate_window.1)],
            "invariant_results": self.invariant_results.iter().map(|r| json!({
                "name": r.name,
                "passed": r.passed,
                "worst_violation": fmt17(r.worst_violation),
            })).collect::<Vec<_>>(),
            "termination": self.termination,
            "wall_time": fmt17(self.wall_time),
            "config_echo": self.config_echo,
        })
    }
}

fn parse_inrun(value: &Option<String>, what: &str) -> Result<f64> {
    match value {
        // no iteration ran, nothing could be violated
        None => Ok(f64::NEG_INFINITY),
        Some(text) => text.parse().with_context(|| format!("{INRUN_FILE}: `{what}` holds `{text}`")),
    }
}

/// Recomputes every invariant and the rate fit from the files in `run_dir`, and
/// writes `report.json`.
pub fn emit_report(run_dir: &Path) -> Result<Report> {
    let echo: ConfigEcho = read_json(&run_dir.join(CONFIG_FILE))?;
    let plan = parse_config(&echo.document).with_context(|| format!("{CONFIG_FILE}: config echo does not parse"))?;
    let meta: RunMeta = read_json(&run_dir.join(META_FILE))?;
    let inrun: InRun = read_json(&run_dir.join(INRUN_FILE))?;

    let (rate_slope, rate_window, invariant_results) = match plan.mode {
        Mode::MagGm | Mode::Msd => {
            let path = run_dir.join(DIAGNOSTICS_FILE);
            let rows = if path.exists() || !plan_aborted(&meta) {
                read_diagnostics(&path)?
            } else {
                Vec::new()
            };
            let params = DiscreteParams {
                a: plan.a,
                b: plan.b,
                s: meta.s.context("meta.json lacks the step size")?,
                radius: meta.level_radius,
                tail_ref: meta.tail_ref,
            };
            let one_step = parse_inrun(&inrun.sigma_one_step_worst, "sigma_one_step_worst")?;
            let results = if plan.mode == Mode::MagGm {
                accelerated_invariants(&rows, &params, one_step)
            } else {
                descent_invariants(&rows, &params, one_step)
            };
            let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, r.merit_surrogate)).collect();
            let slope = rate_fit(&series, DISCRETE_RATE_WINDOW).ok().map(|f| f.slope);
            (slope, DISCRETE_RATE_WINDOW, results)
        }
        Mode::Mavd => {
            let path = run_dir.join(TRAJECTORY_FILE);
            let samples = if path.exists() || !plan_aborted(&meta) {
                read_trajectory(&path)?
            } else {
                Vec::new()
            };
            let consistency = parse_inrun(&inrun.selection_worst_consistency, "selection_worst_consistency")?;
            let results = trajectory_invariants(&samples, plan.alpha, meta.level_radius, &step_rule(&plan), consistency);
            let power = 2.0 * plan.alpha / 3.0;
            let series: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.t.powf(power) * s.merit)).collect();
            let window = (CONTINUOUS_RATE_START, plan.t_end);
            (rate_fit(&series, window).ok().map(|f| f.slope), window, results)
        }
    };

    let report = Report {
        rate_slope,
        rate_window,
        invariant_results,
        termination: meta.termination.clone(),
        wall_time: meta.wall_time,
        config_echo: echo.document,
    };
    let path = run_dir.join(REPORT_FILE);
    let text = serde_json::to_string_pretty(&report.to_json())?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}

fn plan_aborted(meta: &RunMeta) -> bool {
    meta.termination.starts_with("aborted")
}
