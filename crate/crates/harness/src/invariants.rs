//! Invariant checks recomputed from persisted diagnostics.
//!
//! Each check reports its worst violation clamped at zero: a value of `0` means
//! the inequality held everywhere (within its slack).

use moaccel::diagnostics::summability_check;
use moaccel::mavd::StepRule;
use moaccel::schedule::schedule_violations;
use moaccel::Row64;
use serde::Serialize;

use crate::tables::TrajectoryRow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst_violation: f64,
}

impl InvariantResult {
    /// `raw` is the largest signed violation; anything `≤ 0` passes.
    pub fn from_raw(name: &'static str, raw: f64) -> Self {
        let passed = raw <= 0.0;
        let worst_violation = if raw.is_nan() { f64::INFINITY } else { raw.max(0.0) };
        Self {
            name,
            passed: passed && !raw.is_nan(),
            worst_violation,
        }
    }
}

fn worst(iter: impl Iterator<Item = f64>) -> f64 {
    iter.fold(f64::NEG_INFINITY, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

/// Parameters the discrete checks need beyond the rows themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteParams {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub radius: Option<f64>,
    /// Column of the reference that approximates the limit point.
    pub tail_ref: Option<usize>,
}

pub const SCHEDULE_TOL: f64 = 1e-9;
pub const LEVEL_SLACK: f64 = 1e-9;
pub const LYAPUNOV_SLACK: f64 = 1e-8;

pub fn schedule_properties(rows: &[Row64], a: f64, b: f64) -> InvariantResult {
    let raw = worst(rows.windows(2).filter(|w| w[1].k == w[0].k + 1).map(|w| {
        schedule_violations(a, b, w[0].k, w[0].t_k, w[1].t_k).worst() - SCHEDULE_TOL
    }));
    InvariantResult::from_raw("schedule_properties", raw)
}

pub fn level_containment(rows: &[Row64]) -> InvariantResult {
    let raw = match rows.first() {
        Some(first) => worst(rows.iter().flat_map(|r| {
            r.f_values
                .iter()
                .zip(&first.f_values)
                .map(|(&f, &f0)| f - f0 - LEVEL_SLACK * (1.0 + f0.abs()))
        })),
        None => 0.0,
    };
    InvariantResult::from_raw("level_containment", raw)
}

pub fn energy_monotonicity(rows: &[Row64]) -> InvariantResult {
    let raw = worst(rows.windows(2).flat_map(|w| {
        w[1].w
            .iter()
            .zip(&w[0].w)
            .map(|(&next, &cur)| next - cur - LEVEL_SLACK * (1.0 + cur.abs()))
    }));
    InvariantResult::from_raw("energy_monotonicity", raw)
}

pub fn lyapunov_decrease(rows: &[Row64]) -> InvariantResult {
    let raw = worst(rows.windows(2).flat_map(|w| {
        let (cur, next) = (&w[0], &w[1]);
        cur.e_per_ref
            .iter()
            .zip(&next.e_per_ref)
            .zip(&cur.sigma_per_ref)
            .map(move |((&e, &e_next), &sig)| e_next - e + cur.zeta * sig - LYAPUNOV_SLACK * (1.0 + e.abs()))
    }));
    InvariantResult::from_raw("lyapunov_decrease", raw)
}

/// `û₀(x_k)·s(1−a)²k² ≤ s·û₀(x₀) + R̂²`, with `x₀` the first row.
pub fn rate_bound(rows: &[Row64], p: &DiscreteParams) -> InvariantResult {
    let raw = match (rows.first(), p.radius) {
        (Some(first), Some(radius)) => {
            let rhs = p.s * first.merit_surrogate + radius * radius;
            let scale = p.s * (1.0 - p.a) * (1.0 - p.a);
            worst(rows.iter().map(|r| {
                let k = r.k as f64;
                r.merit_surrogate * scale * k * k - rhs - LEVEL_SLACK * (1.0 + rhs.abs())
            }))
        }
        _ => 0.0,
    };
    InvariantResult::from_raw("rate_bound", raw)
}

/// `−σ_k(z*) ≤ ‖x_k − x_{k−1}‖²/(2s)` for the tail reference `z*`.
pub fn cluster_point(rows: &[Row64], p: &DiscreteParams) -> InvariantResult {
    let raw = match p.tail_ref {
        Some(j) => worst(rows.iter().map(|r| -r.sigma_per_ref[j] - r.step_norm_sq / (2.0 * p.s) - LYAPUNOV_SLACK)),
        None => 0.0,
    };
    InvariantResult::from_raw("cluster_point", raw)
}

pub fn summability(rows: &[Row64], p: &DiscreteParams) -> InvariantResult {
    let merit0 = rows.first().map_or(0.0, |r| r.merit_surrogate);
    let check = summability_check(rows, p.a, p.b, p.s, merit0, p.radius);
    let raw = match check.bound {
        Some(bound) => worst(check.partial_sums.iter().map(|&v| v - bound * 1.01 - 1e-12)),
        None => 0.0,
    };
    InvariantResult::from_raw("summability_bound", raw)
}

/// Turns the in-run one-step gap measurement (already net of its slack) into a result.
pub fn sigma_one_step(worst_violation: f64) -> InvariantResult {
    InvariantResult::from_raw("sigma_one_step", worst_violation)
}

pub fn accelerated_invariants(rows: &[Row64], p: &DiscreteParams, step_check: f64) -> Vec<InvariantResult> {
    vec![
        schedule_properties(rows, p.a, p.b),
        level_containment(rows),
        energy_monotonicity(rows),
        sigma_one_step(step_check),
        lyapunov_decrease(rows),
        rate_bound(rows, p),
        cluster_point(rows, p),
        summability(rows, p),
    ]
}

/// The steepest-descent baseline carries no momentum, so only the checks that
/// do not involve the schedule apply.
pub fn descent_invariants(rows: &[Row64], p: &DiscreteParams, step_check: f64) -> Vec<InvariantResult> {
    vec![
        level_containment(rows),
        energy_monotonicity(rows),
        sigma_one_step(step_check),
        cluster_point(rows, p),
    ]
}

/// Integrator slack `10·dt²·(1 + |value|)` for the step size in force at `t`.
pub fn integrator_slack(rule: &StepRule<f64>, t: f64, value: f64) -> f64 {
    let dt = rule.dt_at(t);
    10.0 * dt * dt * (1.0 + value.abs())
}

pub fn energy_decay(samples: &[TrajectoryRow], rule: &StepRule<f64>) -> InvariantResult {
    let raw = worst(samples.windows(2).flat_map(|w| {
        w[1].w
            .iter()
            .zip(&w[0].w)
            .map(|(&next, &cur)| next - cur - integrator_slack(rule, w[0].t, cur))
    }));
    InvariantResult::from_raw("energy_decay", raw)
}

fn objective_values(sample: &TrajectoryRow) -> impl Iterator<Item = f64> + '_ {
    let kinetic = 0.5 * sample.v_norm * sample.v_norm;
    sample.w.iter().map(move |&w| w - kinetic)
}

pub fn trajectory_level_containment(samples: &[TrajectoryRow], rule: &StepRule<f64>) -> InvariantResult {
    let raw = match samples.first() {
        Some(first) => {
            let f0: Vec<f64> = objective_values(first).collect();
            worst(samples.iter().flat_map(|s| {
                let f0 = &f0;
                objective_values(s)
                    .zip(f0)
                    .map(move |(f, &base)| f - base - integrator_slack(rule, s.t, base))
            }))
        }
        None => 0.0,
    };
    InvariantResult::from_raw("level_containment", raw)
}

pub fn lyapunov_decay(samples: &[TrajectoryRow], rule: &StepRule<f64>) -> InvariantResult {
    let raw = worst(samples.windows(2).flat_map(|w| {
        w[1].e_per_ref
            .iter()
            .zip(&w[0].e_per_ref)
            .map(|(&next, &cur)| next - cur - integrator_slack(rule, w[0].t, cur))
    }));
    InvariantResult::from_raw("lyapunov_decay", raw)
}

/// `t^{2α/3}·û₀(x(t)) ≤ û₀(x₀) + (2α(α+3)/9)·R̂²` plus integrator slack.
pub fn trajectory_rate_bound(samples: &[TrajectoryRow], alpha: f64, radius: Option<f64>, rule: &StepRule<f64>) -> InvariantResult {
    let raw = match (samples.first(), radius) {
        (Some(first), Some(r)) => {
            let rhs = first.merit + 2.0 * alpha * (alpha + 3.0) / 9.0 * r * r;
            let power = 2.0 * alpha / 3.0;
            worst(samples.iter().map(|s| s.t.powf(power) * s.merit - rhs - integrator_slack(rule, s.t, rhs)))
        }
        _ => 0.0,
    };
    InvariantResult::from_raw("rate_bound", raw)
}

/// Worst linear-maximizer gap of the selections, already net of its tolerance.
pub fn selection_consistency(worst_consistency: f64) -> InvariantResult {
    InvariantResult::from_raw("selection_consistency", worst_consistency)
}

pub fn trajectory_invariants(
    samples: &[TrajectoryRow],
    alpha: f64,
    radius: Option<f64>,
    rule: &StepRule<f64>,
    worst_consistency: f64,
) -> Vec<InvariantResult> {
    vec![
        energy_decay(samples, rule),
        trajectory_level_containment(samples, rule),
        lyapunov_decay(samples, rule),
        trajectory_rate_bound(samples, alpha, radius, rule),
        selection_consistency(worst_consistency),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use moaccel::diagnostics::DiagnosticsRow;

    fn constant_rows(count: usize) -> Vec<Row64> {
        (1..=count)
            .map(|k| DiagnosticsRow {
                k,
                t_k: 1.0,
                f_values: vec![1.0, 1.0],
                step_norm_sq: 0.0,
                w: vec![1.0, 1.0],
                sigma_per_ref: vec![0.0],
                e_per_ref: vec![0.0],
                zeta: 0.0,
                merit_surrogate: 0.0,
                criticality_residual: 0.0,
                summability_partial: 0.0,
            })
            .collect()
    }

    #[test]
    fn constant_iterates_pass_with_zero_violation() {
        let rows = constant_rows(20);
        let p = DiscreteParams {
            a: 0.0,
            b: 0.25,
            s: 0.5,
            radius: Some(1.0),
            tail_ref: Some(0),
        };
        for r in descent_invariants(&rows, &p, -1e-9) {
            assert!(r.passed, "{r:?}");
            assert_eq!(r.worst_violation, 0.0);
        }
        for r in [level_containment(&rows), energy_monotonicity(&rows), lyapunov_decrease(&rows), rate_bound(&rows, &p), summability(&rows, &p)] {
            assert!(r.passed && r.worst_violation == 0.0, "{r:?}");
        }
    }

    #[test]
    fn detects_energy_increase() {
        let mut rows = constant_rows(5);
        rows[3].w[1] = 1.5;
        let r = energy_monotonicity(&rows);
        assert!(!r.passed);
        assert!((r.worst_violation - (0.5 - 2e-9)).abs() < 1e-12);
    }

    #[test]
    fn nan_fails() {
        let mut rows = constant_rows(3);
        rows[1].f_values[0] = f64::NAN;
        assert!(!level_containment(&rows).passed);
    }

    #[test]
    fn schedule_check_on_exact_sequence() {
        let mut rows = constant_rows(50);
        let mut sched = moaccel::Schedule64::new(0.5, 0.25).unwrap();
        for r in rows.iter_mut() {
            r.t_k = sched.t();
            sched = sched.advance().unwrap();
        }
        assert!(schedule_properties(&rows, 0.5, 0.25).passed);
        rows[10].t_k *= 1.1;
        assert!(!schedule_properties(&rows, 0.5, 0.25).passed);
    }
}
