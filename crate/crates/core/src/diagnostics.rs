//! Quantities tracked by the convergence analysis: gaps `σ_k(z)`, the merit
//! surrogate, energies, the discrete Lyapunov function, summability partial sums
//! and empirical rate fits.

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{evaluate, evaluate_gaps, evaluate_values, Problem, ReferenceSet};
use crate::scalar::Scalar;
use crate::schedule::StepSchedule;
use crate::simplex;
use crate::solver::{Observer, SolverState, StepInfo};

/// `min_i (f_i(x) − f_i(z))` from precomputed objective values.
pub fn sigma_from_values<T: Scalar>(fx: &[T], fz: &[T]) -> T {
    fx.iter()
        .zip(fz)
        .map(|(&a, &b)| a - b)
        .fold(T::infinity(), T::min)
}

fn min_gap<T: Scalar>(gaps: &[T]) -> T {
    gaps.iter().copied().fold(T::infinity(), T::min)
}

/// `σ(z) = min_i (f_i(x) − f_i(z))`, from [`Problem::value_gaps`].
pub fn sigma<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T], z: &[T]) -> Result<T> {
    Ok(min_gap(&evaluate_gaps(problem, x, z)?))
}

/// `û₀(x; Z) = max_{z ∈ Z} min_i (f_i(x) − f_i(z))`, a lower bound of the merit function.
pub fn merit_surrogate<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T], refs: &ReferenceSet<T>) -> Result<T> {
    let mut best = T::neg_infinity();
    for z in refs.points() {
        best = best.max(sigma(problem, x, z)?);
    }
    Ok(best)
}

/// `W^i = f_i(x) + ‖x − x_prev‖²/(2s)`
pub fn energy_w<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T], x_prev: &[T], s: T) -> Result<Vec<T>> {
    linalg::check_dim(x.len(), x_prev.len())?;
    let kinetic = linalg::dist_sq(x, x_prev) / (T::lit(2.0) * s);
    Ok(evaluate_values(problem, x)?.into_iter().map(|f| f + kinetic).collect())
}

/// `E_k(z) = t_k²·σ_k(z) + ‖η_k − z‖²/(2s)` with `η_k = x_k + (t_k − 1)(x_k − x_{k−1})`.
pub fn lyapunov_e<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, state: &SolverState<T>, s: T, z: &[T]) -> Result<T> {
    linalg::check_dim(problem.dim(), z.len())?;
    let t = state.t();
    let eta = state.eta();
    Ok(t * t * sigma(problem, &state.x_cur, z)? + linalg::dist_sq(&eta, z) / (T::lit(2.0) * s))
}

/// `ζ_k(a, b) = a·t_k − b + ¼`
pub fn zeta<T: Scalar>(schedule: &StepSchedule<T>) -> T {
    schedule.zeta()
}

/// `Q(a, b) = (¼ − b)² / (2(1 − a))`
pub fn q_coefficient<T: Scalar>(a: T, b: T) -> T {
    let d = T::lit(0.25) - b;
    d * d / (T::lit(2.0) * (T::one() - a))
}

/// `‖proj_{C(x)}(0)‖`; zero exactly at Pareto critical points.
pub fn criticality_residual<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T], tol: T) -> Result<T> {
    let (_, hull) = evaluate(problem, x)?;
    Ok(linalg::norm(&simplex::min_norm_element(&hull, tol)?))
}

/// Everything recorded about iterate `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow<T> {
    pub k: usize,
    pub t_k: T,
    pub f_values: Vec<T>,
    /// `‖x_k − x_{k−1}‖²`
    pub step_norm_sq: T,
    /// `W_k^i`
    pub w: Vec<T>,
    pub sigma_per_ref: Vec<T>,
    pub e_per_ref: Vec<T>,
    pub zeta: T,
    pub merit_surrogate: T,
    pub criticality_residual: T,
    /// `Σ_{p ≤ k} (a·p − b + ¼)‖x_p − x_{p−1}‖²`
    pub summability_partial: T,
}

/// Destination of diagnostics rows.
pub trait DiagnosticsSink<T> {
    fn push(&mut self, row: &DiagnosticsRow<T>) -> Result<()>;
}

impl<T: Clone> DiagnosticsSink<T> for Vec<DiagnosticsRow<T>> {
    fn push(&mut self, row: &DiagnosticsRow<T>) -> Result<()> {
        Vec::push(self, row.clone());
        Ok(())
    }
}

impl<T, S: DiagnosticsSink<T> + ?Sized> DiagnosticsSink<T> for &mut S {
    fn push(&mut self, row: &DiagnosticsRow<T>) -> Result<()> {
        (**self).push(row)
    }
}

/// Worst violation of the one-step gap inequality
/// `σ_{k+1}(z) ≤ −⟨x_{k+1} − y_k, y_k − z⟩/s − ‖x_{k+1} − y_k‖²/(2s)`,
/// which needs `y_k` and therefore can only be checked while running.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    pub worst_violation: f64,
    pub at_k: usize,
    /// Largest subproblem KKT residual seen.
    pub worst_subproblem_residual: f64,
}

impl Default for StepCheck {
    fn default() -> Self {
        Self {
            worst_violation: f64::NEG_INFINITY,
            at_k: 0,
            worst_subproblem_residual: 0.0,
        }
    }
}

/// Observer that turns each iterate into a [`DiagnosticsRow`].
pub struct Recorder<'a, T: Scalar, P: ?Sized, S> {
    problem: &'a P,
    refs: &'a ReferenceSet<T>,
    s: T,
    a: T,
    b: T,
    tol: T,
    partial: T,
    next_values: Option<(Vec<T>, Vec<T>)>,
    step_check: StepCheck,
    sink: S,
}

impl<'a, T: Scalar, P: Problem<T> + ?Sized, S: DiagnosticsSink<T>> Recorder<'a, T, P, S> {
    pub fn new(problem: &'a P, refs: &'a ReferenceSet<T>, a: T, b: T, s: T, tol: T, sink: S) -> Result<Self> {
        linalg::check_dim(problem.dim(), refs.dim())?;
        for z in refs.points() {
            evaluate_values(problem, z)?;
        }
        Ok(Self {
            problem,
            refs,
            s,
            a,
            b,
            tol,
            partial: T::zero(),
            next_values: None,
            step_check: StepCheck::default(),
            sink,
        })
    }

    pub fn step_check(&self) -> StepCheck {
        self.step_check
    }

    pub fn into_sink(self) -> S {
        self.sink
    }

    fn values_at(&mut self, x: &[T]) -> Result<Vec<T>> {
        match self.next_values.take() {
            Some((point, values)) if point == x => Ok(values),
            _ => evaluate_values(self.problem, x),
        }
    }

    /// Row for the iterate held by `state`.
    pub fn row(&mut self, state: &SolverState<T>) -> Result<DiagnosticsRow<T>> {
        let two_s = T::lit(2.0) * self.s;
        let f_values = self.values_at(&state.x_cur)?;
        let step_norm_sq = state.step_norm_sq();
        let kinetic = step_norm_sq / two_s;
        let w = f_values.iter().map(|&f| f + kinetic).collect();
        let t = state.t();
        let eta = state.eta();
        let mut sigma_per_ref = Vec::with_capacity(self.refs.len());
        let mut e_per_ref = Vec::with_capacity(self.refs.len());
        for z in self.refs.points() {
            let sig = sigma(self.problem, &state.x_cur, z)?;
            sigma_per_ref.push(sig);
            e_per_ref.push(t * t * sig + linalg::dist_sq(&eta, z) / two_s);
        }
        let merit = sigma_per_ref.iter().copied().fold(T::neg_infinity(), T::max);
        let crit = criticality_residual(self.problem, &state.x_cur, self.tol)?;
        let weight = self.a * T::from_count(state.k()) - self.b + T::lit(0.25);
        self.partial += weight * step_norm_sq;
        Ok(DiagnosticsRow {
            k: state.k(),
            t_k: t,
            f_values,
            step_norm_sq,
            w,
            sigma_per_ref,
            e_per_ref,
            zeta: state.schedule.zeta(),
            merit_surrogate: merit,
            criticality_residual: crit,
            summability_partial: self.partial,
        })
    }

    fn check_step(&mut self, k: usize, step: &StepInfo<T>) -> Result<()> {
        let f_next = evaluate_values(self.problem, &step.x_next)?;
        let d = linalg::sub(&step.x_next, &step.y);
        let d_sq = linalg::norm_sq(&d);
        for z in self.refs.points() {
            let lhs = sigma(self.problem, &step.x_next, z)?;
            let y_minus_z = linalg::sub(&step.y, z);
            let rhs = -linalg::dot(&d, &y_minus_z) / self.s - d_sq / (T::lit(2.0) * self.s);
            let violation = (lhs - rhs).as_f64() - 1e-9;
            if violation > self.step_check.worst_violation {
                self.step_check.worst_violation = violation;
                self.step_check.at_k = k;
            }
        }
        self.step_check.worst_subproblem_residual = self.step_check.worst_subproblem_residual.max(step.residual.as_f64());
        self.next_values = Some((step.x_next.clone(), f_next));
        Ok(())
    }
}

impl<T: Scalar, P: Problem<T> + ?Sized, S: DiagnosticsSink<T>> Observer<T> for Recorder<'_, T, P, S> {
    fn observe(&mut self, state: &SolverState<T>, step: &StepInfo<T>) -> Result<()> {
        let row = self.row(state)?;
        self.sink.push(&row)?;
        self.check_step(state.k(), step)
    }
}

/// Least-squares slope of `log(value)` against `log(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub used: usize,
    /// Values in the window at or below `1e-300`, left out of the fit.
    pub clipped: usize,
}

/// Fits a power law over `k ∈ [window.0, window.1]`; needs at least 10 positive values.
pub fn rate_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let mut clipped = 0;
    let mut pts = Vec::new();
    for &(k, v) in series {
        if k < window.0 || k > window.1 || k <= 0.0 {
            continue;
        }
        if v.is_finite() && v > 1e-300 {
            pts.push((k.ln(), v.ln()));
        } else {
            clipped += 1;
        }
    }
    if pts.len() < 10 {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            needed: 10,
        });
    }
    let count = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData {
            usable: 1,
            needed: 10,
        });
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        used: pts.len(),
        clipped,
    })
}

/// Outcome of the summability check.
#[derive(Debug, Clone, PartialEq)]
pub struct Summability {
    pub partial_sums: Vec<f64>,
    /// `(s·û₀(x₀) + R̂²)·(4/a [a > 0] + (¼ − b)/Q(a,b) [b < ¼])`; `None` without a radius.
    pub bound: Option<f64>,
    /// Some partial sum exceeds the bound by more than 1%.
    pub violated: bool,
    /// Partial sum at the last row minus the one a decade earlier.
    pub tail_increment: f64,
    pub warning: Option<String>,
}

/// The bound on `Σ (a·p − b + ¼)‖x_p − x_{p−1}‖²` implied by the energy estimate
/// `Σ (a²(p−1)/2 + Q)‖x_p − x_{p−1}‖² ≤ s·u₀(x₀) + R²`.
pub fn summability_bound(a: f64, b: f64, s: f64, merit0: f64, radius: f64) -> f64 {
    let budget = s * merit0.max(0.0) + radius * radius;
    let mut bound = 0.0;
    if a > 0.0 {
        bound += budget * 4.0 / a;
    }
    if b < 0.25 {
        bound += budget * (0.25 - b) / q_coefficient(a, b);
    }
    bound
}

pub fn summability_check<T: Scalar>(
    rows: &[DiagnosticsRow<T>],
    a: f64,
    b: f64,
    s: f64,
    merit0: f64,
    radius: Option<f64>,
) -> Summability {
    let partial_sums: Vec<f64> = rows.iter().map(|r| r.summability_partial.as_f64()).collect();
    let tail_increment = match (rows.last(), partial_sums.last()) {
        (Some(last), Some(&end)) => {
            let start_k = last.k / 10;
            let start = rows
                .iter()
                .zip(&partial_sums)
                .take_while(|(r, _)| r.k <= start_k)
                .last()
                .map(|(_, &p)| p)
                .unwrap_or(0.0);
            end - start
        }
        _ => 0.0,
    };
    let (bound, warning) = match radius {
        Some(r) => (Some(summability_bound(a, b, s, merit0, r)), None),
        None => (None, Some("no level radius available; bound check skipped".to_string())),
    };
    let violated = bound.is_some_and(|bd| partial_sums.iter().any(|&p| p > bd * 1.01 + 1e-12));
    Summability {
        partial_sums,
        bound,
        violated,
        tail_increment,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FnProblem, Jos1, RefOrigin};

    fn pair_values() -> FnProblem<f64> {
        // f(x) = (x0, x1) as a 2-objective linear map, enough to exercise sigma
        FnProblem::new(
            "identity",
            2,
            2,
            1.0,
            |x: &[f64]| x.to_vec(),
            |_: &[f64]| vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn sigma_examples() {
        let p = pair_values();
        assert_eq!(sigma(&p, &[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert!((sigma(&p, &[1.0, 3.0], &[0.5, 2.8]).unwrap() - 0.2).abs() < 1e-15);
        assert!(sigma(&p, &[1.0, 3.0], &[0.0, 2.0]).unwrap() > 0.0);
        assert!(sigma(&p, &[0.0, 2.0], &[1.0, 3.0]).unwrap() < 0.0);
    }

    #[test]
    fn merit_examples() {
        let p = Jos1::<f64>::new(1).unwrap();
        let refs = ReferenceSet::new(vec![vec![0.0], vec![1.0], vec![2.0]], RefOrigin::ParetoAnalytic).unwrap();
        // z = 0: min(9, 1−4) = −3; z = 1: min(8, 1−1) = 0; z = 2: min(5, 1) = 1
        assert_eq!(merit_surrogate(&p, &[3.0], &refs).unwrap(), 1.0);
        assert_eq!(merit_surrogate(&p, &[1.0], &refs).unwrap(), 0.0);
    }

    #[test]
    fn energy_examples() {
        let p = Jos1::<f64>::new(1).unwrap();
        assert_eq!(energy_w(&p, &[1.0], &[1.0], 0.5).unwrap(), p.values(&[1.0]));
        let w1 = energy_w(&p, &[1.0], &[0.0], 0.5).unwrap();
        let w2 = energy_w(&p, &[1.0], &[0.0], 1.0).unwrap();
        assert_eq!(w1[0] - 1.0, 1.0);
        assert_eq!(w2[0] - 1.0, 0.5);
    }

    #[test]
    fn lyapunov_at_start() {
        let p = Jos1::<f64>::new(2).unwrap();
        let state = SolverState::new(vec![1.0, 3.0], 0.0, 0.25).unwrap();
        assert_eq!(lyapunov_e(&p, &state, 1.0, &[1.0, 3.0]).unwrap(), 0.0);
        let z = [0.5, 0.5];
        let expected = sigma(&p, &[1.0, 3.0], &z).unwrap() + linalg::dist_sq(&[1.0, 3.0], &z) / 2.0;
        assert_eq!(lyapunov_e(&p, &state, 1.0, &z).unwrap(), expected);
    }

    #[test]
    fn criticality_examples() {
        let p = Jos1::<f64>::new(1).unwrap();
        assert_eq!(criticality_residual(&p, &[1.0], 1e-10).unwrap(), 0.0);
        assert!((criticality_residual(&p, &[3.0], 1e-10).unwrap() - 2.0).abs() < 1e-15);
        let single = FnProblem::new("lin", 2, 1, 1.0, |x: &[f64]| vec![x[0]], |_: &[f64]| vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(criticality_residual(&single, &[0.0, 0.0], 1e-10).unwrap(), 5.0);
    }

    #[test]
    fn q_values() {
        assert_eq!(q_coefficient(0.0, 0.25), 0.0);
        assert_eq!(q_coefficient(0.0, 0.0), 0.0625 / 2.0);
        assert_eq!(q_coefficient(0.5, 0.0625), 0.1875 * 0.1875);
    }

    #[test]
    fn rate_fit_power_laws() {
        let series: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, 1.0 / (k as f64).powi(2))).collect();
        assert!((rate_fit(&series, (100.0, 1000.0)).unwrap().slope + 2.0).abs() < 1e-6);
        let flat: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, 3.5)).collect();
        assert!(rate_fit(&flat, (1.0, 1000.0)).unwrap().slope.abs() < 1e-9);
        let inv: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, 1.0 / k as f64)).collect();
        assert!((rate_fit(&inv, (10.0, 500.0)).unwrap().slope + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rate_fit_needs_data() {
        let zeros: Vec<(f64, f64)> = (1..=100).map(|k| (k as f64, 0.0)).collect();
        let err = rate_fit(&zeros, (1.0, 100.0)).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { usable: 0, .. }));
        let few: Vec<(f64, f64)> = (1..=9).map(|k| (k as f64, 1.0)).collect();
        assert!(rate_fit(&few, (1.0, 100.0)).is_err());
    }

    #[test]
    fn summability_bound_cases() {
        assert_eq!(summability_bound(0.0, 0.25, 1.0, 1.0, 1.0), 0.0);
        assert_eq!(summability_bound(0.5, 0.25, 1.0, 1.0, 1.0), 16.0);
        // a = 0, b = 0: Q = 1/32, (¼)/Q = 8
        assert_eq!(summability_bound(0.0, 0.0, 1.0, 1.0, 1.0), 16.0);
    }
}
