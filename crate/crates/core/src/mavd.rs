//! Simulator for the inertial system with asymptotically vanishing damping
//!
//! ```text
//! (α/t)·ẋ(t) + proj_{C(x(t)) + ẍ(t)}(0) = 0,   x(1) = x0,  ẋ(1) = 0.
//! ```
//!
//! Writing `ẍ = −(α/t)ẋ − c`, the relation holds exactly when `c ∈ C(x)` is a
//! fixed point of `c ↦ proj_{C(x)}((α/t)ẋ + c)`, i.e. when `c` maximizes `⟨ẋ, ·⟩`
//! over the hull. The selection returns the min-norm point of that maximizing
//! face; at `ẋ = 0` every hull point qualifies and the min-norm element of the
//! whole hull is used.

use crate::diagnostics::sigma;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::problem::{evaluate, evaluate_values, Problem, ReferenceSet};
use crate::scalar::Scalar;
use crate::simplex::{self, GradientHull, SimplexWeights};

/// Iteration cap of the averaged fixed-point fallback.
pub const SELECTION_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeState<T> {
    pub t: T,
    pub x: Vec<T>,
    pub v: Vec<T>,
    pub alpha: T,
}

impl<T: Scalar> OdeState<T> {
    /// `t = 1`, `x = x0`, `ẋ = 0`.
    pub fn initial(x0: Vec<T>, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        if !linalg::all_finite(&x0) {
            return Err(Error::NonFinite("starting point".into()));
        }
        let n = x0.len();
        Ok(Self {
            t: T::one(),
            x: x0,
            v: vec![T::zero(); n],
            alpha,
        })
    }

    pub fn damping(&self) -> T {
        self.alpha / self.t
    }
}

/// A resolved selection `c* ∈ C(x)` with its convex weights.
#[derive(Debug, Clone)]
pub struct Selection<T> {
    pub c: Vec<T>,
    pub weights: SimplexWeights<T>,
    /// `‖c − proj_{C(x)}(damping·v + c)‖`
    pub residual: T,
    /// Largest `⟨v, ∇f_i⟩ − ⟨v, c⟩ − tol·(1 + ‖v‖)(1 + ‖∇f_i‖)`; `≤ 0` when `c`
    /// maximizes `⟨v, ·⟩` over the hull.
    pub consistency: T,
    /// Set when the face construction failed verification and the averaged
    /// iteration produced the answer.
    pub used_fallback: bool,
}

fn fixed_point_residual<T: Scalar>(hull: &GradientHull<T>, v: &[T], damping: T, c: &[T], tol: T) -> Result<(T, T)> {
    let mut target = c.to_vec();
    linalg::axpy(damping, v, &mut target);
    let projected = simplex::project_hull(hull, &target, tol)?;
    Ok((linalg::dist_sq(&projected, c).sqrt(), norm(&target)))
}

fn consistency<T: Scalar>(hull: &GradientHull<T>, v: &[T], c: &[T], tol: T) -> T {
    let vc = dot(v, c);
    let vn = norm(v);
    hull.columns()
        .iter()
        .map(|g| dot(v, g) - vc - tol * (T::one() + vn) * (T::one() + norm(g)))
        .fold(T::neg_infinity(), T::max)
}

/// Resolves `c* = proj_{C(x)}(damping·v + c*)`.
pub fn selection<T: Scalar>(hull: &GradientHull<T>, v: &[T], damping: T, tol: T) -> Result<Selection<T>> {
    linalg::check_dim(hull.dim(), v.len())?;
    if !(damping > T::zero()) {
        return Err(Error::InvalidInput(format!("damping must be positive, got {damping}")));
    }
    let m = hull.num_columns();
    let vn = norm(v);

    if vn == T::zero() {
        let sol = simplex::solve_subproblem(hull, v, T::one(), tol)?;
        return Ok(Selection {
            c: sol.direction,
            weights: sol.weights,
            residual: T::zero(),
            consistency: T::zero(),
            used_fallback: false,
        });
    }

    let scores: Vec<T> = hull.columns().iter().map(|g| dot(v, g)).collect();
    let best = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let face: Vec<usize> = (0..m)
        .filter(|&i| scores[i] >= best - tol * (T::one() + vn) * (T::one() + norm(hull.column(i))))
        .collect();
    let sub = hull.restrict(&face);
    let zero = vec![T::zero(); hull.dim()];
    let sol = simplex::solve_subproblem(&sub, &zero, T::one(), tol)?;
    let mut theta = vec![T::zero(); m];
    for (&i, &w) in face.iter().zip(sol.weights.as_slice()) {
        theta[i] = w;
    }
    let c = sol.direction;
    let (residual, scale) = fixed_point_residual(hull, v, damping, &c, tol)?;
    if residual <= tol * (T::one() + scale) {
        return Ok(Selection {
            consistency: consistency(hull, v, &c, tol),
            c,
            weights: SimplexWeights::new(theta)?,
            residual,
            used_fallback: false,
        });
    }
    averaged_iteration(hull, v, damping, tol, c)
}

/// `c ← ½c + ½·proj_{C(x)}(damping·v + c)` until the fixed-point residual is below `tol`.
fn averaged_iteration<T: Scalar>(hull: &GradientHull<T>, v: &[T], damping: T, tol: T, start: Vec<T>) -> Result<Selection<T>> {
    let half = T::lit(0.5);
    let mut c = start;
    let mut best = T::infinity();
    for _ in 0..SELECTION_CAP {
        let mut target = c.clone();
        linalg::axpy(damping, v, &mut target);
        let sol = simplex::solve_subproblem(hull, &target, T::one(), tol)?;
        let residual = linalg::dist_sq(&sol.direction, &c).sqrt();
        best = best.min(residual);
        if residual <= tol * (T::one() + norm(&target)) {
            let c = sol.direction;
            return Ok(Selection {
                consistency: consistency(hull, v, &c, tol),
                c,
                weights: sol.weights,
                residual,
                used_fallback: true,
            });
        }
        for (ci, &pi) in c.iter_mut().zip(&sol.direction) {
            *ci = half * *ci + half * pi;
        }
    }
    Err(Error::NotConverged {
        iterations: SELECTION_CAP,
        residual: best.as_f64(),
    })
}

/// Time derivative of the state `(x, ẋ)`, with the selection that produced it.
#[derive(Debug, Clone)]
pub struct Derivative<T> {
    pub dx: Vec<T>,
    pub dv: Vec<T>,
    pub selection: Selection<T>,
}

/// `dx = v`, `dv = −(α/t)·v − c*`.
pub fn rhs<T: Scalar, P: Problem<T> + ?Sized>(state: &OdeState<T>, problem: &P, tol: T) -> Result<Derivative<T>> {
    if state.t < T::one() {
        return Err(Error::InvalidInput(format!("time must be at least 1, got {}", state.t)));
    }
    let (_, hull) = evaluate(problem, &state.x)?;
    let damping = state.damping();
    let selection = selection(&hull, &state.v, damping, tol)?;
    let dv = state
        .v
        .iter()
        .zip(&selection.c)
        .map(|(&vi, &ci)| -damping * vi - ci)
        .collect();
    Ok(Derivative {
        dx: state.v.clone(),
        dv,
        selection,
    })
}

/// Step-size policy for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule<T> {
    Fixed(T),
    /// `dt(t) = min(0.1, 10⁻³·2^{⌊log₁₀ t⌋})`: doubles every decade of `t`.
    DecadeDoubling,
}

impl<T: Scalar> StepRule<T> {
    pub fn dt_at(&self, t: T) -> T {
        match *self {
            StepRule::Fixed(dt) => dt,
            StepRule::DecadeDoubling => {
                let decade = t.max(T::one()).log10().floor();
                (T::lit(1e-3) * T::lit(2.0).powf(decade)).min(T::lit(0.1))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateConfig<T> {
    pub alpha: T,
    pub t_end: T,
    pub step: StepRule<T>,
    /// Emit a sample every this many steps (plus the first and the last state).
    pub sample_every: usize,
    /// Subproblem and selection tolerance.
    pub tol: T,
}

impl<T: Scalar> IntegrateConfig<T> {
    pub fn new(alpha: T, t_end: T) -> Self {
        Self {
            alpha,
            t_end,
            step: StepRule::DecadeDoubling,
            sample_every: 100,
            tol: T::default_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero()) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.t_end > T::one()) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput(format!("t_end must exceed 1, got {}", self.t_end)));
        }
        if let StepRule::Fixed(dt) = self.step {
            if !(dt > T::zero()) {
                return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
            }
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidInput("sample_every must be at least 1".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A point of the trajectory with the continuous diagnostics attached.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub x: Vec<T>,
    pub v: Vec<T>,
    pub acceleration: Vec<T>,
    pub selection_weights: SimplexWeights<T>,
    pub f_values: Vec<T>,
    /// `W_i(t) = f_i(x(t)) + ½‖ẋ(t)‖²`
    pub w: Vec<T>,
    /// `Θ_z(t) = min_i (f_i(x(t)) − f_i(z))` per reference point.
    pub theta_z_per_ref: Vec<T>,
    pub e_per_ref: Vec<T>,
    /// `max_z Θ_z(t)`, the merit surrogate at `x(t)`.
    pub merit: T,
}

/// Fills `W`, `Θ_z`, `E_z` and the merit surrogate of `sample`, where
///
/// ```text
/// E_z = t^{2α/3}Θ_z + ½t^{2α/3−2}‖tẋ + (2α/3)(x − z)‖² + (α(3−α)/9)·t^{2α/3−2}‖x − z‖².
/// ```
pub fn continuous_diagnostics<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    sample: &mut TrajectorySample<T>,
    alpha: T,
    refs: &ReferenceSet<T>,
) -> Result<()> {
    fill_diagnostics(problem, sample, alpha, refs)
}

fn fill_diagnostics<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    sample: &mut TrajectorySample<T>,
    alpha: T,
    refs: &ReferenceSet<T>,
) -> Result<()> {
    linalg::check_dim(sample.x.len(), refs.dim())?;
    let t = sample.t;
    let half = T::lit(0.5);
    let f = evaluate_values(problem, &sample.x)?;
    let kinetic = half * linalg::norm_sq(&sample.v);
    sample.w = f.iter().map(|&fi| fi + kinetic).collect();

    let p = T::lit(2.0) * alpha / T::lit(3.0);
    let lead = t.powf(p);
    let tail = t.powf(p - T::lit(2.0));
    let third = alpha * (T::lit(3.0) - alpha) / T::lit(9.0);
    sample.theta_z_per_ref.clear();
    sample.e_per_ref.clear();
    for z in refs.points() {
        let theta = sigma(problem, &sample.x, z)?;
        let mut mixed_t = T::zero();
        let mut dist_t = T::zero();
        for ((&xi, &vi), &zi) in sample.x.iter().zip(&sample.v).zip(z) {
            let d = xi - zi;
            let q = t * vi + p * d;
            mixed_t += q * q;
            dist_t += d * d;
        }
        sample.theta_z_per_ref.push(theta);
        sample.e_per_ref.push(lead * theta + half * tail * mixed_t + third * tail * dist_t);
    }
    sample.merit = sample
        .theta_z_per_ref
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    sample.f_values = f;
    Ok(())
}

/// Totals over a completed integration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationSummary<T> {
    pub steps: usize,
    pub samples: usize,
    pub final_state: OdeState<T>,
    /// Worst selection-consistency value over every right-hand-side evaluation.
    pub worst_consistency: f64,
    pub fallback_count: usize,
}

fn add_scaled<T: Scalar>(base: &[T], h: T, d: &[T]) -> Vec<T> {
    base.iter().zip(d).map(|(&b, &di)| b + h * di).collect()
}

struct Rk4Stepper<'a, T: Scalar, P: ?Sized> {
    problem: &'a P,
    tol: T,
    worst_consistency: f64,
    fallback_count: usize,
}

impl<T: Scalar, P: Problem<T> + ?Sized> Rk4Stepper<'_, T, P> {
    fn eval(&mut self, state: &OdeState<T>) -> Result<Derivative<T>> {
        let d = rhs(state, self.problem, self.tol)?;
        self.worst_consistency = self.worst_consistency.max(d.selection.consistency.as_f64());
        self.fallback_count += usize::from(d.selection.used_fallback);
        Ok(d)
    }

    fn step(&mut self, state: &OdeState<T>, h: T, t_next: T) -> Result<OdeState<T>> {
        let half = T::lit(0.5);
        let stage = |t: T, x: Vec<T>, v: Vec<T>| OdeState {
            t,
            x,
            v,
            alpha: state.alpha,
        };
        let k1 = self.eval(state)?;
        let s2 = stage(state.t + half * h, add_scaled(&state.x, half * h, &k1.dx), add_scaled(&state.v, half * h, &k1.dv));
        let k2 = self.eval(&s2)?;
        let s3 = stage(state.t + half * h, add_scaled(&state.x, half * h, &k2.dx), add_scaled(&state.v, half * h, &k2.dv));
        let k3 = self.eval(&s3)?;
        let s4 = stage(t_next, add_scaled(&state.x, h, &k3.dx), add_scaled(&state.v, h, &k3.dv));
        let k4 = self.eval(&s4)?;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let combine = |base: &[T], a: &[T], b: &[T], c: &[T], d: &[T]| -> Vec<T> {
            (0..base.len())
                .map(|i| base[i] + sixth * (a[i] + two * b[i] + two * c[i] + d[i]))
                .collect()
        };
        Ok(stage(
            t_next,
            combine(&state.x, &k1.dx, &k2.dx, &k3.dx, &k4.dx),
            combine(&state.v, &k1.dv, &k2.dv, &k3.dv, &k4.dv),
        ))
    }
}

/// Integrates from `t = 1` to `t_end` with classical fixed-step RK4, handing
/// samples to `on_sample`. On a non-finite state the last finite state is emitted
/// as a sample before [`Error::Divergence`] is returned.
pub fn integrate<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    config: &IntegrateConfig<T>,
    x0: &[T],
    refs: &ReferenceSet<T>,
    on_sample: &mut dyn FnMut(&TrajectorySample<T>) -> Result<()>,
) -> Result<IntegrationSummary<T>> {
    config.validate()?;
    linalg::check_dim(problem.dim(), x0.len())?;
    linalg::check_dim(problem.dim(), refs.dim())?;
    for z in refs.points() {
        evaluate_values(problem, z)?;
    }
    let mut stepper = Rk4Stepper {
        problem,
        tol: config.tol,
        worst_consistency: f64::NEG_INFINITY,
        fallback_count: 0,
    };
    let mut emit = |state: &OdeState<T>, stepper: &mut Rk4Stepper<'_, T, P>| -> Result<()> {
        let d = stepper.eval(state)?;
        let mut sample = TrajectorySample {
            t: state.t,
            x: state.x.clone(),
            v: state.v.clone(),
            acceleration: d.dv,
            selection_weights: d.selection.weights,
            f_values: Vec::new(),
            w: Vec::new(),
            theta_z_per_ref: Vec::new(),
            e_per_ref: Vec::new(),
            merit: T::zero(),
        };
        fill_diagnostics(problem, &mut sample, config.alpha, refs)?;
        on_sample(&sample)
    };

    let mut state = OdeState::initial(x0.to_vec(), config.alpha)?;
    emit(&state, &mut stepper)?;
    let mut samples = 1;
    let mut steps = 0;
    // t is recomputed as segment_start + j·h to avoid accumulating rounding.
    let mut segment_start = state.t;
    let mut segment_h = config.step.dt_at(state.t);
    let mut segment_steps = 0usize;
    while state.t < config.t_end {
        let h_rule = config.step.dt_at(state.t);
        if h_rule != segment_h {
            segment_start = state.t;
            segment_h = h_rule;
            segment_steps = 0;
        }
        let mut t_next = segment_start + T::from_count(segment_steps + 1) * segment_h;
        if t_next >= config.t_end || config.t_end - t_next < segment_h * T::lit(1e-9) {
            t_next = config.t_end;
        }
        let h = t_next - state.t;
        let next = match stepper.step(&state, h, t_next) {
            Ok(next) => next,
            Err(e) => {
                emit(&state, &mut stepper)?;
                return Err(match e {
                    Error::NonFinite(_) => Error::Divergence { t: t_next.as_f64() },
                    other => other,
                });
            }
        };
        if !linalg::all_finite(&next.x) || !linalg::all_finite(&next.v) {
            emit(&state, &mut stepper)?;
            return Err(Error::Divergence { t: next.t.as_f64() });
        }
        state = next;
        steps += 1;
        segment_steps += 1;
        if steps % config.sample_every == 0 || state.t >= config.t_end {
            emit(&state, &mut stepper)?;
            samples += 1;
        }
    }
    Ok(IntegrationSummary {
        steps,
        samples,
        final_state: state,
        worst_consistency: stepper.worst_consistency,
        fallback_count: stepper.fallback_count,
    })
}

/// [`integrate`] collecting every sample.
pub fn integrate_collect<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    config: &IntegrateConfig<T>,
    x0: &[T],
    refs: &ReferenceSet<T>,
) -> Result<(Vec<TrajectorySample<T>>, IntegrationSummary<T>)> {
    let mut samples = Vec::new();
    let summary = integrate(problem, config, x0, refs, &mut |s| {
        samples.push(s.clone());
        Ok(())
    })?;
    Ok((samples, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FnProblem, Jos1, RefOrigin};

    fn hull(cols: &[&[f64]]) -> GradientHull<f64> {
        GradientHull::from_columns(cols.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn singleton_selection_is_the_gradient() {
        let h = hull(&[&[3.0, -1.0]]);
        let sel = selection(&h, &[0.5, 0.2], 3.0, 1e-10).unwrap();
        assert_eq!(sel.c, vec![3.0, -1.0]);
        assert!(sel.residual <= 1e-12);
    }

    #[test]
    fn zero_velocity_uses_min_norm_element() {
        let h = hull(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let sel = selection(&h, &[0.0, 0.0], 1.0, 1e-10).unwrap();
        assert!((sel.c[0] - 0.4).abs() < 1e-15 && (sel.c[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn selection_picks_linear_maximizer() {
        let h = hull(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        for damping in [0.01, 1.0, 3.0] {
            let sel = selection(&h, &[1.0, 0.0], damping, 1e-10).unwrap();
            assert_eq!(sel.c, vec![1.0, 0.0]);
            assert!(sel.residual <= 1e-12);
            assert!(sel.consistency <= 0.0);
        }
        // a grid over the segment confirms no point has a larger ⟨v, c⟩
        let best = (0..=1000)
            .map(|i| {
                let th = i as f64 / 1000.0;
                th - (1.0 - th)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, 1.0);
    }

    #[test]
    fn selection_on_a_tied_face() {
        // v ⟂ (g1 − g2): whole segment maximizes ⟨v, ·⟩; min-norm point of the segment
        let h = hull(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let sel = selection(&h, &[1.0, 0.0], 0.5, 1e-10).unwrap();
        assert!((sel.c[0] - 1.0).abs() < 1e-15 && sel.c[1].abs() < 1e-15);
    }

    #[test]
    fn quadratic_rhs_closed_form() {
        let p = FnProblem::new("half_square", 1, 1, 1.0, |x: &[f64]| vec![0.5 * x[0] * x[0]], |x: &[f64]| vec![vec![x[0]]])
            .unwrap();
        let state = OdeState {
            t: 2.0,
            x: vec![0.7],
            v: vec![-0.3],
            alpha: 3.0,
        };
        let d = rhs(&state, &p, 1e-10).unwrap();
        assert_eq!(d.dx, vec![-0.3]);
        assert!((d.dv[0] - (-(3.0 / 2.0) * -0.3 - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_at_critical_point() {
        let p = Jos1::<f64>::new(1).unwrap();
        let state = OdeState::initial(vec![1.0], 3.0).unwrap();
        let d = rhs(&state, &p, 1e-10).unwrap();
        assert_eq!(d.dv, vec![0.0]);
    }

    #[test]
    fn decade_rule() {
        let r = StepRule::<f64>::DecadeDoubling;
        assert_eq!(r.dt_at(1.0), 1e-3);
        assert_eq!(r.dt_at(9.99), 1e-3);
        assert_eq!(r.dt_at(10.0), 2e-3);
        assert_eq!(r.dt_at(5000.0), 8e-3);
        assert_eq!(r.dt_at(1e12), 0.1);
    }

    #[test]
    fn diagnostics_at_rest() {
        let p = Jos1::<f64>::new(2).unwrap();
        let refs = ReferenceSet::new(vec![vec![1.0, 3.0]], RefOrigin::UserSupplied).unwrap();
        let mut sample = TrajectorySample {
            t: 1.0,
            x: vec![1.0, 3.0],
            v: vec![0.0, 0.0],
            acceleration: vec![0.0, 0.0],
            selection_weights: SimplexWeights::uniform(2),
            f_values: vec![],
            w: vec![],
            theta_z_per_ref: vec![],
            e_per_ref: vec![],
            merit: 0.0,
        };
        for alpha in [1.0, 2.0, 3.0] {
            continuous_diagnostics(&p, &mut sample, alpha, &refs).unwrap();
            assert_eq!(sample.w, p.values(&[1.0, 3.0]));
            assert_eq!(sample.e_per_ref, vec![0.0]);
        }
    }

    #[test]
    fn alpha_three_drops_the_last_term() {
        let p = Jos1::<f64>::new(2).unwrap();
        let z = vec![0.5, 0.5];
        let refs = ReferenceSet::new(vec![z.clone()], RefOrigin::UserSupplied).unwrap();
        let (t, x, v) = (4.0, vec![1.0, 2.0], vec![0.1, -0.2]);
        let mut sample = TrajectorySample {
            t,
            x: x.clone(),
            v: v.clone(),
            acceleration: vec![0.0, 0.0],
            selection_weights: SimplexWeights::uniform(2),
            f_values: vec![],
            w: vec![],
            theta_z_per_ref: vec![],
            e_per_ref: vec![],
            merit: 0.0,
        };
        continuous_diagnostics(&p, &mut sample, 3.0, &refs).unwrap();
        let theta = crate::diagnostics::sigma(&p, &x, &z).unwrap();
        let q: f64 = (0..2).map(|i| (t * v[i] + 2.0 * (x[i] - z[i])).powi(2)).sum();
        let expected = t * t * theta + 0.5 * q;
        assert!((sample.e_per_ref[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        let p = Jos1::<f64>::new(1).unwrap();
        let refs = ReferenceSet::new(vec![vec![1.0]], RefOrigin::UserSupplied).unwrap();
        for cfg in [
            IntegrateConfig::new(0.0, 10.0),
            IntegrateConfig::new(3.0, 1.0),
            IntegrateConfig {
                step: StepRule::Fixed(0.0),
                ..IntegrateConfig::new(3.0, 10.0)
            },
        ] {
            assert!(integrate_collect(&p, &cfg, &[1.0], &refs).is_err());
        }
    }

    #[test]
    fn divergence_reports_last_finite_sample() {
        // ẍ = −(α/t)ẋ + 10x blows past f64 range quickly
        let p = FnProblem::new("unstable", 1, 1, 1.0, |x: &[f64]| vec![-5.0 * x[0] * x[0]], |x: &[f64]| vec![vec![-10.0 * x[0]]])
            .unwrap();
        let refs = ReferenceSet::new(vec![vec![0.0]], RefOrigin::UserSupplied).unwrap();
        let cfg = IntegrateConfig {
            step: StepRule::Fixed(0.5),
            sample_every: 1_000_000,
            ..IntegrateConfig::new(1.0, 1e6)
        };
        let mut last = None;
        let err = integrate(&p, &cfg, &[1.0], &refs, &mut |s| {
            last = Some(s.clone());
            Ok(())
        })
        .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        let last = last.unwrap();
        assert!(last.t > 1.0 && last.x[0].is_finite());
    }
}
