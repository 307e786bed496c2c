//! The accelerated multiobjective gradient method with generalized momentum and
//! the steepest-descent baseline.
//!
//! One accelerated iteration, in this order:
//!
//! ```text
//! t_{k+1} = √(t_k² − a·t_k + b) + ½
//! y_k     = x_k + (t_k − 1)/t_{k+1} · (x_k − x_{k−1})
//! θ^k     = argmin_{θ ∈ Δᵐ} ‖s·Σθ_i∇f_i(y_k) − (y_k − x_k)‖²
//! x_{k+1} = y_k − s·Σθ_i^k∇f_i(y_k)
//! ```
//!
//! and the run stops once `‖x_{k+1} − y_k‖ < eps`.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{evaluate, Problem};
use crate::scalar::Scalar;
use crate::schedule::{validate_momentum, StepSchedule};
use crate::simplex::{self, SimplexWeights};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub a: T,
    pub b: T,
    /// Step size in `(0, 1/L]`.
    pub s: T,
    /// Stopping tolerance on `‖x_{k+1} − y_k‖`; `0` disables the test.
    pub eps: T,
    pub k_max: usize,
    pub subproblem_tol: T,
    pub store_iterates: bool,
}

impl<T: Scalar> SolverConfig<T> {
    /// `s = 1/L`, `a = 0`, `b = 1/4`, `eps = 1e-10`, `k_max = 10⁵`.
    pub fn for_problem<P: Problem<T> + ?Sized>(problem: &P) -> Self {
        Self {
            a: T::zero(),
            b: T::lit(0.25),
            s: T::one() / problem.lipschitz(),
            eps: T::lit(1e-10),
            k_max: 100_000,
            subproblem_tol: T::default_tol(),
            store_iterates: false,
        }
    }

    pub fn with_momentum(mut self, a: T, b: T) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn validate(&self, lipschitz: T) -> Result<()> {
        validate_momentum(self.a, self.b)?;
        let s_max = T::one() / lipschitz;
        if !(self.s > T::zero()) || self.s > s_max * (T::one() + T::epsilon() * T::lit(4.0)) {
            return Err(Error::InvalidInput(format!("s must lie in (0, 1/L] = (0, {s_max}], got {}", self.s)));
        }
        if !(self.eps >= T::zero()) {
            return Err(Error::InvalidInput(format!("eps must be non-negative, got {}", self.eps)));
        }
        if !(self.subproblem_tol > T::zero()) {
            return Err(Error::InvalidInput("subproblem tolerance must be positive".into()));
        }
        if self.k_max == 0 {
            return Err(Error::InvalidInput("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// The iterate pair `(x_{k−1}, x_k)` with its schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub x_prev: Vec<T>,
    pub x_cur: Vec<T>,
    /// `y_{k−1}`, the extrapolated point of the step that produced `x_k`.
    pub y_cur: Option<Vec<T>>,
    pub theta_last: Option<SimplexWeights<T>>,
    pub schedule: StepSchedule<T>,
}

impl<T: Scalar> SolverState<T> {
    /// `x_0 = x_1 = x0`, `t_1 = 1`.
    pub fn new(x0: Vec<T>, a: T, b: T) -> Result<Self> {
        if !linalg::all_finite(&x0) {
            return Err(Error::NonFinite("starting point".into()));
        }
        Ok(Self {
            x_prev: x0.clone(),
            x_cur: x0,
            y_cur: None,
            theta_last: None,
            schedule: StepSchedule::new(a, b)?,
        })
    }

    pub fn k(&self) -> usize {
        self.schedule.k()
    }

    pub fn t(&self) -> T {
        self.schedule.t()
    }

    /// `‖x_k − x_{k−1}‖²`
    pub fn step_norm_sq(&self) -> T {
        linalg::dist_sq(&self.x_cur, &self.x_prev)
    }

    /// `y_k = x_k + (t_k − 1)/t_{k+1}·(x_k − x_{k−1})`, given `t_{k+1}`.
    pub fn momentum_point(&self, t_next: T) -> Vec<T> {
        let coef = (self.t() - T::one()) / t_next;
        self.x_cur
            .iter()
            .zip(&self.x_prev)
            .map(|(&xc, &xp)| xc + coef * (xc - xp))
            .collect()
    }

    /// `η_k = x_k + (t_k − 1)(x_k − x_{k−1})`
    pub fn eta(&self) -> Vec<T> {
        let coef = self.t() - T::one();
        self.x_cur
            .iter()
            .zip(&self.x_prev)
            .map(|(&xc, &xp)| xc + coef * (xc - xp))
            .collect()
    }
}

/// What one step computed, beyond the new state.
#[derive(Debug, Clone)]
pub struct StepInfo<T> {
    pub t_next: T,
    pub y: Vec<T>,
    pub x_next: Vec<T>,
    /// `‖x_{k+1} − y_k‖`
    pub step_norm: T,
    pub theta: SimplexWeights<T>,
    /// KKT residual of the subproblem.
    pub residual: T,
}

/// One accelerated iteration from `state` (at `k`) to `k + 1`.
pub fn step<T: Scalar, P: Problem<T> + ?Sized>(
    state: &SolverState<T>,
    config: &SolverConfig<T>,
    problem: &P,
) -> Result<(SolverState<T>, StepInfo<T>)> {
    let k = state.k();
    let inner = || -> Result<(SolverState<T>, StepInfo<T>)> {
        let t_next = state.schedule.next_t()?;
        let y = state.momentum_point(t_next);
        let (_, hull) = evaluate(problem, &y)?;
        let v = linalg::sub(&y, &state.x_cur);
        let sol = simplex::solve_subproblem(&hull, &v, config.s, config.subproblem_tol)?;
        let mut x_next = y.clone();
        linalg::axpy(-config.s, &sol.direction, &mut x_next);
        if !linalg::all_finite(&x_next) {
            return Err(Error::NonFinite("iterate".into()));
        }
        let step_norm = linalg::dist_sq(&x_next, &y).sqrt();
        let next = SolverState {
            x_prev: state.x_cur.clone(),
            x_cur: x_next.clone(),
            y_cur: Some(y.clone()),
            theta_last: Some(sol.weights.clone()),
            schedule: state.schedule.advance()?,
        };
        let info = StepInfo {
            t_next,
            y,
            x_next,
            step_norm,
            theta: sol.weights,
            residual: sol.kkt_residual,
        };
        Ok((next, info))
    };
    inner().map_err(|e| e.at_iteration(k))
}

/// One steepest-descent step `x_{k+1} = x_k − s·proj_{C(x_k)}(0)`; the schedule
/// stays at `t = 1`.
pub fn step_msd<T: Scalar, P: Problem<T> + ?Sized>(
    state: &SolverState<T>,
    config: &SolverConfig<T>,
    problem: &P,
) -> Result<(SolverState<T>, StepInfo<T>)> {
    let k = state.k();
    let inner = || -> Result<(SolverState<T>, StepInfo<T>)> {
        let (_, hull) = evaluate(problem, &state.x_cur)?;
        let zero = vec![T::zero(); state.x_cur.len()];
        let sol = simplex::solve_subproblem(&hull, &zero, T::one(), config.subproblem_tol)?;
        let mut x_next = state.x_cur.clone();
        linalg::axpy(-config.s, &sol.direction, &mut x_next);
        if !linalg::all_finite(&x_next) {
            return Err(Error::NonFinite("iterate".into()));
        }
        let step_norm = linalg::dist_sq(&x_next, &state.x_cur).sqrt();
        let next = SolverState {
            x_prev: state.x_cur.clone(),
            x_cur: x_next.clone(),
            y_cur: Some(state.x_cur.clone()),
            theta_last: Some(sol.weights.clone()),
            schedule: state.schedule.hold(),
        };
        let info = StepInfo {
            t_next: state.t(),
            y: state.x_cur.clone(),
            x_next,
            step_norm,
            theta: sol.weights,
            residual: sol.kkt_residual,
        };
        Ok((next, info))
    };
    inner().map_err(|e| e.at_iteration(k))
}

/// Receives the state at `k` together with the step taken from it, once per iteration.
pub trait Observer<T: Scalar> {
    fn observe(&mut self, state: &SolverState<T>, step: &StepInfo<T>) -> Result<()>;
}

/// Observer that discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct Discard;

impl<T: Scalar> Observer<T> for Discard {
    fn observe(&mut self, _: &SolverState<T>, _: &StepInfo<T>) -> Result<()> {
        Ok(())
    }
}

impl<T: Scalar, O: Observer<T> + ?Sized> Observer<T> for &mut O {
    fn observe(&mut self, state: &SolverState<T>, step: &StepInfo<T>) -> Result<()> {
        (**self).observe(state, step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    EpsReached,
    KMaxReached,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::EpsReached => "eps_reached",
            Termination::KMaxReached => "k_max_reached",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult<T> {
    /// `x_1, x_2, …, x_{K+1}` when iterate storage was requested.
    pub iterates: Option<Vec<Vec<T>>>,
    pub final_state: SolverState<T>,
    pub termination: Termination,
    /// Number of steps taken.
    pub iterations: usize,
    pub diagnostics_path: Option<PathBuf>,
}

type StepFn<T, P> = fn(&SolverState<T>, &SolverConfig<T>, &P) -> Result<(SolverState<T>, StepInfo<T>)>;

fn drive<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    config: &SolverConfig<T>,
    x0: &[T],
    observer: &mut dyn Observer<T>,
    step_fn: StepFn<T, P>,
) -> Result<RunResult<T>> {
    config.validate(problem.lipschitz())?;
    linalg::check_dim(problem.dim(), x0.len())?;
    let mut state = SolverState::new(x0.to_vec(), config.a, config.b)?;
    let mut iterates = config.store_iterates.then(|| vec![x0.to_vec()]);
    let mut termination = Termination::KMaxReached;
    let mut iterations = 0;
    while iterations < config.k_max {
        let (next, info) = step_fn(&state, config, problem)?;
        observer.observe(&state, &info).map_err(|e| e.at_iteration(state.k()))?;
        iterations += 1;
        if let Some(store) = iterates.as_mut() {
            store.push(next.x_cur.clone());
        }
        state = next;
        if info.step_norm < config.eps {
            termination = Termination::EpsReached;
            break;
        }
    }
    Ok(RunResult {
        iterates,
        final_state: state,
        termination,
        iterations,
        diagnostics_path: None,
    })
}

/// Runs the accelerated method from `x_0 = x_1 = x0`, reporting every iteration to `observer`.
pub fn run<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    config: &SolverConfig<T>,
    x0: &[T],
    observer: &mut dyn Observer<T>,
) -> Result<RunResult<T>> {
    drive(problem, config, x0, observer, step::<T, P>)
}

/// Runs the steepest-descent baseline; `a`, `b` in `config` only label the diagnostics.
pub fn run_msd<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    config: &SolverConfig<T>,
    x0: &[T],
    observer: &mut dyn Observer<T>,
) -> Result<RunResult<T>> {
    drive(problem, config, x0, observer, step_msd::<T, P>)
}
