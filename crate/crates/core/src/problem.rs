//! Multiobjective problem abstraction, built-in convex test problems, reference
//! sets and gradient verification.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::scalar::Scalar;
use crate::simplex::GradientHull;

/// A smooth convex map `F = (f_1, …, f_m): ℝⁿ → ℝᵐ` with `L`-Lipschitz gradients.
///
/// Implementations are immutable after construction and shared freely between runs.
pub trait Problem<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn num_objectives(&self) -> usize;

    /// `(f_1(x), …, f_m(x))`; `x` has length [`dim`](Problem::dim).
    fn values(&self, x: &[T]) -> Vec<T>;

    /// `(∇f_1(x), …, ∇f_m(x))`.
    fn gradients(&self, x: &[T]) -> Vec<Vec<T>>;

    /// Largest gradient Lipschitz constant over the objectives.
    fn lipschitz(&self) -> T;

    /// `count` points of the Pareto set, when it is known in closed form.
    fn pareto_sample(&self, _count: usize) -> Option<Vec<Vec<T>>> {
        None
    }

    /// Upper bound on `sup{‖x‖ : F(x) ≤ F(x0)}` componentwise, when computable.
    fn level_radius(&self, _x0: &[T]) -> Option<T> {
        None
    }

    /// `(f_1(x) − f_1(z), …, f_m(x) − f_m(z))`. Diagnostics multiply these gaps by
    /// factors growing like `k²`, so implementations should avoid the cancellation
    /// of subtracting values when `x` is close to `z`.
    fn value_gaps(&self, x: &[T], z: &[T]) -> Vec<T> {
        self.values(x).into_iter().zip(self.values(z)).map(|(a, b)| a - b).collect()
    }
}

/// Exact gaps of quadratic objectives: `f(x) − f(z) = ⟨(∇f(x) + ∇f(z))/2, x − z⟩`.
pub fn quadratic_gaps<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T], z: &[T]) -> Vec<T> {
    let d = linalg::sub(x, z);
    let half = T::lit(0.5);
    problem
        .gradients(x)
        .iter()
        .zip(problem.gradients(z))
        .map(|(gx, gz)| gx.iter().zip(&gz).zip(&d).map(|((&a, &b), &di)| half * (a + b) * di).sum())
        .collect()
}

/// Checked [`Problem::value_gaps`].
pub fn evaluate_gaps<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T], z: &[T]) -> Result<Vec<T>> {
    linalg::check_dim(problem.dim(), x.len())?;
    linalg::check_dim(problem.dim(), z.len())?;
    let gaps = problem.value_gaps(x, z);
    if !linalg::all_finite(&gaps) {
        return Err(Error::NonFinite(format!("objective gaps of {}", problem.name())));
    }
    Ok(gaps)
}

/// Values and gradient hull at `x`, with dimension and finiteness checks.
pub fn evaluate<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T]) -> Result<(Vec<T>, GradientHull<T>)> {
    linalg::check_dim(problem.dim(), x.len())?;
    let values = problem.values(x);
    if !linalg::all_finite(&values) {
        return Err(Error::NonFinite(format!("objective values of {}", problem.name())));
    }
    let hull = GradientHull::new(x.to_vec(), problem.gradients(x))?;
    if hull.columns().iter().any(|c| !linalg::all_finite(c)) {
        return Err(Error::NonFinite(format!("gradients of {}", problem.name())));
    }
    Ok((values, hull))
}

/// Objective values only, with the same checks as [`evaluate`].
pub fn evaluate_values<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T]) -> Result<Vec<T>> {
    linalg::check_dim(problem.dim(), x.len())?;
    let values = problem.values(x);
    if !linalg::all_finite(&values) {
        return Err(Error::NonFinite(format!("objective values of {}", problem.name())));
    }
    Ok(values)
}

/// Largest relative discrepancy between the analytic gradients and central
/// differences with step `ε^{1/3}·(1 + ‖x‖)`. The relative error of a component
/// is `|g − g_fd| / max(1, |g|)`.
pub fn check_gradients<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T]) -> Result<T> {
    let (_, hull) = evaluate(problem, x)?;
    let h = T::epsilon().cbrt() * (T::one() + norm(x));
    let mut probe = x.to_vec();
    let mut worst = T::zero();
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let plus = evaluate_values(problem, &probe)?;
        probe[j] = x[j] - h;
        let minus = evaluate_values(problem, &probe)?;
        probe[j] = x[j];
        for (i, col) in hull.columns().iter().enumerate() {
            let fd = (plus[i] - minus[i]) / (T::lit(2.0) * h);
            let err = (col[j] - fd).abs() / T::one().max(col[j].abs());
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// `x_j = 1 + 3·(−1)^j`: a start that is not Pareto critical for the built-in problems.
pub fn default_start<T: Scalar>(n: usize) -> Vec<T> {
    (0..n)
        .map(|j| if j % 2 == 0 { T::lit(4.0) } else { T::lit(-2.0) })
        .collect()
}

/// `f_1(x) = ‖x‖²/n`, `f_2(x) = ‖x − 2·𝟙‖²/n`; Pareto set `{2τ·𝟙 : τ ∈ [0,1]}`.
#[derive(Debug, Clone)]
pub struct Jos1<T> {
    n: usize,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> Jos1<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("JOS1 needs n ≥ 1".into()));
        }
        Ok(Self {
            n,
            _scalar: std::marker::PhantomData,
        })
    }

    fn inv_n(&self) -> T {
        T::one() / T::from_count(self.n)
    }
}

impl<T: Scalar> Problem<T> for Jos1<T> {
    fn name(&self) -> String {
        format!("jos1(n={})", self.n)
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn values(&self, x: &[T]) -> Vec<T> {
        let two = T::lit(2.0);
        let f1 = linalg::norm_sq(x) * self.inv_n();
        let f2: T = x.iter().map(|&v| (v - two) * (v - two)).sum::<T>() * self.inv_n();
        vec![f1, f2]
    }

    fn gradients(&self, x: &[T]) -> Vec<Vec<T>> {
        let c = T::lit(2.0) * self.inv_n();
        let two = T::lit(2.0);
        vec![
            x.iter().map(|&v| c * v).collect(),
            x.iter().map(|&v| c * (v - two)).collect(),
        ]
    }

    fn lipschitz(&self) -> T {
        T::lit(2.0) * self.inv_n()
    }

    fn value_gaps(&self, x: &[T], z: &[T]) -> Vec<T> {
        quadratic_gaps(self, x, z)
    }

    fn pareto_sample(&self, count: usize) -> Option<Vec<Vec<T>>> {
        let points = (0..count)
            .map(|j| {
                let tau = if count == 1 {
                    T::zero()
                } else {
                    T::from_count(j) / T::from_count(count - 1)
                };
                vec![T::lit(2.0) * tau; self.n]
            })
            .collect();
        Some(points)
    }

    // The level set lies in the ball around 0 of radius ‖x0‖ and in the ball
    // around 2·𝟙 of radius ‖x0 − 2·𝟙‖.
    fn level_radius(&self, x0: &[T]) -> Option<T> {
        let two = T::lit(2.0);
        let shifted: T = x0.iter().map(|&v| (v - two) * (v - two)).sum::<T>().sqrt();
        let center = two * T::from_count(self.n).sqrt();
        Some(norm(x0).min(center + shifted))
    }
}

/// Smallest and largest eigenvalue drawn for the ensemble's Hessians.
pub const ENSEMBLE_EIGEN_RANGE: (f64, f64) = (0.1, 1.0);

/// Seeded strictly convex quadratics `f_i(x) = ½xᵀA_i x + b_iᵀx`.
///
/// Each `A_i = Q_i·diag(λ_i)·Q_iᵀ` with `Q_i` orthogonal (Gram–Schmidt of a
/// Gaussian matrix) and eigenvalues log-uniform in [`ENSEMBLE_EIGEN_RANGE`].
#[derive(Clone)]
pub struct QuadraticEnsemble<T> {
    n: usize,
    seed: u64,
    hessians: Vec<Vec<T>>,
    linear: Vec<Vec<T>>,
    bases: Vec<Vec<Vec<T>>>,
    eigenvalues: Vec<Vec<T>>,
    lipschitz: T,
}

impl<T: Scalar> fmt::Debug for QuadraticEnsemble<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticEnsemble")
            .field("n", &self.n)
            .field("m", &self.hessians.len())
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

fn orthonormal_basis(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // two passes of modified Gram–Schmidt keep the basis orthogonal to rounding
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                linalg::axpy(-c, q, &mut v);
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            basis.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    basis
}

impl<T: Scalar> QuadraticEnsemble<T> {
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput(format!("quadratic ensemble needs n, m ≥ 1 (got n={n}, m={m})")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = ENSEMBLE_EIGEN_RANGE;
        let mut hessians = Vec::with_capacity(m);
        let mut linear = Vec::with_capacity(m);
        let mut bases = Vec::with_capacity(m);
        let mut eigenvalues = Vec::with_capacity(m);
        let mut lipschitz = 0.0_f64;
        for _ in 0..m {
            let basis = orthonormal_basis(n, &mut rng);
            let lambda: Vec<f64> = (0..n)
                .map(|_| (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp())
                .collect();
            let mut a = vec![0.0; n * n];
            for (q, &l) in basis.iter().zip(&lambda) {
                for r in 0..n {
                    for c in 0..n {
                        a[r * n + c] += l * q[r] * q[c];
                    }
                }
            }
            // exact symmetry
            for r in 0..n {
                for c in (r + 1)..n {
                    let avg = 0.5 * (a[r * n + c] + a[c * n + r]);
                    a[r * n + c] = avg;
                    a[c * n + r] = avg;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            lipschitz = lambda.iter().copied().fold(lipschitz, f64::max);
            hessians.push(a.into_iter().map(T::lit).collect());
            linear.push(b.into_iter().map(T::lit).collect());
            bases.push(basis.into_iter().map(|q| q.into_iter().map(T::lit).collect()).collect());
            eigenvalues.push(lambda.into_iter().map(T::lit).collect());
        }
        Ok(Self {
            n,
            seed,
            hessians,
            linear,
            bases,
            eigenvalues,
            lipschitz: T::lit(lipschitz),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major Hessian of objective `i`.
    pub fn hessian(&self, i: usize) -> &[T] {
        &self.hessians[i]
    }

    pub fn linear_term(&self, i: usize) -> &[T] {
        &self.linear[i]
    }

    /// Eigenvalues of the Hessian of objective `i`, as drawn.
    pub fn eigenvalues(&self, i: usize) -> &[T] {
        &self.eigenvalues[i]
    }

    /// `−A_i⁻¹ b_i`, through the eigendecomposition.
    pub fn minimizer(&self, i: usize) -> Vec<T> {
        let mut x = vec![T::zero(); self.n];
        for (q, &l) in self.bases[i].iter().zip(&self.eigenvalues[i]) {
            let c = -dot(q, &self.linear[i]) / l;
            linalg::axpy(c, q, &mut x);
        }
        x
    }

    fn apply(&self, i: usize, x: &[T]) -> Vec<T> {
        let a = &self.hessians[i];
        (0..self.n)
            .map(|r| dot(&a[r * self.n..(r + 1) * self.n], x))
            .collect()
    }

    fn value(&self, i: usize, x: &[T]) -> T {
        let ax = self.apply(i, x);
        T::lit(0.5) * dot(x, &ax) + dot(&self.linear[i], x)
    }
}

impl<T: Scalar> Problem<T> for QuadraticEnsemble<T> {
    fn name(&self) -> String {
        format!("quadratic(n={}, m={}, seed={})", self.n, self.hessians.len(), self.seed)
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_objectives(&self) -> usize {
        self.hessians.len()
    }

    fn values(&self, x: &[T]) -> Vec<T> {
        (0..self.hessians.len()).map(|i| self.value(i, x)).collect()
    }

    fn gradients(&self, x: &[T]) -> Vec<Vec<T>> {
        (0..self.hessians.len())
            .map(|i| {
                let mut g = self.apply(i, x);
                linalg::axpy(T::one(), &self.linear[i], &mut g);
                g
            })
            .collect()
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }

    fn value_gaps(&self, x: &[T], z: &[T]) -> Vec<T> {
        quadratic_gaps(self, x, z)
    }

    // f_i(x) − f_i* ≥ ½λ_min‖x − x_i*‖², so the sublevel set of each objective
    // sits in a ball around its minimizer; the joint level set is inside all of them.
    fn level_radius(&self, x0: &[T]) -> Option<T> {
        let mut best = T::infinity();
        for i in 0..self.hessians.len() {
            let xs = self.minimizer(i);
            let gap = (self.value(i, x0) - self.value(i, &xs)).max(T::zero());
            let lambda_min = self.eigenvalues[i].iter().copied().fold(T::infinity(), T::min);
            best = best.min(norm(&xs) + (T::lit(2.0) * gap / lambda_min).sqrt());
        }
        Some(best)
    }
}

type ValueFn<T> = Box<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
type GradientFn<T> = Box<dyn Fn(&[T]) -> Vec<Vec<T>> + Send + Sync>;

/// A problem assembled from closures; used for fixtures and one-off objectives.
pub struct FnProblem<T> {
    name: String,
    n: usize,
    m: usize,
    lipschitz: T,
    values: ValueFn<T>,
    gradients: GradientFn<T>,
}

impl<T: Scalar> FnProblem<T> {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        lipschitz: T,
        values: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        gradients: impl Fn(&[T]) -> Vec<Vec<T>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("problem needs n, m ≥ 1".into()));
        }
        if !(lipschitz > T::zero()) {
            return Err(Error::InvalidInput("Lipschitz constant must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            n,
            m,
            lipschitz,
            values: Box::new(values),
            gradients: Box::new(gradients),
        })
    }
}

impl<T: Scalar> fmt::Debug for FnProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> Problem<T> for FnProblem<T> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_objectives(&self) -> usize {
        self.m
    }

    fn values(&self, x: &[T]) -> Vec<T> {
        (self.values)(x)
    }

    fn gradients(&self, x: &[T]) -> Vec<Vec<T>> {
        (self.gradients)(x)
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}

/// Where a reference point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefOrigin {
    ParetoAnalytic,
    TrajectoryTail,
    UserSupplied,
}

impl RefOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            RefOrigin::ParetoAnalytic => "pareto_analytic",
            RefOrigin::TrajectoryTail => "trajectory_tail",
            RefOrigin::UserSupplied => "user_supplied",
        }
    }
}

/// Comparison points `z` for the merit surrogate and the Lyapunov functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet<T> {
    points: Vec<Vec<T>>,
    origins: Vec<RefOrigin>,
}

impl<T: Scalar> ReferenceSet<T> {
    pub fn new(points: Vec<Vec<T>>, origin: RefOrigin) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidInput("reference set cannot be empty".into()));
        };
        let n = first.len();
        for p in &points {
            linalg::check_dim(n, p.len())?;
        }
        let origins = vec![origin; points.len()];
        Ok(Self { points, origins })
    }

    pub fn push(&mut self, point: Vec<T>, origin: RefOrigin) -> Result<()> {
        linalg::check_dim(self.dim(), point.len())?;
        self.points.push(point);
        self.origins.push(origin);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn origins(&self) -> &[RefOrigin] {
        &self.origins
    }

    /// Index of the first point with the given origin.
    pub fn position(&self, origin: RefOrigin) -> Option<usize> {
        self.origins.iter().position(|&o| o == origin)
    }
}

/// `count` analytic Pareto points when the problem has a sampler; otherwise the
/// supplied run tail as a single reference.
pub fn pareto_reference<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    count: usize,
    tail: Option<&[T]>,
) -> Result<ReferenceSet<T>> {
    if let Some(points) = problem.pareto_sample(count).filter(|p| !p.is_empty()) {
        return ReferenceSet::new(points, RefOrigin::ParetoAnalytic);
    }
    match tail {
        Some(x) => {
            linalg::check_dim(problem.dim(), x.len())?;
            ReferenceSet::new(vec![x.to_vec()], RefOrigin::TrajectoryTail)
        }
        None => Err(Error::Unsupported(format!(
            "{} has no Pareto sampler and no run tail was supplied",
            problem.name()
        ))),
    }
}
