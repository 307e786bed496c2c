//! Simplex-constrained subproblems over the convex hull of objective gradients.
//!
//! Every query here reduces to
//!
//! ```text
//! minimize  ‖s·G·θ − v‖²   over θ in the unit simplex Δᵐ
//! ```
//!
//! where the columns of `G` are the gradients `∇f_i` at an anchor point. With
//! `v = 0, s = 1` the minimizer gives the min-norm element of the hull (the
//! multiobjective steepest-descent direction); with `s = 1` and arbitrary `v` it
//! gives the Euclidean projection of `v` onto the hull.
//!
//! Hulls with up to [`ENUMERATION_LIMIT`] columns are solved exactly by active-set
//! enumeration: every support is tried in increasing bitmask order and the first
//! one satisfying the KKT conditions wins. Larger hulls use Wolfe's min-norm-point
//! method on the shifted vertices `s·g_i − v`, with projected gradient on θ as a
//! last resort when the affine subproblems turn singular.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm_sq};
use crate::scalar::Scalar;

/// Largest number of objectives handled by exhaustive support enumeration.
pub const ENUMERATION_LIMIT: usize = 8;

/// Gradients `∇f_1(x), …, ∇f_m(x)` at an anchor point `x`; spans `C(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientHull<T> {
    columns: Vec<Vec<T>>,
    anchor: Vec<T>,
}

impl<T: Scalar> GradientHull<T> {
    pub fn new(anchor: Vec<T>, columns: Vec<Vec<T>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidInput("gradient hull needs at least one column".into()));
        }
        let n = anchor.len();
        for col in &columns {
            linalg::check_dim(n, col.len())?;
        }
        Ok(Self { columns, anchor })
    }

    /// Builds a hull with a zero anchor; convenient when only the geometry matters.
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let n = columns.first().map(Vec::len).unwrap_or(0);
        Self::new(vec![T::zero(); n], columns)
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[T] {
        &self.columns[i]
    }

    pub fn anchor(&self) -> &[T] {
        &self.anchor
    }

    /// `G·θ`
    pub fn combine(&self, theta: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for (col, &w) in self.columns.iter().zip(theta) {
            if w != T::zero() {
                linalg::axpy(w, col, &mut out);
            }
        }
        out
    }

    /// Sub-hull made of the selected columns, same anchor.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        Self {
            columns: indices.iter().map(|&i| self.columns[i].clone()).collect(),
            anchor: self.anchor.clone(),
        }
    }
}

/// A point of the unit simplex: `θ ≥ 0`, `Σθ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights<T>(Vec<T>);

impl<T: Scalar> SimplexWeights<T> {
    /// Validates the simplex invariants (sum within `1e-12`, or a few ulps for `f32`).
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidInput("simplex weights cannot be empty".into()));
        }
        if theta.iter().any(|&w| !w.is_finite() || w < T::zero()) {
            return Err(Error::InvalidInput("simplex weights must be finite and non-negative".into()));
        }
        let total: T = theta.iter().copied().sum();
        let slack = T::lit(1e-12).max(T::epsilon() * T::from_count(4 * theta.len()));
        if (total - T::one()).abs() > slack {
            return Err(Error::InvalidInput(format!("simplex weights sum to {total}")));
        }
        Ok(Self(theta))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![T::one() / T::from_count(m); m])
    }

    pub fn vertex(m: usize, i: usize) -> Self {
        let mut theta = vec![T::zero(); m];
        theta[i] = T::one();
        Self(theta)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Clamps negatives to zero and rescales onto the simplex.
    fn normalized(mut theta: Vec<T>) -> Self {
        for w in theta.iter_mut() {
            if *w < T::zero() {
                *w = T::zero();
            }
        }
        let total: T = theta.iter().copied().sum();
        if total > T::zero() {
            for w in theta.iter_mut() {
                *w /= total;
            }
            Self(theta)
        } else {
            Self::uniform(theta.len())
        }
    }
}

/// Euclidean projection onto the unit simplex by sorting and thresholding.
pub fn project_simplex<T: Scalar>(w: &[T]) -> Result<SimplexWeights<T>> {
    if w.is_empty() {
        return Err(Error::InvalidInput("cannot project an empty vector".into()));
    }
    if !linalg::all_finite(w) {
        return Err(Error::NonFinite("simplex projection input".into()));
    }
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = T::zero();
    let mut threshold = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - T::one()) / T::from_count(i + 1);
        if u - candidate > T::zero() {
            threshold = candidate;
        }
    }
    let theta = w.iter().map(|&x| (x - threshold).max(T::zero())).collect();
    Ok(SimplexWeights::normalized(theta))
}

/// Result of a simplex-constrained least-squares solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution<T> {
    pub weights: SimplexWeights<T>,
    /// `G·θ`
    pub direction: Vec<T>,
    /// `‖s·G·θ − v‖²`
    pub objective: T,
    /// Largest gap between a supported gradient component and the smallest one.
    pub kkt_residual: T,
    /// Set when every gradient is exactly zero; the anchor is then critical.
    pub degenerate: bool,
}

/// `‖s·G·θ − v‖²`
pub fn subproblem_objective<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, theta: &[T]) -> T {
    let direction = hull.combine(theta);
    direction
        .iter()
        .zip(v)
        .map(|(&d, &vi)| {
            let r = s * d - vi;
            r * r
        })
        .sum()
}

/// Gradient of `θ ↦ ‖s·G·θ − v‖²`, i.e. `2s·Gᵀ(s·G·θ − v)`.
fn objective_gradient<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, direction: &[T]) -> Vec<T> {
    let residual: Vec<T> = direction.iter().zip(v).map(|(&d, &vi)| s * d - vi).collect();
    let two_s = T::lit(2.0) * s;
    hull.columns().iter().map(|c| two_s * dot(c, &residual)).collect()
}

fn kkt_residual_of<T: Scalar>(gradient: &[T], theta: &[T]) -> T {
    let min = gradient.iter().copied().fold(T::infinity(), T::min);
    gradient
        .iter()
        .zip(theta)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&g, _)| g - min)
        .fold(T::zero(), T::max)
}

/// KKT residual of an arbitrary simplex point for `‖s·G·θ − v‖²`.
pub fn kkt_residual<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, theta: &[T]) -> T {
    let direction = hull.combine(theta);
    kkt_residual_of(&objective_gradient(hull, v, s, &direction), theta)
}

fn validate_query<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, tol: T) -> Result<()> {
    linalg::check_dim(hull.dim(), v.len())?;
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("step scale must be positive, got {s}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !linalg::all_finite(v) || hull.columns().iter().any(|c| !linalg::all_finite(c)) {
        return Err(Error::NonFinite("subproblem data".into()));
    }
    Ok(())
}

/// Minimizes `‖s·G·θ − v‖²` over the simplex to KKT residual `tol`.
pub fn solve_subproblem<T: Scalar>(
    hull: &GradientHull<T>,
    v: &[T],
    s: T,
    tol: T,
) -> Result<SubproblemSolution<T>> {
    validate_query(hull, v, s, tol)?;
    let m = hull.num_columns();

    if hull.columns().iter().all(|c| c.iter().all(|&x| x == T::zero())) {
        let weights = SimplexWeights::uniform(m);
        return Ok(SubproblemSolution {
            weights,
            direction: vec![T::zero(); hull.dim()],
            objective: norm_sq(v),
            kkt_residual: T::zero(),
            degenerate: true,
        });
    }

    let theta = if m == 1 {
        vec![T::one()]
    } else if m <= ENUMERATION_LIMIT {
        enumerate_supports(hull, v, s, tol)
    } else {
        match min_norm_point(hull, v, s, tol) {
            Ok(theta) => theta,
            Err(warm) => projected_gradient(hull, v, s, tol, warm)?,
        }
    };
    Ok(finish(hull, v, s, SimplexWeights::normalized(theta)))
}

fn finish<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, weights: SimplexWeights<T>) -> SubproblemSolution<T> {
    let direction = hull.combine(weights.as_slice());
    let gradient = objective_gradient(hull, v, s, &direction);
    let kkt_residual = kkt_residual_of(&gradient, weights.as_slice());
    let objective = direction
        .iter()
        .zip(v)
        .map(|(&d, &vi)| {
            let r = s * d - vi;
            r * r
        })
        .sum();
    SubproblemSolution {
        weights,
        direction,
        objective,
        kkt_residual,
        degenerate: false,
    }
}

/// Exact active-set enumeration. Each support `S` is solved through the bordered
/// system `[s²G_SᵀG_S 1; 1ᵀ 0][θ_S; μ] = [s·G_Sᵀv; 1]`.
fn enumerate_supports<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, tol: T) -> Vec<T> {
    let m = hull.num_columns();
    let cols = hull.columns();
    let mut gram = vec![T::zero(); m * m];
    for i in 0..m {
        for j in i..m {
            let g = s * s * dot(&cols[i], &cols[j]);
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let rhs: Vec<T> = cols.iter().map(|c| s * dot(c, v)).collect();

    // Gradient components are of size 2s‖g‖(s‖g‖ + ‖v‖); accept KKT points to tol
    // relative to that scale so rounding never rejects every support.
    let max_col = cols.iter().map(|c| linalg::norm(c)).fold(T::zero(), T::max);
    let scale = T::lit(2.0) * s * max_col * (s * max_col + linalg::norm(v));
    let accept = tol * scale.max(T::one());
    let negative_slack = T::lit(1e-13).max(T::epsilon() * T::lit(100.0));

    let mut fallback: Option<(T, Vec<T>)> = None;
    let mut support = Vec::with_capacity(m);
    for mask in 1u32..(1u32 << m) {
        support.clear();
        support.extend((0..m).filter(|&i| mask & (1 << i) != 0));
        let k = support.len();
        let mut theta = vec![T::zero(); m];
        if k == 1 {
            theta[support[0]] = T::one();
        } else {
            let dim = k + 1;
            let mut mat = vec![T::zero(); dim * dim];
            let mut b = vec![T::zero(); dim];
            for (a, &ia) in support.iter().enumerate() {
                for (c, &ic) in support.iter().enumerate() {
                    mat[a * dim + c] = gram[ia * m + ic];
                }
                mat[a * dim + k] = T::one();
                mat[k * dim + a] = T::one();
                b[a] = rhs[ia];
            }
            b[k] = T::one();
            let Some(sol) = linalg::solve_dense(mat, b, dim) else {
                continue;
            };
            if sol[..k].iter().any(|&w| w < -negative_slack) {
                continue;
            }
            for (a, &ia) in support.iter().enumerate() {
                theta[ia] = sol[a];
            }
            theta = SimplexWeights::normalized(theta).into_inner();
        }
        let direction = hull.combine(&theta);
        let gradient = objective_gradient(hull, v, s, &direction);
        if kkt_residual_of(&gradient, &theta) <= accept {
            return theta;
        }
        let objective = subproblem_objective(hull, v, s, &theta);
        if fallback.as_ref().is_none_or(|(best, _)| objective < *best) {
            fallback = Some((objective, theta));
        }
    }
    fallback.map(|(_, theta)| theta).unwrap_or_else(|| SimplexWeights::uniform(m).into_inner())
}

/// Wolfe's min-norm-point method: the subproblem is the min-norm point of
/// `conv{s·g_i − v}`. Returns the last feasible θ on failure so the caller can warm-start.
fn min_norm_point<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, tol: T) -> std::result::Result<Vec<T>, Vec<T>> {
    let m = hull.num_columns();
    let points: Vec<Vec<T>> = hull
        .columns()
        .iter()
        .map(|c| c.iter().zip(v).map(|(&g, &vi)| s * g - vi).collect())
        .collect();
    let start = (0..m)
        .min_by(|&i, &j| norm_sq(&points[i]).partial_cmp(&norm_sq(&points[j])).expect("finite"))
        .expect("non-empty hull");
    let mut theta = vec![T::zero(); m];
    theta[start] = T::one();
    let mut support = vec![start];
    let mut stalls = 0;

    for _ in 0..50 * m {
        let direction = hull.combine(&theta);
        let gradient = objective_gradient(hull, v, s, &direction);
        if kkt_residual_of(&gradient, &theta) <= tol {
            return Ok(theta);
        }
        let entering = (0..m)
            .min_by(|&i, &j| gradient[i].partial_cmp(&gradient[j]).expect("finite"))
            .expect("non-empty hull");
        if support.contains(&entering) {
            // rounding left the affine solve slightly off; re-solve on the same support
            stalls += 1;
            if stalls > 3 {
                return Err(theta);
            }
        } else {
            support.push(entering);
        }

        loop {
            let Some(affine) = affine_min_norm(&points, &support) else {
                return Err(theta);
            };
            if affine.iter().all(|&w| w > T::zero()) {
                for w in theta.iter_mut() {
                    *w = T::zero();
                }
                for (&i, &w) in support.iter().zip(&affine) {
                    theta[i] = w;
                }
                break;
            }
            // move from θ toward the affine minimizer until a weight hits zero
            let mut ratio = T::one();
            for (&i, &w) in support.iter().zip(&affine) {
                if w <= T::zero() {
                    let current = theta[i];
                    let r = if current - w > T::zero() { current / (current - w) } else { T::zero() };
                    ratio = ratio.min(r);
                }
            }
            for (&i, &w) in support.iter().zip(&affine) {
                theta[i] = theta[i] + ratio * (w - theta[i]);
            }
            let floor = T::epsilon() * T::lit(16.0);
            support.retain(|&i| theta[i] > floor);
            for w in theta.iter_mut() {
                if *w <= floor {
                    *w = T::zero();
                }
            }
            theta = SimplexWeights::normalized(theta).into_inner();
            if support.is_empty() {
                return Err(theta);
            }
        }
    }
    Err(theta)
}

/// Weights of the min-norm point of the affine hull of the selected points.
fn affine_min_norm<T: Scalar>(points: &[Vec<T>], support: &[usize]) -> Option<Vec<T>> {
    let k = support.len();
    if k == 1 {
        return Some(vec![T::one()]);
    }
    let dim = k + 1;
    let mut mat = vec![T::zero(); dim * dim];
    let mut b = vec![T::zero(); dim];
    for (a, &ia) in support.iter().enumerate() {
        for (c, &ic) in support.iter().enumerate() {
            mat[a * dim + c] = dot(&points[ia], &points[ic]);
        }
        mat[a * dim + k] = T::one();
        mat[k * dim + a] = T::one();
    }
    b[k] = T::one();
    let sol = linalg::solve_dense(mat, b, dim)?;
    sol[..k].iter().all(|w| w.is_finite()).then(|| sol[..k].to_vec())
}

/// Projected gradient on θ with step `1 / (2 s² ‖G‖_F²)` for hulls too large to enumerate.
fn projected_gradient<T: Scalar>(hull: &GradientHull<T>, v: &[T], s: T, tol: T, start: Vec<T>) -> Result<Vec<T>> {
    let m = hull.num_columns();
    let frobenius_sq: T = hull.columns().iter().map(|c| norm_sq(c)).sum();
    let step = T::one() / (T::lit(2.0) * s * s * frobenius_sq);
    let cap = 10 * m * 1000;
    let mut theta = start;
    let mut best = T::infinity();
    for iteration in 0..cap {
        let direction = hull.combine(&theta);
        let gradient = objective_gradient(hull, v, s, &direction);
        let residual = kkt_residual_of(&gradient, &theta);
        best = best.min(residual);
        if residual <= tol {
            return Ok(theta);
        }
        let trial: Vec<T> = theta.iter().zip(&gradient).map(|(&w, &g)| w - step * g).collect();
        let next = project_simplex(&trial)?.into_inner();
        if next == theta && iteration > 0 {
            break;
        }
        theta = next;
    }
    Err(Error::NotConverged {
        iterations: cap,
        residual: best.as_f64(),
    })
}

/// `proj_{C(x)}(0)`: the min-norm element of the hull.
pub fn min_norm_element<T: Scalar>(hull: &GradientHull<T>, tol: T) -> Result<Vec<T>> {
    let zero = vec![T::zero(); hull.dim()];
    Ok(solve_subproblem(hull, &zero, T::one(), tol)?.direction)
}

/// Euclidean projection of `w` onto the hull.
pub fn project_hull<T: Scalar>(hull: &GradientHull<T>, w: &[T], tol: T) -> Result<Vec<T>> {
    Ok(solve_subproblem(hull, w, T::one(), tol)?.direction)
}

/// Grid search over `{θ ∈ Δᵐ : grid·θ ∈ ℕᵐ}`. Test oracle for [`solve_subproblem`].
pub fn brute_force_subproblem<T: Scalar>(
    hull: &GradientHull<T>,
    v: &[T],
    s: T,
    grid: usize,
) -> Result<SimplexWeights<T>> {
    linalg::check_dim(hull.dim(), v.len())?;
    let m = hull.num_columns();
    if m > 4 {
        return Err(Error::Unsupported(format!("grid enumeration over {m} objectives")));
    }
    if grid < 10 {
        return Err(Error::InvalidInput(format!("grid resolution {grid} is below 10")));
    }
    if m == 1 {
        return Ok(SimplexWeights::vertex(1, 0));
    }
    // ‖sGθ − v‖² = θᵀHθ − 2θᵀc + ‖v‖² with H = s²GᵀG, c = s·Gᵀv.
    let cols = hull.columns();
    let mut h = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            h[i * m + j] = s * s * dot(&cols[i], &cols[j]);
        }
    }
    let c: Vec<T> = cols.iter().map(|col| s * dot(col, v)).collect();
    let inv = T::one() / T::from_count(grid);

    let mut counts = vec![0usize; m];
    let mut theta = vec![T::zero(); m];
    let mut best = (T::infinity(), vec![T::zero(); m]);
    enumerate_grid(0, grid, &mut counts, &mut |counts: &[usize]| {
        for (t, &cnt) in theta.iter_mut().zip(counts) {
            *t = T::from_count(cnt) * inv;
        }
        let mut value = T::zero();
        for i in 0..m {
            let mut row = T::zero();
            for j in 0..m {
                row += h[i * m + j] * theta[j];
            }
            value += theta[i] * (row - T::lit(2.0) * c[i]);
        }
        if value < best.0 {
            best = (value, theta.clone());
        }
    });
    Ok(SimplexWeights::normalized(best.1))
}

fn enumerate_grid(position: usize, remaining: usize, counts: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    if position + 1 == counts.len() {
        counts[position] = remaining;
        visit(counts);
        return;
    }
    for take in 0..=remaining {
        counts[position] = take;
        enumerate_grid(position + 1, remaining - take, counts, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hull(cols: &[&[f64]]) -> GradientHull<f64> {
        GradientHull::from_columns(cols.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn projection_examples() {
        let p = project_simplex(&[0.5, 0.5]).unwrap();
        assert!(close(p.as_slice(), &[0.5, 0.5], 1e-15));
        let p = project_simplex(&[2.0, -1.0]).unwrap();
        assert!(close(p.as_slice(), &[1.0, 0.0], 1e-15));
        let p = project_simplex(&[0.8, 0.4]).unwrap();
        assert!(close(p.as_slice(), &[0.7, 0.3], 1e-15));
    }

    #[test]
    fn projection_rejects_non_finite() {
        assert!(matches!(project_simplex(&[1.0, f64::NAN]), Err(Error::NonFinite(_))));
        assert!(project_simplex::<f64>(&[]).is_err());
    }

    #[test]
    fn projection_matches_grid_oracle() {
        // brute force over a 1e-4 grid on the 2-simplex
        let w = [0.8, 0.4];
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0;
            let d = (t - w[0]).powi(2) + (1.0 - t - w[1]).powi(2);
            if d < best.0 {
                best = (d, t);
            }
        }
        let p = project_simplex(&w).unwrap();
        assert!((p.as_slice()[0] - best.1).abs() < 1e-4);
    }

    #[test]
    fn singleton_hull() {
        let h = hull(&[&[3.0, -4.0]]);
        let sol = solve_subproblem(&h, &[1.0, 1.0], 0.5, 1e-10).unwrap();
        assert_eq!(sol.weights.as_slice(), &[1.0]);
        assert_eq!(sol.direction, vec![3.0, -4.0]);
        assert_eq!(min_norm_element(&h, 1e-10).unwrap(), vec![3.0, -4.0]);
        assert_eq!(project_hull(&h, &[10.0, 2.0], 1e-10).unwrap(), vec![3.0, -4.0]);
    }

    #[test]
    fn symmetric_pair() {
        let h = hull(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let sol = solve_subproblem(&h, &[0.0, 0.0], 1.0, 1e-10).unwrap();
        assert!(close(sol.weights.as_slice(), &[0.5, 0.5], 1e-15));
        assert!(close(&sol.direction, &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn asymmetric_pair_closed_form() {
        // stationarity of 4θ² + (1−θ)² on [0,1]: 8θ − 2(1−θ) = 0 → θ = 0.2
        let h = hull(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let sol = solve_subproblem(&h, &[0.0, 0.0], 1.0, 1e-10).unwrap();
        assert!(close(sol.weights.as_slice(), &[0.2, 0.8], 1e-15));
        assert!(close(&sol.direction, &[0.4, 0.8], 1e-15));
        let p = min_norm_element(&h, 1e-10).unwrap();
        assert!((norm_sq(&p) - 0.8).abs() < 1e-15);
        assert!(sol.kkt_residual <= 1e-12);
    }

    #[test]
    fn opposite_columns_contain_origin() {
        let h = hull(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        let p = min_norm_element(&h, 1e-10).unwrap();
        assert!(close(&p, &[0.0, 0.0], 1e-15));
        let q = project_hull(&h, &[0.0, 5.0], 1e-10).unwrap();
        assert!(close(&q, &[0.0, 0.0], 1e-15));
    }

    #[test]
    fn projection_of_interior_point_is_identity() {
        let h = hull(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, -1.0]]);
        let avg = h.combine(&[1.0 / 3.0; 3]);
        let p = project_hull(&h, &avg, 1e-10).unwrap();
        assert!(close(&p, &avg, 1e-12));
    }

    #[test]
    fn all_zero_gradients_are_degenerate() {
        let h = hull(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let sol = solve_subproblem(&h, &[1.0, 2.0], 1.0, 1e-10).unwrap();
        assert!(sol.degenerate);
        assert!(close(sol.weights.as_slice(), &[1.0 / 3.0; 3], 1e-15));
        assert_eq!(sol.direction, vec![0.0, 0.0]);
    }

    #[test]
    fn duplicated_gradients_pick_first_support() {
        let h = hull(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let sol = solve_subproblem(&h, &[0.0, 0.0], 1.0, 1e-10).unwrap();
        assert_eq!(sol.weights.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn brute_force_examples() {
        let h = hull(&[&[1.0, 2.0], &[-1.0, 0.5]]);
        let s = 0.7;
        // v = s·column 1 is represented exactly by the first vertex
        let v: Vec<f64> = h.column(0).iter().map(|x| s * x).collect();
        let w = brute_force_subproblem(&h, &v, s, 100).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
        assert!(subproblem_objective(&h, &v, s, w.as_slice()).abs() < 1e-15);

        let single = hull(&[&[1.0, 2.0]]);
        assert_eq!(brute_force_subproblem(&single, &[0.0, 0.0], 1.0, 10).unwrap().as_slice(), &[1.0]);

        let big = hull(&[&[1.0], &[2.0], &[3.0], &[4.0], &[5.0]]);
        assert!(matches!(brute_force_subproblem(&big, &[0.0], 1.0, 10), Err(Error::Unsupported(_))));
        assert!(brute_force_subproblem(&h, &v, s, 5).is_err());
    }

    #[test]
    fn brute_force_agrees_on_pair() {
        let h = hull(&[&[2.0, 0.3], &[-0.5, 1.0]]);
        let v = [0.2, -0.4];
        let s = 0.9;
        let exact = solve_subproblem(&h, &v, s, 1e-10).unwrap();
        let grid = brute_force_subproblem(&h, &v, s, 1000).unwrap();
        let gap = subproblem_objective(&h, &v, s, grid.as_slice()) - exact.objective;
        assert!((0.0..1e-4).contains(&gap), "gap {gap}");
    }

    #[test]
    fn min_norm_point_agrees_with_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let m = rng.random_range(2..=ENUMERATION_LIMIT);
            let n = rng.random_range(1..6);
            let cols: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let h = GradientHull::from_columns(cols).unwrap();
            let wolfe = min_norm_point(&h, &v, 0.7, 1e-10).expect("no fallback");
            let exact = solve_subproblem(&h, &v, 0.7, 1e-12).unwrap();
            let value = subproblem_objective(&h, &v, 0.7, &wolfe);
            assert!((value - exact.objective).abs() <= 1e-9 * (1.0 + exact.objective));
            assert!(kkt_residual(&h, &v, 0.7, &wolfe) <= 1e-10);
        }
    }

    #[test]
    fn large_hull_projection() {
        // ten unit-ish vectors in the plane around the origin; min norm element is 0
        let cols: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 10.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let h = GradientHull::from_columns(cols).unwrap();
        let target = [3.0, 0.1];
        let sol = solve_subproblem(&h, &target, 1.0, 1e-9).unwrap();
        assert!(sol.kkt_residual <= 1e-9);
        // projection of a far point lands on the boundary facing it
        assert!(sol.direction[0] > 0.9);
    }

    #[test]
    fn rejects_bad_queries() {
        let h = hull(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            solve_subproblem(&h, &[0.0], 1.0, 1e-10),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(solve_subproblem(&h, &[0.0, 0.0], 0.0, 1e-10).is_err());
        assert!(GradientHull::<f64>::from_columns(vec![]).is_err());
        assert!(GradientHull::new(vec![0.0; 2], vec![vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn weights_validate_invariants() {
        assert!(SimplexWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexWeights::new(vec![0.6, 0.5]).is_err());
        assert!(SimplexWeights::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexWeights::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        let h = GradientHull::<f32>::from_columns(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sol = solve_subproblem(&h, &[0.0, 0.0], 1.0, f32::default_tol()).unwrap();
        assert!((sol.weights.as_slice()[0] - 0.2).abs() < 1e-6);
    }
}
