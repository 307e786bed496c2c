//! Momentum schedule `t_1 = 1`, `t_{k+1} = √(t_k² − a·t_k + b) + ½`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Checks `0 ≤ a < 1` and `a²/4 ≤ b ≤ 1/4`. The lower bound on `b` tolerates a
/// few ulps so that `b = a²/4` typed as a decimal is accepted.
pub fn validate_momentum<T: Scalar>(a: T, b: T) -> Result<()> {
    if !a.is_finite() || a < T::zero() || a >= T::one() {
        return Err(Error::InvalidInput(format!("a must lie in [0, 1), got {a}")));
    }
    let lower = a * a / T::lit(4.0);
    let slack = T::epsilon() * T::lit(8.0);
    if !b.is_finite() || b < lower - slack || b > T::lit(0.25) {
        return Err(Error::InvalidInput(format!("b must lie in [a²/4, 1/4], got b = {b} with a = {a}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule<T> {
    a: T,
    b: T,
    t: T,
    k: usize,
}

impl<T: Scalar> StepSchedule<T> {
    /// Schedule at `k = 1`, `t_1 = 1`.
    pub fn new(a: T, b: T) -> Result<Self> {
        validate_momentum(a, b)?;
        Ok(Self {
            a,
            b,
            t: T::one(),
            k: 1,
        })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// `t_k`
    pub fn t(&self) -> T {
        self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `t_{k+1}` without advancing.
    pub fn next_t(&self) -> Result<T> {
        let radicand = self.t * self.t - self.a * self.t + self.b;
        if !(radicand >= T::zero()) {
            return Err(Error::Internal(format!(
                "negative radicand {radicand} in momentum schedule at k = {}",
                self.k
            )));
        }
        Ok(radicand.sqrt() + T::lit(0.5))
    }

    pub fn advance(&self) -> Result<Self> {
        Ok(Self {
            t: self.next_t()?,
            k: self.k + 1,
            ..*self
        })
    }

    /// `a·t_k − b + 1/4`
    pub fn zeta(&self) -> T {
        self.a * self.t - self.b + T::lit(0.25)
    }

    /// Same `t`, counter moved forward; used by the momentum-free baseline.
    pub(crate) fn hold(&self) -> Self {
        Self { k: self.k + 1, ..*self }
    }
}

impl<T: Scalar> Iterator for StepSchedule<T> {
    type Item = T;

    /// Yields `t_k` and moves to `k + 1`; ends only if the recurrence breaks down.
    fn next(&mut self) -> Option<T> {
        let current = self.t;
        *self = self.advance().ok()?;
        Some(current)
    }
}

/// Violations of the schedule inequalities at a single `k`, each `≤ 0` when satisfied.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScheduleViolations {
    /// `t_k + (1−a)/2 − t_{k+1}` and `(1−a)k/2 + (1+a)/2 − t_k`, worst of the two.
    pub growth: f64,
    /// `t_k − ((1 − a + √(4b − a²))(k−1)/2 + 1)` and `t_k − k`, worst of the two.
    pub upper: f64,
    /// `|t_k² − t_{k+1}² + t_{k+1} − (a·t_k − b + ¼)|` relative to `max(1, t_{k+1}²)`.
    pub identity: f64,
    /// Bounds on the momentum coefficient `(t_k − 1)/t_{k+1}`.
    pub coefficient: f64,
    /// `1/t_k − (1 − ((t_k − 1)/t_{k+1})²)`
    pub coefficient_gap: f64,
}

impl ScheduleViolations {
    pub fn worst(&self) -> f64 {
        [self.growth, self.upper, self.identity, self.coefficient, self.coefficient_gap]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn merge(&mut self, other: &Self) {
        self.growth = self.growth.max(other.growth);
        self.upper = self.upper.max(other.upper);
        self.identity = self.identity.max(other.identity);
        self.coefficient = self.coefficient.max(other.coefficient);
        self.coefficient_gap = self.coefficient_gap.max(other.coefficient_gap);
    }
}

/// Evaluates the schedule inequalities at `(k, t_k, t_{k+1})`. Inequalities are
/// measured relative to `max(1, |rhs|)`, so a value `≤ tol` means satisfied to `tol`.
pub fn schedule_violations(a: f64, b: f64, k: usize, t: f64, t_next: f64) -> ScheduleViolations {
    let kf = k as f64;
    let rel = |lhs: f64, rhs: f64| (lhs - rhs) / rhs.abs().max(1.0);

    let growth = rel(t + (1.0 - a) / 2.0, t_next).max(rel((1.0 - a) * kf / 2.0 + (1.0 + a) / 2.0, t));

    let slope = (1.0 - a + (4.0 * b - a * a).max(0.0).sqrt()) / 2.0;
    let upper_line = slope * (kf - 1.0) + 1.0;
    let upper = rel(t, upper_line).max(rel(upper_line, kf));

    let lhs = t * t - t_next * t_next + t_next;
    let identity = (lhs - (a * t - b + 0.25)).abs() / (t_next * t_next).max(1.0);

    let coef = (t - 1.0) / t_next;
    let coefficient = (-coef).max(rel(coef, (kf - 1.0) / (kf + 0.5)));
    let coefficient_gap = rel(1.0 / t, 1.0 - coef * coef);

    ScheduleViolations {
        growth,
        upper,
        identity,
        coefficient,
        coefficient_gap,
    }
}

/// Runs the schedule for `k = 1..=k_max` and returns the worst violation of each
/// inequality.
pub fn verify_schedule(a: f64, b: f64, k_max: usize) -> Result<ScheduleViolations> {
    let mut schedule = StepSchedule::new(a, b)?;
    let mut worst = ScheduleViolations {
        growth: f64::NEG_INFINITY,
        upper: f64::NEG_INFINITY,
        identity: 0.0,
        coefficient: f64::NEG_INFINITY,
        coefficient_gap: f64::NEG_INFINITY,
    };
    for _ in 0..k_max {
        let t_next = schedule.next_t()?;
        worst.merge(&schedule_violations(a, b, schedule.k(), schedule.t(), t_next));
        schedule = schedule.advance()?;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_momentum_parameters_give_half_steps() {
        let ts: Vec<f64> = StepSchedule::new(0.0, 0.0).unwrap().take(6).collect();
        for (k, t) in ts.iter().enumerate() {
            assert_eq!(*t, (k as f64 + 2.0) / 2.0);
        }
    }

    #[test]
    fn quarter_b_values() {
        // 40-digit decimal evaluation of the recurrence:
        // t_2 = 1.6180339887498948482…, t_3 = 2.1935270853310539385…
        let t2_exact = 1.618_033_988_749_895;
        let t3_exact = 2.193_527_085_331_054;
        let mut s = StepSchedule::<f64>::new(0.0, 0.25).unwrap();
        assert_eq!(s.t(), 1.0);
        s = s.advance().unwrap();
        assert!((s.t() - t2_exact).abs() < 4e-16);
        s = s.advance().unwrap();
        assert!((s.t() - t3_exact).abs() < 1e-15);
        assert_eq!(s.k(), 3);
    }

    #[test]
    fn zeta_values() {
        assert_eq!(StepSchedule::new(0.0, 0.25).unwrap().zeta(), 0.0);
        assert_eq!(StepSchedule::new(0.5, 0.25).unwrap().zeta(), 0.5);
        let mut s = StepSchedule::new(0.0, 0.0).unwrap();
        for _ in 0..5 {
            assert_eq!(s.zeta(), 0.25);
            s = s.advance().unwrap();
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(StepSchedule::new(1.0, 0.25).is_err());
        assert!(StepSchedule::new(-0.1, 0.0).is_err());
        assert!(StepSchedule::new(0.0, 0.3).is_err());
        assert!(StepSchedule::new(0.5, 0.05).is_err());
        assert!(StepSchedule::new(0.9, 0.2025).is_ok());
        assert!(StepSchedule::new(0.5, 0.0625).is_ok());
    }

    #[test]
    fn inequalities_hold_on_grid() {
        for (a, b) in [(0.0, 0.25), (0.0, 0.0), (0.5, 0.0625), (0.5, 0.25), (0.9, 0.2025)] {
            let w = verify_schedule(a, b, 2000).unwrap();
            assert!(w.worst() <= 1e-9, "({a}, {b}): {w:?}");
        }
    }
}
