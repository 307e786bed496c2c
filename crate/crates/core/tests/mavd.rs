use moaccel::linalg::dist_sq;
use moaccel::mavd::{integrate, integrate_collect, IntegrateConfig, StepRule};
use moaccel::problem::{default_start, pareto_reference, FnProblem};
use moaccel::{Jos1_64, Problem, RefOrigin, Refs64};

fn half_square() -> FnProblem<f64> {
    FnProblem::new("half_square", 1, 1, 1.0, |x: &[f64]| vec![0.5 * x[0] * x[0]], |x: &[f64]| vec![vec![x[0]]]).unwrap()
}

fn fixed(alpha: f64, t_end: f64, dt: f64, sample_every: usize) -> IntegrateConfig<f64> {
    IntegrateConfig {
        step: StepRule::Fixed(dt),
        sample_every,
        ..IntegrateConfig::new(alpha, t_end)
    }
}

fn final_x(problem: &dyn Problem<f64>, cfg: &IntegrateConfig<f64>, x0: &[f64]) -> Vec<f64> {
    let refs = Refs64::new(vec![x0.to_vec()], RefOrigin::UserSupplied).unwrap();
    integrate(problem, cfg, x0, &refs, &mut |_| Ok(())).unwrap().final_state.x
}

/// RK4 on `x'' = −(α/t)x' − x`, returning `x` every `every` steps.
fn avd_reference(alpha: f64, x0: f64, t_end: f64, dt: f64, every: usize) -> Vec<(f64, f64)> {
    let f = |t: f64, x: f64, v: f64| (v, -(alpha / t) * v - x);
    let (mut x, mut v) = (x0, 0.0);
    let steps = ((t_end - 1.0) / dt).round() as usize;
    let mut out = vec![(1.0, x)];
    for j in 0..steps {
        let t = 1.0 + j as f64 * dt;
        let (k1x, k1v) = f(t, x, v);
        let (k2x, k2v) = f(t + dt / 2.0, x + dt / 2.0 * k1x, v + dt / 2.0 * k1v);
        let (k3x, k3v) = f(t + dt / 2.0, x + dt / 2.0 * k2x, v + dt / 2.0 * k2v);
        let (k4x, k4v) = f(t + dt, x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (j + 1) % every == 0 {
            out.push((1.0 + (j + 1) as f64 * dt, x));
        }
    }
    out
}

#[test]
fn single_objective_matches_avd_reference() {
    let p = half_square();
    let refs = Refs64::new(vec![vec![0.0]], RefOrigin::UserSupplied).unwrap();
    let (samples, _) = integrate_collect(&p, &fixed(3.0, 100.0, 1e-2, 10), &[2.0], &refs).unwrap();
    let reference = avd_reference(3.0, 2.0, 100.0, 1e-3, 100);
    assert_eq!(samples.len(), reference.len());
    let worst = samples
        .iter()
        .zip(&reference)
        .map(|(s, (t, x))| {
            assert!((s.t - t).abs() < 1e-9);
            (s.x[0] - x).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-5, "max deviation {worst:e}");
}

#[test]
fn critical_start_stays_put() {
    let p = Jos1_64::new(2).unwrap();
    let x0 = vec![1.0, 1.0];
    let refs = pareto_reference(&p, 5, None).unwrap();
    let (samples, _) = integrate_collect(&p, &IntegrateConfig::new(2.0, 50.0), &x0, &refs).unwrap();
    for s in samples {
        assert!(dist_sq(&s.x, &x0).sqrt() < 1e-12, "t={}", s.t);
    }
}

fn observed_order(problem: &dyn Problem<f64>, alpha: f64, x0: &[f64], t_end: f64, h: f64) -> f64 {
    let coarse = final_x(problem, &fixed(alpha, t_end, h, usize::MAX), x0);
    let mid = final_x(problem, &fixed(alpha, t_end, h / 2.0, usize::MAX), x0);
    let fine = final_x(problem, &fixed(alpha, t_end, h / 4.0, usize::MAX), x0);
    (dist_sq(&coarse, &mid).sqrt() / dist_sq(&mid, &fine).sqrt()).log2()
}

#[test]
fn fourth_order_on_smooth_problems() {
    let order = observed_order(&half_square(), 3.0, &[2.0], 10.0, 0.1);
    assert!(order >= 3.5, "observed order {order}");
}

#[test]
fn at_least_second_order_on_jos1() {
    let p = Jos1_64::new(2).unwrap();
    let order = observed_order(&p, 3.0, &default_start::<f64>(2), 5.0, 0.02);
    assert!(order >= 2.0, "observed order {order}");
}

#[test]
fn energy_and_lyapunov_decay_on_jos1() {
    let p = Jos1_64::new(2).unwrap();
    let x0 = default_start::<f64>(2);
    let refs = pareto_reference(&p, 9, None).unwrap();
    for alpha in [1.0, 2.0, 3.0] {
        let cfg = IntegrateConfig {
            sample_every: 10,
            ..IntegrateConfig::new(alpha, 50.0)
        };
        let (samples, summary) = integrate_collect(&p, &cfg, &x0, &refs).unwrap();
        assert!(summary.worst_consistency <= 0.0);
        for w in samples.windows(2) {
            let dt = cfg.step.dt_at(w[0].t);
            let slack = |v: f64| 10.0 * dt * dt * (1.0 + v.abs());
            for (next, cur) in w[1].w.iter().zip(&w[0].w) {
                assert!(*next <= cur + slack(*cur), "alpha={alpha} W rose at t={}", w[1].t);
            }
            for (next, cur) in w[1].e_per_ref.iter().zip(&w[0].e_per_ref) {
                assert!(*next <= cur + slack(*cur), "alpha={alpha} E rose at t={}", w[1].t);
            }
            for (f, f0) in w[1].f_values.iter().zip(&samples[0].f_values) {
                assert!(*f <= f0 + slack(*f0));
            }
        }
    }
}
