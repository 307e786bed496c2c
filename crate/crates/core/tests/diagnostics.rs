use moaccel::diagnostics::{merit_surrogate, summability_check, Recorder};
use moaccel::problem::{default_start, pareto_reference};
use moaccel::solver::{run, Discard};
use moaccel::{Config64, Jos1_64, Problem, Quadratic64, RefOrigin, Refs64, Row64};
use proptest::prelude::*;

fn momentum() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..0.95, 0.0f64..=1.0).prop_map(|(a, u)| {
        let lo = a * a / 4.0;
        (a, lo + u * (0.25 - lo))
    })
}

fn rows_for(problem: &dyn Problem<f64>, config: &Config64, x0: &[f64], refs: &Refs64) -> Vec<Row64> {
    let mut rows = Vec::new();
    let mut rec = Recorder::new(problem, refs, config.a, config.b, config.s, config.subproblem_tol, &mut rows).unwrap();
    run(problem, config, x0, &mut rec).unwrap();
    drop(rec);
    rows
}

/// Minimizers of each objective plus the start and a far point.
fn ensemble_refs(p: &Quadratic64, x0: &[f64]) -> Refs64 {
    let mut refs = Refs64::new((0..p.num_objectives()).map(|i| p.minimizer(i)).collect(), RefOrigin::UserSupplied).unwrap();
    refs.push(x0.to_vec(), RefOrigin::UserSupplied).unwrap();
    refs.push(x0.iter().map(|v| -v).collect(), RefOrigin::UserSupplied).unwrap();
    refs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lyapunov_step_inequality(seed in any::<u64>(), n in 2usize..7, m in 2usize..4, (a, b) in momentum()) {
        let p = Quadratic64::new(n, m, seed).unwrap();
        let mut config = Config64::for_problem(&p).with_momentum(a, b);
        config.k_max = 200;
        let x0 = default_start::<f64>(n);
        let rows = rows_for(&p, &config, &x0, &ensemble_refs(&p, &x0));
        for w in rows.windows(2) {
            for j in 0..w[0].e_per_ref.len() {
                let change = w[1].e_per_ref[j] - w[0].e_per_ref[j] + w[0].zeta * w[0].sigma_per_ref[j];
                prop_assert!(change <= 1e-8 * (1.0 + w[0].e_per_ref[j].abs()), "k={} ref={j}: {change:e}", w[0].k);
            }
        }
    }

    #[test]
    fn explicit_rate_bound(seed in any::<u64>(), n in 2usize..7, m in 2usize..4, (a, b) in momentum()) {
        let p = Quadratic64::new(n, m, seed).unwrap();
        let mut config = Config64::for_problem(&p).with_momentum(a, b);
        config.k_max = 300;
        let x0 = default_start::<f64>(n);
        let rows = rows_for(&p, &config, &x0, &ensemble_refs(&p, &x0));
        let radius = p.level_radius(&x0).unwrap();
        let rhs = config.s * rows[0].merit_surrogate + radius * radius;
        for r in &rows {
            let k = r.k as f64;
            prop_assert!(r.merit_surrogate * config.s * (1.0 - a).powi(2) * k * k <= rhs * (1.0 + 1e-9));
        }
    }

    #[test]
    fn merit_is_monotone_in_the_reference_set(seed in any::<u64>(), x in prop::collection::vec(-4.0f64..4.0, 4)) {
        let p = Quadratic64::new(4, 3, seed).unwrap();
        let small = Refs64::new(vec![p.minimizer(0)], RefOrigin::UserSupplied).unwrap();
        let mut large = small.clone();
        large.push(p.minimizer(1), RefOrigin::UserSupplied).unwrap();
        large.push(vec![0.0; 4], RefOrigin::UserSupplied).unwrap();
        prop_assert!(merit_surrogate(&p, &x, &large).unwrap() >= merit_surrogate(&p, &x, &small).unwrap());
    }
}

#[test]
fn cluster_point_inequality_on_long_runs() {
    for (a, b) in [(0.0, 0.25), (0.5, 0.0625)] {
        let p = Quadratic64::new(10, 3, 3).unwrap();
        let x0 = default_start::<f64>(10);
        let mut config = Config64::for_problem(&p).with_momentum(a, b);
        config.eps = 0.0;
        config.k_max = 3000;
        let limit = run(&p, &config, &x0, &mut Discard).unwrap().final_state.x_cur;
        let refs = Refs64::new(vec![limit], RefOrigin::TrajectoryTail).unwrap();
        config.k_max = 500;
        for r in rows_for(&p, &config, &x0, &refs) {
            assert!(-r.sigma_per_ref[0] <= r.step_norm_sq / (2.0 * config.s) + 1e-8, "k={}", r.k);
        }
    }
}

#[test]
fn summability_examples() {
    let p = Jos1_64::new(50).unwrap();
    let x0 = default_start::<f64>(50);
    let refs = pareto_reference(&p, 8, None).unwrap();
    let radius = p.level_radius(&x0);

    // a = 0, b = 1/4: every weight vanishes
    let mut config = Config64::for_problem(&p);
    config.eps = 0.0;
    config.k_max = 100;
    let rows = rows_for(&p, &config, &x0, &refs);
    let check = summability_check(&rows, 0.0, 0.25, config.s, rows[0].merit_surrogate, radius);
    assert!(check.partial_sums.iter().all(|&v| v == 0.0));

    // critical start: no movement at all
    let start = vec![1.0; 50];
    let config = Config64::for_problem(&p).with_momentum(0.5, 0.0625);
    let rows = rows_for(&p, &config, &start, &refs);
    let check = summability_check(&rows, 0.5, 0.0625, config.s, rows[0].merit_surrogate, radius);
    assert!(check.partial_sums.iter().all(|&v| v == 0.0));

    let mut config = Config64::for_problem(&p).with_momentum(0.5, 0.25);
    config.eps = 0.0;
    config.k_max = 10_000;
    let rows = rows_for(&p, &config, &x0, &refs);
    let check = summability_check(&rows, 0.5, 0.25, config.s, rows[0].merit_surrogate, radius);
    assert!(check.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    assert!(check.tail_increment < 1e-8);
    assert!(!check.violated);
}

#[test]
fn missing_radius_skips_the_bound_with_a_warning() {
    let p = Jos1_64::new(2).unwrap();
    let x0 = default_start::<f64>(2);
    let refs = pareto_reference(&p, 4, None).unwrap();
    let mut config = Config64::for_problem(&p).with_momentum(0.5, 0.0625);
    config.k_max = 20;
    let rows = rows_for(&p, &config, &x0, &refs);
    let check = summability_check(&rows, 0.5, 0.0625, config.s, 0.0, None);
    assert!(check.bound.is_none() && check.warning.is_some());
    assert_eq!(check.partial_sums.len(), rows.len());
}
