use hermite_core::chaos::make_params;
use hermite_core::homogenization::{
    lift_symmetric, simulate_limit_sde, solve_rough, solve_rough_path, solve_rough_tol, solve_young,
    solve_young_tol,
    weak_distance, LimitType, VectorField,
};
use hermite_core::process::{simulate_fbm, PathGrid, PathMeta, SimConfig};
use hermite_core::rng::{normals, stream_rng};
use hermite_core::stats::{ks_critical, ks_normal};
use hermite_core::Error;
use proptest::prelude::*;

fn grid(values: Vec<f64>, dt: f64) -> PathGrid {
    PathGrid::new(0.0, dt, values, PathMeta::default()).unwrap()
}

fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> PathGrid {
    let dt = 1.0 / n as f64;
    grid((0..=n).map(|i| f(i as f64 * dt)).collect(), dt)
}

fn last(p: &PathGrid) -> f64 {
    *p.values.last().unwrap()
}

const LINEAR: VectorField = VectorField::Linear { a: 1.0 };

#[test]
fn lift_examples() {
    let x = from_fn(10, |t| t);
    let d = lift_symmetric(&x);
    for (s, t) in [(0, 1), (2, 7), (0, 10)] {
        let want = 0.5 * ((t - s) as f64 * 0.1).powi(2);
        assert!((d.lift(s, t) - want).abs() < 1e-15);
    }
    let flat = lift_symmetric(&grid(vec![3.0; 8], 0.5));
    assert!(flat.second_level.iter().all(|v| *v == 0.0));
    assert_eq!(flat.lift(0, 7), 0.0);
}

#[test]
fn zero_field_keeps_the_start() {
    let x = from_fn(50, |t| (5.0 * t).sin());
    for f in [VectorField::Linear { a: 0.0 }, VectorField::Sine { amplitude: 0.0 }] {
        assert!(solve_young(&f, &x, 1.7).unwrap().values.iter().all(|v| *v == 1.7));
        assert!(solve_rough_path(&f, &x, 1.7).unwrap().values.iter().all(|v| *v == 1.7));
    }
}

#[test]
fn smooth_driver_recovers_exponential() {
    let e = 1f64.exp();
    let young = |n| (last(&solve_young(&LINEAR, &from_fn(n, |t| t), 1.0).unwrap()) - e).abs();
    let davie = |n| (last(&solve_rough_path(&LINEAR, &from_fn(n, |t| t), 1.0).unwrap()) - e).abs();
    assert!(young(1000) < 2e-3);
    assert!(davie(1000) < 1e-6);
    // halving the step halves (Young) or quarters (Davie) the error
    assert!((young(200) / young(400) - 2.0).abs() < 0.3);
    assert!((davie(200) / davie(400) - 4.0).abs() < 0.6);
}

#[test]
fn young_linear_equation_on_fbm() {
    for r in 0..5 {
        let cfg = SimConfig { replica: r, ..SimConfig::new(8192, 1.0 / 8192.0, 808) };
        let x = simulate_fbm(0.8, &cfg).unwrap();
        let sol = solve_young(&LINEAR, &x, 2.0).unwrap();
        let exact = 2.0 * last(&x).exp();
        assert!((last(&sol) / exact - 1.0).abs() < 0.02, "replica {r}: {} vs {exact}", last(&sol));
        assert!(sol.meta.error_estimate.unwrap() < 0.05);
    }
}

#[test]
fn stratonovich_limit_is_lognormal() {
    let c = 0.5;
    let cfg = SimConfig::new(200, 0.005, 31);
    let logs: Vec<f64> = (0..2000)
        .map(|r| {
            let p = simulate_limit_sde(&LINEAR, c, &LimitType::StratonovichWiener, &SimConfig { replica: r, ..cfg.clone() }, 1.0)
                .unwrap();
            last(&p).ln()
        })
        .collect();
    // one-sample KS against the exact law N(0, c²), 1% level
    let crit = 1.628 / (logs.len() as f64).sqrt();
    let d = ks_normal(&logs, 0.0, c);
    assert!(d < crit, "{d} vs {crit}");
}

#[test]
fn zero_coupling_gives_constant_limit() {
    let cfg = SimConfig::new(64, 1.0 / 64.0, 2);
    let young = LimitType::YoungHermite { params: make_params(0.9, 1).unwrap(), w: 2 };
    for limit in [LimitType::StratonovichWiener, young] {
        let p = simulate_limit_sde(&VectorField::Sine { amplitude: 1.0 }, 0.0, &limit, &cfg, 0.4).unwrap();
        assert!(p.values.iter().all(|v| *v == 0.4));
    }
    // SRD and boundary ranks have no Young limit
    for (h, w) in [(0.7, 2), (0.75, 2)] {
        let limit = LimitType::YoungHermite { params: make_params(h, 1).unwrap(), w };
        assert!(simulate_limit_sde(&LINEAR, 1.0, &limit, &cfg, 1.0).is_err());
    }
}

#[test]
fn monotone_for_positive_field_and_increasing_driver() {
    let x = from_fn(400, |t| t * t + t);
    for f in [LINEAR, VectorField::Sine { amplitude: 1.0 }] {
        for sol in [solve_young(&f, &x, 0.5).unwrap(), solve_rough_path(&f, &x, 0.5).unwrap()] {
            assert!(sol.values.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}

#[test]
fn solution_is_continuous_in_the_driver() {
    let cfg = SimConfig::new(2048, 1.0 / 2048.0, 12);
    let x = simulate_fbm(0.7, &cfg).unwrap();
    let f = VectorField::Sine { amplitude: 1.0 };
    let base = last(&solve_young(&f, &x, 0.3).unwrap());
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&d| {
            let y = PathGrid { values: x.values.iter().enumerate().map(|(i, v)| v + d * (i as f64 * x.dt * 3.0).sin()).collect(), ..x.clone() };
            (last(&solve_young(&f, &y, 0.3).unwrap()) - base).abs() / d
        })
        .collect();
    assert!(gaps.iter().all(|g| *g < 10.0), "{gaps:?}");
    assert!(gaps[0] / gaps[2] < 2.0 && gaps[2] / gaps[0] < 2.0, "{gaps:?}");
}

#[test]
fn solver_guards() {
    let x = grid(vec![0.0, 3.0, -3.0, 4.0, -2.0], 0.25);
    assert!(matches!(solve_young_tol(&LINEAR, &x, 1.0, 1e-3), Err(Error::Tolerance(_))));
    let low = lift_symmetric(&from_fn(10, |t| t)).with_gamma(0.3).unwrap();
    assert!(solve_rough(&LINEAR, &low, 1.0).is_err());
    let bad = VectorField::CompactPolynomial { coeffs: vec![], radius: 1.0 };
    assert!(solve_young(&bad, &from_fn(10, |t| t), 0.0).is_err());
}

#[test]
fn weak_distance_calibration() {
    let mut rng = stream_rng(5, 0);
    let a = normals(&mut rng, 10_000);
    let same = weak_distance(&a, &a);
    assert_eq!(same.ks_distance, 0.0);
    assert!(same.moment_gaps.iter().all(|g| *g == 0.0));
    let b = normals(&mut stream_rng(5, 1), 10_000);
    let r = weak_distance(&a, &b);
    assert!(r.ks_distance < ks_critical(a.len(), b.len(), 0.01));
    assert!(r.ks_pass());
    for k in 0..4 {
        assert!(r.moment_gaps[k].abs() < 4.0 * r.moment_stderr[k], "moment {}", k + 1);
    }
}

proptest! {
    #[test]
    fn chen_relation_is_exact(values in proptest::collection::vec(-10.0f64..10.0, 3..200)) {
        let d = lift_symmetric(&grid(values, 0.01));
        prop_assert!(d.chen_residual() <= 1e-12);
    }

    #[test]
    fn flow_property(seed in 0u64..500, x0 in -2.0f64..2.0, amp in 0.1f64..2.0) {
        let n = 256;
        let steps = normals(&mut stream_rng(seed, 0), n);
        let mut v = vec![0.0];
        for s in steps {
            v.push(v.last().unwrap() + 0.05 * s);
        }
        let x = grid(v.clone(), 1.0 / n as f64);
        let f = VectorField::Sine { amplitude: amp };
        let half = n / 2;
        let first = grid(v[..=half].to_vec(), x.dt);
        let second = grid(v[half..].to_vec(), x.dt);
        let tol = f64::INFINITY;
        let whole = solve_young_tol(&f, &x, x0, tol).unwrap();
        let mid = last(&solve_young_tol(&f, &first, x0, tol).unwrap());
        let rest = solve_young_tol(&f, &second, mid, tol).unwrap();
        prop_assert!((last(&whole) - last(&rest)).abs() < 1e-12);
        let whole = last(&solve_rough_tol(&f, &lift_symmetric(&x), x0, tol).unwrap());
        let mid = last(&solve_rough_tol(&f, &lift_symmetric(&first), x0, tol).unwrap());
        let rest = last(&solve_rough_tol(&f, &lift_symmetric(&second), mid, tol).unwrap());
        prop_assert!((whole - rest).abs() < 1e-12);
    }
}
