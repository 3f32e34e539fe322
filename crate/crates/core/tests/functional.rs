use hermite_core::chaos::{classify_regime, make_params, PowerSeries, Regime};
use hermite_core::functional::diagnostics::{cross_independence, gaussianity_report, holder_seminorm};
use hermite_core::functional::{
    evaluate_series, functional_samples, interpolant_integrals, kappa_from_terminal,
    limit_covariance_srd, normalized_functional, scaling_fit, Centering, FunctionalSample, Model,
    SeriesEvaluator, SimSettings,
};
use hermite_core::process::{KernelSpec, PathGrid, PathMeta};
use hermite_core::rng::{normals, stream_rng};
use hermite_core::stats::{covariance, variance};
use hermite_core::Error;
use proptest::prelude::*;

fn model(h: f64, m: u32) -> Model {
    let kernel = KernelSpec::exponential(1.0, h).unwrap();
    Model::new(make_params(h, m).unwrap(), kernel, SimSettings { dt: 0.1, ..SimSettings::default() })
}

fn grid(values: Vec<f64>, dt: f64) -> PathGrid {
    PathGrid::new(0.0, dt, values, PathMeta::default()).unwrap()
}

fn poly(c: &[f64]) -> PowerSeries {
    PowerSeries::polynomial(c.to_vec()).unwrap()
}

fn sample(values: Vec<Vec<f64>>, regime: Regime) -> FunctionalSample {
    let p = make_params(0.7, 1).unwrap();
    let d = if regime == Regime::ShortRange { 2 } else { 1 };
    FunctionalSample {
        eps: 0.1,
        t_grid: vec![1.0; values[0].len()],
        values,
        regime: classify_regime(&p, d),
        series_id: "synthetic".into(),
        noise_seed: 0,
    }
}

fn iid_sample(seed: u64, n: usize) -> FunctionalSample {
    let mut rng = stream_rng(seed, 0);
    sample(normals(&mut rng, n).into_iter().map(|v| vec![v]).collect(), Regime::ShortRange)
}

#[test]
fn evaluate_series_examples() {
    let m = model(0.7, 1);
    let path = grid(vec![0.3, -1.2, 2.5, 0.0], 0.5);
    let id = SeriesEvaluator::new("y", &PowerSeries::identity(), &m, Centering::None).unwrap();
    assert_eq!(evaluate_series(&id, &path), path);

    let s2 = m.marginal_variance().unwrap();
    let sq = SeriesEvaluator::new("sq", &poly(&[0.0, 0.0, 1.0]), &m, Centering::Mean).unwrap();
    assert_eq!(sq.rank, 2);
    for (g, y) in evaluate_series(&sq, &path).values.iter().zip(&path.values) {
        assert!((g - (y * y - s2)).abs() < 1e-12);
    }

    let cube = poly(&[0.0, 0.0, 0.0, 1.0]).with_rank(Some(3));
    let proj = SeriesEvaluator::new("cube", &cube, &m, Centering::Projection).unwrap();
    assert_eq!(proj.rank, 3);
    for (g, y) in evaluate_series(&proj, &path).values.iter().zip(&path.values) {
        assert!((g - (y.powi(3) - 3.0 * s2 * y)).abs() < 1e-10, "{g}");
    }
    // without projection x³ keeps its first-chaos component
    let plain = SeriesEvaluator::new("cube", &poly(&[0.0, 0.0, 0.0, 1.0]), &m, Centering::Mean).unwrap();
    assert_eq!(plain.rank, 1);

    let m2 = model(0.7, 2);
    let r = SeriesEvaluator::new("cube", &cube, &m2, Centering::Projection);
    assert!(matches!(r, Err(Error::Unsupported(_))));
}

#[test]
fn normalized_functional_examples() {
    let p = make_params(0.7, 1).unwrap();
    let srd = classify_regime(&p, 2);
    let eps = 0.04;
    let ones = grid(vec![1.0; 101], 0.25);
    let v = normalized_functional(&ones, eps, &srd, &[0.0, 0.5, 1.0]).unwrap();
    assert_eq!(v[0], 0.0);
    for (t, got) in [0.5, 1.0].iter().zip(&v[1..]) {
        assert!((got - t / eps.sqrt()).abs() < 1e-9, "{got}");
    }
    assert!(matches!(normalized_functional(&ones, eps, &srd, &[2.0]), Err(Error::Insufficient(_))));
    let boundary = classify_regime(&make_params(0.75, 1).unwrap(), 2);
    assert!(matches!(normalized_functional(&ones, eps, &boundary, &[1.0]), Err(Error::Boundary(_))));
    assert!(normalized_functional(&ones, 0.0, &srd, &[1.0]).is_err());
}

#[test]
fn holder_examples() {
    let line = grid((0..=100).map(|i| i as f64 / 100.0).collect(), 0.01);
    assert!((holder_seminorm(&line, 0.5).unwrap() - 1.0).abs() < 1e-12);
    let flat = grid(vec![2.0; 50], 0.02);
    assert_eq!(holder_seminorm(&flat, 0.45).unwrap(), 0.0);
    assert!(holder_seminorm(&line, 1.0).is_err());
}

#[test]
fn gaussianity_calibration() {
    let s = iid_sample(3, 4000);
    let r = gaussianity_report(&s).unwrap();
    let k = r.excess_kurtosis.unwrap();
    assert!(k.within(0.0, 3.0), "{k:?}");
    let sk = r.skewness.unwrap();
    assert!(sk.within(0.0, 3.0), "{sk:?}");
    assert!(r.ks_statistic.unwrap().value < r.ks_critical.unwrap());
    assert!(r.label.is_none());
    assert!(matches!(gaussianity_report(&iid_sample(3, 999)), Err(Error::Insufficient(_))));
}

#[test]
fn cross_independence_calibration() {
    let a = iid_sample(10, 2000);
    let b = iid_sample(11, 2000);
    let r = cross_independence(&a, &b).unwrap();
    assert!(r.correlation.unwrap().within(0.0, 3.0));
    assert!(r.independence_statistic.unwrap().within(0.0, 3.0));
    assert_eq!(r.independent, Some(true));
    let own = cross_independence(&a, &a).unwrap();
    assert!((own.correlation.unwrap().value - 1.0).abs() < 1e-12);
    assert_eq!(own.independent, Some(false));
    assert!(cross_independence(&a, &iid_sample(12, 1999)).is_err());
}

#[test]
fn kappa_of_zero_series_is_zero() {
    let zeros = vec![vec![0.0; 50]; 3];
    let k = kappa_from_terminal(&[0.1, 0.05, 0.025], &zeros).unwrap();
    assert_eq!(k.value, 0.0);
    assert_eq!(k.stderr, 0.0);
}

#[test]
fn srd_estimators_reject_lrd_series() {
    let m = model(0.9, 1);
    let h2 = SeriesEvaluator::new("h2", &PowerSeries::hermite(2), &m, Centering::Mean).unwrap();
    // H*(2) = 0.8
    assert!(limit_covariance_srd(&h2, &h2, &m, 5.0, 10, 1).is_err());
}

#[test]
fn orthogonal_chaoses_have_zero_cross_lambda() {
    let m = model(0.7, 1);
    let s = m.marginal_variance().unwrap().sqrt();
    let scaled = |n: usize| {
        // σⁿ He_n(y/σ) under the discretized marginal law
        let c: Vec<f64> = PowerSeries::hermite(n).coefficients.iter().enumerate().map(|(k, c)| c * s.powi(n as i32 - k as i32)).collect();
        let series = poly(&c).with_rank(Some(n as u32));
        SeriesEvaluator::new(&format!("h{n}"), &series, &m, Centering::None).unwrap()
    };
    let (h2, h3) = (scaled(2), scaled(3));
    assert_eq!((h2.rank, h3.rank), (2, 3));
    let off = limit_covariance_srd(&h2, &h3, &m, 10.0, 400, 21).unwrap();
    assert!(off.value.abs() < 4.0 * off.stderr.max(1e-12), "{} ± {}", off.value, off.stderr);
    let diag = limit_covariance_srd(&h2, &h2, &m, 10.0, 400, 21).unwrap();
    assert!(diag.value > 4.0 * diag.stderr, "{} ± {}", diag.value, diag.stderr);
}

#[test]
fn parity_orthogonality_and_zero_at_origin() {
    let m = model(0.7, 1);
    let odd = SeriesEvaluator::new("y", &PowerSeries::identity(), &m, Centering::Mean).unwrap();
    let even = SeriesEvaluator::new("h2", &PowerSeries::hermite(2), &m, Centering::Mean).unwrap();
    let s = functional_samples(&[odd.clone(), even], &m, 0.1, &[0.0, 0.5, 1.0], 600, 77).unwrap();
    for f in &s {
        assert!(f.values.iter().all(|r| r[0] == 0.0));
        assert_eq!(f.replicas(), 600);
    }
    let (a, b) = (s[0].terminal(), s[1].terminal());
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let se = (variance(&prod) / prod.len() as f64).sqrt();
    assert!(covariance(&a, &b).abs() < 4.0 * se);
    // the same seed reproduces a series' sample whatever else shares the noise
    let again = functional_samples(&[odd], &m, 0.1, &[0.0, 0.5, 1.0], 600, 77).unwrap();
    assert_eq!(again[0].values, s[0].values);
}

fn ladder_data(seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eps = vec![0.1, 0.05, 0.025, 0.0125];
    let mut rng = stream_rng(seed, 1);
    let data = eps.iter().map(|e: &f64| normals(&mut rng, 60).into_iter().map(|v| v / e.sqrt()).collect()).collect();
    (eps, data)
}

#[test]
fn scaling_fit_recovers_synthetic_slope_and_checks_input() {
    let m = model(0.7, 1);
    let (eps, data) = ladder_data(4);
    let fit = scaling_fit(&eps, &data, &m, 2).unwrap();
    assert!((fit.slope - 1.0).abs() < 4.0 * fit.stderr, "{} ± {}", fit.slope, fit.stderr);
    assert_eq!(fit.predicted, Some(1.0));
    assert!(scaling_fit(&eps[..3], &data[..3], &m, 2).is_err());
    let short: Vec<Vec<f64>> = data.iter().map(|d| d[..30].to_vec()).collect();
    assert!(matches!(scaling_fit(&eps, &short, &m, 2), Err(Error::Insufficient(_))));
    let uneven = vec![0.1, 0.09, 0.01, 0.001];
    assert!(scaling_fit(&uneven, &data, &m, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_evaluation_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        ys in proptest::collection::vec(-4.0f64..4.0, 2..20),
    ) {
        prop_assume!(a.abs() > 1e-3 && b.abs() > 1e-3);
        let m = model(0.7, 1);
        let f = PowerSeries::hermite(2);
        let g = poly(&[0.0, 0.5, 0.0, 0.1]);
        let fg = PowerSeries::combine(a, &f, b, &g).unwrap();
        let ev = |s: &PowerSeries| SeriesEvaluator::new("s", s, &m, Centering::None).unwrap();
        let (ef, eg, efg) = (ev(&f), ev(&g), ev(&fg));
        let path = grid(ys, 0.1);
        let (pf, pg, pfg) = (evaluate_series(&ef, &path), evaluate_series(&eg, &path), evaluate_series(&efg, &path));
        for i in 0..path.len() {
            let want = a * pf.values[i] + b * pg.values[i];
            prop_assert!((pfg.values[i] - want).abs() <= 1e-12 * (1.0 + want.abs() + pfg.values[i].abs()));
        }
    }

    #[test]
    fn integrals_are_additive(g in proptest::collection::vec(-5.0f64..5.0, 3..60), split in 0.0f64..1.0) {
        let dt = 0.1;
        let n = g.len() - 1;
        let k = ((split * n as f64).floor() as usize).min(n - 1);
        let (mid, end) = (k as f64 * dt, n as f64 * dt);
        let whole = interpolant_integrals(&g, dt, &[mid, end]).unwrap();
        let tail = interpolant_integrals(&g[k..], dt, &[end - mid]).unwrap()[0];
        prop_assert!((whole[1] - whole[0] - tail).abs() < 1e-10 * (1.0 + whole[1].abs()));
    }

    #[test]
    fn statistics_ignore_replica_order(seed in 0u64..1000, rot in 1usize..59) {
        let m = model(0.7, 1);
        let (eps, data) = ladder_data(seed);
        let rotated: Vec<Vec<f64>> = data.iter().map(|d| { let mut d = d.clone(); d.rotate_left(rot); d }).collect();
        let a = scaling_fit(&eps, &data, &m, 2).unwrap();
        let b = scaling_fit(&eps, &rotated, &m, 2).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        let ka = kappa_from_terminal(&eps, &data).unwrap();
        let mut rev_eps = eps.clone();
        rev_eps.reverse();
        let mut rev_data = rotated.clone();
        rev_data.reverse();
        let kb = kappa_from_terminal(&rev_eps, &rev_data).unwrap();
        prop_assert!((ka.value - kb.value).abs() < 1e-9 * ka.value);
    }
}
