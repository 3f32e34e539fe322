use hermite_core::chaos::make_params;
use hermite_core::process::io::{read_binary, read_csv, save_binary, save_csv};
use hermite_core::process::{
    default_validation_lags, hou_from_increments, simulate_fbm, simulate_hermite, simulate_hou,
    simulate_volterra, validate_kernel, KernelSpec, PathGrid, PathMeta, SimConfig,
};
use hermite_core::stats::{mean, variance};
use proptest::prelude::*;
use tempfile::TempDir;

fn replicas(n: u64, f: impl Fn(u64) -> PathGrid) -> Vec<PathGrid> {
    (0..n).map(f).collect()
}

fn column(paths: &[PathGrid], i: usize) -> Vec<f64> {
    paths.iter().map(|p| p.values[i]).collect()
}

/// Mean of a·b with its standard error.
fn product_moment(a: &[f64], b: &[f64]) -> (f64, f64) {
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    (mean(&p), (variance(&p) / p.len() as f64).sqrt())
}

#[test]
fn fbm_covariance_at_two_and_one() {
    let h = 0.7;
    let cfg = SimConfig::new(8, 0.25, 41);
    let paths = replicas(3000, |r| simulate_fbm(h, &SimConfig { replica: r, ..cfg.clone() }).unwrap());
    let (z1, z2) = (column(&paths, 4), column(&paths, 8));
    let (c, se) = product_moment(&z2, &z1);
    let exact = 2f64.powf(2.0 * h - 1.0);
    assert!((exact - 1.3195).abs() < 1e-4);
    assert!((c - exact).abs() < 4.0 * se, "{c} vs {exact} (se {se})");
    let (v, se) = product_moment(&z1, &z1);
    assert!((v - 1.0).abs() < 4.0 * se, "Var Z_1 = {v}");
    // disjoint unit-length increments share the variance dt^{2H}
    let inc: Vec<Vec<f64>> = (0..4)
        .map(|k| paths.iter().map(|p| p.values[2 * k + 2] - p.values[2 * k]).collect())
        .collect();
    let target = 0.5f64.powf(2.0 * h);
    for d in &inc {
        let (v, se) = product_moment(d, d);
        assert!((v - target).abs() < 4.0 * se, "{v} vs {target}");
    }
}

#[test]
fn rosenblatt_unit_variance_and_self_similarity() {
    let p = make_params(0.75, 2).unwrap();
    let cfg = SimConfig::new(16, 1.0 / 16.0, 5);
    let paths = replicas(1500, |r| simulate_hermite(&p, &SimConfig { replica: r, ..cfg.clone() }).unwrap());
    let (z_half, z1) = (column(&paths, 8), column(&paths, 16));
    let (v1, se1) = product_moment(&z1, &z1);
    assert!((v1 - 1.0).abs() < 4.0 * se1, "Var Z_1 = {v1} ± {se1}");
    let (vh, seh) = product_moment(&z_half, &z_half);
    let ratio = v1 / vh;
    let ratio_se = ratio * ((se1 / v1).powi(2) + (seh / vh).powi(2)).sqrt();
    assert!((ratio - 2f64.powf(1.5)).abs() < 4.0 * ratio_se, "ratio {ratio} ± {ratio_se}");
    // rank-2 marginal is skewed to the right
    let m3 = mean(&z1.iter().map(|v| v.powi(3)).collect::<Vec<_>>());
    assert!(m3 > 0.0);
}

#[test]
fn identical_config_is_bit_identical() {
    let cfg = SimConfig::new(64, 0.1, 99);
    let a = simulate_fbm(0.8, &cfg).unwrap();
    let b = simulate_fbm(0.8, &cfg).unwrap();
    assert_eq!(a, b);
    let c = simulate_fbm(0.8, &SimConfig { replica: 1, ..cfg.clone() }).unwrap();
    assert_ne!(a.values, c.values);
    let p = make_params(0.7, 2).unwrap();
    assert_eq!(simulate_hermite(&p, &cfg).unwrap(), simulate_hermite(&p, &cfg).unwrap());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let threaded = pool.install(|| simulate_hou(1.0, 1.0, &p, &cfg).unwrap());
    assert_eq!(threaded, simulate_hou(1.0, 1.0, &p, &cfg).unwrap());
}

#[test]
fn volterra_exponential_equals_hou() {
    let kernel = KernelSpec::exponential(1.0, 0.7).unwrap();
    for m in [1, 2] {
        let p = make_params(0.7, m).unwrap();
        let cfg = SimConfig::new(100, 0.1, 7);
        let v = simulate_volterra(&kernel, &p, &cfg).unwrap();
        let o = simulate_hou(1.0, 1.0, &p, &cfg).unwrap();
        assert_eq!(v.len(), o.len());
        let scale = o.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let diff = v.values.iter().zip(&o.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(diff < 1e-6 * (1.0 + scale), "m = {m}: max diff {diff}");
    }
}

#[test]
fn hou_is_centered_and_stationary() {
    let p = make_params(0.7, 1).unwrap();
    let cfg = SimConfig::new(40, 0.25, 17);
    let paths = replicas(1500, |r| simulate_hou(1.0, 1.0, &p, &SimConfig { replica: r, ..cfg.clone() }).unwrap());
    let var = paths[0].meta.marginal_variance.unwrap();
    for i in [0, 20, 40] {
        let y = column(&paths, i);
        let se = (variance(&y) / y.len() as f64).sqrt();
        assert!(mean(&y).abs() < 4.0 * se, "mean at {i}");
        let (v, se) = product_moment(&y, &y);
        assert!((v - var).abs() < 4.0 * se, "var at {i}: {v} vs {var}");
    }
    // lag covariance decays and stays below the lag-0 value
    let y0 = column(&paths, 0);
    let lagged: Vec<f64> = [4, 20, 40].iter().map(|&i| product_moment(&y0, &column(&paths, i)).0).collect();
    assert!(lagged.iter().all(|c| *c < var));
}

#[test]
fn kernel_validation_examples() {
    let lags = default_validation_lags();
    let exp = KernelSpec::exponential(1.0, 0.7).unwrap();
    assert!(validate_kernel(&exp, 0.7, &lags).unwrap().pass);

    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.25).collect();
    let heavy: Vec<f64> = grid.iter().map(|s| (1.0 + s).powf(-0.6)).collect();
    let heavy = KernelSpec::tabulated(grid.clone(), heavy, -0.6, 0.9).unwrap();
    let report = validate_kernel(&heavy, 0.9, &lags).unwrap();
    assert!(!report.pass, "{report:?}");

    let zero = KernelSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0; 3], -2.0, 0.7).unwrap();
    let report = validate_kernel(&zero, 0.7, &lags).unwrap();
    assert!(!report.pass);
    assert!(!report.diagnostics.is_empty());

    assert!(validate_kernel(&exp, 0.7, &[]).is_err());
    assert!(validate_kernel(&exp, 0.7, &[1.0, -2.0]).is_err());
}

#[test]
fn volterra_rejects_short_history() {
    let p = make_params(0.7, 1).unwrap();
    let kernel = KernelSpec::exponential(1.0, 0.7).unwrap();
    let cfg = SimConfig { history: 2.0, ..SimConfig::new(10, 0.1, 1) };
    assert!(simulate_volterra(&kernel, &p, &cfg).is_err());
}

proptest! {
    #[test]
    fn hou_couplings_contract_exponentially(
        lambda in 0.1f64..3.0,
        y0 in -5.0f64..5.0,
        y1 in -5.0f64..5.0,
        dz in proptest::collection::vec(-0.5f64..0.5, 40),
    ) {
        let h = 0.05;
        let a = hou_from_increments(lambda, 1.3, y0, &dz, h, 2, true).unwrap();
        let b = hou_from_increments(lambda, 1.3, y1, &dz, h, 2, true).unwrap();
        for (n, (x, y)) in a.iter().zip(&b).enumerate() {
            let want = (-lambda * 2.0 * h * n as f64).exp() * (y0 - y1);
            prop_assert!((x - y - want).abs() < 1e-12 * (1.0 + (y0 - y1).abs()));
        }
    }

    #[test]
    fn path_files_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 2..50), dt in 0.01f64..2.0) {
        let dir = TempDir::new().unwrap();
        let p = PathGrid::new(0.0, dt, values, PathMeta::default()).unwrap();
        save_binary(&p, &dir.path().join("p.bin")).unwrap();
        let back = read_binary(std::fs::File::open(dir.path().join("p.bin")).unwrap()).unwrap();
        prop_assert_eq!(&back.values, &p.values);
        prop_assert_eq!(back.dt, p.dt);
        save_csv(&p, &dir.path().join("p.csv")).unwrap();
        let back = read_csv(std::fs::File::open(dir.path().join("p.csv")).unwrap()).unwrap();
        prop_assert_eq!(&back.values, &p.values);
        prop_assert!((back.dt - dt).abs() < 1e-9 * dt.max(1.0));
    }
}
