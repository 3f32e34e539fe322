//! Acceptance suite: each criterion is a seeded experiment with pinned tolerances.

use std::collections::BTreeMap;
use std::time::Instant;

use hermite_core::chaos::{
    c1_constant, chaos_projection_profile, enumerate_contractions, ContractionVector, HurstParams, PowerSeries,
};
use hermite_core::functional::{
    cross_independence, default_eps_ladder, eps_seed, functional_samples, gaussianity_report,
    limit_covariance_srd, scaling_fit, Centering, Model, SeriesEvaluator, SimSettings,
};
use hermite_core::homogenization::{
    lift_symmetric, run_homogenization, solve_rough_tol, solve_young_tol, HomogenizationSpec, VectorField,
};
use hermite_core::process::{
    hermite_source, simulate_fbm, HermiteBackend, KernelSpec, PathGrid, PathMeta, RosenblattGenerator, SimConfig,
};
use hermite_core::reference::{fou_covariance, gaussian_limit_covariance};
use hermite_core::rng::{derive_seed, stream_rng};
use hermite_core::special::hermite_coefficients;
use hermite_core::stats::{excess_kurtosis, mean, ols, variance};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConfigError;

/// Master seed of the default suite.
pub const DEFAULT_SEED: u64 = 1;

pub const CRITERIA: [&str; 9] = [
    "combinatorics",
    "hermite_law",
    "covariance_decay",
    "srd_scaling",
    "lrd_scaling",
    "mixed_independence",
    "solver_orders",
    "homogenization",
    "determinism",
];

const DETERMINISM: &str = "determinism";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Near,
    Below,
    AtMost,
    AtLeast,
    Flag,
}

impl Check {
    /// |value − target| ≤ tolerance.
    pub fn near(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::Near, value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }

    /// value < bound.
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::Below, value, target: bound, tolerance: 0.0, pass: value < bound }
    }

    /// value ≤ bound.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::AtMost, value, target: bound, tolerance: 0.0, pass: value <= bound }
    }

    /// value ≥ bound.
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), kind: CheckKind::AtLeast, value, target: bound, tolerance: 0.0, pass: value >= bound }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), kind: CheckKind::Flag, value: ok as u8 as f64, target: 1.0, tolerance: 0.0, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub index: usize,
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// SHA-256 over the raw simulated data the checks were computed from.
    pub digest: String,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionResult {
    /// Everything except the timing, for run-to-run comparison.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.seconds = 0.0;
        serde_json::to_string(&c).expect("serializable")
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let body = match &self.error {
            Some(e) => format!("error: {e}"),
            None => self
                .checks
                .iter()
                .map(|c| match c.kind {
                    CheckKind::Flag => format!("{} {}", c.name, if c.pass { "ok" } else { "MISMATCH" }),
                    CheckKind::Near => format!("{}={} (target {} ± {})", c.name, num(c.value), num(c.target), num(c.tolerance)),
                    CheckKind::Below => format!("{}={} (< {})", c.name, num(c.value), num(c.target)),
                    CheckKind::AtMost => format!("{}={} (<= {})", c.name, num(c.value), num(c.target)),
                    CheckKind::AtLeast => format!("{}={} (>= {})", c.name, num(c.value), num(c.target)),
                })
                .collect::<Vec<_>>()
                .join("; "),
        };
        format!("{verdict} {} {} [{:.1} s] {body}", self.index, self.name, self.seconds)
    }
}

fn num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

/// Resolves `--only` names (comma-separated lists allowed); empty selects every criterion.
pub fn select(only: &[String]) -> Result<Vec<&'static str>, ConfigError> {
    let wanted: Vec<&str> = only.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()).collect();
    if wanted.is_empty() {
        return Ok(CRITERIA.to_vec());
    }
    for w in &wanted {
        if !CRITERIA.contains(w) {
            return Err(ConfigError(format!("unknown criterion {w:?}; known: {}", CRITERIA.join(", "))));
        }
    }
    Ok(CRITERIA.iter().copied().filter(|c| wanted.contains(c)).collect())
}

fn index_of(name: &str) -> usize {
    CRITERIA.iter().position(|c| *c == name).expect("registered") + 1
}

type Outcome = (Vec<Check>, String);

fn run_one(name: &str, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let s = derive_seed(seed, name);
    let res: anyhow::Result<Outcome> = match name {
        "combinatorics" => combinatorics(),
        "hermite_law" => hermite_law(s),
        "covariance_decay" => covariance_decay(s),
        "srd_scaling" => srd_scaling(s),
        "lrd_scaling" => lrd_scaling(s),
        "mixed_independence" => mixed_independence(s),
        "solver_orders" => solver_orders(s),
        "homogenization" => homogenization(s),
        other => Err(anyhow::anyhow!("criterion {other} has no runner")),
    };
    let seconds = start.elapsed().as_secs_f64();
    match res {
        Ok((checks, digest)) => CriterionResult {
            index: index_of(name),
            name: name.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            digest,
            error: None,
            seconds,
        },
        Err(e) => CriterionResult {
            index: index_of(name),
            name: name.into(),
            pass: false,
            checks: Vec::new(),
            digest: String::new(),
            error: Some(format!("{e:#}")),
            seconds,
        },
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool").install(f)
}

/// Runs the named criteria, calling `emit` with each verdict line as it completes.
///
/// Determinism reruns criteria 1–8 in a 1-thread and an 8-thread pool and compares the
/// results; when it is selected the other criteria run in the 8-thread pool so their
/// results serve as the 8-thread side.
pub fn run_suite(names: &[&str], seed: u64, mut emit: impl FnMut(&str)) -> SuiteReport {
    let with_det = names.contains(&DETERMINISM);
    let mut results: BTreeMap<&str, CriterionResult> = BTreeMap::new();
    for name in names.iter().copied().filter(|n| *n != DETERMINISM) {
        let r = if with_det { in_pool(8, || run_one(name, seed)) } else { run_one(name, seed) };
        emit(&r.line());
        results.insert(name, r);
    }
    let mut criteria: Vec<CriterionResult> = names
        .iter()
        .filter(|n| **n != DETERMINISM)
        .map(|n| results[n].clone())
        .collect();
    if with_det {
        let r = determinism(seed, &results);
        emit(&r.line());
        criteria.push(r);
    }
    SuiteReport { seed, criteria }
}

fn determinism(seed: u64, done: &BTreeMap<&str, CriterionResult>) -> CriterionResult {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut hasher = Sha256::new();
    for name in CRITERIA.iter().copied().filter(|n| *n != DETERMINISM) {
        let eight = match done.get(name) {
            Some(r) => r.clone(),
            None => in_pool(8, || run_one(name, seed)),
        };
        let one = in_pool(1, || run_one(name, seed));
        let a = eight.fingerprint();
        let b = one.fingerprint();
        hasher.update(a.as_bytes());
        checks.push(Check::flag(&format!("{name}_identical"), a == b));
    }
    CriterionResult {
        index: index_of(DETERMINISM),
        name: DETERMINISM.into(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        digest: hex(&hasher.finalize()),
        error: None,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of f64 data by bit pattern.
fn digest_f64<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut h = Sha256::new();
    for row in rows {
        for v in row {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex(&h.finalize())
}

// ---------------------------------------------------------------- 1

/// Number of partial matchings of `k` points by count of unmatched points.
fn pairing_profile(k: u32) -> BTreeMap<u32, BigUint> {
    fn walk(free: &mut Vec<bool>, unmatched: u32, out: &mut BTreeMap<u32, BigUint>) {
        let Some(i) = free.iter().position(|f| *f) else {
            *out.entry(unmatched).or_default() += 1u32;
            return;
        };
        free[i] = false;
        walk(free, unmatched + 1, out);
        for j in i + 1..free.len() {
            if free[j] {
                free[j] = false;
                walk(free, unmatched, out);
                free[j] = true;
            }
        }
        free[i] = true;
    }
    let mut out = BTreeMap::new();
    walk(&mut vec![true; k as usize], 0, &mut out);
    out
}

/// All r ∈ {0..m}^{k−1} passing the admissibility chain, found by exhaustive search.
fn brute_force_vectors(k: u32, m: u32) -> Vec<(Vec<u32>, u32, u128)> {
    let len = (k - 1) as usize;
    let total = (m as usize + 1).pow(len as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut r = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            r.push((c % (m as usize + 1)) as u32);
            c /= m as usize + 1;
        }
        r.reverse();
        let mut deg = m;
        let mut c1: u128 = 1;
        let mut ok = true;
        for &rj in &r {
            if rj > deg.min(m) {
                ok = false;
                break;
            }
            c1 *= factorial(rj) * binom(m, rj) * binom(deg, rj);
            deg = deg + m - 2 * rj;
        }
        if ok {
            out.push((r, deg, c1));
        }
    }
    out.sort();
    out
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

fn binom(n: u32, k: u32) -> u128 {
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

fn combinatorics() -> anyhow::Result<Outcome> {
    let mut checks = Vec::new();
    let mut profiles_ok = true;
    for k in 1..=8 {
        profiles_ok &= chaos_projection_profile(k, 1)? == pairing_profile(k);
    }
    checks.push(Check::flag("m1_profiles_k_le_8", profiles_ok));
    let mut vectors_ok = true;
    for k in 2..=4 {
        let mut ours: Vec<(Vec<u32>, u32, u128)> = enumerate_contractions(k, 2)?
            .iter()
            .map(|v: &ContractionVector| {
                let c1: u128 = c1_constant(v).try_into().unwrap_or(u128::MAX);
                (v.r.clone(), v.delta, c1)
            })
            .collect();
        ours.sort();
        vectors_ok &= ours == brute_force_vectors(k, 2);
    }
    checks.push(Check::flag("m2_vectors_k_le_4", vectors_ok));
    Ok((checks, String::new()))
}

// ---------------------------------------------------------------- 2

fn hermite_law(seed: u64) -> anyhow::Result<Outcome> {
    const N: usize = 512;
    const REPLICAS: u64 = 1000;
    let mut checks = Vec::new();
    let mut data = Vec::new();
    for h in [0.7, 0.9] {
        let params = HurstParams::new(h, 2)?;
        let exact = RosenblattGenerator::new(&params, N, 1.0, None)?.discrete_covariance(&[N])[0][0];
        checks.push(Check::near(&format!("H{h}_exact_var"), exact, 1.0, 0.05));
        let src = hermite_source(&params, N, 1.0 / N as f64, HermiteBackend::Quadrature, None)?;
        let hs = derive_seed(seed, &format!("H={h}"));
        let rows: Vec<[f64; 3]> = (0..REPLICAS)
            .into_par_iter()
            .map(|r| {
                let dz = src.sample(&mut stream_rng(hs, r)).swap_remove(0);
                let mut z = 0.0;
                let mut out = [0.0; 3];
                for (i, d) in dz.iter().enumerate() {
                    z += d;
                    match i + 1 {
                        128 => out[0] = z,
                        256 => out[1] = z,
                        512 => out[2] = z,
                        _ => {}
                    }
                }
                out
            })
            .collect();
        let fbm_cov = |s: f64, t: f64| 0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h));
        let product_check = |name: &str, a: usize, b: usize, target: f64| {
            let p: Vec<f64> = rows.iter().map(|r| r[a] * r[b]).collect();
            let se = (variance(&p) / p.len() as f64).sqrt();
            Check::near(name, mean(&p), target, 3.0 * se)
        };
        checks.push(product_check(&format!("H{h}_mc_var"), 2, 2, 1.0));
        checks.push(product_check(&format!("H{h}_cov_0.25_0.5"), 0, 1, fbm_cov(0.25, 0.5)));
        checks.push(product_check(&format!("H{h}_cov_0.5_1"), 1, 2, fbm_cov(0.5, 1.0)));
        data.extend(rows.into_iter().flatten());
    }
    Ok((checks, digest_f64([data.as_slice()])))
}

// ---------------------------------------------------------------- 3

fn covariance_decay(seed: u64) -> anyhow::Result<Outcome> {
    const H: f64 = 0.8;
    const HORIZON: f64 = 1000.0;
    const REPLICAS: usize = 400;
    let settings = SimSettings { dt: 0.1, ..Default::default() };
    let lags: Vec<usize> = (5..=50).collect();
    let mut checks = Vec::new();
    let mut data = Vec::new();
    for m in [1u32, 2] {
        let model = Model::new(HurstParams::new(H, m)?, KernelSpec::exponential(1.0, H)?, settings.clone());
        let sampler = model.sampler(HORIZON)?;
        let per_unit = (1.0 / sampler.dt()).round() as usize;
        let sums = hermite_core::functional::replica_map(&sampler, derive_seed(seed, &format!("m={m}")), REPLICAS, |_, y| {
            lags.iter()
                .map(|&l| {
                    let s = l * per_unit;
                    let n = y.len() - s;
                    (0..n).map(|i| y[i] * y[i + s]).sum::<f64>() / n as f64
                })
                .collect::<Vec<f64>>()
        })?;
        let cov: Vec<f64> = (0..lags.len()).map(|j| sums.iter().map(|r| r[j]).sum::<f64>() / sums.len() as f64).collect();
        if cov.iter().any(|c| !(*c > 0.0)) {
            anyhow::bail!("non-positive empirical lag covariance for m = {m}");
        }
        let x: Vec<f64> = lags.iter().map(|&l| (l as f64).ln()).collect();
        let y: Vec<f64> = cov.iter().map(|c| c.ln()).collect();
        checks.push(Check::near(&format!("m{m}_slope"), ols(&x, &y).slope, 2.0 * H - 2.0, 0.1));
        data.extend(cov);
    }
    Ok((checks, digest_f64([data.as_slice()])))
}

// ---------------------------------------------------------------- 4, 5

fn h2_model(h: f64) -> anyhow::Result<(Model, SeriesEvaluator)> {
    let model = Model::new(HurstParams::new(h, 1)?, KernelSpec::exponential(1.0, h)?, SimSettings::default());
    let eval = SeriesEvaluator::new("H2", &PowerSeries::hermite(2), &model, Centering::Mean)?;
    Ok((model, eval))
}

/// Terminal samples over the default ladder and the fitted variance-growth slope.
fn ladder(model: &Model, eval: &SeriesEvaluator, replicas: usize, seed: u64) -> anyhow::Result<(Vec<Vec<f64>>, f64)> {
    let eps = default_eps_ladder();
    let mut terminals = Vec::new();
    let mut raw = Vec::new();
    for &e in &eps {
        let s = functional_samples(std::slice::from_ref(eval), model, e, &[1.0], replicas, eps_seed(seed, e))?.swap_remove(0);
        let alpha = e.powf(s.regime.scaling_exponent);
        let t = s.terminal();
        raw.push(t.iter().map(|v| v / alpha).collect::<Vec<f64>>());
        terminals.push(t);
    }
    let fit = scaling_fit(&eps, &raw, model, eval.rank)?;
    Ok((terminals, fit.slope))
}

fn srd_scaling(seed: u64) -> anyhow::Result<Outcome> {
    let (model, eval) = h2_model(0.7)?;
    let (terms, slope) = ladder(&model, &eval, 2000, derive_seed(seed, "ladder"))?;
    let mut checks = vec![Check::near("slope", slope, 1.0, 0.1)];
    let big = functional_samples(std::slice::from_ref(&eval), &model, 1e-3, &[1.0], 5000, derive_seed(seed, "kurtosis"))?
        .swap_remove(0)
        .terminal();
    checks.push(Check::near("excess_kurtosis", excess_kurtosis(&big), 0.0, 0.15));
    let lam = limit_covariance_srd(&eval, &eval, &model, 50.0, 16_000, derive_seed(seed, "lambda"))?;
    let lam_ref = reference_lambda(&eval, 0.7)?;
    checks.push(Check::near("lambda_rel_err", lam.value / lam_ref - 1.0, 0.0, 0.1));
    let mut rows: Vec<&[f64]> = terms.iter().map(|t| t.as_slice()).collect();
    rows.push(&big);
    let lv = [lam.value];
    rows.push(&lv);
    Ok((checks, digest_f64(rows)))
}

/// 2∫cov of G(y) for the continuous Gaussian stationary law (λ = 1), by quadrature.
fn reference_lambda(eval: &SeriesEvaluator, h: f64) -> anyhow::Result<f64> {
    let cov = |s: f64| fou_covariance(1.0, h, s);
    let a = hermite_coefficients(&eval.series.coefficients, cov(0.0).sqrt());
    Ok(gaussian_limit_covariance(&a, &a, cov, 200.0, (h * (2.0 * h - 1.0), 2.0 * h - 2.0))?)
}

fn lrd_scaling(seed: u64) -> anyhow::Result<Outcome> {
    let (model, eval) = h2_model(0.9)?;
    let (terms, slope) = ladder(&model, &eval, 2000, derive_seed(seed, "ladder"))?;
    let mut checks = vec![Check::near("slope", slope, 1.6, 0.1)];
    let last = functional_samples(std::slice::from_ref(&eval), &model, 1e-3, &[1.0], 2000, derive_seed(seed, "skewness"))?
        .swap_remove(0);
    let skew = gaussianity_report(&last)?.skewness.ok_or_else(|| anyhow::anyhow!("no skewness estimate"))?;
    checks.push(Check::at_least("skewness_over_se", skew.value.abs() / skew.stderr, 3.0));
    let mut rows: Vec<&[f64]> = terms.iter().map(|t| t.as_slice()).collect();
    let lt = last.terminal();
    rows.push(&lt);
    Ok((checks, digest_f64(rows)))
}

// ---------------------------------------------------------------- 6

fn mixed_independence(seed: u64) -> anyhow::Result<Outcome> {
    let h = 0.55;
    let model = Model::new(HurstParams::new(h, 1)?, KernelSpec::exponential(1.0, h)?, SimSettings::default());
    let lrd = SeriesEvaluator::new("y", &PowerSeries::identity(), &model, Centering::Mean)?;
    let srd = SeriesEvaluator::new("H2", &PowerSeries::hermite(2), &model, Centering::Mean)?;
    let s = functional_samples(&[srd, lrd], &model, 1e-3, &[1.0], 2000, seed)?;
    let rep = cross_independence(&s[0], &s[1])?;
    let stat = rep.independence_statistic.ok_or_else(|| anyhow::anyhow!("no independence statistic"))?;
    let checks = vec![Check::near("corr_of_squares", stat.value, 0.0, 3.0 * stat.stderr)];
    let (a, b) = (s[0].terminal(), s[1].terminal());
    Ok((checks, digest_f64([a.as_slice(), b.as_slice()])))
}

// ---------------------------------------------------------------- 7

fn solver_orders(seed: u64) -> anyhow::Result<Outcome> {
    let field = VectorField::Linear { a: 1.0 };
    let x = |t: f64| t + 0.5 * (3.0 * t).sin();
    let exact = x(1.0).exp();
    let ns = [16usize, 32, 64, 128, 256];
    let mut young = Vec::new();
    let mut davie = Vec::new();
    let mut chen: f64 = 0.0;
    for &n in &ns {
        let dt = 1.0 / n as f64;
        let path = PathGrid::new(0.0, dt, (0..=n).map(|i| x(i as f64 * dt)).collect(), PathMeta::default())?;
        let lift = lift_symmetric(&path);
        chen = chen.max(lift.chen_residual());
        let yv = *solve_young_tol(&field, &path, 1.0, f64::INFINITY)?.values.last().expect("non-empty");
        let dv = *solve_rough_tol(&field, &lift, 1.0, f64::INFINITY)?.values.last().expect("non-empty");
        young.push((yv - exact).abs());
        davie.push((dv - exact).abs());
    }
    for r in 0..20u64 {
        let mut cfg = SimConfig::new(1024, 1.0 / 1024.0, seed);
        cfg.replica = r;
        chen = chen.max(lift_symmetric(&simulate_fbm(0.6, &cfg)?).chen_residual());
    }
    let ldt: Vec<f64> = ns.iter().map(|&n| -(n as f64).ln()).collect();
    let order = |e: &[f64]| ols(&ldt, &e.iter().map(|v| v.ln()).collect::<Vec<_>>()).slope;
    let checks = vec![
        Check::near("young_order", order(&young), 1.0, 0.3),
        Check::near("davie_order", order(&davie), 2.0, 0.3),
        Check::at_most("chen_residual", chen, 1e-12),
    ];
    Ok((checks, digest_f64([young.as_slice(), davie.as_slice()])))
}

// ---------------------------------------------------------------- 8

fn homogenization(seed: u64) -> anyhow::Result<Outcome> {
    let mut checks = Vec::new();
    let mut data = Vec::new();
    for (label, h) in [("lrd", 0.9), ("srd", 0.7)] {
        let (model, eval) = h2_model(h)?;
        let spec = HomogenizationSpec { seed: derive_seed(seed, label), ..Default::default() };
        let out = run_homogenization(&eval, &model, &spec)?;
        checks.push(Check::below(&format!("{label}_ks"), out.weak.ks_distance, out.weak.ks_critical));
        data.extend(out.terminal_eps);
        data.extend(out.terminal_limit);
    }
    Ok((checks, digest_f64([data.as_slice()])))
}
