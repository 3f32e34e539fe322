//! Rank-m Hermite increments: off-diagonal kernel quadrature (m = 2) and Hermite partial sums.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::fgn::{fgn_autocov, FgnGenerator};
use super::source::IncrementSource;
use crate::chaos::HurstParams;
use crate::error::{Error, Result};
use crate::special::{beta, hermite_he, ln_factorial};

/// Relative variance allowed to leak through the far-history cut.
pub const FAR_TAIL_TOL: f64 = 1e-4;
const FAR_RATIO: f64 = 1.15;

/// Rosenblatt increments on a grid of n steps over [0, horizon].
///
/// Z_t = K ∫_0^t (X(s)² − D(s)) ds where X(s) = Σ_c u_c(s) ΔB_c uses cell averages of
/// (s−ξ)_+^{H₀−3/2} and D removes the same-cell terms. Noise cells are uniform on
/// [−1, 1] (unit time, `cell_refine` cells per output step) and geometric further
/// back. Time scaling uses self-similarity.
pub struct RosenblattGenerator {
    n: usize,
    n_back: usize,
    sub: usize,
    refine: usize,
    a: f64,
    kconst: f64,
    scale: f64,
    fft_len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    // Per sub-point: offset of the top cell within a step, and spectra of φ and φ².
    spectra: Vec<(usize, Vec<Complex<f64>>, Vec<Complex<f64>>)>,
    far_width: Vec<f64>,
    // Row (q*sub + k) holds u_c(s) for far cells.
    far_u: Vec<f64>,
    pub far_history: f64,
    pub tail_estimate: f64,
}

pub const DEFAULT_CELL_REFINE: usize = 4;

fn tail_relative_variance(params: &HurstParams, a: f64, dist: f64) -> f64 {
    let k2 = params.unit_variance_constant().powi(2);
    let h0 = params.h0;
    let b = beta(a + 1.0, -2.0 * a - 1.0);
    4.0 * k2 * dist.powf(2.0 * a + 1.0) / (-2.0 * a - 1.0) * b / (h0 * (2.0 * h0 - 1.0))
}

impl RosenblattGenerator {
    pub fn new(params: &HurstParams, n: usize, horizon: f64, far_history: Option<f64>) -> Result<Self> {
        Self::with_options(params, n, horizon, far_history, 1, DEFAULT_CELL_REFINE)
    }

    pub fn with_options(
        params: &HurstParams,
        n: usize,
        horizon: f64,
        far_history: Option<f64>,
        sub: usize,
        refine: usize,
    ) -> Result<Self> {
        if params.m != 2 {
            return Err(Error::Unsupported("quadrature backend implemented for m = 2".into()));
        }
        if n < 2 || sub < 1 || refine < 1 {
            return Err(Error::InvalidParameter("need n >= 2, sub >= 1, refine >= 1".into()));
        }
        let a = params.h0 - 1.5;
        let n_back = n;
        let cells = (n_back + n) * refine;
        let fft_len = 2 * cells;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        let mut gen = Self {
            n,
            n_back,
            sub,
            refine,
            a,
            kconst: params.unit_variance_constant(),
            scale: horizon.powf(params.h),
            fft_len,
            fwd: fwd.clone(),
            inv,
            spectra: Vec::new(),
            far_width: Vec::new(),
            far_u: Vec::new(),
            far_history: 0.0,
            tail_estimate: 0.0,
        };
        gen.spectra = (0..sub)
            .map(|k| {
                let (top, frac) = gen.top_cell(k);
                let mut phi = vec![Complex::new(0.0, 0.0); fft_len];
                let mut phi2 = vec![Complex::new(0.0, 0.0); fft_len];
                for i in 0..cells {
                    let v = gen.cell_value(i, frac);
                    phi[i].re = v;
                    phi2[i].re = v * v;
                }
                fwd.process(&mut phi);
                fwd.process(&mut phi2);
                (top, phi, phi2)
            })
            .collect();

        let far_history = match far_history {
            Some(l) => l,
            None => {
                let mut l = 10.0;
                while tail_relative_variance(params, a, l) > FAR_TAIL_TOL && l < 1e250 {
                    l *= 10.0;
                }
                l
            }
        };
        let tail_estimate = tail_relative_variance(params, a, far_history);
        if tail_estimate > 1e-3 {
            log::warn!(
                "history cut at {far_history:.3e} leaves relative variance bias {tail_estimate:.3e}"
            );
        }
        let delta = 1.0 / n as f64;
        let ap1 = a + 1.0;
        let mut bounds = vec![-1.0];
        let mut w = delta * FAR_RATIO;
        while *bounds.last().unwrap() > -far_history {
            let b = bounds.last().unwrap() - w;
            bounds.push(b);
            w *= FAR_RATIO;
        }
        let far_width: Vec<f64> = bounds.windows(2).map(|p| p[0] - p[1]).collect();
        let mut far_u = Vec::with_capacity(n * sub * far_width.len());
        for q in 0..n {
            for k in 0..sub {
                let s = (q as f64 + (k as f64 + 0.5) / sub as f64) * delta;
                for (c, wc) in far_width.iter().enumerate() {
                    let (hi, lo) = (bounds[c], bounds[c + 1]);
                    far_u.push(((s - lo).powf(ap1) - (s - hi).powf(ap1)) / (ap1 * wc));
                }
            }
        }
        gen.far_width = far_width;
        gen.far_u = far_u;
        gen.far_history = far_history;
        gen.tail_estimate = tail_estimate;
        Ok(gen)
    }

    pub fn far_cells(&self) -> usize {
        self.far_width.len()
    }

    fn fine_cells(&self) -> usize {
        (self.n_back + self.n) * self.refine
    }

    fn cell_width(&self) -> f64 {
        1.0 / (self.n * self.refine) as f64
    }

    /// Last cell starting before sub-point k of a step, and the fraction of it covered.
    fn top_cell(&self, k: usize) -> (usize, f64) {
        let pos = (k as f64 + 0.5) / self.sub as f64 * self.refine as f64;
        let top = pos.ceil() as usize - 1;
        (top, pos - top as f64)
    }

    /// Average of (s−ξ)^a over the cell i places below the top cell.
    fn cell_value(&self, i: usize, frac: f64) -> f64 {
        let ap1 = self.a + 1.0;
        let tau = i as f64 + frac;
        let v = if i == 0 {
            frac.powf(ap1)
        } else {
            tau.powf(ap1) - (tau - 1.0).powf(ap1)
        };
        v * self.cell_width().powf(self.a) / ap1
    }

    /// Unit-horizon increments.
    fn unit_increments(&self, xi: &[f64]) -> Vec<f64> {
        let cells = self.fine_cells();
        let sd = self.cell_width().sqrt();
        let nf = self.far_width.len();
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
        for i in 0..cells {
            let b = sd * xi[i];
            buf[i] = Complex::new(b, b * b);
        }
        self.fwd.process(&mut buf);
        let l = self.fft_len;
        // Split the packed transform into the spectra of ΔB and ΔB².
        let mut sa = vec![Complex::new(0.0, 0.0); l];
        let mut sb = vec![Complex::new(0.0, 0.0); l];
        for k in 0..l {
            let p = buf[k];
            let q = buf[(l - k) % l].conj();
            sa[k] = (p + q) * 0.5;
            sb[k] = (p - q) * Complex::new(0.0, -0.5);
        }
        let far_b: Vec<f64> = self
            .far_width
            .iter()
            .zip(&xi[cells..cells + nf])
            .map(|(w, x)| w.sqrt() * x)
            .collect();
        let far_b2: Vec<f64> = far_b.iter().map(|b| b * b).collect();
        let weight = self.kconst / (self.n * self.sub) as f64;
        let mut out = vec![0.0; self.n];
        let norm = 1.0 / l as f64;
        let base = self.n_back * self.refine;
        for (k, (top, phi, phi2)) in self.spectra.iter().enumerate() {
            let mut r: Vec<Complex<f64>> = (0..l)
                .map(|j| sa[j] * phi[j] + Complex::new(0.0, 1.0) * sb[j] * phi2[j])
                .collect();
            self.inv.process(&mut r);
            for q in 0..self.n {
                let row = &self.far_u[(q * self.sub + k) * nf..(q * self.sub + k + 1) * nf];
                let (mut x, mut d) = (0.0, 0.0);
                for c in 0..nf {
                    x += row[c] * far_b[c];
                    d += row[c] * row[c] * far_b2[c];
                }
                let z = r[base + q * self.refine + top] * norm;
                x += z.re;
                d += z.im;
                out[q] += weight * (x * x - d);
            }
        }
        out
    }

    /// u_c(s) for every cell (fine then far) at sub-point k of step q.
    fn row(&self, q: usize, k: usize) -> Vec<f64> {
        let (top, frac) = self.top_cell(k);
        let fine = self.fine_cells();
        let top_idx = self.n_back * self.refine + q * self.refine + top;
        let mut out = vec![0.0; fine + self.far_width.len()];
        for (c, v) in out.iter_mut().enumerate().take(top_idx + 1) {
            *v = self.cell_value(top_idx - c, frac);
        }
        let nf = self.far_width.len();
        out[fine..].copy_from_slice(&self.far_u[(q * self.sub + k) * nf..(q * self.sub + k + 1) * nf]);
        out
    }

    /// Exact covariance matrix of the discretized process at the given grid indices
    /// (index i is the sum of the first i increments), unit horizon.
    pub fn discrete_covariance(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        let fine = self.fine_cells();
        let widths: Vec<f64> = std::iter::repeat(self.cell_width())
            .take(fine)
            .chain(self.far_width.iter().copied())
            .collect();
        let rows: Vec<Vec<f64>> = (0..self.n)
            .flat_map(|q| (0..self.sub).map(move |k| (q, k)))
            .map(|(q, k)| {
                let r = self.row(q, k);
                r.iter().zip(&widths).map(|(u, w)| u * w.sqrt()).collect()
            })
            .collect();
        let qn = rows.len();
        let mut g = vec![vec![0.0; qn]; qn];
        for p in 0..qn {
            for q in p..qn {
                let (mut mm, mut nn) = (0.0, 0.0);
                for (x, y) in rows[p].iter().zip(&rows[q]) {
                    let t = x * y;
                    mm += t;
                    nn += t * t;
                }
                let v = mm * mm - nn;
                g[p][q] = v;
                g[q][p] = v;
            }
        }
        // prefix[a][b] = Σ_{p<a, q<b} g[p][q]
        let mut prefix = vec![vec![0.0; qn + 1]; qn + 1];
        for p in 0..qn {
            let mut run = 0.0;
            for q in 0..qn {
                run += g[p][q];
                prefix[p + 1][q + 1] = prefix[p][q + 1] + run;
            }
        }
        let w = self.kconst / (self.n * self.sub) as f64;
        let c = 2.0 * w * w;
        idx.iter()
            .map(|&i| idx.iter().map(|&j| c * prefix[i * self.sub][j * self.sub]).collect())
            .collect()
    }
}

impl IncrementSource for RosenblattGenerator {
    fn steps(&self) -> usize {
        self.n
    }
    fn noise_len(&self) -> usize {
        self.fine_cells() + self.far_width.len()
    }
    fn increments_from_noise(&self, xi: &[f64]) -> Vec<Vec<f64>> {
        let mut v = self.unit_increments(xi);
        v.iter_mut().for_each(|x| *x *= self.scale);
        vec![v]
    }
    fn method(&self) -> String {
        format!(
            "rosenblatt-quadrature(sub={}, far_cells={}, history={:.1e})",
            self.sub,
            self.far_width.len(),
            self.far_history
        )
    }
}

/// Increments c·He_m(g_i) of fGn g with Hurst H₀, normalized so Var(Z_horizon) = 1·horizon^{2H}.
pub struct HermiteSumGenerator {
    m: usize,
    gen: FgnGenerator,
    scale: f64,
}

impl HermiteSumGenerator {
    pub fn new(params: &HurstParams, n: usize, horizon: f64) -> Result<Self> {
        let gen = FgnGenerator::new(params.h0, n)?;
        let m = params.m as usize;
        let mut s = n as f64;
        for k in 1..n {
            s += 2.0 * (n - k) as f64 * fgn_autocov(params.h0, k).powi(m as i32);
        }
        let var = (ln_factorial(m as u64)).exp() * s;
        Ok(Self { m, gen, scale: horizon.powf(params.h) / var.sqrt() })
    }
}

impl IncrementSource for HermiteSumGenerator {
    fn steps(&self) -> usize {
        self.gen.len()
    }
    fn noise_len(&self) -> usize {
        self.gen.noise_len()
    }
    fn paths_per_noise(&self) -> usize {
        2
    }
    fn increments_from_noise(&self, xi: &[f64]) -> Vec<Vec<f64>> {
        let (a, b) = self.gen.from_noise_pair(xi);
        [a, b]
            .into_iter()
            .map(|g| g.into_iter().map(|x| self.scale * hermite_he(self.m, x)).collect())
            .collect()
    }
    fn method(&self) -> String {
        format!("hermite-sum(m={})", self.m)
    }
}
