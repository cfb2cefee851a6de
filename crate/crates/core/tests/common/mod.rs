//! Test-side oracles that share no code with the library's density routines.
#![allow(dead_code)]

use stable_ldp::path_space::{augmented_graph, CadlagPath};
use std::f64::consts::PI;

/// p_1(x) by Fourier inversion of E[e^{iuL_1}] = exp((-iu)^α):
/// (1/π) ∫_0^∞ exp(u^α cos(πα/2)) cos(u^α sin(πα/2) + ux) du, composite
/// Simpson after u = v³, which smooths the u^α kink at the origin.
pub fn p1_fourier(alpha: f64, x: f64) -> f64 {
    let (s, c) = (PI * alpha / 2.0).sin_cos();
    let upper = (40.0 / -c).powf(1.0 / alpha);
    let vmax = upper.cbrt();
    let freq = 3.0 * upper.powf(2.0 / 3.0) * (x.abs() + alpha * upper.powf(alpha - 1.0) * s.abs() + 1.0);
    let mut m = ((vmax * freq * 24.0 / (2.0 * PI)).ceil() as usize).max(4000);
    m += m % 2;
    let h = vmax / m as f64;
    let f = |v: f64| {
        let u = v * v * v;
        let ua = u.powf(alpha);
        3.0 * v * v * (ua * c).exp() * (ua * s + u * x).cos()
    };
    let mut acc = f(0.0) + f(vmax);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(h * i as f64);
    }
    (acc * h / 3.0 / PI).max(0.0)
}

/// p_t(x) from the Fourier oracle and self-similarity.
pub fn pt_fourier(alpha: f64, t: f64, x: f64) -> f64 {
    let s = t.powf(-1.0 / alpha);
    s * p1_fourier(alpha, s * x)
}

/// Piecewise-linear density on a grid with its trapezoid cumulative.
pub struct GridCdf {
    x: Vec<f64>,
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn new(x: Vec<f64>, pdf: &[f64]) -> Self {
        let mut cum = vec![0.0];
        for i in 1..x.len() {
            let c = cum[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (x[i] - x[i - 1]);
            cum.push(c);
        }
        let total = *cum.last().unwrap();
        for c in &mut cum {
            *c /= total;
        }
        GridCdf { x, cum }
    }

    /// Linear interpolation of the cumulative; adequate on fine grids.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= self.x[0] {
            return 0.0;
        }
        let n = self.x.len();
        if z >= self.x[n - 1] {
            return 1.0;
        }
        let i = self.x.partition_point(|&v| v <= z) - 1;
        let w = (z - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.cum[i] + w * (self.cum[i + 1] - self.cum[i])
    }
}

/// CDF of the bridge from 0 to a at time t, p_t(x) p_{1-t}(a-x) normalised.
pub fn bridge_marginal_oracle(alpha: f64, a: f64, t: f64) -> GridCdf {
    let half = 8.0 + a.abs();
    let n = 4001;
    let x: Vec<f64> = (0..n).map(|i| a * t - half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
    let pdf: Vec<f64> = x
        .iter()
        .map(|&v| pt_fourier(alpha, t, v) * pt_fourier(alpha, 1.0 - t, a - v))
        .collect();
    GridCdf::new(x, &pdf)
}

/// Sample Spearman rank correlation.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let m = (n - 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - m) * (y - m)).sum();
    let var: f64 = ra.iter().map(|x| (x - m).powi(2)).sum();
    cov / var
}

/// Discrete Fréchet distance in L∞ between chains resampled `k` times per edge.
pub fn frechet_brute(a: &CadlagPath, b: &CadlagPath, k: usize) -> f64 {
    let dense = |g: Vec<(f64, f64)>| {
        let mut out = vec![g[0]];
        for w in g.windows(2) {
            for s in 1..=k {
                let u = s as f64 / k as f64;
                out.push((w[0].0 + u * (w[1].0 - w[0].0), w[0].1 + u * (w[1].1 - w[0].1)));
            }
        }
        out
    };
    let p = dense(augmented_graph(a).vertices);
    let q = dense(augmented_graph(b).vertices);
    let d = |x: (f64, f64), y: (f64, f64)| (x.0 - y.0).abs().max((x.1 - y.1).abs());
    let mut ca = vec![vec![0.0f64; q.len()]; p.len()];
    for i in 0..p.len() {
        for j in 0..q.len() {
            let here = d(p[i], q[j]);
            ca[i][j] = match (i, j) {
                (0, 0) => here,
                (0, _) => ca[0][j - 1].max(here),
                (_, 0) => ca[i - 1][0].max(here),
                _ => ca[i - 1][j].min(ca[i][j - 1]).min(ca[i - 1][j - 1]).max(here),
            };
        }
    }
    ca[p.len() - 1][q.len() - 1]
}
