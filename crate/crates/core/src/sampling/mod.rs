//! Stable increments, free paths, exact dyadic bridge skeletons and
//! normalised excursions obtained from bridges by the Vervaat shift.

mod table;
pub mod validation;

pub use table::LogDensityTable;

use crate::error::{domain, Error, Result};
use crate::quad::QuadratureSpec;
use crate::stable_math::StableParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// A reproducible random stream: seed plus stream index select an
/// independent ChaCha8 keystream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    #[inline]
    pub fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    #[inline]
    pub fn coin(&mut self) -> bool {
        self.rng.random()
    }
}

/// One draw of L_1 by the Chambers-Mallows-Stuck map. With the
/// normalisation E[e^{-λL_1}] = e^{λ^α} the CMS scale factor cancels.
#[inline]
pub fn stable_unit(alpha: f64, rng: &mut RngStream) -> f64 {
    let b = PI / 2.0 - PI / alpha;
    let v = PI * (rng.open01() - 0.5);
    let w = rng.exp1();
    let (sv, cv) = v.sin_cos();
    let (s, c) = (alpha * (v + b)).sin_cos();
    // cos(v - α(v+b)) by the addition formula
    let c2 = cv * c + sv * s;
    s * (((1.0 - alpha) * (c2 / w).ln() - cv.ln()) / alpha).exp()
}

/// One draw of L_t.
pub fn stable_increment(params: &StableParams, t: f64, rng: &mut RngStream) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("stable_increment", "t must be positive"));
    }
    Ok(t.powf(1.0 / params.alpha()) * stable_unit(params.alpha(), rng))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum SkeletonKind {
    Free,
    Bridge(f64),
    Excursion,
}

impl SkeletonKind {
    pub fn label(&self) -> String {
        match self {
            SkeletonKind::Free => "free".into(),
            SkeletonKind::Bridge(a) => format!("bridge(a={a:?})"),
            SkeletonKind::Excursion => "excursion".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "free" => Ok(SkeletonKind::Free),
            "excursion" => Ok(SkeletonKind::Excursion),
            _ => s
                .strip_prefix("bridge(a=")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|v| v.parse().ok())
                .map(SkeletonKind::Bridge)
                .ok_or_else(|| Error::Parse(format!("unknown skeleton kind '{s}'"))),
        }
    }
}

/// Values of a process on the uniform grid i/n, i = 0..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSkeleton {
    pub values: Vec<f64>,
    pub kind: SkeletonKind,
    pub alpha: f64,
    pub seed: u64,
    pub stream: u64,
}

impl PathSkeleton {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.values.len()).map(|i| i as f64 / n).collect()
    }

    /// The skeleton on the grid coarser by `factor` (a power of two).
    pub fn coarsen(&self, factor: usize) -> PathSkeleton {
        PathSkeleton {
            values: self.values.iter().step_by(factor).copied().collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SamplerConfig {
    /// Grid size, a power of two.
    pub n: usize,
    /// Points in the per-draw product-density table.
    pub table_points: usize,
    /// Proposals tried before switching a midpoint draw to the table.
    pub max_rejections: usize,
    /// Below this expected acceptance rate a midpoint goes straight to the table.
    pub min_acceptance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n: 1024,
            table_points: 256,
            max_rejections: 2000,
            min_acceptance: 0.03,
        }
    }
}

impl SamplerConfig {
    pub fn with_n(n: usize) -> Self {
        SamplerConfig { n, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_power_of_two() {
            return Err(domain("SamplerConfig", format!("n must be a power of two, got {}", self.n)));
        }
        if self.table_points < 16 || self.max_rejections < 1 {
            return Err(domain("SamplerConfig", "table_points >= 16 and max_rejections >= 1 required"));
        }
        if !(self.min_acceptance >= 0.0 && self.min_acceptance < 1.0) {
            return Err(domain("SamplerConfig", "min_acceptance must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Samplers for one α sharing an interpolated log-density.
#[derive(Debug, Clone)]
pub struct Sampler {
    params: StableParams,
    table: LogDensityTable,
    config: SamplerConfig,
    ln_bound: f64,
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (-(a - b).abs()).exp().ln_1p()
}

/// sup over d and w of HM(p_1(w), p_1(d-w)) / p_1(d/2), scanned on grids.
/// Equals 1 (attained at w = d/2) for moderate α; can exceed 1 slightly
/// as α approaches 2.
fn harmonic_bound(t: &LogDensityTable) -> f64 {
    let mut ds: Vec<f64> = (0..=80).map(|i| -8.0 + 0.2 * i as f64).collect();
    ds.extend((1..=60).map(|i| 8.0 * 10f64.powf(i as f64 / 10.0)));
    let mut best = 0.0f64;
    for d in ds {
        let m = t.ln_p1(0.5 * d);
        let span = 30.0 + 0.5 * d.abs();
        let ratio = |w: f64| {
            let (a, b) = (t.ln_p1(w), t.ln_p1(d - w));
            (std::f64::consts::LN_2 + a + b - log_add(a, b) - m).exp()
        };
        let k = 4000;
        let step = 2.0 * span / k as f64;
        let mut arg = 0.5 * d;
        let mut top = ratio(arg);
        for i in 0..=k {
            let w = 0.5 * d - span + step * i as f64;
            let r = ratio(w);
            if r > top {
                top = r;
                arg = w;
            }
        }
        // local refinement around the coarse maximiser
        let mut h = step;
        for _ in 0..40 {
            for w in [arg - h, arg + h] {
                let r = ratio(w);
                if r > top {
                    top = r;
                    arg = w;
                }
            }
            h *= 0.7;
        }
        best = best.max(top);
    }
    best.max(1.0)
}

impl Sampler {
    pub fn new(params: &StableParams, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let table = LogDensityTable::new(params, &QuadratureSpec::default())?;
        let ln_bound = harmonic_bound(&table).ln() + 0.01f64.ln_1p();
        Ok(Sampler {
            params: *params,
            table,
            config,
            ln_bound,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn table(&self) -> &LogDensityTable {
        &self.table
    }

    /// Same sampler with another grid size (shares the table).
    pub fn with_n(&self, n: usize) -> Result<Self> {
        let config = SamplerConfig { n, ..self.config };
        config.validate()?;
        Ok(Sampler { config, ..self.clone() })
    }

    /// Expected acceptance of the mixture rejection step for a scaled gap d.
    pub fn rejection_acceptance(&self, d: f64) -> f64 {
        let z = self.table.ln_p(2.0, d);
        (z - self.ln_bound - self.table.ln_p1(0.5 * d)).exp()
    }

    /// W with density proportional to p_1(w) p_1(d - w).
    ///
    /// Proposals come from the mixture (p_1(w) + p_1(d-w))/2, for which the
    /// likelihood ratio is the harmonic mean of p_1(w) and p_1(d-w); its
    /// supremum over w is bounded by `ln_bound` + log p_1(d/2).
    pub fn draw_pair_split(&self, d: f64, rng: &mut RngStream) -> f64 {
        let t = &self.table;
        let m = t.ln_p1(0.5 * d) + self.ln_bound;
        // acceptance only collapses deep on the light side
        let usable = d > -2.0 || (t.ln_p(2.0, d) - m).exp() >= self.config.min_acceptance;
        if usable {
            let alpha = self.params.alpha();
            for _ in 0..self.config.max_rejections {
                let x = stable_unit(alpha, rng);
                let w = if rng.coin() { x } else { d - x };
                let ea = (t.ln_p1(w) - m).exp();
                let eb = (t.ln_p1(d - w) - m).exp();
                if rng.open01() * (ea + eb) <= 2.0 * ea * eb {
                    return w;
                }
            }
        }
        self.draw_pair_split_table(d, rng)
    }

    /// Inverse-CDF draw from a product-density table centred at d/2.
    fn draw_pair_split_table(&self, d: f64, rng: &mut RngStream) -> f64 {
        let t = &self.table;
        let f = |w: f64| t.ln_p1(w) + t.ln_p1(d - w);
        let c = 0.5 * d;
        let f0 = f(c);
        let h = 1e-3;
        let curv = (f(c + h) - 2.0 * f0 + f(c - h)) / (h * h);
        let sd = if curv < -1e-8 { (-curv).sqrt().recip() } else { 1.0 };
        let mut r = 12.0 * sd;
        for _ in 0..60 {
            if f(c + r) < f0 - 30.0 {
                break;
            }
            r *= 1.5;
        }
        let m = self.config.table_points;
        let step = 2.0 * r / (m - 1) as f64;
        let xs: Vec<f64> = (0..m).map(|i| c - r + step * i as f64).collect();
        let ps: Vec<f64> = xs.iter().map(|&x| (f(x) - f0).exp()).collect();
        let mut cum = Vec::with_capacity(m);
        cum.push(0.0);
        for i in 1..m {
            let prev = cum[i - 1];
            cum.push(prev + 0.5 * (ps[i] + ps[i - 1]) * step);
        }
        let target = rng.open01() * cum[m - 1];
        let i = (cum.partition_point(|&v| v <= target) - 1).min(m - 2);
        let rem = target - cum[i];
        let slope = (ps[i + 1] - ps[i]) / step;
        let disc = (ps[i] * ps[i] + 2.0 * slope * rem).max(0.0);
        let dx = if ps[i] + disc.sqrt() > 0.0 {
            2.0 * rem / (ps[i] + disc.sqrt())
        } else {
            0.5 * step
        };
        xs[i] + dx.clamp(0.0, step)
    }

    /// Midpoint of the bridge between (u, y) and (u + 2h, z).
    #[inline]
    pub fn draw_midpoint(&self, h: f64, y: f64, z: f64, rng: &mut RngStream) -> f64 {
        let s = h.powf(1.0 / self.params.alpha());
        y + s * self.draw_pair_split((z - y) / s, rng)
    }

    #[inline]
    fn draw_midpoint_scaled(&self, s: f64, y: f64, z: f64, rng: &mut RngStream) -> f64 {
        y + s * self.draw_pair_split((z - y) / s, rng)
    }

    /// Fills `values` (length n+1, ends already set) by dyadic bisection.
    pub(crate) fn fill_bridge(&self, values: &mut [f64], rng: &mut RngStream) {
        let n = values.len() - 1;
        let mut step = n;
        while step >= 2 {
            let half = step / 2;
            let s = (half as f64 / n as f64).powf(1.0 / self.params.alpha());
            let mut i = 0;
            while i < n {
                values[i + half] = self.draw_midpoint_scaled(s, values[i], values[i + step], rng);
                i += step;
            }
            step = half;
        }
    }

    /// Exact skeleton of the bridge from 0 to `a` on the dyadic grid.
    pub fn sample_bridge(&self, a: f64, rng: &mut RngStream) -> Result<PathSkeleton> {
        if !a.is_finite() {
            return Err(domain("sample_bridge", "endpoint must be finite"));
        }
        let n = self.config.n;
        let mut values = vec![0.0; n + 1];
        values[n] = a;
        self.fill_bridge(&mut values, rng);
        Ok(PathSkeleton {
            values,
            kind: SkeletonKind::Bridge(a),
            alpha: self.params.alpha(),
            seed: rng.seed(),
            stream: rng.stream(),
        })
    }

    /// Normalised excursion skeleton via the Vervaat shift of a zero bridge.
    pub fn sample_excursion(&self, rng: &mut RngStream) -> PathSkeleton {
        let n = self.config.n;
        let mut values = vec![0.0; n + 1];
        self.fill_bridge(&mut values, rng);
        PathSkeleton {
            values: vervaat(&values),
            kind: SkeletonKind::Excursion,
            alpha: self.params.alpha(),
            seed: rng.seed(),
            stream: rng.stream(),
        }
    }

    /// Cumulative sums of iid L_{1/n} increments.
    pub fn sample_free_path(&self, rng: &mut RngStream) -> PathSkeleton {
        let n = self.config.n;
        let scale = (1.0 / n as f64).powf(1.0 / self.params.alpha());
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(acc);
        for _ in 0..n {
            acc += scale * stable_unit(self.params.alpha(), rng);
            values.push(acc);
        }
        PathSkeleton {
            values,
            kind: SkeletonKind::Free,
            alpha: self.params.alpha(),
            seed: rng.seed(),
            stream: rng.stream(),
        }
    }
}

/// Index of the earliest minimum among the first n of n+1 bridge values.
pub fn argmin_earliest(bridge: &[f64]) -> usize {
    let n = bridge.len() - 1;
    let mut k = 0;
    for i in 1..n {
        if bridge[i] < bridge[k] {
            k = i;
        }
    }
    k
}

/// Cyclic shift of a zero bridge to its grid minimum, re-based at 0.
pub fn vervaat(bridge: &[f64]) -> Vec<f64> {
    let n = bridge.len() - 1;
    let k = argmin_earliest(bridge);
    let base = bridge[k];
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..n {
        out.push(bridge[(k + j) % n] - base);
    }
    out.push(0.0);
    out
}

/// Left-endpoint Riemann sum of the skeleton.
pub fn functional_area(skeleton: &PathSkeleton) -> f64 {
    area_of(&skeleton.values)
}

pub fn area_of(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    values[..n].iter().sum::<f64>() / n as f64
}

/// Largest grid value.
pub fn functional_sup(skeleton: &PathSkeleton) -> f64 {
    sup_of(&skeleton.values)
}

pub fn sup_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Writes skeletons as the line-oriented batch format.
pub fn batch_to_csv(batch: &[PathSkeleton]) -> String {
    let mut s = String::new();
    if let Some(first) = batch.first() {
        let _ = writeln!(
            s,
            "# alpha={:?}, n={}, seed={}, kind={}",
            first.alpha,
            first.n(),
            first.seed,
            first.kind.label()
        );
    }
    for sk in batch {
        let row: Vec<String> = sk.values.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Reads the batch format back; stream indices are the row positions.
pub fn batch_from_csv(text: &str) -> Result<Vec<PathSkeleton>> {
    let mut alpha = None;
    let mut n = None;
    let mut seed = None;
    let mut kind = None;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for part in split_meta(meta) {
                let Some((k, v)) = part.split_once('=') else { continue };
                let v = v.trim();
                match k.trim() {
                    "alpha" => alpha = v.parse::<f64>().ok(),
                    "n" => n = v.parse::<usize>().ok(),
                    "seed" => seed = v.parse::<u64>().ok(),
                    "kind" => kind = Some(SkeletonKind::parse(v)?),
                    _ => {}
                }
            }
            continue;
        }
        let values = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = n {
            if values.len() != n + 1 {
                return Err(Error::Parse(format!("row has {} values, expected {}", values.len(), n + 1)));
            }
        }
        out.push(PathSkeleton {
            values,
            kind: kind.ok_or_else(|| Error::Parse("missing kind header".into()))?,
            alpha: alpha.ok_or_else(|| Error::Parse("missing alpha header".into()))?,
            seed: seed.ok_or_else(|| Error::Parse("missing seed header".into()))?,
            stream: out.len() as u64,
        });
    }
    Ok(out)
}

/// Splits `k=v, k=v(..., ...)` on top-level commas.
fn split_meta(meta: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in meta.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&meta[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&meta[start..]);
    parts
}
