//! Densities of the spectrally positive stable law normalised by
//! E[exp(-λ L_t)] = exp(t λ^α), 1 < α < 2.
//!
//! p_1 is evaluated from Zolotarev's single-integral representation of the
//! totally skewed stable density (Nolan's form), which is free of
//! oscillation. The law above equals σ·S where S is standard stable with
//! β = 1 in the S1 parameterisation and σ = (-cos(πα/2))^{1/α}. Far in the
//! right tail the convergent-in-practice asymptotic expansion takes over.

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_breaks, integrate_to_infinity, QuadratureSpec};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// The constant bundle attached to an index α.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StableParams {
    alpha: f64,
    alpha_prime: f64,
    c_alpha: f64,
    #[serde(rename = "C_alpha")]
    big_c_alpha: f64,
}

impl StableParams {
    pub fn new(alpha: f64) -> Result<Self> {
        make_params(alpha)
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Conjugate exponent α/(α-1).
    pub fn alpha_prime(&self) -> f64 {
        self.alpha_prime
    }
    /// Left-tail constant (α-1)/α^{α'}.
    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }
    /// Right-tail constant -1/Γ(1-α); P(L_1 > x) ~ C_α x^{-α}.
    pub fn big_c_alpha(&self) -> f64 {
        self.big_c_alpha
    }

    fn sigma(&self) -> f64 {
        (-(PI * self.alpha / 2.0).cos()).powf(1.0 / self.alpha)
    }
}

pub fn make_params(alpha: f64) -> Result<StableParams> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(domain("make_params", format!("alpha must lie strictly inside (1,2), got {alpha}")));
    }
    let alpha_prime = alpha / (alpha - 1.0);
    Ok(StableParams {
        alpha,
        alpha_prime,
        c_alpha: (alpha - 1.0) / alpha.powf(alpha_prime),
        big_c_alpha: -1.0 / libm::tgamma(1.0 - alpha),
    })
}

/// Beyond this point p_1 comes from the asymptotic expansion.
pub const SERIES_FROM: f64 = 80.0;

#[derive(Clone, Copy)]
struct Kernel {
    a: f64,
    ap: f64,
    theta0: f64,
    k0: f64,
    half: f64,
    light: bool,
}

impl Kernel {
    fn new(alpha: f64, light: bool) -> Self {
        let theta0 = if light { PI / alpha - PI / 2.0 } else { PI / 2.0 - PI / alpha };
        Kernel {
            a: alpha,
            ap: alpha / (alpha - 1.0),
            theta0,
            k0: (alpha * theta0).cos().ln() / (alpha - 1.0),
            half: 0.5 * (PI / 2.0 + theta0),
            light,
        }
    }

    /// log V at θ = ε - θ0 (lower half, ε small near the singular end).
    fn log_v_lower(&self, eps: f64) -> f64 {
        let c = (eps - self.theta0).cos();
        self.k0 + self.ap * (c.ln() - (self.a * eps).sin().ln()) + (self.theta0 + (self.a - 1.0) * eps).cos().ln() - c.ln()
    }

    /// log V at θ = π/2 - φ (upper half).
    fn log_v_upper(&self, phi: f64) -> f64 {
        let c = phi.sin();
        let (s, w) = if self.light {
            ((self.a * phi).sin(), ((self.a - 1.0) * phi).sin())
        } else {
            let a1 = self.a * (self.theta0 + PI / 2.0);
            let a2 = self.a * self.theta0 + (self.a - 1.0) * PI / 2.0;
            ((a1 - self.a * phi).sin(), (a2 - (self.a - 1.0) * phi).cos())
        };
        self.k0 + (self.ap - 1.0) * c.ln() - self.ap * s.ln() + w.ln()
    }

    /// log V at θ = π/2 (limit); -∞ on the heavy side.
    fn log_v_top(&self) -> f64 {
        if self.light {
            self.k0 - self.ap * self.a.ln() + (self.a - 1.0).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Coordinate (lower: ε, upper: φ) where log g equals `level`, if any.
    fn solve(&self, log_scale: f64, level: f64) -> Option<(bool, f64)> {
        let mid = log_scale + self.log_v_lower(self.half);
        let (upper, f): (bool, Box<dyn Fn(f64) -> f64>) = if mid > level {
            (true, Box::new(|u: f64| log_scale + self.log_v_upper(u)))
        } else {
            (false, Box::new(|u: f64| log_scale + self.log_v_lower(u)))
        };
        if upper && log_scale + self.log_v_top() >= level {
            return None;
        }
        // log g is monotone in the coordinate; bisect on its logarithm
        let mut lo = -690.0f64;
        let mut hi = self.half.ln();
        let below_at_lo = f(lo.exp()) < level;
        for _ in 0..90 {
            let m = 0.5 * (lo + hi);
            if (f(m.exp()) < level) == below_at_lo {
                lo = m;
            } else {
                hi = m;
            }
        }
        Some((upper, (0.5 * (lo + hi)).exp()))
    }
}

fn ln_p1_origin(alpha: f64) -> f64 {
    libm::lgamma(1.0 + 1.0 / alpha) + (PI / alpha).sin().ln() - PI.ln()
}

/// log p_1(x) from the integral representation (no series switch).
fn ln_p1_integral(params: &StableParams, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    let alpha = params.alpha;
    let sigma = params.sigma();
    let y = x / sigma;
    if y.abs() < 1e-9 {
        return Ok(ln_p1_origin(alpha));
    }
    let ker = Kernel::new(alpha, y < 0.0);
    let y = y.abs();
    let log_scale = ker.ap * y.ln();
    let g_min = (log_scale + ker.log_v_top()).exp();

    let mut lower_breaks = vec![0.0, ker.half];
    let mut upper_breaks = vec![0.0, ker.half];
    for level in [-2.5, 0.0, 2.0] {
        if let Some((upper, u)) = ker.solve(log_scale, level) {
            if upper {
                upper_breaks.push(u);
            } else {
                lower_breaks.push(u);
            }
        }
    }
    lower_breaks.sort_by(f64::total_cmp);
    upper_breaks.sort_by(f64::total_cmp);

    let body = |lg: f64| {
        let v = (lg - (lg.exp() - g_min)).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let spec = quad.with_abs(quad.abs_tol.min(1e-200));
    let lower = integrate_breaks(|e| body(log_scale + ker.log_v_lower(e)), &lower_breaks, &spec);
    let upper = integrate_breaks(|p| body(log_scale + ker.log_v_upper(p)), &upper_breaks, &spec);
    let total = lower.value + upper.value;
    let err = lower.abs_error + upper.abs_error;
    if !(lower.converged && upper.converged) && err > quad.rel_tol * total.abs() {
        return Err(Error::Quadrature {
            op: "density",
            value: total,
            abs_error: err,
        });
    }
    if !(total > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((alpha / (PI * (alpha - 1.0))).ln() - y.ln() - sigma.ln() + total.ln() - g_min)
}

/// Terms of the right-tail expansion -(1/π) Σ Γ(1+kα) sin(πkα)/k! x^{-1-kα},
/// truncated before the terms start growing.
fn series_terms(alpha: f64, x: f64, max_terms: usize) -> Vec<f64> {
    let lx = x.ln();
    let mut out = Vec::with_capacity(max_terms);
    let mut last = f64::INFINITY;
    for k in 1..=max_terms {
        let kf = k as f64;
        let mag = (libm::lgamma(1.0 + kf * alpha) - libm::lgamma(kf + 1.0) - (1.0 + kf * alpha) * lx).exp();
        if mag > last {
            break;
        }
        last = mag;
        out.push(-(PI * kf * alpha).sin() * mag / PI);
    }
    out
}

/// Right-tail asymptotic expansion of p_1 with at most `terms` terms.
pub fn p1_tail_series(params: &StableParams, x: f64, terms: usize) -> f64 {
    series_terms(params.alpha, x, terms).iter().sum()
}

/// Term-wise integrated expansion of P(L_1 > x).
pub fn tail_mass_series(params: &StableParams, x: f64, terms: usize) -> f64 {
    let a = params.alpha;
    series_terms(a, x, terms)
        .iter()
        .enumerate()
        .map(|(i, t)| t * x / ((i + 1) as f64 * a))
        .sum()
}

/// log p_1(x).
pub fn log_p1(params: &StableParams, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("density", "x must be finite"));
    }
    if x >= SERIES_FROM {
        return Ok(p1_tail_series(params, x, 12).ln());
    }
    ln_p1_integral(params, x, quad)
}

/// log p_t(x), computed through the scaling p_t(x) = t^{-1/α} p_1(t^{-1/α} x).
pub fn log_density(params: &StableParams, t: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("density", format!("t must be positive, got {t}")));
    }
    let s = t.powf(-1.0 / params.alpha);
    Ok(log_p1(params, s * x, quad)? + s.ln())
}

/// p_t(x).
pub fn density(params: &StableParams, t: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("density", format!("t must be positive, got {t}")));
    }
    let s = t.powf(-1.0 / params.alpha);
    Ok(s * log_p1(params, s * x, quad)?.exp())
}

/// Point below which p_1 carries less than e^{-margin} relative weight
/// against exp(λ|x|) growth.
fn left_cutoff(params: &StableParams, lambda: f64, margin: f64) -> f64 {
    let mut l = 2.0f64;
    while params.c_alpha * l.powf(params.alpha_prime) - lambda * l < margin {
        l *= 1.25;
    }
    -l
}

/// ∫_{-∞}^{x} p_1, for x ≤ 0.
fn lower_mass(params: &StableParams, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    let lo = left_cutoff(params, 0.0, 750.0).min(x - 1.0);
    let f = |u: f64| log_p1(params, u, quad).map(f64::exp).unwrap_or(f64::NAN);
    let breaks = breaks_between(lo, x);
    integrate_breaks(f, &breaks, &quad.with_abs(1e-300)).require("cdf")
}

/// ∫_{x}^{∞} p_1, for x ≥ 0.
fn upper_mass(params: &StableParams, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    let spec = quad.with_abs(1e-300);
    let f = |u: f64| log_p1(params, u, quad).map(f64::exp).unwrap_or(f64::NAN);
    let mut total = 0.0;
    let start = if x < SERIES_FROM {
        let breaks = breaks_between(x, SERIES_FROM);
        total += integrate_breaks(f, &breaks, &spec).require("cdf")?;
        SERIES_FROM
    } else {
        x
    };
    Ok(total + tail_mass_series(params, start, 12))
}

fn breaks_between(a: f64, b: f64) -> Vec<f64> {
    let mut v = vec![a];
    for p in [-3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0] {
        if p > a && p < b {
            v.push(p);
        }
    }
    v.push(b);
    v
}

/// P(L_t ≤ x).
pub fn cdf(params: &StableParams, t: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("cdf", "t must be positive"));
    }
    let z = x * t.powf(-1.0 / params.alpha);
    if z <= 0.0 {
        lower_mass(params, z, quad)
    } else {
        Ok(1.0 - upper_mass(params, z, quad)?)
    }
}

/// P(L_t > x).
pub fn tail_probability(params: &StableParams, t: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("tail_probability", "t must be positive"));
    }
    let z = x * t.powf(-1.0 / params.alpha);
    if z <= 0.0 {
        Ok(1.0 - lower_mass(params, z, quad)?)
    } else {
        upper_mass(params, z, quad)
    }
}

/// ∫ p_1 over the real line, split at 0.
pub fn total_mass(params: &StableParams, quad: &QuadratureSpec) -> Result<f64> {
    Ok(lower_mass(params, 0.0, quad)? + upper_mass(params, 0.0, quad)?)
}

/// ∫ e^{-λx} p_1(x) dx.
pub fn laplace_transform(params: &StableParams, lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain("laplace_transform", "lambda must be positive"));
    }
    let spec = quad.with_abs(1e-300);
    let f = |u: f64| log_p1(params, u, quad).map(|lp| (lp - lambda * u).exp()).unwrap_or(f64::NAN);
    let lo = left_cutoff(params, lambda, 60.0);
    let mut breaks = breaks_between(lo, SERIES_FROM);
    // the weighted integrand peaks near the saddle of λx + c x^{α'}
    let saddle = -(lambda / (params.c_alpha * params.alpha_prime)).powf(params.alpha - 1.0);
    if saddle > lo {
        breaks.push(saddle);
        breaks.sort_by(f64::total_cmp);
    }
    let body = integrate_breaks(f, &breaks, &spec);
    let tail = integrate_to_infinity(f, SERIES_FROM, &spec);
    let value = body.value + tail.value;
    if !(body.converged && tail.converged) {
        return Err(Error::Quadrature {
            op: "laplace_transform",
            value,
            abs_error: body.abs_error + tail.abs_error,
        });
    }
    Ok(value)
}

/// q_x(t) = (x/t) p_t(-x): density of the first passage below 0 from x.
pub fn hitting_density(params: &StableParams, x: f64, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) || !(t > 0.0) {
        return Err(domain("hitting_density", "x and t must be positive"));
    }
    Ok(x / t * density(params, t, -x, quad)?)
}

/// Transition density of the process killed on leaving (0, ∞):
/// p_t(y-x) - ∫_0^t q_x(s) p_{t-s}(y) ds.
pub fn killed_transition(params: &StableParams, t: f64, x: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) || !(x > 0.0) || !(y > 0.0) {
        return Err(domain("killed_transition", "t, x and y must be positive"));
    }
    let free = density(params, t, y - x, quad)?;
    let f = |s: f64| {
        if s <= 0.0 || s >= t {
            return 0.0;
        }
        match (hitting_density(params, x, s, quad), density(params, t - s, y, quad)) {
            (Ok(a), Ok(b)) => a * b,
            _ => f64::NAN,
        }
    };
    let breaks: Vec<f64> = (0..=8).map(|i| t * i as f64 / 8.0).collect();
    let sub = integrate_breaks(f, &breaks, &quad.with_abs(quad.abs_tol.min(1e-15))).require("killed_transition")?;
    let v = free - sub;
    if v < -1e-10 {
        return Err(Error::Numerical {
            op: "killed_transition",
            msg: format!("negative value {v:e}: quadrature breakdown"),
        });
    }
    Ok(v.max(0.0))
}

/// Tabulated density with its trapezoid cumulative.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub x: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl DensityTable {
    /// Builds a table from sorted abscissae and density values.
    pub fn from_values(x: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        if x.len() != pdf.len() || x.len() < 2 {
            return Err(domain("DensityTable", "need at least two matching points"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("DensityTable", "abscissae must be strictly increasing"));
        }
        if pdf.iter().any(|p| !(*p >= 0.0)) {
            return Err(domain("DensityTable", "density values must be nonnegative"));
        }
        let mut cdf = Vec::with_capacity(x.len());
        cdf.push(0.0);
        for i in 1..x.len() {
            let prev = cdf[i - 1];
            cdf.push(prev + 0.5 * (pdf[i] + pdf[i - 1]) * (x[i] - x[i - 1]));
        }
        Ok(DensityTable { x, pdf, cdf })
    }

    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().expect("nonempty table")
    }

    /// Cumulative at `z`, exact for the piecewise-linear density.
    pub fn cdf_at(&self, z: f64) -> f64 {
        if z <= self.x[0] {
            return 0.0;
        }
        let n = self.x.len();
        if z >= self.x[n - 1] {
            return self.cdf[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= z) - 1;
        let h = z - self.x[i];
        let slope = (self.pdf[i + 1] - self.pdf[i]) / (self.x[i + 1] - self.x[i]);
        self.cdf[i] + self.pdf[i] * h + 0.5 * slope * h * h
    }

    /// Inverse of `cdf_at` for a target in [0, total mass].
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.x.len();
        if p <= 0.0 {
            return self.x[0];
        }
        if p >= self.cdf[n - 1] {
            return self.x[n - 1];
        }
        let i = (self.cdf.partition_point(|&c| c <= p) - 1).min(n - 2);
        let r = p - self.cdf[i];
        let w = self.x[i + 1] - self.x[i];
        let f0 = self.pdf[i];
        let slope = (self.pdf[i + 1] - f0) / w;
        // solve f0 h + slope h²/2 = r for h in [0, w]
        let h = if slope.abs() * w < 1e-12 * f0.max(f64::MIN_POSITIVE) {
            r / f0
        } else {
            let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
            2.0 * r / (f0 + disc.sqrt())
        };
        self.x[i] + h.clamp(0.0, w)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,pdf,cdf\n");
        for i in 0..self.x.len() {
            let _ = writeln!(s, "{:e},{:e},{:e}", self.x[i], self.pdf[i], self.cdf[i]);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Tabulates p_t on `n` equally spaced points of `[lo, hi]` without any
/// coverage requirement.
pub fn tabulate_density(params: &StableParams, t: f64, lo: f64, hi: f64, n: usize, quad: &QuadratureSpec) -> Result<DensityTable> {
    if !(hi > lo) || n < 2 {
        return Err(domain("build_density_table", "need lo < hi and at least two points"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect();
    let pdf = x.iter().map(|&v| density(params, t, v, quad)).collect::<Result<Vec<_>>>()?;
    DensityTable::from_values(x, pdf)
}

/// Maximum mass allowed outside a table's range.
pub const TABLE_COVERAGE_TOL: f64 = 1e-4;

/// Tabulates p_t on `[lo, hi]`, failing if more than 10⁻⁴ of the mass lies
/// outside the range.
pub fn build_density_table(params: &StableParams, t: f64, lo: f64, hi: f64, n: usize, quad: &QuadratureSpec) -> Result<DensityTable> {
    let table = tabulate_density(params, t, lo, hi, n, quad)?;
    let missing = cdf(params, t, lo, quad)? + tail_probability(params, t, hi, quad)?;
    if missing > TABLE_COVERAGE_TOL {
        return Err(Error::Coverage { lo, hi, missing });
    }
    Ok(table)
}
