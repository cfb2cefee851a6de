//! γ_Φ = max { Φ(f) : f ∈ K_ex } for positive-homogeneous functionals.
//!
//! For monotone Φ the up part of an optimal f can be taken to be a single
//! jump at 0, so the search runs over f(t) = ∫_t^1 g with g ≥ 0 and
//! ‖g‖_{α'} ≤ 1, discretized as a step function on a uniform grid.

use crate::error::{domain, Error, Result};
use crate::path_space::{uniform_grid, CadlagPath};
use crate::stable_math::StableParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Grad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A functional of paths sampled on a uniform grid of n+1 points.
#[derive(Clone)]
pub struct GridFunctional {
    name: String,
    eval: Eval,
    grad: Option<Grad>,
    monotone: bool,
}

impl std::fmt::Debug for GridFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunctional")
            .field("name", &self.name)
            .field("monotone", &self.monotone)
            .finish()
    }
}

const PROBE_POINTS: usize = 65;
const HOMOGENEITY_TOL: f64 = 1e-10;

impl GridFunctional {
    /// Registers `eval` after checking positive homogeneity on seeded probes
    /// and positivity on the path 1 - t.
    pub fn new<F>(name: impl Into<String>, monotone: bool, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
        for _ in 0..16 {
            let f: Vec<f64> = (0..PROBE_POINTS).map(|_| rng.random::<f64>() * 2.0).collect();
            let lambda = 0.1 + 9.9 * rng.random::<f64>();
            let scaled: Vec<f64> = f.iter().map(|v| v * lambda).collect();
            let (a, b) = (eval(&scaled), lambda * eval(&f));
            if !a.is_finite() || !b.is_finite() || (a - b).abs() > HOMOGENEITY_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::UnsupportedFunctional(format!(
                    "{name}: not positive-homogeneous (Φ(λf) = {a}, λΦ(f) = {b})"
                )));
            }
        }
        let ramp: Vec<f64> = uniform_grid(PROBE_POINTS - 1).iter().map(|t| 1.0 - t).collect();
        if !(eval(&ramp) > 0.0) {
            return Err(Error::UnsupportedFunctional(format!(
                "{name}: not positive on the admissible set (Φ(1-t) = {})",
                eval(&ramp)
            )));
        }
        Ok(GridFunctional {
            name,
            eval: Arc::new(eval),
            grad: None,
            monotone,
        })
    }

    /// Supplies an exact gradient with respect to the grid values.
    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// ∫ f by the trapezoid rule (exact for the piecewise-linear candidates).
    pub fn area() -> Self {
        let eval = |f: &[f64]| {
            let n = f.len() - 1;
            let h = 1.0 / n as f64;
            h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n]))
        };
        GridFunctional::new("area", true, eval)
            .expect("area is homogeneous")
            .with_gradient(|f: &[f64]| {
                let n = f.len() - 1;
                let h = 1.0 / n as f64;
                let mut g = vec![h; n + 1];
                g[0] *= 0.5;
                g[n] *= 0.5;
                g
            })
    }

    /// max_i f_i.
    pub fn sup() -> Self {
        let eval = |f: &[f64]| f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        GridFunctional::new("sup", true, eval)
            .expect("sup is homogeneous")
            .with_gradient(|f: &[f64]| {
                let mut g = vec![0.0; f.len()];
                let k = f.iter().enumerate().fold(0, |k, (i, v)| if *v > f[k] { i } else { k });
                g[k] = 1.0;
                g
            })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }
    pub fn eval(&self, f: &[f64]) -> f64 {
        (self.eval)(f)
    }

    fn gradient(&self, f: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(f);
        }
        // central differences, scaled to the path size
        let scale = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let h = 1e-6 * scale;
        let mut x = f.to_vec();
        (0..f.len())
            .map(|i| {
                let v = x[i];
                x[i] = v + h;
                let up = self.eval(&x);
                x[i] = v - h;
                let dn = self.eval(&x);
                x[i] = v;
                (up - dn) / (2.0 * h)
            })
            .collect()
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VariationalResult {
    pub gamma: f64,
    /// Grid values f(i/n), i = 0..=n.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
    /// max(0, Σ g_i^{α'} Δ - 1).
    pub constraint_residual: f64,
}

impl VariationalResult {
    pub fn to_path(&self) -> Result<CadlagPath> {
        CadlagPath::linear(uniform_grid(self.maximizer.len() - 1), self.maximizer.clone())
    }
}

/// (α+1)^{-1/α}.
pub fn gamma_area(params: &StableParams) -> f64 {
    (params.alpha() + 1.0).powf(-1.0 / params.alpha())
}

pub fn gamma_sup(_params: &StableParams) -> f64 {
    1.0
}

pub fn gamma_bridge_sup(_params: &StableParams) -> f64 {
    1.0
}

/// The analytic maximizer of the area functional.
pub fn area_maximizer(params: &StableParams, t: f64) -> f64 {
    let a = params.alpha();
    (a + 1.0).powf(1.0 / params.alpha_prime()) / a * (1.0 - t.powf(a))
}

pub const MULTISTART_SEEDS: [u64; 8] = [11, 23, 37, 41, 53, 67, 79, 97];
const MAX_ITER: usize = 10_000;
const REL_STOP: f64 = 1e-9;

/// f_i = Δ Σ_{k ≥ i} g_k.
fn integrate_down(g: &[f64], dx: f64) -> Vec<f64> {
    let n = g.len();
    let mut f = vec![0.0; n + 1];
    for i in (0..n).rev() {
        f[i] = f[i + 1] + g[i] * dx;
    }
    f
}

fn weighted_norm(g: &[f64], p: f64, w: f64) -> f64 {
    g.iter().map(|v| v.powf(p)).sum::<f64>() * w
}

/// Euclidean projection onto { g ≥ 0, Σ w g_i^p ≤ 1 }.
///
/// Off the ball the KKT system reads g_i + μ p w g_i^{p-1} = v_i^+; each
/// coordinate is a monotone scalar equation and μ is found by bisection.
pub fn project_ball(v: &[f64], p: f64, w: f64) -> Vec<f64> {
    let plus: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if weighted_norm(&plus, p, w) <= 1.0 {
        return plus;
    }
    let solve = |mu: f64| -> Vec<f64> {
        let c = mu * p * w;
        plus.iter()
            .map(|&b| {
                if b == 0.0 {
                    return 0.0;
                }
                // h(x) = x + c x^{p-1} - b is increasing and concave-then-linear
                // on (0, b]; bisect a few steps then polish with Newton
                let (mut lo, mut hi) = (0.0f64, b);
                let mut x = b;
                for _ in 0..60 {
                    let h = x + c * x.powf(p - 1.0) - b;
                    if h > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let dh = 1.0 + c * (p - 1.0) * x.powf(p - 2.0);
                    let mut nx = x - h / dh;
                    if !(nx > lo && nx < hi) {
                        nx = 0.5 * (lo + hi);
                    }
                    if (nx - x).abs() <= 1e-15 * b {
                        x = nx;
                        break;
                    }
                    x = nx;
                }
                x
            })
            .collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while weighted_norm(&solve(hi), p, w) > 1.0 {
        hi *= 4.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if weighted_norm(&solve(mid), p, w) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    solve(hi)
}

fn ascend(phi: &GridFunctional, g0: Vec<f64>, p: f64, dx: f64) -> (Vec<f64>, f64, usize) {
    let n = g0.len();
    let objective = |g: &[f64]| phi.eval(&integrate_down(g, dx));
    let mut g = project_ball(&g0, p, dx);
    let mut val = objective(&g);
    let mut step = 1.0;
    let mut iters = 0;
    while iters < MAX_ITER {
        iters += 1;
        let f = integrate_down(&g, dx);
        let gf = phi.gradient(&f);
        // chain rule through f_i = Δ Σ_{k ≥ i} g_k
        let mut grad = vec![0.0; n];
        let mut acc = 0.0;
        for k in 0..n {
            acc += gf[k];
            grad[k] = acc * dx;
        }
        let gnorm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            break;
        }
        step *= 4.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = g.iter().zip(&grad).map(|(x, d)| x + step * d / gnorm).collect();
            let cand = project_ball(&trial, p, dx);
            let cval = objective(&cand);
            let gain: f64 = cand.iter().zip(&g).zip(&grad).map(|((c, x), d)| (c - x) * d).sum();
            if cval >= val + 1e-4 * gain && cval >= val {
                accepted = Some((cand, cval));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cval)) = accepted else { break };
        let improvement = cval - val;
        g = cand;
        val = cval;
        if improvement <= REL_STOP * val.abs() {
            break;
        }
    }
    (g, val, iters)
}

/// Projected gradient ascent with fixed multistarts.
pub fn gamma_numeric(params: &StableParams, phi: &GridFunctional, n: usize) -> Result<VariationalResult> {
    if n < 64 {
        return Err(domain("gamma_numeric", "need n >= 64"));
    }
    if !phi.is_monotone() {
        return Err(Error::UnsupportedFunctional(format!(
            "{}: only monotone functionals are supported",
            phi.name()
        )));
    }
    let p = params.alpha_prime();
    let dx = 1.0 / n as f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut total = 0;
    for &seed in &MULTISTART_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g0: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let (g, val, it) = ascend(phi, g0, p, dx);
        total += it;
        if best.as_ref().is_none_or(|(_, b)| val > *b) {
            best = Some((g, val));
        }
    }
    let (g, gamma) = best.expect("at least one start");
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Numerical {
            op: "gamma_numeric",
            msg: format!("{}: optimum {gamma} is not positive", phi.name()),
        });
    }
    Ok(VariationalResult {
        gamma,
        maximizer: integrate_down(&g, dx),
        iterations: total,
        constraint_residual: (weighted_norm(&g, p, dx) - 1.0).max(0.0),
    })
}
