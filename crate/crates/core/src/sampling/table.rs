//! Interpolated log p_1 for hot loops.

use crate::error::Result;
use crate::quad::QuadratureSpec;
use crate::stable_math::{log_p1, p1_tail_series, StableParams};

const STEP: f64 = 1.0 / 64.0;
const SPLIT: f64 = 16.0;
const PER_EFOLD: f64 = 64.0;
const FAR: f64 = 1e8;

/// Cubic-interpolated log p_1: uniform grid on [lo, 16], grid uniform in
/// log x on [16, 1e8], asymptotic forms outside.
#[derive(Debug, Clone)]
pub struct LogDensityTable {
    params: StableParams,
    lo: f64,
    near: Vec<f64>,
    far: Vec<f64>,
    far_step: f64,
    far_origin: f64,
}

fn lagrange4(v: &[f64], i: usize, s: f64) -> f64 {
    // nodes at -1, 0, 1, 2 relative to index i; s in [0, 1]
    let (f0, f1, f2, f3) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
    let a = s * (s - 1.0) * (s - 2.0) / -6.0;
    let b = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let c = (s + 1.0) * s * (s - 2.0) / -2.0;
    let d = (s + 1.0) * s * (s - 1.0) / 6.0;
    a * f0 + b * f1 + c * f2 + d * f3
}

fn interp(v: &[f64], pos: f64) -> f64 {
    let n = v.len();
    let i = (pos.floor() as usize).clamp(1, n - 3);
    lagrange4(v, i, pos - i as f64)
}

impl LogDensityTable {
    pub fn new(params: &StableParams, quad: &QuadratureSpec) -> Result<Self> {
        // left end where the density is about e^{-300}
        let lo = -(300.0 / params.c_alpha()).powf(1.0 / params.alpha_prime()).clamp(4.0, 40.0);
        let lo = (lo / STEP).floor() * STEP;
        let n_near = ((SPLIT - lo) / STEP).round() as usize + 1;
        let near = (0..n_near + 2)
            .map(|i| log_p1(params, lo + (i as f64 - 1.0) * STEP, quad))
            .collect::<Result<Vec<_>>>()?;
        let far_origin = SPLIT.ln();
        let far_step = 1.0 / PER_EFOLD;
        let n_far = ((FAR.ln() - far_origin) / far_step).ceil() as usize + 1;
        let far = (0..n_far + 2)
            .map(|i| log_p1(params, (far_origin + (i as f64 - 1.0) * far_step).exp(), quad))
            .collect::<Result<Vec<_>>>()?;
        Ok(LogDensityTable {
            params: *params,
            lo,
            near,
            far,
            far_step,
            far_origin,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    /// Left edge of the tabulated range; below it the leading asymptotic
    /// form exp(-c_α |x|^{α'}) with its power prefactor is continued.
    pub fn left_edge(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn ln_p1(&self, x: f64) -> f64 {
        if x >= self.lo {
            if x <= SPLIT {
                return interp(&self.near, (x - self.lo) / STEP + 1.0);
            }
            if x <= FAR {
                return interp(&self.far, (x.ln() - self.far_origin) / self.far_step + 1.0);
            }
            return p1_tail_series(&self.params, x, 3).ln();
        }
        if x.is_nan() {
            return f64::NAN;
        }
        let ap = self.params.alpha_prime();
        let (u, u0) = (-x, -self.lo);
        self.near[1] - self.params.c_alpha() * (u.powf(ap) - u0.powf(ap)) + (0.5 * ap - 1.0) * (u / u0).ln()
    }

    /// log p_t(x) via scaling.
    #[inline]
    pub fn ln_p(&self, t: f64, x: f64) -> f64 {
        let s = t.powf(-1.0 / self.params.alpha());
        self.ln_p1(s * x) + s.ln()
    }
}
