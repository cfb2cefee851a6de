//! Rate functions of the excursion and bridge LDPs, their finite-dimensional
//! versions and the functional rate c_α (x/γ)^{α'}.

use crate::error::{domain, Result};
use crate::path_space::{CadlagPath, Interpolation};
use crate::stable_math::StableParams;

/// Tolerance for "f(1) equals the prescribed endpoint".
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfinityReason {
    None,
    NegativeValues,
    EndpointMismatch,
    UnboundedVariationProxy,
    SingularDownPart,
}

impl InfinityReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            InfinityReason::None => "none",
            InfinityReason::NegativeValues => "negative-values",
            InfinityReason::EndpointMismatch => "endpoint-mismatch",
            InfinityReason::UnboundedVariationProxy => "unbounded-variation-proxy",
            InfinityReason::SingularDownPart => "singular-down-part",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RateValue {
    pub value: f64,
    pub reason: InfinityReason,
}

impl RateValue {
    pub fn finite(value: f64) -> Self {
        RateValue {
            value,
            reason: InfinityReason::None,
        }
    }
    pub fn infinite(reason: InfinityReason) -> Self {
        RateValue {
            value: f64::INFINITY,
            reason,
        }
    }
    pub fn is_finite(&self) -> bool {
        self.reason == InfinityReason::None
    }
}

/// Interior times 0 < t_1 < ... < t_n < 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdivision(Vec<f64>);

impl Subdivision {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(domain("Subdivision", "need at least one interior time"));
        }
        if times.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(domain("Subdivision", "times must lie strictly inside (0, 1)"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("Subdivision", "times must be strictly increasing"));
        }
        Ok(Subdivision(times))
    }

    /// (1/n, ..., (n-1)/n); needs n ≥ 2.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain("Subdivision::uniform", "need n >= 2"));
        }
        Self::new((1..n).map(|i| i as f64 / n as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Δt · ((drop)_+ / Δt)^{α'}
#[inline]
fn drop_cost(drop: f64, dt: f64, ap: f64) -> f64 {
    if drop <= 0.0 {
        0.0
    } else {
        dt * (drop / dt).powf(ap)
    }
}

/// ∫ |f↓'|^{α'} for a path without down jumps, or the reason it is infinite.
fn down_energy(path: &CadlagPath, ap: f64) -> std::result::Result<f64, InfinityReason> {
    let (t, l, r) = (path.times(), path.left(), path.right());
    if l.iter().chain(r).any(|v| !v.is_finite()) {
        return Err(InfinityReason::UnboundedVariationProxy);
    }
    if l.iter().zip(r).any(|(a, b)| b < a) {
        return Err(InfinityReason::SingularDownPart);
    }
    if path.interpolation() == Interpolation::Step {
        // all variation sits in jumps, checked above
        return Ok(0.0);
    }
    Ok((0..t.len() - 1).map(|i| drop_cost(r[i] - l[i + 1], t[i + 1] - t[i], ap)).sum())
}

/// I_ex(f) = c_α ∫ (f↓')^{α'} on admissible paths, +∞ otherwise.
pub fn rate_excursion(params: &StableParams, path: &CadlagPath) -> RateValue {
    if path.left().iter().chain(path.right()).any(|v| !v.is_finite()) {
        return RateValue::infinite(InfinityReason::UnboundedVariationProxy);
    }
    if path.min_value() < 0.0 {
        return RateValue::infinite(InfinityReason::NegativeValues);
    }
    if path.end_value().abs() > ENDPOINT_TOL {
        return RateValue::infinite(InfinityReason::EndpointMismatch);
    }
    match down_energy(path, params.alpha_prime()) {
        Ok(e) => RateValue::finite(params.c_alpha() * e),
        Err(r) => RateValue::infinite(r),
    }
}

/// I_br,a(f) = c_α (∫ |f↓'|^{α'} - (a_-)^{α'}).
pub fn rate_bridge(params: &StableParams, path: &CadlagPath, a: f64) -> RateValue {
    if path.left().iter().chain(path.right()).any(|v| !v.is_finite()) {
        return RateValue::infinite(InfinityReason::UnboundedVariationProxy);
    }
    if (path.end_value() - a).abs() > ENDPOINT_TOL {
        return RateValue::infinite(InfinityReason::EndpointMismatch);
    }
    let ap = params.alpha_prime();
    match down_energy(path, ap) {
        Ok(e) => {
            let v = params.c_alpha() * (e - (-a).max(0.0).powf(ap));
            // Jensen makes this nonnegative; clip rounding noise
            RateValue::finite(v.max(0.0))
        }
        Err(r) => RateValue::infinite(r),
    }
}

/// J_σ(x) with x_{n+1} = 0 at t_{n+1} = 1.
pub fn finite_dim_rate_excursion(params: &StableParams, sigma: &Subdivision, values: &[f64]) -> Result<RateValue> {
    if values.len() != sigma.len() {
        return Err(domain("finite_dim_rate_excursion", "values must match the subdivision"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Ok(RateValue::infinite(InfinityReason::UnboundedVariationProxy));
    }
    if values.iter().any(|&v| v < 0.0) {
        return Ok(RateValue::infinite(InfinityReason::NegativeValues));
    }
    let ap = params.alpha_prime();
    let t = sigma.times();
    let n = t.len();
    let mut sum = 0.0;
    for i in 0..n {
        let (t1, x1) = if i + 1 < n { (t[i + 1], values[i + 1]) } else { (1.0, 0.0) };
        sum += drop_cost(values[i] - x1, t1 - t[i], ap);
    }
    Ok(RateValue::finite(params.c_alpha() * sum))
}

/// J^σ_br,a(x): drops from 0 to x_1, between the x_i, and from x_n to a.
pub fn finite_dim_rate_bridge(params: &StableParams, sigma: &Subdivision, values: &[f64], a: f64) -> Result<RateValue> {
    if values.len() != sigma.len() {
        return Err(domain("finite_dim_rate_bridge", "values must match the subdivision"));
    }
    if !a.is_finite() || values.iter().any(|v| !v.is_finite()) {
        return Ok(RateValue::infinite(InfinityReason::UnboundedVariationProxy));
    }
    let ap = params.alpha_prime();
    let t = sigma.times();
    let n = t.len();
    let mut sum = drop_cost(-values[0], t[0], ap);
    for i in 0..n - 1 {
        sum += drop_cost(values[i] - values[i + 1], t[i + 1] - t[i], ap);
    }
    sum += drop_cost(values[n - 1] - a, 1.0 - t[n - 1], ap);
    let v = params.c_alpha() * (sum - (-a).max(0.0).powf(ap));
    Ok(RateValue::finite(v.max(0.0)))
}

/// J_σ on the grid 0, 1/n, ..., (n-1)/n of right-continuous path values.
///
/// The time 0 is part of the grid, so a path starting with an atom f(0) > 0
/// pays for the drop from f(0) on [0, 1/n].
pub fn dyadic_rate(params: &StableParams, path: &CadlagPath, n: usize) -> Result<RateValue> {
    if n < 1 {
        return Err(domain("dyadic_rate", "need n >= 1"));
    }
    let x: Vec<f64> = (0..n).map(|i| path.eval(i as f64 / n as f64)).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Ok(RateValue::infinite(InfinityReason::UnboundedVariationProxy));
    }
    if x.iter().any(|&v| v < 0.0) {
        return Ok(RateValue::infinite(InfinityReason::NegativeValues));
    }
    let ap = params.alpha_prime();
    let dt = 1.0 / n as f64;
    let sum: f64 = (0..n)
        .map(|i| drop_cost(x[i] - if i + 1 < n { x[i + 1] } else { 0.0 }, dt, ap))
        .sum();
    Ok(RateValue::finite(params.c_alpha() * sum))
}

/// J_Φ(x) = c_α (x/γ)^{α'}.
pub fn functional_rate(params: &StableParams, x: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !(x >= 0.0) {
        return Err(domain("functional_rate", "need gamma > 0 and x >= 0"));
    }
    Ok(params.c_alpha() * (x / gamma).powf(params.alpha_prime()))
}
