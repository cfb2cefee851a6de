//! Kolmogorov-Smirnov checks of simulated marginals against quadrature.

use super::{RngStream, Sampler};
use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::quad::{integrate_breaks, QuadratureSpec};
use crate::stable_math::{hitting_density, killed_transition, log_density, DensityTable, StableParams};
use crate::stats::ks_one_sample;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct KsCheck {
    pub name: String,
    pub statistic: f64,
    pub samples: usize,
    pub threshold: f64,
    pub pass: bool,
}

impl KsCheck {
    pub fn new(name: impl Into<String>, statistic: f64, samples: usize, threshold: f64) -> Self {
        KsCheck {
            name: name.into(),
            statistic,
            samples,
            threshold,
            pass: statistic < threshold,
        }
    }
}

/// Tabulates an unnormalised density on `n` points of [lo, hi] and rescales
/// it to unit mass. Returns the table and the mass before rescaling.
pub fn normalised_table<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, n: usize) -> Result<(DensityTable, f64)> {
    let step = (hi - lo) / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let pdf = x.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
    let raw = DensityTable::from_values(x.clone(), pdf)?;
    let mass = raw.total_mass();
    if !(mass > 0.0) {
        return Err(domain("normalised_table", "density vanishes on the range"));
    }
    let scaled = raw.pdf.iter().map(|p| p / mass).collect();
    Ok((DensityTable::from_values(x, scaled)?, mass))
}

/// Density of the bridge from 0 to `a` at time t: p_t(x) p_{1-t}(a-x)/p_1(a),
/// tabulated and renormalised on a range wide enough for both light tails.
pub fn bridge_marginal_reference(params: &StableParams, a: f64, t: f64, quad: &QuadratureSpec) -> Result<DensityTable> {
    if !(t > 0.0 && t < 1.0) {
        return Err(domain("bridge_marginal_reference", "t must lie in (0, 1)"));
    }
    let f = |x: f64| -> Result<f64> { Ok((log_density(params, t, x, quad)? + log_density(params, 1.0 - t, a - x, quad)?).exp()) };
    let half = 8.0 + a.abs();
    Ok(normalised_table(f, a * t - half, a * t + half, 2001)?.0)
}

/// Smallest power-of-two grid containing t.
pub fn dyadic_grid_for(t: f64) -> Result<usize> {
    for k in 1..=30 {
        let n = 1usize << k;
        let i = t * n as f64;
        if (i - i.round()).abs() < 1e-12 {
            return Ok(n);
        }
    }
    Err(domain("dyadic_grid_for", format!("{t} is not a dyadic rational")))
}

/// Bridge values at a dyadic time t, one per sample stream.
pub fn bridge_marginal_sample(sampler: &Sampler, a: f64, t: f64, samples: usize, seed: u64, exec: Exec) -> Result<Vec<f64>> {
    let n = dyadic_grid_for(t)?;
    let s = sampler.with_n(n)?;
    let k = (t * n as f64).round() as usize;
    exec.map(samples, |i| {
        let mut rng = RngStream::with_stream(seed, i as u64);
        s.sample_bridge(a, &mut rng).map(|b| b.values[k])
    })
    .into_iter()
    .collect()
}

/// KS distance of the simulated bridge marginal from quadrature.
pub fn bridge_marginal_check(sampler: &Sampler, a: f64, t: f64, samples: usize, seed: u64, exec: Exec) -> Result<KsCheck> {
    let table = bridge_marginal_reference(sampler.params(), a, t, &QuadratureSpec::default())?;
    let xs = bridge_marginal_sample(sampler, a, t, samples, seed, exec)?;
    let d = ks_one_sample(&xs, |x| table.cdf_at(x));
    let name = format!("bridge marginal alpha={} a={a} t={t}", sampler.params().alpha());
    Ok(KsCheck::new(name, d, xs.len(), 0.02))
}

/// Given the excursion at 1/2 near x0, the density of its value at 3/4 is
/// proportional to p^{(0,∞)}_{1/4}(x0, y) q_y(1/4). Returns the normalised
/// table and the normalising mass, which equals q_{x0}(1/2).
pub fn excursion_transition_reference(params: &StableParams, x0: f64, quad: &QuadratureSpec) -> Result<(DensityTable, f64)> {
    let f = |y: f64| -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        Ok(killed_transition(params, 0.25, x0, y, quad)? * hitting_density(params, y, 0.25, quad)?)
    };
    normalised_table(f, 0.0, x0 + 5.0, 601)
}

/// Values at 3/4 of excursions whose value at 1/2 lies within `window` of x0,
/// collected until `hits` such samples are found. Also returns the number of
/// excursions drawn.
pub fn excursion_transition_sample(sampler: &Sampler, x0: f64, window: f64, hits: usize, seed: u64, exec: Exec) -> (Vec<f64>, usize) {
    let n = sampler.config().n;
    let (mid, three) = (n / 2, 3 * n / 4);
    let mut out = Vec::with_capacity(hits);
    let mut drawn = 0usize;
    let chunk = 1 << 16;
    while out.len() < hits {
        let base = drawn;
        let got = exec.map(chunk, |i| {
            let mut rng = RngStream::with_stream(seed, (base + i) as u64);
            let e = sampler.sample_excursion(&mut rng);
            ((e.values[mid] - x0).abs() <= window).then(|| e.values[three])
        });
        drawn += chunk;
        out.extend(got.into_iter().flatten());
    }
    out.truncate(hits);
    (out, drawn)
}

/// KS distance of the conditioned excursion transition from quadrature.
pub fn excursion_transition_check(sampler: &Sampler, hits: usize, seed: u64, exec: Exec) -> Result<KsCheck> {
    let (table, _) = excursion_transition_reference(sampler.params(), 1.0, &QuadratureSpec::default())?;
    let (ys, _) = excursion_transition_sample(sampler, 1.0, 0.05, hits, seed, exec);
    let d = ks_one_sample(&ys, |y| table.cdf_at(y));
    let name = format!("excursion transition alpha={} n={}", sampler.params().alpha(), sampler.config().n);
    Ok(KsCheck::new(name, d, ys.len(), 0.03))
}

/// Chapman-Kolmogorov check: ∫ p^{(0,∞)}_{1/4}(x0, y) q_y(1/4) dy = q_{x0}(1/2).
pub fn hitting_consistency(params: &StableParams, x0: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let f = |y: f64| {
        killed_transition(params, 0.25, x0, y, quad)
            .and_then(|k| hitting_density(params, y, 0.25, quad).map(|h| k * h))
            .unwrap_or(f64::NAN)
    };
    let lhs = integrate_breaks(f, &[1e-12, 0.5 * x0, x0, 2.0 * x0, x0 + 6.0], &quad.with_abs(1e-14)).value;
    Ok((lhs, hitting_density(params, x0, 0.5, quad)?))
}
