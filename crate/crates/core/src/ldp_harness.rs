//! Monte Carlo checks of the tail asymptotics: tail estimates with Wilson
//! bounds, slope fits of -log P against x^{α'}, moment and Laplace growth,
//! the tightness bounds and the J1 two-jump probe.
//!
//! One campaign draws zero bridges on a 2n grid and keeps a few summaries per
//! sample (bridge sup, excursion area and sup on both grids, excursion values
//! at chosen times), so that several checks share the same samples.

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::sampling::{area_of, sup_of, vervaat, RngStream, Sampler};
use crate::stable_math::StableParams;
use crate::stats::{jackknife, ols, wilson};
use crate::variational::{gamma_area, gamma_bridge_sup, gamma_sup};
use serde::Serialize;
use std::fmt::Write as _;

/// Wilson normal quantile (95% two-sided).
pub const Z95: f64 = 1.959963984540054;
/// Hits a threshold needs before it enters a slope fit.
pub const MIN_FIT_HITS: u64 = 30;
pub const BATCHES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Area,
    Sup,
}

impl Functional {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "area" => Ok(Functional::Area),
            "sup" => Ok(Functional::Sup),
            other => Err(domain("Functional", format!("unknown functional '{other}' (area|sup)"))),
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            Functional::Area => "area",
            Functional::Sup => "sup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    Excursion,
    BridgeSup,
}

impl TailKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "excursion" => Ok(TailKind::Excursion),
            "bridge-sup" => Ok(TailKind::BridgeSup),
            other => Err(domain("TailKind", format!("unknown kind '{other}' (excursion|bridge-sup)"))),
        }
    }
}

/// Grid on which a summary was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grid {
    Coarse,
    Fine,
}

/// γ_Φ for the supported (functional, kind) pairs.
pub fn gamma_for(params: &StableParams, functional: Functional, kind: TailKind) -> Result<f64> {
    match (functional, kind) {
        (Functional::Area, TailKind::Excursion) => Ok(gamma_area(params)),
        (Functional::Sup, TailKind::Excursion) => Ok(gamma_sup(params)),
        (Functional::Sup, TailKind::BridgeSup) => Ok(gamma_bridge_sup(params)),
        (Functional::Area, TailKind::BridgeSup) => Err(domain("gamma_for", "bridge tails are for the sup only")),
    }
}

/// c_α γ^{-α'}: the slope of -log P(X > x) against x^{α'}.
pub fn theory_slope(params: &StableParams, functional: Functional, kind: TailKind) -> Result<f64> {
    let g = gamma_for(params, functional, kind)?;
    Ok(params.c_alpha() * g.powf(-params.alpha_prime()))
}

/// α^{1/α} γ_Φ: the limit of E[X^k]^{1/k} / (k/e)^{1/α'}.
pub fn moment_limit(params: &StableParams, functional: Functional, kind: TailKind) -> Result<f64> {
    Ok(params.alpha().powf(1.0 / params.alpha()) * gamma_for(params, functional, kind)?)
}

/// What a campaign records besides the tail functionals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignPlan {
    /// Coarse grid size; bridges are drawn on 2n points and subsampled.
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Times (on the fine grid) at which excursion values are kept.
    pub record_times: Vec<f64>,
    /// Window lengths δ for sup over [1-δ, 1] of the excursion.
    pub end_windows: Vec<f64>,
}

impl CampaignPlan {
    pub fn new(n: usize, samples: usize, seed: u64) -> Self {
        CampaignPlan {
            n,
            samples,
            seed,
            record_times: Vec::new(),
            end_windows: Vec::new(),
        }
    }
}

const BASE_COLUMNS: usize = 6;
const COL_BRIDGE_SUP: usize = 0;
const COL_AREA: usize = 2;
const COL_SUP: usize = 4;

/// Per-sample summaries in a flat row-major table.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub plan: CampaignPlan,
    pub alpha: f64,
    stride: usize,
    data: Vec<f64>,
    /// Fine-grid indices of `plan.record_times`.
    record_index: Vec<usize>,
}

fn snap(t: f64, n: usize) -> usize {
    ((t * n as f64).round() as usize).min(n)
}

impl Campaign {
    /// Runs the campaign. Sample i uses stream i of the seed, so results do
    /// not depend on `exec`.
    pub fn run(sampler: &Sampler, plan: CampaignPlan, exec: Exec) -> Result<Self> {
        if plan.samples == 0 {
            return Err(domain("Campaign", "need at least one sample"));
        }
        let fine = sampler.with_n(2 * plan.n)?;
        let nf = 2 * plan.n;
        let record_index: Vec<usize> = plan.record_times.iter().map(|&t| snap(t, nf)).collect();
        let end_index: Vec<usize> = plan.end_windows.iter().map(|&d| snap(1.0 - d, nf)).collect();
        let stride = BASE_COLUMNS + record_index.len() + end_index.len();
        let rows = exec.map(plan.samples, |i| {
            let mut rng = RngStream::with_stream(plan.seed, i as u64);
            let mut b = vec![0.0; nf + 1];
            fine.fill_bridge(&mut b, &mut rng);
            let coarse: Vec<f64> = b.iter().step_by(2).copied().collect();
            let ex_f = vervaat(&b);
            let ex_c = vervaat(&coarse);
            let mut row = Vec::with_capacity(stride);
            row.extend([
                sup_of(&coarse),
                sup_of(&b),
                area_of(&ex_c),
                area_of(&ex_f),
                sup_of(&ex_c),
                sup_of(&ex_f),
            ]);
            row.extend(record_index.iter().map(|&k| ex_f[k]));
            row.extend(end_index.iter().map(|&k| sup_of(&ex_f[k..])));
            row
        });
        let mut data = Vec::with_capacity(stride * plan.samples);
        for r in rows {
            data.extend(r);
        }
        Ok(Campaign {
            plan,
            alpha: sampler.params().alpha(),
            stride,
            data,
            record_index,
        })
    }

    pub fn len(&self) -> usize {
        self.plan.samples
    }
    pub fn is_empty(&self) -> bool {
        self.plan.samples == 0
    }

    fn column(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.stride).copied().collect()
    }

    /// Samples of the tail functional on the chosen grid.
    pub fn functional(&self, functional: Functional, kind: TailKind, grid: Grid) -> Result<Vec<f64>> {
        let base = match (functional, kind) {
            (Functional::Sup, TailKind::BridgeSup) => COL_BRIDGE_SUP,
            (Functional::Area, TailKind::Excursion) => COL_AREA,
            (Functional::Sup, TailKind::Excursion) => COL_SUP,
            _ => return Err(domain("Campaign::functional", "bridge tails are for the sup only")),
        };
        Ok(self.column(base + if grid == Grid::Fine { 1 } else { 0 }))
    }

    /// Excursion values at the j-th recorded time.
    pub fn recorded(&self, j: usize) -> Vec<f64> {
        self.column(BASE_COLUMNS + j)
    }

    /// Actual fine-grid time of the j-th recorded time.
    pub fn recorded_time(&self, j: usize) -> f64 {
        self.record_index[j] as f64 / (2 * self.plan.n) as f64
    }

    /// sup over [1-δ_j, 1] of the excursion.
    pub fn end_sup(&self, j: usize) -> Vec<f64> {
        self.column(BASE_COLUMNS + self.record_index.len() + j)
    }
}

/// Contiguous batch of sample i out of `batches`.
fn batch_of(i: usize, n: usize, batches: usize) -> usize {
    i * batches / n
}

#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub thresholds: Vec<f64>,
    pub hits: Vec<u64>,
    pub n: u64,
    pub estimates: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Thresholds with fewer than `MIN_FIT_HITS` hits are excluded from fits.
    pub usable: Vec<bool>,
    /// hits per threshold per batch, for jackknife errors.
    #[serde(skip)]
    pub batch_hits: Vec<Vec<u64>>,
}

/// Counts exceedances P(X > x) at each threshold.
pub fn tail_from_samples(samples: &[f64], thresholds: &[f64]) -> Result<TailEstimate> {
    if samples.is_empty() {
        return Err(domain("tail_from_samples", "no samples"));
    }
    if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("tail_from_samples", "thresholds must be strictly increasing"));
    }
    let n = samples.len();
    let batches = BATCHES.min(n);
    let mut batch_hits = vec![vec![0u64; batches]; thresholds.len()];
    for (i, &x) in samples.iter().enumerate() {
        let b = batch_of(i, n, batches);
        // thresholds are sorted: all below x are exceeded
        let k = thresholds.partition_point(|&t| t < x);
        for row in batch_hits.iter_mut().take(k) {
            row[b] += 1;
        }
    }
    let hits: Vec<u64> = batch_hits.iter().map(|r| r.iter().sum()).collect();
    let nn = n as u64;
    let estimates: Vec<f64> = hits.iter().map(|&h| h as f64 / n as f64).collect();
    let (lower, upper): (Vec<f64>, Vec<f64>) = hits.iter().map(|&h| wilson(h, nn, Z95)).unzip();
    let usable = hits.iter().map(|&h| h >= MIN_FIT_HITS && h < nn).collect();
    Ok(TailEstimate {
        thresholds: thresholds.to_vec(),
        hits,
        n: nn,
        estimates,
        lower,
        upper,
        usable,
        batch_hits,
    })
}

/// Tail estimate from a fresh campaign (plan.record_times are ignored).
pub fn estimate_tail(
    sampler: &Sampler,
    functional: Functional,
    kind: TailKind,
    thresholds: &[f64],
    plan: CampaignPlan,
    exec: Exec,
) -> Result<TailEstimate> {
    let c = Campaign::run(sampler, plan, exec)?;
    tail_from_samples(&c.functional(functional, kind, Grid::Coarse)?, thresholds)
}

/// Thresholds at the empirical survival levels `levels` (descending).
pub fn quantile_thresholds(samples: &[f64], levels: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mut out: Vec<f64> = levels
        .iter()
        .map(|&p| {
            let k = ((1.0 - p) * n as f64).floor() as usize;
            s[k.min(n - 1)]
        })
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub theory: f64,
    pub relative_deviation: f64,
    /// Jackknife (delete-one-batch) standard error of the slope.
    pub slope_se: f64,
    pub used: usize,
}

fn fit_counts(xs: &[f64], counts: &[f64], total: f64, ap: f64) -> Option<(f64, f64, f64)> {
    let x: Vec<f64> = xs.iter().map(|v| v.powf(ap)).collect();
    let y: Vec<f64> = counts.iter().map(|&c| -(c / total).ln()).collect();
    ols(&x, &y).map(|f| (f.slope, f.intercept, f.r2))
}

/// OLS of -log P̂ on x^{α'} over the usable thresholds.
pub fn fit_ldp_slope(params: &StableParams, est: &TailEstimate, theory: f64) -> Result<SlopeFit> {
    let idx: Vec<usize> = (0..est.thresholds.len()).filter(|&i| est.usable[i]).collect();
    if idx.len() < 3 {
        return Err(Error::Numerical {
            op: "fit_ldp_slope",
            msg: format!("need 3 usable thresholds, have {}", idx.len()),
        });
    }
    let ap = params.alpha_prime();
    let xs: Vec<f64> = idx.iter().map(|&i| est.thresholds[i]).collect();
    let counts: Vec<f64> = idx.iter().map(|&i| est.hits[i] as f64).collect();
    if counts.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::Numerical {
            op: "fit_ldp_slope",
            msg: "degenerate fit: all estimates equal".into(),
        });
    }
    let (slope, intercept, r2) = fit_counts(&xs, &counts, est.n as f64, ap).ok_or(Error::Numerical {
        op: "fit_ldp_slope",
        msg: "degenerate thresholds".into(),
    })?;
    let batches = est.batch_hits.first().map_or(0, |r| r.len());
    let slope_se = if batches >= 2 {
        let per_batch = est.n as f64 / batches as f64;
        jackknife(batches, |drop| match drop {
            None => slope,
            Some(b) => {
                let c: Vec<f64> = idx.iter().map(|&i| (est.hits[i] - est.batch_hits[i][b]) as f64).collect();
                if c.contains(&0.0) {
                    return slope;
                }
                fit_counts(&xs, &c, est.n as f64 - per_batch, ap).map_or(slope, |f| f.0)
            }
        })
        .1
    } else {
        f64::NAN
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        theory,
        relative_deviation: (slope - theory).abs() / theory,
        slope_se,
        used: idx.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub k: u32,
    /// E[X^k]^{1/k} / (k/e)^{1/α'}
    pub ratio: f64,
    pub se: f64,
    pub flagged: bool,
}

/// Moment ratios for k = 1..=k_max with 50-batch jackknife errors.
pub fn moment_growth(params: &StableParams, samples: &[f64], k_max: u32) -> Result<Vec<MomentRow>> {
    if k_max == 0 || k_max > 12 {
        return Err(domain("moment_growth", "k_max must lie in 1..=12"));
    }
    if samples.len() < BATCHES || samples.iter().any(|&x| !(x >= 0.0)) {
        return Err(domain("moment_growth", "need at least 50 nonnegative samples"));
    }
    let n = samples.len();
    let ap = params.alpha_prime();
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let mut sums = vec![0.0f64; BATCHES];
        for (i, &x) in samples.iter().enumerate() {
            sums[batch_of(i, n, BATCHES)] += x.powi(k as i32);
        }
        let counts: Vec<f64> = (0..BATCHES)
            .map(|b| ((b + 1) * n).div_ceil(BATCHES) as f64 - (b * n).div_ceil(BATCHES) as f64)
            .collect();
        let total: f64 = sums.iter().sum();
        let norm = (k as f64 / std::f64::consts::E).powf(1.0 / ap);
        let (ratio, se) = jackknife(BATCHES, |drop| {
            let (s, c) = match drop {
                None => (total, n as f64),
                Some(b) => (total - sums[b], n as f64 - counts[b]),
            };
            (s / c).powf(1.0 / k as f64) / norm
        });
        rows.push(MomentRow {
            k,
            ratio,
            se,
            flagged: se > 0.5 * ratio,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LaplaceRow {
    pub t: f64,
    /// log E[e^{tX}] / t^α
    pub ratio: f64,
    /// Share of the empirical e^{tX} mass carried by the 10 largest samples.
    pub top10_share: f64,
    pub trusted: bool,
}

pub fn laplace_growth(params: &StableParams, samples: &[f64], ts: &[f64]) -> Result<Vec<LaplaceRow>> {
    if samples.len() < 10 || ts.iter().any(|&t| !(t > 0.0)) {
        return Err(domain("laplace_growth", "need >= 10 samples and t > 0"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let xmax = sorted[0];
    Ok(ts
        .iter()
        .map(|&t| {
            // factor out e^{t xmax} against overflow
            let total: f64 = sorted.iter().map(|&x| (t * (x - xmax)).exp()).sum();
            let top: f64 = sorted[..10].iter().map(|&x| (t * (x - xmax)).exp()).sum();
            let log_mean = t * xmax + (total / samples.len() as f64).ln();
            let share = top / total;
            LaplaceRow {
                t,
                ratio: log_mean / t.powf(params.alpha()),
                top10_share: share,
                trusted: share < 0.5,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct TightCell {
    pub t1: f64,
    pub t: f64,
    pub t2: f64,
    pub lambda: f64,
    /// log E[exp(λ M(L_t1, L_t, L_t2))]
    pub lhs: f64,
    pub se: f64,
    /// lhs - (t2 - t1) λ^α
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndWindow {
    pub delta: f64,
    pub gamma: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TightnessReport {
    pub cells: Vec<TightCell>,
    /// log C of the smallest constant making the bound hold on every cell.
    pub log_c: f64,
    /// Per triple: the excess at the largest λ stays within 3 SE of the
    /// largest excess at smaller λ (growth no faster than (t2-t1)λ^α).
    pub form_ok: bool,
    pub coef_lambda: f64,
    /// OLS slope κ of log lhs on log(t2 - t1) at λ = `coef_lambda`; the
    /// bound scales linearly in the span (κ = 1).
    pub span_exponent: f64,
    /// κ within [0.5, 2].
    pub span_exponent_ok: bool,
    /// OLS coefficient of lhs on (t2 - t1) λ^α at the same λ (diagnostic).
    pub linear_coefficient: f64,
    pub end_windows: Vec<EndWindow>,
    pub end_monotone: bool,
    pub pass: bool,
}

/// Checks the exponential moment bound for M on excursion triples, given the
/// excursion values recorded at t1, t, t2 for every triple.
pub fn tightness_moment_check(
    params: &StableParams,
    triples: &[(f64, f64, f64)],
    values: &[[Vec<f64>; 3]],
    lambdas: &[f64],
    coef_lambda: f64,
    end: &[(f64, Vec<f64>)],
    end_gamma: f64,
) -> Result<TightnessReport> {
    if triples.len() != values.len() || triples.is_empty() || lambdas.len() < 2 {
        return Err(domain("tightness_moment_check", "need values for every triple and >= 2 lambdas"));
    }
    if triples.iter().any(|&(a, b, c)| !(0.0 <= a && a <= b && b <= c && c <= 0.9)) {
        return Err(domain("tightness_moment_check", "triples need 0 <= t1 <= t <= t2 <= 0.9"));
    }
    let alpha = params.alpha();
    let mut cells = Vec::new();
    let mut form_ok = true;
    for (tr, v) in triples.iter().zip(values) {
        let m: Vec<f64> = (0..v[0].len())
            .map(|i| crate::path_space::m_value(v[0][i], v[1][i], v[2][i]))
            .collect();
        let span = tr.2 - tr.0;
        let mut row = Vec::new();
        for &lambda in lambdas {
            let w: Vec<f64> = m.iter().map(|x| (lambda * x).exp()).collect();
            let nn = w.len() as f64;
            let mean = w.iter().sum::<f64>() / nn;
            let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nn - 1.0);
            let lhs = mean.ln();
            let cell = TightCell {
                t1: tr.0,
                t: tr.1,
                t2: tr.2,
                lambda,
                lhs,
                se: (var / nn).sqrt() / mean,
                excess: lhs - span * lambda.powf(alpha),
            };
            row.push(cell);
        }
        let (last, rest) = row.split_last().expect("two lambdas");
        let best = rest.iter().map(|c| c.excess).fold(f64::NEG_INFINITY, f64::max);
        let se = rest.iter().map(|c| c.se).fold(last.se, f64::max);
        if last.excess > best + 3.0 * se {
            form_ok = false;
        }
        cells.extend(row);
    }
    let log_c = cells.iter().map(|c| c.excess).fold(0.0f64, f64::max);
    let at: Vec<&TightCell> = cells.iter().filter(|c| c.lambda == coef_lambda && c.lhs > 0.0).collect();
    let fit = |x: Vec<f64>, y: Vec<f64>| ols(&x, &y).map_or(f64::NAN, |f| f.slope);
    let (span_exponent, linear_coefficient) = if at.len() >= 2 {
        (
            fit(
                at.iter().map(|c| (c.t2 - c.t1).ln()).collect(),
                at.iter().map(|c| c.lhs.ln()).collect(),
            ),
            fit(
                at.iter().map(|c| (c.t2 - c.t1) * c.lambda.powf(alpha)).collect(),
                at.iter().map(|c| c.lhs).collect(),
            ),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let span_exponent_ok = (0.5..=2.0).contains(&span_exponent);
    let mut end_windows: Vec<EndWindow> = end
        .iter()
        .map(|(delta, sups)| {
            let hits = sups.iter().filter(|&&s| s > end_gamma).count() as u64;
            let n = sups.len() as u64;
            let (lower, upper) = wilson(hits, n, Z95);
            EndWindow {
                delta: *delta,
                gamma: end_gamma,
                estimate: hits as f64 / n as f64,
                lower,
                upper,
            }
        })
        .collect();
    end_windows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let end_monotone = end_windows.windows(2).all(|w| w[1].estimate <= w[0].estimate);
    let pass = form_ok && span_exponent_ok && end_monotone && log_c.is_finite();
    Ok(TightnessReport {
        cells,
        log_c,
        form_ok,
        coef_lambda,
        span_exponent,
        span_exponent_ok,
        linear_coefficient,
        end_windows,
        end_monotone,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub eps: f64,
    pub hits: u64,
    pub estimate: f64,
    /// ε^{α'} log P̂
    pub scaled: f64,
    /// ε^{α'} log of the Wilson lower bound
    pub scaled_lower: f64,
    pub floor: f64,
    pub enough_hits: bool,
    /// scaled_lower ≥ floor: the ε → 0 floor applied at finite ε.
    pub above_floor: bool,
    /// log P̂ - (2α+2) log ε - floor ε^{-α'}, the lower bound's log C(δ),
    /// with its Wilson range.
    pub residual: f64,
    pub residual_lower: f64,
    pub residual_upper: f64,
}

/// Summary of the two-jump probe over the rows with enough hits.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeVerdict {
    pub usable: usize,
    /// Fitted log C(δ): the smallest residual among usable rows.
    pub log_c: f64,
    /// Every usable row clears the raw floor.
    pub raw_floor_ok: bool,
    /// The residual does not fall as ε shrinks: Wilson upper residual at the
    /// smallest usable ε ≥ Wilson lower residual at the largest.
    pub form_ok: bool,
    /// Set when fewer than two rows have 10 hits; the check is then soft.
    pub warning: Option<String>,
}

pub fn probe_verdict(rows: &[ProbeRow]) -> ProbeVerdict {
    let mut usable: Vec<&ProbeRow> = rows.iter().filter(|r| r.enough_hits).collect();
    usable.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let log_c = usable.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let raw_floor_ok = usable.iter().all(|r| r.above_floor);
    if usable.len() < 2 {
        return ProbeVerdict {
            usable: usable.len(),
            log_c,
            raw_floor_ok,
            form_ok: true,
            warning: Some(format!("only {} eps values with >= 10 hits", usable.len())),
        };
    }
    let (big, small) = (usable[0], usable[usable.len() - 1]);
    ProbeVerdict {
        usable: usable.len(),
        log_c,
        raw_floor_ok,
        form_ok: small.residual_upper >= big.residual_lower,
        warning: None,
    }
}

/// ε^{α'} log P(L_δ ∈ [1/ε, 2/ε], L_{2δ} ∈ [3/ε, 4/ε]) from excursion values
/// at δ and 2δ, with the floor -c_α (3/(1-2δ))^{α'}.
pub fn j1_two_jump_probe(params: &StableParams, delta: f64, eps: &[f64], at_delta: &[f64], at_2delta: &[f64]) -> Result<Vec<ProbeRow>> {
    if !(delta > 0.0 && delta < 0.5) || at_delta.len() != at_2delta.len() || at_delta.is_empty() {
        return Err(domain("j1_two_jump_probe", "need 0 < delta < 1/2 and paired samples"));
    }
    let ap = params.alpha_prime();
    let floor = -params.c_alpha() * (3.0 / (1.0 - 2.0 * delta)).powf(ap);
    let n = at_delta.len() as u64;
    eps.iter()
        .map(|&e| {
            if !(e > 0.0) {
                return Err(domain("j1_two_jump_probe", "eps must be positive"));
            }
            let hits = at_delta
                .iter()
                .zip(at_2delta)
                .filter(|(&a, &b)| (1.0 / e..=2.0 / e).contains(&a) && (3.0 / e..=4.0 / e).contains(&b))
                .count() as u64;
            let estimate = hits as f64 / n as f64;
            let (lower, upper) = wilson(hits, n, Z95);
            let w = e.powf(ap);
            let scaled_lower = w * lower.ln();
            let shift = -(2.0 * params.alpha() + 2.0) * e.ln() - floor / w;
            Ok(ProbeRow {
                eps: e,
                hits,
                estimate,
                scaled: w * estimate.ln(),
                scaled_lower,
                floor,
                enough_hits: hits >= 10,
                above_floor: scaled_lower >= floor,
                residual: estimate.ln() + shift,
                residual_lower: lower.ln() + shift,
                residual_upper: upper.ln() + shift,
            })
        })
        .collect()
}

pub fn tail_csv(est: &TailEstimate) -> String {
    let mut s = String::from("x,hits,estimate,wilson_lower,wilson_upper,usable\n");
    for i in 0..est.thresholds.len() {
        let _ = writeln!(
            s,
            "{:?},{},{:e},{:e},{:e},{}",
            est.thresholds[i], est.hits[i], est.estimates[i], est.lower[i], est.upper[i], est.usable[i]
        );
    }
    s
}

pub fn moments_csv(rows: &[MomentRow], limit: f64) -> String {
    let mut s = String::from("k,ratio,jackknife_se,limit,flagged\n");
    for r in rows {
        let _ = writeln!(s, "{},{:.10},{:.3e},{:.10},{}", r.k, r.ratio, r.se, limit, r.flagged);
    }
    s
}

pub fn laplace_csv(rows: &[LaplaceRow], limit: f64) -> String {
    let mut s = String::from("t,ratio,top10_share,limit,trusted\n");
    for r in rows {
        let _ = writeln!(s, "{:?},{:.10},{:.4},{:.10},{}", r.t, r.ratio, r.top10_share, limit, r.trusted);
    }
    s
}

pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut s = String::from("eps,hits,estimate,scaled,scaled_lower,floor,enough_hits,above_floor,residual\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:?},{},{:e},{:.6},{:.6},{:.6},{},{},{:.6}",
            r.eps, r.hits, r.estimate, r.scaled, r.scaled_lower, r.floor, r.enough_hits, r.above_floor, r.residual
        );
    }
    s
}
