//! Càdlàg paths with finitely many breakpoints, rooted by f(0-) = 0, and the
//! M1' machinery: augmented graphs, the parametric-representation distance,
//! the M-oscillation and the J1 oscillation.

use crate::error::{domain, Error, Result};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Interpolation {
    /// Constant on [t_i, t_{i+1}).
    Step,
    /// Affine from f(t_i) to f(t_{i+1}-) on each gap.
    Linear,
}

impl Interpolation {
    pub fn name(&self) -> &'static str {
        match self {
            Interpolation::Step => "step",
            Interpolation::Linear => "linear",
        }
    }
}

/// A path on [0,1] given by its one-sided values at breakpoints
/// 0 = t_0 < ... < t_m = 1. `left[i]` is f(t_i-) and `right[i]` is f(t_i);
/// `left[0]` is always 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    t: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    interp: Interpolation,
}

impl CadlagPath {
    pub fn new(t: Vec<f64>, left: Vec<f64>, right: Vec<f64>, interp: Interpolation) -> Result<Self> {
        let m = t.len();
        if m < 2 || left.len() != m || right.len() != m {
            return Err(domain("CadlagPath", "need at least two breakpoints with matching values"));
        }
        if t[0] != 0.0 || t[m - 1] != 1.0 {
            return Err(domain("CadlagPath", "breakpoints must start at 0 and end at 1"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("CadlagPath", "breakpoints must be strictly increasing"));
        }
        if left.iter().chain(&right).any(|v| !v.is_finite()) {
            return Err(domain("CadlagPath", "values must be finite"));
        }
        if left[0] != 0.0 {
            return Err(domain("CadlagPath", "left value at 0 is the root f(0-) = 0"));
        }
        if interp == Interpolation::Step {
            for i in 1..m {
                if left[i] != right[i - 1] {
                    return Err(domain(
                        "CadlagPath",
                        format!("step path: left value at t={} must equal the preceding value", t[i]),
                    ));
                }
            }
        }
        Ok(CadlagPath { t, left, right, interp })
    }

    /// Step path taking `values[i]` on [t_i, t_{i+1}) and `values[m]` at 1.
    pub fn step(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != t.len() || values.is_empty() {
            return Err(domain("CadlagPath", "values must match breakpoints"));
        }
        let mut left = vec![0.0; values.len()];
        left[1..].copy_from_slice(&values[..values.len() - 1]);
        Self::new(t, left, values, Interpolation::Step)
    }

    /// Continuous piecewise-linear path through `(t_i, values[i])`; the only
    /// possible jump is at 0, from the root to `values[0]`.
    pub fn linear(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != t.len() || values.is_empty() {
            return Err(domain("CadlagPath", "values must match breakpoints"));
        }
        let mut left = values.clone();
        left[0] = 0.0;
        Self::new(t, left, values, Interpolation::Linear)
    }

    /// Piecewise-linear interpolation of `f` on the uniform grid with n gaps.
    pub fn linear_from_fn<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<Self> {
        let t = uniform_grid(n);
        let v = t.iter().map(|&s| f(s)).collect();
        Self::linear(t, v)
    }

    pub fn zero() -> Self {
        CadlagPath::step(vec![0.0, 1.0], vec![0.0, 0.0]).expect("valid zero path")
    }

    /// Indicator of [a, b) ∩ [0, 1] as a step path; b > 1 keeps f(1) = 1.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !((0.0..1.0).contains(&a) && b > a) {
            return Err(domain("CadlagPath::indicator", "need 0 <= a < 1 and b > a"));
        }
        let mut t = vec![0.0];
        let mut v = vec![if a == 0.0 { 1.0 } else { 0.0 }];
        if a > 0.0 {
            t.push(a);
            v.push(1.0);
        }
        if b < 1.0 {
            t.push(b);
            v.push(0.0);
        }
        t.push(1.0);
        v.push(if b > 1.0 { 1.0 } else { 0.0 });
        Self::step(t, v)
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }
    pub fn left(&self) -> &[f64] {
        &self.left
    }
    pub fn right(&self) -> &[f64] {
        &self.right
    }
    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }
    pub fn len(&self) -> usize {
        self.t.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// f(s), right-continuous.
    pub fn eval(&self, s: f64) -> f64 {
        let m = self.t.len();
        if s >= 1.0 {
            return self.right[m - 1];
        }
        let s = s.max(0.0);
        let i = self.t.partition_point(|&b| b <= s) - 1;
        match self.interp {
            Interpolation::Step => self.right[i],
            Interpolation::Linear => {
                let w = (s - self.t[i]) / (self.t[i + 1] - self.t[i]);
                self.right[i] + w * (self.left[i + 1] - self.right[i])
            }
        }
    }

    /// f(s-), with f(0-) = 0.
    pub fn eval_left(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let i = self.t.partition_point(|&b| b < s);
        if i < self.t.len() && self.t[i] == s {
            return self.left[i];
        }
        self.eval(s)
    }

    pub fn sup_abs(&self) -> f64 {
        self.left.iter().chain(&self.right).fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.left[1..].iter().chain(&self.right).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn end_value(&self) -> f64 {
        *self.right.last().expect("nonempty")
    }

    /// Total variation including the rooted jump at 0.
    pub fn total_variation(&self) -> f64 {
        let m = self.t.len();
        let mut tv = 0.0;
        for i in 0..m {
            tv += (self.right[i] - self.left[i]).abs();
            if i + 1 < m {
                tv += (self.left[i + 1] - self.right[i]).abs();
            }
        }
        tv
    }

    /// Values scaled by λ.
    pub fn scaled(&self, lambda: f64) -> CadlagPath {
        CadlagPath {
            t: self.t.clone(),
            left: self.left.iter().map(|v| v * lambda).collect(),
            right: self.right.iter().map(|v| v * lambda).collect(),
            interp: self.interp,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# interpolation={}\nt,left,right\n", self.interp.name());
        for i in 0..self.t.len() {
            let _ = writeln!(s, "{:?},{:?},{:?}", self.t[i], self.left[i], self.right[i]);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut interp = None;
        let (mut t, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new());
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some(v) = meta.trim().strip_prefix("interpolation=") {
                    interp = Some(match v.trim() {
                        "step" => Interpolation::Step,
                        "linear" => Interpolation::Linear,
                        other => return Err(Error::Parse(format!("unknown interpolation '{other}'"))),
                    });
                }
                continue;
            }
            if line.starts_with('t') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns in '{line}'")));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{e}: '{s}'")));
            t.push(parse(cols[0])?);
            left.push(parse(cols[1])?);
            right.push(parse(cols[2])?);
        }
        let interp = interp.ok_or_else(|| Error::Parse("missing '# interpolation=' line".into()))?;
        CadlagPath::new(t, left, right, interp)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { 1.0 } else { i as f64 / n as f64 }).collect()
}

/// f = up - down with nondecreasing parts whose increments live on disjoint
/// pieces of the breakpoint partition. An initial upward jump sits in `up`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanDecomposition {
    pub up: CadlagPath,
    pub down: CadlagPath,
}

pub fn jordan(path: &CadlagPath) -> JordanDecomposition {
    let m = path.t.len();
    let (mut ul, mut ur, mut dl, mut dr) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let (mut u, mut d) = (0.0f64, 0.0f64);
    for i in 0..m {
        ul[i] = u;
        dl[i] = d;
        let jump = path.right[i] - path.left[i];
        if jump > 0.0 {
            u += jump;
        } else {
            d -= jump;
        }
        ur[i] = u;
        dr[i] = d;
        if i + 1 < m {
            let inc = path.left[i + 1] - path.right[i];
            if inc > 0.0 {
                u += inc;
            } else {
                d -= inc;
            }
        }
    }
    let build = |l: Vec<f64>, r: Vec<f64>| CadlagPath {
        t: path.t.clone(),
        left: l,
        right: r,
        interp: path.interp,
    };
    JordanDecomposition {
        up: build(ul, ur),
        down: build(dl, dr),
    }
}

/// Vertices of Γ_0(f) in the order ⪯, starting at the root (0, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    pub vertices: Vec<(f64, f64)>,
}

pub fn augmented_graph(path: &CadlagPath) -> AugmentedGraph {
    let m = path.t.len();
    let mut v = vec![(0.0, 0.0)];
    for i in 0..m {
        if path.right[i] != path.left[i] {
            v.push((path.t[i], path.right[i]));
        }
        if i + 1 < m {
            v.push((path.t[i + 1], path.left[i + 1]));
        }
    }
    AugmentedGraph { vertices: v }
}

/// d(y, [x, z]) with the interval taken unordered.
pub fn m_value(x: f64, y: f64, z: f64) -> f64 {
    let (lo, hi) = if x <= z { (x, z) } else { (z, x) };
    if y > hi {
        y - hi
    } else if y < lo {
        lo - y
    } else {
        0.0
    }
}

/// Candidate times where suprema over windows of width `w` are attained:
/// breakpoints, breakpoints shifted by ±w, and (for linear paths) points
/// where f(s) = f(s + w) on a pair of affine pieces.
fn window_candidates(path: &CadlagPath, w: f64) -> Vec<f64> {
    let mut c: Vec<f64> = path.t.clone();
    for &b in &path.t {
        for s in [b - w, b + w] {
            if s > 0.0 && s < 1.0 {
                c.push(s);
            }
        }
    }
    if path.interp == Interpolation::Linear {
        let m = path.t.len();
        for i in 0..m - 1 {
            let (a0, a1) = (path.t[i], path.t[i + 1]);
            let si = (path.left[i + 1] - path.right[i]) / (a1 - a0);
            for k in i..m - 1 {
                let (b0, b1) = (path.t[k], path.t[k + 1]);
                if b0 >= a1 + w {
                    break;
                }
                let sk = (path.left[k + 1] - path.right[k]) / (b1 - b0);
                // s in [a0, a1), s + w in [b0, b1)
                let lo = a0.max(b0 - w);
                let hi = a1.min(b1 - w);
                if !(hi > lo) || si == sk {
                    continue;
                }
                // right[i] + si (s - a0) = right[k] + sk (s + w - b0)
                let s = (path.right[k] + sk * (w - b0) - path.right[i] + si * a0) / (si - sk);
                if s > lo && s < hi {
                    c.push(s);
                    c.push(s + w);
                }
            }
        }
    }
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// One-sided values at each candidate time.
fn one_sided(path: &CadlagPath, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let l = c.iter().map(|&s| path.eval_left(s)).collect();
    let r = c.iter().map(|&s| path.eval(s)).collect();
    (l, r)
}

/// Some(true) inside the window, Some(false) on its edge, None beyond.
fn window_ok(s: f64, u: f64, w: f64) -> Option<bool> {
    let d = u - s;
    let edge = 4.0 * f64::EPSILON * w.max(1.0);
    if d < w - edge {
        Some(true)
    } else if d <= w + edge {
        Some(false)
    } else {
        None
    }
}

/// Sweeps pairs s < u of candidates inside the window and hands the
/// admissible endpoint values plus the sup/inf of f over (s, u) to `score`.
///
/// On the window edge the endpoints can still be approached from inside,
/// except for the pairing (value from the left at s, value at u).
fn sweep<F: FnMut(&[(f64, f64)], f64, f64)>(path: &CadlagPath, w: f64, mut score: F) {
    let c = window_candidates(path, w);
    let (l, r) = one_sided(path, &c);
    let n = c.len();
    for i in 0..n {
        // middle sup/inf over (c[i], c[k]): right value at c[i] and both
        // one-sided values strictly inside, then left value at c[k]
        let mut hi = r[i];
        let mut lo = r[i];
        for k in i + 1..n {
            let Some(inside) = window_ok(c[i], c[k], w) else { break };
            let (mh, ml) = (hi.max(l[k]), lo.min(l[k]));
            let mut ends: Vec<(f64, f64)> = vec![(r[i], r[k]), (l[i], l[k]), (r[i], l[k])];
            if inside {
                ends.push((l[i], r[k]));
            }
            score(&ends, mh, ml);
            hi = hi.max(l[k]).max(r[k]);
            lo = lo.min(l[k]).min(r[k]);
        }
    }
}

/// w_M(f, δ) = sup { M(f(t1-), f(t), f(t2)) : 0 ≤ t1 < t < t2 ≤ 1, t2 - t1 < δ }.
pub fn m_oscillation(path: &CadlagPath, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain("m_oscillation", "delta must lie in (0, 1]"));
    }
    let mut best = 0.0f64;
    sweep(path, delta, |ends, hi, lo| {
        for &(x, z) in ends {
            best = best.max(hi - x.max(z)).max(x.min(z) - lo);
        }
    });
    Ok(best)
}

/// ω_J1(f, η) = sup { |f(u)-f(t)| ∧ |f(t)-f(s)| : s < t < u, u - s ≤ η }.
pub fn j1_oscillation(path: &CadlagPath, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(domain("j1_oscillation", "eta must lie in (0, 1]"));
    }
    let c = window_candidates(path, eta);
    let (l, r) = one_sided(path, &c);
    // f(0-) is not part of the J1 modulus
    let l: Vec<f64> = l
        .iter()
        .zip(&r)
        .enumerate()
        .map(|(i, (a, b))| if i == 0 { *b } else { *a })
        .collect();
    let mut best = 0.0f64;
    let n = c.len();
    for i in 0..n {
        for k in i + 1..n {
            let Some(inside) = window_ok(c[i], c[k], eta) else { break };
            let mut ends = vec![(r[i], r[k]), (l[i], l[k]), (r[i], l[k])];
            if inside {
                ends.push((l[i], r[k]));
            }
            for &(x, z) in &ends {
                best = best.max(best_middle(path, &l, &r, i, k, x, z));
            }
        }
    }
    Ok(best)
}

/// max over t in (c[i], c[k]) of |z - f(t)| ∧ |f(t) - x|.
fn best_middle(path: &CadlagPath, l: &[f64], r: &[f64], i: usize, k: usize, x: f64, z: f64) -> f64 {
    let obj = |y: f64| (z - y).abs().min((y - x).abs());
    let target = 0.5 * (x + z);
    let mut best = 0.0f64;
    // pieces between consecutive candidates are affine (or constant)
    for j in i..k {
        let a = r[j];
        let b = l[j + 1];
        best = best.max(obj(a)).max(obj(b));
        if path.interp == Interpolation::Linear && (a - target) * (b - target) < 0.0 {
            best = best.max(obj(target));
        }
        if j > i {
            best = best.max(obj(l[j]));
        }
    }
    best
}

/// Free sub-interval of [0,1] for s with ‖a + s·d‖∞ ≤ ε.
fn free_interval(a: (f64, f64), d: (f64, f64), eps: f64) -> Option<(f64, f64)> {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (ac, dc) in [(a.0, d.0), (a.1, d.1)] {
        if dc == 0.0 {
            if ac.abs() > eps {
                return None;
            }
        } else {
            let s1 = (-eps - ac) / dc;
            let s2 = (eps - ac) / dc;
            lo = lo.max(s1.min(s2));
            hi = hi.min(s1.max(s2));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

fn sub(p: (f64, f64), q: (f64, f64)) -> (f64, f64) {
    (p.0 - q.0, p.1 - q.1)
}

fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).abs().max((p.1 - q.1).abs())
}

/// Monotone (Fréchet-type) matching of two polygonal chains within ε in L∞.
pub fn frechet_decide(p: &[(f64, f64)], q: &[(f64, f64)], eps: f64) -> bool {
    let (m, n) = (p.len() - 1, q.len() - 1);
    if linf(p[0], q[0]) > eps || linf(p[m], q[n]) > eps {
        return false;
    }
    if m == 0 || n == 0 {
        // one chain is a point: everything must stay within ε of it
        let (pt, ch) = if m == 0 { (p[0], q) } else { (q[0], p) };
        return ch.iter().all(|&v| linf(v, pt) <= eps);
    }
    // lft[i][j]: reachable part of the edge {p_i} × Q_j; bot[i][j]: P_i × {q_j}
    let mut lft = vec![vec![None; n]; m + 1];
    let mut bot = vec![vec![None; n + 1]; m];
    let free_l = |i: usize, j: usize| free_interval(sub(q[j], p[i]), sub(q[j + 1], q[j]), eps);
    let free_b = |i: usize, j: usize| free_interval(sub(p[i], q[j]), sub(p[i + 1], p[i]), eps);
    for j in 0..n {
        let f = free_l(0, j);
        let entry_ok = j == 0 || matches!(lft[0][j - 1], Some((_, h)) if h >= 1.0);
        lft[0][j] = match f {
            Some((lo, hi)) if lo <= 0.0 && entry_ok => Some((0.0, hi)),
            _ => None,
        };
    }
    for i in 0..m {
        let f = free_b(i, 0);
        let entry_ok = i == 0 || matches!(bot[i - 1][0], Some((_, h)) if h >= 1.0);
        bot[i][0] = match f {
            Some((lo, hi)) if lo <= 0.0 && entry_ok => Some((0.0, hi)),
            _ => None,
        };
    }
    for i in 0..m {
        for j in 0..n {
            let (l, b) = (lft[i][j], bot[i][j]);
            let right = free_l(i + 1, j).and_then(|(lo, hi)| match (b, l) {
                (Some(_), _) => Some((lo, hi)),
                (None, Some((llo, _))) => (hi >= llo).then_some((lo.max(llo), hi)),
                _ => None,
            });
            let top = free_b(i, j + 1).and_then(|(lo, hi)| match (l, b) {
                (Some(_), _) => Some((lo, hi)),
                (None, Some((blo, _))) => (hi >= blo).then_some((lo.max(blo), hi)),
                _ => None,
            });
            lft[i + 1][j] = right;
            bot[i][j + 1] = top;
        }
    }
    matches!(lft[m][n - 1], Some((_, h)) if h >= 1.0) || matches!(bot[m - 1][n], Some((_, h)) if h >= 1.0)
}

/// M1' distance between two paths, accurate to `tol`.
pub fn m1_distance(a: &CadlagPath, b: &CadlagPath, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(domain("m1_distance", "tol must be positive"));
    }
    let ga = augmented_graph(a).vertices;
    let gb = augmented_graph(b).vertices;
    // identical work for (a, b) and (b, a)
    let key = |g: &[(f64, f64)]| g.iter().flat_map(|&(x, y)| [x.to_bits(), y.to_bits()]).collect::<Vec<_>>();
    let (p, q) = if key(&ga) <= key(&gb) { (ga, gb) } else { (gb, ga) };
    let lower = linf(p[0], q[0]).max(linf(*p.last().unwrap(), *q.last().unwrap()));
    if frechet_decide(&p, &q, lower) {
        return Ok(lower);
    }
    let mut lo = lower;
    let mut hi = 1.0 + a.sup_abs() + b.sup_abs();
    while !frechet_decide(&p, &q, hi) {
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if frechet_decide(&p, &q, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
