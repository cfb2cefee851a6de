//! Adaptive Gauss-Kronrod (7-15-21 family, 21-point rule) quadrature with a
//! global error queue, in the style of QUADPACK's QAG/QAGP.

#![allow(clippy::excessive_precision)]

use crate::error::{domain, Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(domain("QuadratureSpec", "tolerances must be positive"));
        }
        if max_subdivisions < 1 {
            return Err(domain("QuadratureSpec", "max_subdivisions must be at least 1"));
        }
        Ok(QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    pub(crate) fn with_abs(self, abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..self }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

impl Integral {
    /// Turns a non-converged result into an error tagged with `op`.
    pub fn require(self, op: &'static str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                op,
                value: self.value,
                abs_error: self.abs_error,
            })
        }
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208690178930,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    at_floor: bool,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        // floor-limited pieces sink to the bottom, they cannot be improved
        match (self.at_floor, other.at_floor) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            _ => self.error.total_cmp(&other.error),
        }
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let mut at_floor = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * res_abs;
        if floor >= err {
            err = floor;
            at_floor = true;
        }
    }
    if !value.is_finite() || !err.is_finite() {
        return Piece {
            a,
            b,
            value,
            error: f64::INFINITY,
            at_floor: false,
        };
    }
    Piece {
        a,
        b,
        value,
        error: err,
        at_floor,
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Integral {
    integrate_breaks(f, &[a, b], spec)
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
/// queue with the given breakpoints. Points must be nondecreasing; empty
/// pieces are skipped.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], spec: &QuadratureSpec) -> Integral {
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&f, w[0], w[1]));
        }
    }
    let mut count = heap.len();
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        let improvable = heap.peek().is_some_and(|p| !p.at_floor);
        if error <= tol || !improvable {
            // a queue made only of roundoff-limited pieces is as good as it gets
            let converged = error.is_finite();
            return Integral {
                value,
                abs_error: error,
                intervals: count,
                converged,
            };
        }
        if count >= spec.max_subdivisions {
            return Integral {
                value,
                abs_error: error,
                intervals: count,
                converged: false,
            };
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted in floating point: freeze it
            heap.push(Piece { at_floor: true, ..worst });
            continue;
        }
        heap.push(gk21(&f, worst.a, mid));
        heap.push(gk21(&f, mid, worst.b));
        count += 1;
    }
}

/// Integrates `f` over `[a, ∞)` through the substitution x = a + u/(1-u).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, spec: &QuadratureSpec) -> Integral {
    let g = |u: f64| {
        let v = 1.0 - u;
        let x = a + u / v;
        let y = f(x) / (v * v);
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, spec)
}
