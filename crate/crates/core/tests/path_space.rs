mod common;

use common::frechet_brute;
use proptest::prelude::*;
use stable_ldp::path_space::*;

/// Piecewise formula for step paths: pieces [b_i, b_{i+1}) and {1};
/// triples of pieces i < j < k are feasible when b_k - b_{i+1} < δ, plus the
/// rooted triples (0, r_j, r_k) with b_k < δ.
fn wm_step_oracle(p: &CadlagPath, delta: f64) -> f64 {
    let t = p.times();
    let r = p.right();
    let m = t.len();
    let hi = |i: usize| if i + 1 < m { t[i + 1] } else { 1.0 };
    let mut best = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                if t[k] - hi(i) < delta {
                    best = best.max(m_value(r[i], r[j], r[k]));
                }
            }
        }
    }
    for j in 0..m {
        for k in j + 1..m {
            if t[k] < delta {
                best = best.max(m_value(0.0, r[j], r[k]));
            }
        }
    }
    best
}

/// Triples on a uniform grid: a lower bound for w_M.
#[allow(clippy::needless_range_loop)]
fn wm_grid(p: &CadlagPath, delta: f64, n: usize) -> f64 {
    let v: Vec<f64> = (0..=n).map(|i| p.eval(i as f64 / n as f64)).collect();
    let vl: Vec<f64> = (0..=n).map(|i| p.eval_left(i as f64 / n as f64)).collect();
    let mut best = 0.0f64;
    for a in 0..=n {
        for c in a + 2..=n {
            if (c - a) as f64 / n as f64 >= delta {
                break;
            }
            for b in a + 1..c {
                best = best.max(m_value(vl[a], v[b], v[c]));
            }
        }
    }
    best
}

fn step_strategy() -> impl Strategy<Value = CadlagPath> {
    (1usize..7)
        .prop_flat_map(|m| {
            (
                proptest::collection::vec(0.01f64..1.0, m),
                proptest::collection::vec(-3i32..4, m + 1),
            )
        })
        .prop_map(|(gaps, vals)| {
            let total: f64 = gaps.iter().sum();
            let mut t = vec![0.0];
            let mut acc = 0.0;
            for g in &gaps[..gaps.len() - 1] {
                acc += g / total;
                t.push(acc);
            }
            t.push(1.0);
            CadlagPath::step(t, vals.iter().map(|&v| v as f64 * 0.5).collect()).unwrap()
        })
}

fn linear_strategy() -> impl Strategy<Value = CadlagPath> {
    proptest::collection::vec(-2.0f64..2.0, 3..9).prop_map(|vals| {
        let n = vals.len() - 1;
        CadlagPath::linear(uniform_grid(n), vals).unwrap()
    })
}

#[test]
fn indicator_examples() {
    let f = CadlagPath::indicator(0.3, 0.6).unwrap();
    assert_eq!(m_oscillation(&f, 0.7).unwrap(), 1.0);
    assert_eq!(m_oscillation(&f, 0.3).unwrap(), 0.0);
    assert_eq!(m_oscillation(&f, 0.31).unwrap(), 1.0);
    let one = CadlagPath::indicator(0.0, 2.0).unwrap();
    assert_eq!(one.right(), &[1.0, 1.0]);
    for d in [0.01, 0.5, 1.0] {
        assert_eq!(m_oscillation(&one, d).unwrap(), 0.0);
    }
}

#[test]
fn monotone_paths_have_zero_m_oscillation() {
    let up = CadlagPath::linear(uniform_grid(4), vec![0.0, 0.5, 0.7, 2.0, 3.0]).unwrap();
    let down = CadlagPath::linear(uniform_grid(3), vec![2.0, 1.0, 0.5, 0.0]).unwrap();
    // the rooted jump 0 -> 2 followed by a decrease is not monotone: the
    // value is the largest drop f(0) - f(δ-)
    for (d, drop) in [(0.1, 0.3), (0.4, 1.1), (1.0, 2.0)] {
        assert_eq!(m_oscillation(&up, d).unwrap(), 0.0);
        let w = m_oscillation(&down, d).unwrap();
        assert!((w - drop).abs() < 1e-12, "{w}");
    }
}

#[test]
fn rooted_term_sees_early_dip() {
    // jumps to 1 at 0, drops to 0 at 0.2: (t1 = 0, t, t2) gives M(0, 1, 0) = 1
    let f = CadlagPath::step(vec![0.0, 0.2, 1.0], vec![1.0, 0.0, 0.0]).unwrap();
    assert_eq!(m_oscillation(&f, 0.25).unwrap(), 1.0);
    assert_eq!(m_oscillation(&f, 0.2).unwrap(), 0.0);
}

#[test]
fn j1_of_continuous_path_is_bounded_by_slope() {
    let f = CadlagPath::linear(uniform_grid(4), vec![0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
    let w = j1_oscillation(&f, 0.1).unwrap();
    assert!(w <= 4.0 * 0.1 + 1e-12, "{w}");
    let g = CadlagPath::linear(uniform_grid(1), vec![0.0, 3.0]).unwrap();
    assert!((j1_oscillation(&g, 0.1).unwrap() - 0.15).abs() < 1e-12);
}

#[test]
fn j1_sees_two_close_jumps() {
    let f = CadlagPath::indicator(0.4, 0.45).unwrap();
    // s < 0.4 and u >= 0.45 force u - s > 0.05
    assert_eq!(j1_oscillation(&f, 0.06).unwrap(), 1.0);
    assert_eq!(j1_oscillation(&f, 0.05).unwrap(), 0.0);
    // two unit up-jumps
    let g = CadlagPath::step(vec![0.0, 0.4, 0.45, 1.0], vec![0.0, 1.0, 2.0, 2.0]).unwrap();
    assert_eq!(j1_oscillation(&g, 0.1).unwrap(), 1.0);
    assert_eq!(j1_oscillation(&CadlagPath::indicator(0.4, 2.0).unwrap(), 0.1).unwrap(), 0.0);
}

#[test]
fn jordan_example() {
    // up to 1 at 0, down linearly to 0
    let f = CadlagPath::linear(uniform_grid(1), vec![1.0, 0.0]).unwrap();
    let j = jordan(&f);
    assert_eq!(j.up.right(), &[1.0, 1.0]);
    assert_eq!(j.down.right(), &[0.0, 1.0]);
    // negative initial atom goes to the down part
    let g = CadlagPath::step(vec![0.0, 0.5, 1.0], vec![-1.0, 2.0, 2.0]).unwrap();
    let jg = jordan(&g);
    assert_eq!(jg.up.right(), &[0.0, 3.0, 3.0]);
    assert_eq!(jg.down.right(), &[1.0, 1.0, 1.0]);
}

#[test]
fn augmented_graph_order() {
    let f = CadlagPath::indicator(0.3, 0.6).unwrap();
    let g = augmented_graph(&f).vertices;
    assert_eq!(g, vec![(0.0, 0.0), (0.3, 0.0), (0.3, 1.0), (0.6, 1.0), (0.6, 0.0), (1.0, 0.0)]);
}

#[test]
fn distance_examples() {
    let z = CadlagPath::zero();
    let f = CadlagPath::indicator(0.0, 2.0).unwrap();
    assert!((m1_distance(&z, &f, 1e-9).unwrap() - 1.0).abs() < 1e-9);
    // shifted jumps
    let a = CadlagPath::indicator(0.5, 2.0).unwrap();
    let b = CadlagPath::indicator(0.55, 2.0).unwrap();
    assert!((m1_distance(&a, &b, 1e-10).unwrap() - 0.05).abs() < 1e-9);
    // g_n = 1_[0,1/n]: M1-close to a jump at 0 followed by a drop
    let g4 = CadlagPath::indicator(0.0, 0.25).unwrap();
    let g8 = CadlagPath::indicator(0.0, 0.125).unwrap();
    let d = m1_distance(&g4, &g8, 1e-10).unwrap();
    assert!((d - 0.125).abs() < 1e-9, "{d}");
}

#[test]
fn worked_distances_agree_with_brute_force() {
    let tol = 1e-6;
    let late = CadlagPath::indicator(0.1, 2.0).unwrap();
    let early = CadlagPath::indicator(0.0, 2.0).unwrap();
    let d = m1_distance(&late, &early, tol).unwrap();
    assert!((d - 0.1).abs() <= tol, "{d}");
    assert!((frechet_brute(&late, &early, 200) - 0.1).abs() <= 1e-2);
    let z = CadlagPath::zero();
    assert!(m1_distance(&early, &early, tol).unwrap() <= tol);
    for c in [0.25, 0.5] {
        let f = early.scaled(c);
        let d = m1_distance(&z, &f, tol).unwrap();
        assert!((d - c).abs() <= tol, "c {c}: {d}");
        assert!((frechet_brute(&z, &f, 200) - c).abs() <= 1e-2);
    }
}

#[test]
fn convergent_and_non_convergent_families() {
    let limit = CadlagPath::indicator(0.0, 2.0).unwrap();
    let mut prev = f64::INFINITY;
    for n in [2usize, 4, 8, 16, 64, 256] {
        let f = CadlagPath::indicator(1.0 / n as f64, 2.0).unwrap();
        for delta in [0.01, 0.1, 0.5, 1.0] {
            assert_eq!(m_oscillation(&f, delta).unwrap(), 0.0);
        }
        let d = m1_distance(&f, &limit, 1e-9).unwrap();
        assert!((d - 1.0 / n as f64).abs() < 1e-8 && d < prev);
        prev = d;
    }
    // g_n = 1_[0,1/n]: no limit in D; every g_n stays at distance 1 from the
    // zero path and from the unit jump at 0, while w_M(g_n, δ) = 1 once δ > 1/n
    let z = CadlagPath::zero();
    for n in [4usize, 16, 64, 256] {
        let g = CadlagPath::indicator(0.0, 1.0 / n as f64).unwrap();
        assert!((m1_distance(&g, &z, 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!((m1_distance(&g, &limit, 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(m_oscillation(&g, 2.0 / n as f64).unwrap(), 1.0);
    }
}

/// The same path with an extra breakpoint at `at`, carrying no information.
fn with_redundant_breakpoint(p: &CadlagPath, at: f64) -> CadlagPath {
    let (t, l, r) = (p.times(), p.left(), p.right());
    if t.contains(&at) {
        return p.clone();
    }
    let i = t.partition_point(|&x| x < at);
    let v = p.eval(at);
    let mut t2 = t.to_vec();
    let mut l2 = l.to_vec();
    let mut r2 = r.to_vec();
    t2.insert(i, at);
    l2.insert(i, v);
    r2.insert(i, v);
    CadlagPath::new(t2, l2, r2, p.interpolation()).unwrap()
}

#[test]
fn path_csv_roundtrip() {
    let f = CadlagPath::step(vec![0.0, 1.0 / 3.0, 1.0], vec![0.1, 2.0f64.sqrt(), -1e-300]).unwrap();
    assert_eq!(CadlagPath::from_csv(&f.to_csv()).unwrap(), f);
    let g = CadlagPath::linear(uniform_grid(3), vec![0.3, std::f64::consts::PI, 0.0, 1e17]).unwrap();
    assert_eq!(CadlagPath::from_csv(&g.to_csv()).unwrap(), g);
}

#[test]
fn constructor_rejects_bad_input() {
    assert!(CadlagPath::step(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4]).is_err());
    assert!(CadlagPath::step(vec![0.0, 0.9], vec![0.0; 2]).is_err());
    assert!(CadlagPath::new(vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 0.0], Interpolation::Linear).is_err());
    assert!(m_oscillation(&CadlagPath::zero(), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wm_step_matches_piece_formula(p in step_strategy(), delta in 0.01f64..1.0) {
        prop_assert_eq!(m_oscillation(&p, delta).unwrap(), wm_step_oracle(&p, delta));
    }

    #[test]
    fn wm_monotone_in_delta_and_bounded(p in linear_strategy(), d1 in 0.01f64..1.0, d2 in 0.01f64..1.0) {
        let (a, b) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let wa = m_oscillation(&p, a).unwrap();
        let wb = m_oscillation(&p, b).unwrap();
        prop_assert!(wa <= wb + 1e-12);
        prop_assert!(wb <= 2.0 * p.sup_abs() + 1e-12);
    }

    #[test]
    fn wm_linear_close_to_grid(p in linear_strategy(), delta in 0.05f64..1.0) {
        let exact = m_oscillation(&p, delta).unwrap();
        let grid = wm_grid(&p, delta, 240);
        // slopes are at most 4 / (1/8) = 32 per unit, grid step 1/240
        prop_assert!(grid <= exact + 1e-12, "grid {} exact {}", grid, exact);
        prop_assert!(exact <= grid + 2.0 * 32.0 / 240.0 + 1e-12);
    }

    #[test]
    fn distance_axioms(a in step_strategy(), b in linear_strategy(), c in step_strategy()) {
        let tol = 1e-9;
        let ab = m1_distance(&a, &b, tol).unwrap();
        prop_assert_eq!(ab, m1_distance(&b, &a, tol).unwrap());
        prop_assert!(m1_distance(&a, &a, tol).unwrap() <= tol);
        let bc = m1_distance(&b, &c, tol).unwrap();
        let ac = m1_distance(&a, &c, tol).unwrap();
        prop_assert!(ac <= ab + bc + 3.0 * tol);
    }

    #[test]
    fn distance_matches_discrete_frechet(a in step_strategy(), b in linear_strategy()) {
        let k = 24;
        let d = m1_distance(&a, &b, 1e-9).unwrap();
        let brute = frechet_brute(&a, &b, k);
        // discrete ≥ continuous, and exceeds it by at most half the longest resampled edge
        prop_assert!(d <= brute + 1e-9);
        let span = 1.0 + 2.0 * (a.sup_abs() + b.sup_abs());
        prop_assert!(brute <= d + span / k as f64 + 1e-9, "brute {} fast {}", brute, d);
    }

    #[test]
    fn distance_at_most_sup_norm(
        a in proptest::collection::vec(-2.0f64..2.0, 4),
        b in proptest::collection::vec(-2.0f64..2.0, 6),
    ) {
        let mut va = vec![0.0];
        va.extend(a);
        let mut vb = vec![0.0];
        vb.extend(b);
        let p = CadlagPath::linear(uniform_grid(4), va).unwrap();
        let q = CadlagPath::linear(uniform_grid(6), vb).unwrap();
        let sup = (0..=1200)
            .map(|i| {
                let t = i as f64 / 1200.0;
                (p.eval(t) - q.eval(t)).abs()
            })
            .fold(0.0f64, f64::max);
        // both are piecewise linear with breakpoints on the 1/12 grid, so the
        // sampled sup is exact
        prop_assert!(m1_distance(&p, &q, 1e-9).unwrap() <= sup + 1e-9);
    }

    #[test]
    fn redundant_breakpoints_change_nothing(
        p in step_strategy(),
        q in linear_strategy(),
        at in 0.001f64..0.999,
        delta in 0.05f64..1.0,
    ) {
        for f in [&p, &q] {
            let g = with_redundant_breakpoint(f, at);
            // the inserted value of a linear path is itself interpolated: ulp noise
            prop_assert!((m_oscillation(f, delta).unwrap() - m_oscillation(&g, delta).unwrap()).abs() < 1e-12);
            prop_assert!((j1_oscillation(f, delta).unwrap() - j1_oscillation(&g, delta).unwrap()).abs() < 1e-12);
            prop_assert!(m1_distance(f, &g, 1e-9).unwrap() <= 1e-9);
            prop_assert!((m1_distance(f, &p, 1e-9).unwrap() - m1_distance(&g, &p, 1e-9).unwrap()).abs() <= 2e-9);
        }
    }

    #[test]
    fn total_variation_splits(p in linear_strategy()) {
        let j = jordan(&p);
        let recon: Vec<f64> = j.up.right().iter().zip(j.down.right()).map(|(u, d)| u - d).collect();
        for (x, y) in recon.iter().zip(p.right()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((j.up.end_value() + j.down.end_value() - p.total_variation()).abs() < 1e-12);
    }
}
