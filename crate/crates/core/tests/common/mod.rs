//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqtwist::curve::{CurvePoint, Rational, WeierstrassCurve};
use sqtwist::density::FiniteIntegerSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each integer in `[1, n]` independently with probability `p`.
pub fn random_subset(rng: &mut ChaCha8Rng, n: u64, p: f64) -> FiniteIntegerSet {
    let elements = (1..=n).filter(|_| rng.gen_bool(p)).collect();
    FiniteIntegerSet::new(elements, n).unwrap()
}

/// `f_S(t)` summed directly.
pub fn f_direct(s: &FiniteIntegerSet, t: f64) -> f64 {
    s.iter().map(|n| (-(n as f64) * t).exp()).sum()
}

fn simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `int_{1/T}^1 f_S(t) dt` by adaptive Simpson in `u = log t`.
pub fn quadrature_integral(s: &FiniteIntegerSet, big_t: f64, rel_tol: f64) -> f64 {
    let g = |u: f64| {
        let t = u.exp();
        f_direct(s, t) * t
    };
    let (a, b) = (-big_t.ln(), 0.0);
    // coarse panels first so the tolerance is relative to the whole
    let panels = 64;
    let h = (b - a) / panels as f64;
    let mut rough = 0.0;
    let mut nodes = Vec::with_capacity(panels + 1);
    for i in 0..=panels {
        nodes.push(g(a + i as f64 * h));
    }
    for i in 0..panels {
        let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        rough += (x1 - x0) / 6.0 * (nodes[i] + 4.0 * g(0.5 * (x0 + x1)) + nodes[i + 1]);
    }
    let tol = rel_tol * rough.abs().max(1e-300) / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (nodes[i], g(0.5 * (x0 + x1)), nodes[i + 1]);
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(&g, x0, x1, f0, fm, f1, whole, tol, 40)
        })
        .sum()
}

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).any(|k| k * k == n)
}

/// `x/y` is a rational square, for positive integers.
fn ratio_is_square(x: u64, y: u64) -> bool {
    let g = x.gcd(&y);
    is_square(x / g) && is_square(y / g)
}

fn record(c: u64, gens: &[(u64, u64)]) -> String {
    let mut elems = vec![Rational::from_integer(BigInt::from(c))];
    let gens: Vec<Rational> = gens
        .iter()
        .map(|&(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
        .collect();
    for g in &gens {
        let more: Vec<Rational> = elems.iter().map(|e| e * g).collect();
        elems.extend(more);
    }
    let join = |v: &[Rational]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
    format!("c={c}; gens={}; elements={}", join(&gens), join(&elems))
}

/// Every strict 1-parallelepiped by direct enumeration of pairs.
pub fn naive_n1(s: &FiniteIntegerSet) -> BTreeSet<String> {
    let e = s.elements();
    let mut out = BTreeSet::new();
    for (i, &c) in e.iter().enumerate() {
        for &x in &e[i + 1..] {
            if !ratio_is_square(x, c) {
                out.insert(record(c, &[(x, c)]));
            }
        }
    }
    out
}

/// Every strict 2-parallelepiped: the smallest element `c`, the next two
/// corners `x < y`, and the far corner `xy/c` in `S`; the three ratios
/// `x/c`, `y/c`, `xy/c^2` must all be non-squares.
pub fn naive_n2(s: &FiniteIntegerSet) -> BTreeSet<String> {
    let e = s.elements();
    let mut out = BTreeSet::new();
    for (i, &c) in e.iter().enumerate() {
        for (j, &x) in e.iter().enumerate().skip(i + 1) {
            for &y in &e[j + 1..] {
                let xy = x as u128 * y as u128;
                if xy % c as u128 != 0 {
                    continue;
                }
                let z = xy / c as u128;
                if z > s.universe() as u128 || !s.contains(z as u64) {
                    continue;
                }
                let z = z as u64;
                if ratio_is_square(x, c) || ratio_is_square(y, c) || ratio_is_square(z, c) {
                    continue;
                }
                out.insert(record(c, &[(x, c), (y, c)]));
            }
        }
    }
    out
}

/// A nonsingular long Weierstrass curve through a random integral point.
pub fn random_curve_with_point(rng: &mut ChaCha8Rng) -> (WeierstrassCurve, CurvePoint) {
    loop {
        let a: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-4..=4));
        let (x, y) = (rng.gen_range(-6i64..=6), rng.gen_range(-6i64..=6));
        // solve the curve equation for a6
        let a6 = y * y + a[0] * x * y + a[2] * y - x * x * x - a[1] * x * x - a[3] * x;
        if let Ok(curve) = WeierstrassCurve::from_integers([a[0], a[1], a[2], a[3], a6]) {
            let p = CurvePoint::from_integers(x, y);
            assert!(curve.contains(&p));
            return (curve, p);
        }
    }
}

/// `y^2 = x^3 + 17`, rank 2, with its small integral points.
pub fn mordell_17() -> (WeierstrassCurve, Vec<CurvePoint>) {
    let curve = WeierstrassCurve::from_integers([0, 0, 0, 0, 17]).unwrap();
    let pts = [(-2, 3), (-1, 4), (2, 5), (4, 9), (8, 23), (43, 282), (52, 375)]
        .iter()
        .map(|&(x, y)| CurvePoint::from_integers(x, y))
        .collect();
    (curve, pts)
}

/// Paths to every leaf of a JSON tree.
pub fn json_leaves(v: &serde_json::Value) -> Vec<Vec<String>> {
    fn walk(v: &serde_json::Value, at: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, child) in m {
                    at.push(k.clone());
                    walk(child, at, out);
                    at.pop();
                }
            }
            serde_json::Value::Array(a) => {
                for (i, child) in a.iter().enumerate() {
                    at.push(i.to_string());
                    walk(child, at, out);
                    at.pop();
                }
            }
            _ => out.push(at.clone()),
        }
    }
    let mut out = Vec::new();
    walk(v, &mut Vec::new(), &mut out);
    out
}

/// Copy of `v` with the leaf at `path` changed: the last character of a
/// string, a number incremented, a boolean flipped, null replaced.
pub fn mutate_leaf(v: &serde_json::Value, path: &[String]) -> serde_json::Value {
    let mut out = v.clone();
    let mut cur = &mut out;
    for key in path {
        cur = match cur {
            serde_json::Value::Object(m) => m.get_mut(key).unwrap(),
            serde_json::Value::Array(a) => &mut a[key.parse::<usize>().unwrap()],
            _ => unreachable!(),
        };
    }
    *cur = match cur.take() {
        serde_json::Value::String(s) if s.is_empty() => "x".into(),
        serde_json::Value::String(s) => {
            let mut chars: Vec<char> = s.chars().collect();
            let last = chars.len() - 1;
            chars[last] = if chars[last] == '7' { '3' } else { '7' };
            chars.into_iter().collect::<String>().into()
        }
        serde_json::Value::Number(n) => (n.as_u64().unwrap_or(0) + 1).into(),
        serde_json::Value::Bool(b) => (!b).into(),
        serde_json::Value::Null => "x".into(),
        other => other,
    };
    out
}
