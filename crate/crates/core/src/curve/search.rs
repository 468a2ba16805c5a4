//! Naive-height point search with a residue sieve.
//!
//! Candidates are `x = m / (g e^2)` on the quartic model `d y^2 = x^3 + A x + B`
//! of the twist by `d`; `g` runs over divisors of `d`. A candidate survives
//! when `d g F(m, g e^2)` is a square modulo every sieve modulus, where
//! `F(m, n) = m^3 + A m n^2 + B n^3`; survivors are tested exactly.
//!
//! With `d = 1` this is the plain enumeration `x = m / e^2` on `y^2 = x^3 + A x + B`.
//! Enumeration order is by `(max(|m|, e^3), g, e, m)`, so the order at a
//! smaller bound is a prefix of the order at a larger one.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{ToPrimitive, Zero};

use super::{integral_scale, CurvePoint, Rational, ShortForm, WitnessStatus};
use crate::arith::{factorize, FactorBudget};

/// Bounds on the numerator `|m|` and the square-root denominator `e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBox {
    pub numerator: u64,
    pub denominator: u64,
}

impl SearchBox {
    /// `(B, floor(B^(1/3)))`.
    pub fn from_bound(bound: u64) -> Self {
        SearchBox {
            numerator: bound,
            denominator: bound.cbrt().max(1),
        }
    }

    fn height_limit(&self) -> u64 {
        self.numerator
            .max(self.denominator.saturating_pow(3))
    }
}

const MODULI: [u64; 18] = [64, 27, 25, 49, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61];

fn square_tables() -> &'static Vec<Vec<bool>> {
    static TABLES: OnceLock<Vec<Vec<bool>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        MODULI
            .iter()
            .map(|&k| {
                let mut t = vec![false; k as usize];
                for r in 0..k {
                    t[(r * r % k) as usize] = true;
                }
                t
            })
            .collect()
    })
}

/// For one modulus: `words[s]` has bit `j` set iff residue `s + j` passes.
struct Pattern {
    modulus: u64,
    words: Vec<u64>,
}

impl Pattern {
    fn new(modulus: u64, ok: &[bool]) -> Self {
        let k = modulus as usize;
        let bit = |i: usize| ok[i % k] as u64;
        let mut first = 0u64;
        for j in 0..64 {
            first |= bit(j) << j;
        }
        let mut words = Vec::with_capacity(k);
        words.push(first);
        for s in 1..k {
            let prev = words[s - 1];
            words.push((prev >> 1) | (bit(s + 63) << 63));
        }
        Pattern { modulus, words }
    }
}

/// One twist search problem over an integral short model.
struct Problem {
    a: BigInt,
    b: BigInt,
    d: u64,
    a_mod: Vec<u64>,
    b_mod: Vec<u64>,
    region: Vec<(f64, Option<f64>)>,
}

struct Hit {
    key: (u64, u64, u64, i64),
    point: CurvePoint,
}

impl Problem {
    fn new(a: BigInt, b: BigInt, d: u64) -> Self {
        let residue = |v: &BigInt, k: u64| v.mod_floor(&BigInt::from(k)).to_u64().expect("small");
        let a_mod = MODULI.iter().map(|&k| residue(&a, k)).collect();
        let b_mod = MODULI.iter().map(|&k| residue(&b, k)).collect();
        let region = nonnegative_region(a.to_f64().unwrap_or(f64::MAX), b.to_f64().unwrap_or(f64::MAX));
        Problem { a, b, d, a_mod, b_mod, region }
    }

    fn patterns(&self, g: u64, n: u64) -> Vec<Pattern> {
        let tables = square_tables();
        MODULI
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let nk = n % k;
                let n2 = nk * nk % k;
                let n3 = n2 * nk % k;
                let ca = self.a_mod[i] * n2 % k;
                let cb = self.b_mod[i] * n3 % k;
                let lead = (self.d % k) * (g % k) % k;
                let ok: Vec<bool> = (0..k)
                    .map(|r| {
                        let f = (r * r % k * r + ca * r + cb) % k;
                        tables[i][(lead * f % k) as usize]
                    })
                    .collect();
                Pattern::new(k, &ok)
            })
            .collect()
    }

    /// `m`-intervals (inclusive) where `F(m, n) >= 0` can hold, clipped to `[lo, hi]`.
    fn clip(&self, n: u64, lo: i64, hi: i64) -> Vec<(i64, i64)> {
        let nf = n as f64;
        let mut out = Vec::new();
        for &(rlo, rhi) in &self.region {
            let scaled_lo = rlo * nf;
            let start = (scaled_lo - 2.0 - 1e-6 * scaled_lo.abs()).floor();
            let end = match rhi {
                Some(r) => {
                    let s = r * nf;
                    (s + 2.0 + 1e-6 * s.abs()).ceil()
                }
                None => f64::INFINITY,
            };
            let a = if start <= lo as f64 { lo } else { start as i64 };
            let b = if end >= hi as f64 { hi } else { end as i64 };
            if a <= b {
                out.push((a, b));
            }
        }
        out
    }

    fn exact_value(&self, g: u64, n: u64, m: i64) -> BigInt {
        let m = BigInt::from(m);
        let n = BigInt::from(n);
        let n2 = &n * &n;
        let f = &m * &m * &m + &self.a * &m * &n2 + &self.b * &n2 * &n;
        f * BigInt::from(self.d) * BigInt::from(g)
    }

    fn sieve_range(
        &self,
        g: u64,
        e: u64,
        patterns: &[Pattern],
        (lo, hi): (i64, i64),
        hits: &mut Vec<Hit>,
    ) {
        let n = g * e * e;
        let ge = g * e;
        let mut residues: Vec<usize> = patterns
            .iter()
            .map(|p| lo.rem_euclid(p.modulus as i64) as usize)
            .collect();
        let mut m0 = lo;
        loop {
            let span = (hi - m0 + 1).min(64);
            let mut mask = if span == 64 { u64::MAX } else { (1u64 << span) - 1 };
            for (p, &s) in patterns.iter().zip(&residues) {
                mask &= p.words[s];
                if mask == 0 {
                    break;
                }
            }
            while mask != 0 {
                let j = mask.trailing_zeros() as i64;
                mask &= mask - 1;
                let m = m0 + j;
                if m.unsigned_abs().gcd(&ge) != 1 {
                    continue;
                }
                let value = self.exact_value(g, n, m);
                let Some(root) = super::is_perfect_square(&value) else {
                    continue;
                };
                if root.is_zero() {
                    continue;
                }
                // X = d m / n, Y = d s / (g^2 e^3)
                let d = BigInt::from(self.d);
                let x = Rational::new(&d * BigInt::from(m), BigInt::from(n));
                let y = Rational::new(d * root, BigInt::from(g * g) * BigInt::from(e * e * e));
                let h = m.unsigned_abs().max(e * e * e);
                hits.push(Hit {
                    key: (h, g, e, m),
                    point: CurvePoint::Affine { x, y },
                });
            }
            if hi - m0 < 64 {
                break;
            }
            m0 += 64;
            for (p, s) in patterns.iter().zip(residues.iter_mut()) {
                *s = (*s + 64) % p.modulus as usize;
            }
        }
    }

    /// First non-torsion hit in enumeration order, tested on `twist`.
    fn run(&self, divisors: &[u64], bounds: SearchBox, twist: &super::WeierstrassCurve) -> Option<CurvePoint> {
        let h_max = bounds.height_limit();
        let num = bounds.numerator as i64;
        let mut lo_h = 0u64;
        let mut hi_h = h_max.min(256);
        loop {
            let mut hits = Vec::new();
            for &g in divisors {
                for e in 1..=bounds.denominator {
                    let e3 = e.saturating_pow(3);
                    if e3 > hi_h {
                        break;
                    }
                    let n = match g.checked_mul(e * e) {
                        Some(n) => n,
                        None => break,
                    };
                    let top = (hi_h as i64).min(num);
                    let ranges: Vec<(i64, i64)> = if e3 > lo_h {
                        vec![(-top, top)]
                    } else {
                        let inner = lo_h as i64 + 1;
                        if inner > top {
                            continue;
                        }
                        vec![(-top, -inner), (inner, top)]
                    };
                    let clipped: Vec<(i64, i64)> = ranges
                        .into_iter()
                        .flat_map(|(a, b)| self.clip(n, a, b))
                        .collect();
                    if clipped.is_empty() {
                        continue;
                    }
                    let patterns = self.patterns(g, n);
                    for r in clipped {
                        self.sieve_range(g, e, &patterns, r, &mut hits);
                    }
                }
            }
            hits.sort_by_key(|h| h.key);
            for hit in hits {
                debug_assert!(twist.contains(&hit.point));
                if twist.is_nontorsion_unchecked(&hit.point) {
                    return Some(hit.point);
                }
            }
            if hi_h >= h_max {
                return None;
            }
            lo_h = hi_h;
            hi_h = hi_h.saturating_mul(4).min(h_max);
        }
    }
}

/// Intervals of real `x` with `x^3 + a x + b >= 0`: `(lo, Some(hi))` or `(lo, None)` for `[lo, inf)`.
fn nonnegative_region(a: f64, b: f64) -> Vec<(f64, Option<f64>)> {
    let f = |x: f64| x * x * x + a * x + b;
    let r = 1.0 + a.abs().max(b.abs());
    let bisect = |mut lo: f64, mut hi: f64| {
        // f(lo) <= 0 <= f(hi) or the reverse; keep sign at lo
        let neg_lo = f(lo) <= 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) <= 0.0) == neg_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if a >= 0.0 {
        return vec![(bisect(-r, r), None)];
    }
    let c = (-a / 3.0).sqrt();
    let local_max = f(-c);
    let local_min = f(c);
    if local_min > 0.0 {
        vec![(bisect(-r, -c), None)]
    } else if local_max < 0.0 {
        vec![(bisect(c, r), None)]
    } else {
        let r1 = bisect(-r, -c);
        let r2 = bisect(-c, c);
        let r3 = bisect(c, r);
        vec![(r1, Some(r2)), (r3, None)]
    }
}

fn integral_model(short: &ShortForm) -> (ShortForm, Rational) {
    if short.is_integral() {
        return (short.clone(), Rational::from_integer(1.into()));
    }
    let u = integral_scale(short.a(), short.b());
    (short.scaled(&u), u)
}

/// Positive divisors of a squarefree `d`, ascending.
fn divisors(d: u64) -> Vec<u64> {
    let f = factorize(d, &FactorBudget::default()).expect("twist parameter factors");
    let mut divs = vec![1u64];
    for &(p, _) in f.factors() {
        let more: Vec<u64> = divs.iter().map(|x| x * p).collect();
        divs.extend(more);
    }
    divs.sort_unstable();
    divs
}

/// Enumerate `x = m/e^2` on `short` with `|m| <= bound`, `e <= bound^(1/3)`; the
/// first non-torsion point in height order, else `NoneFound`.
pub fn search_witness(short: &ShortForm, bound: u64) -> WitnessStatus {
    let bound = bound.max(1);
    match search_twist_witness(short, 1, SearchBox::from_bound(bound)) {
        Some(p) => WitnessStatus::Witnessed(p),
        None => WitnessStatus::NoneFound { bound },
    }
}

/// Search the twist of `short` by a positive squarefree `d` for a non-torsion
/// point, returned on `short.quadratic_twist(d)`.
pub fn search_twist_witness(short: &ShortForm, d: u64, bounds: SearchBox) -> Option<CurvePoint> {
    assert!(d >= 1, "twist parameter must be positive");
    let (integral, u) = integral_model(short);
    let twist = integral.twist_unchecked(&BigInt::from(d)).to_weierstrass();
    let problem = Problem::new(integral.a().to_integer(), integral.b().to_integer(), d);
    let divs = if d == 1 { vec![1] } else { divisors(d) };
    let found = problem.run(&divs, bounds, &twist)?;
    Some(found.scale(&u.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::rat;

    #[test]
    fn pattern_words_match_residue_table() {
        let ok: Vec<bool> = (0..11).map(|r| [0, 1, 3, 4, 5, 9].contains(&r)).collect();
        let p = Pattern::new(11, &ok);
        for s in 0..11 {
            for j in 0..64 {
                assert_eq!(p.words[s] >> j & 1 == 1, ok[(s + j) % 11]);
            }
        }
    }

    #[test]
    fn region_of_three_root_cubic() {
        // x^3 - x = (x+1) x (x-1)
        let reg = nonnegative_region(-1.0, 0.0);
        assert_eq!(reg.len(), 2);
        assert!((reg[0].0 + 1.0).abs() < 1e-9 && (reg[0].1.unwrap()).abs() < 1e-9);
        assert!((reg[1].0 - 1.0).abs() < 1e-9 && reg[1].1.is_none());
        let one = nonnegative_region(0.0, -2.0);
        assert!((one[0].0 - 2f64.cbrt()).abs() < 1e-9);
    }

    #[test]
    fn spec_search_examples() {
        let s = ShortForm::from_integers(0, -2).unwrap();
        assert_eq!(search_witness(&s, 10), WitnessStatus::Witnessed(CurvePoint::from_integers(3, 5)));
        let cn = ShortForm::from_integers(-1, 0).unwrap();
        assert_eq!(search_witness(&cn, 10_000), WitnessStatus::NoneFound { bound: 10_000 });
        let t6 = ShortForm::from_integers(0, 1).unwrap();
        assert_eq!(search_witness(&t6, 10), WitnessStatus::NoneFound { bound: 10 });
    }

    #[test]
    fn non_integral_models_are_rescaled() {
        // y^2 = x^3 - 2/64 is y^2 = x^3 - 2 scaled by u = 1/2: (3,5) -> (3/4, 5/8)
        let s = ShortForm::new(rat(0), Rational::new((-2).into(), 64.into())).unwrap();
        let p = search_witness(&s, 10);
        let want = CurvePoint::affine(
            Rational::new(3.into(), 4.into()),
            Rational::new(5.into(), 8.into()),
        );
        assert_eq!(p, WitnessStatus::Witnessed(want));
    }

    #[test]
    fn twist_search_finds_points_off_the_plain_box() {
        let s = ShortForm::from_integers(0, -2).unwrap();
        let tw = s.quadratic_twist(3).unwrap();
        let p = search_twist_witness(&s, 3, SearchBox::from_bound(100)).expect("point");
        assert!(tw.contains(&p));
        assert!(tw.to_weierstrass().is_nontorsion(&p).unwrap());
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(30), vec![1, 2, 3, 5, 6, 10, 15, 30]);
    }
}
