use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use num_integer::Integer;

use super::{canonical_sort, is_strict, ratio, verify_in_set, Parallelepiped};
use crate::arith::{f2_independent, FactorBudget, SquareClass};
use crate::density::FiniteIntegerSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteLimits {
    /// Partial objects kept per level.
    pub max_objects: usize,
    /// Parallelepipeds returned.
    pub max_results: usize,
}

impl Default for BruteLimits {
    fn default() -> Self {
        BruteLimits {
            max_objects: 1_000_000,
            max_results: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteOutcome {
    pub found: Vec<Parallelepiped>,
    /// Set when a cap cut the enumeration short.
    pub truncated: bool,
}

/// Reduced positive fraction `num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Frac {
    num: u64,
    den: u64,
}

impl Frac {
    fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den);
        Frac {
            num: num / g,
            den: den / g,
        }
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical partial object: `c` is the smallest element, generators are
/// greater than 1 and strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Obj {
    c: u64,
    gens: Vec<Frac>,
}

struct Classes {
    budget: FactorBudget,
    cache: HashMap<Frac, SquareClass>,
}

impl Classes {
    fn of(&mut self, f: Frac) -> SquareClass {
        let budget = &self.budget;
        self.cache
            .entry(f)
            .or_insert_with(|| {
                let n = SquareClass::of_u64(f.num, budget).expect("factorization within budget");
                let d = SquareClass::of_u64(f.den, budget).expect("factorization within budget");
                n.product(&d)
            })
            .clone()
    }

    fn independent(&mut self, gens: &[Frac]) -> bool {
        let classes: Vec<_> = gens.iter().map(|&g| self.of(g)).collect();
        f2_independent(&classes).is_independent()
    }
}

/// All strict `n`-parallelepipeds in `s`, built one dimension at a time:
/// two objects with the same generators whose bases differ by a ratio `r`
/// combine into one object with `r` added as a generator.
///
/// Output is in canonical form (`c` is the smallest element, generators
/// above 1 and increasing), sorted by `c` and then generators.
pub fn brute_force_search(s: &FiniteIntegerSet, n: usize, limits: BruteLimits) -> BruteOutcome {
    assert!(n >= 1, "dimension must be at least 1");
    let mut classes = Classes {
        budget: FactorBudget::default(),
        cache: HashMap::new(),
    };
    let mut truncated = false;
    let elems = s.elements();

    let mut level: Vec<Obj> = Vec::new();
    'pairs: for (i, &x) in elems.iter().enumerate() {
        for &y in &elems[i + 1..] {
            let r = Frac::new(y, x);
            if classes.of(r) == SquareClass::one() {
                continue;
            }
            if level.len() >= limits.max_objects {
                truncated = true;
                break 'pairs;
            }
            level.push(Obj { c: x, gens: vec![r] });
        }
    }

    for _ in 1..n {
        let mut groups: BTreeMap<&[Frac], Vec<u64>> = BTreeMap::new();
        for o in &level {
            groups.entry(o.gens.as_slice()).or_default().push(o.c);
        }
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        'groups: for (gens, mut bases) in groups {
            bases.sort_unstable();
            for (i, &c) in bases.iter().enumerate() {
                for &c2 in &bases[i + 1..] {
                    let r = Frac::new(c2, c);
                    let pos = match gens.binary_search(&r) {
                        Ok(_) => continue,
                        Err(pos) => pos,
                    };
                    let mut g = gens.to_vec();
                    g.insert(pos, r);
                    let obj = Obj { c, gens: g };
                    if seen.contains(&obj) || !classes.independent(&obj.gens) {
                        continue;
                    }
                    if next.len() >= limits.max_objects {
                        truncated = true;
                        break 'groups;
                    }
                    seen.insert(obj.clone());
                    next.push(obj);
                }
            }
        }
        level = next;
    }

    let mut found: Vec<Parallelepiped> = level
        .into_iter()
        .map(|o| {
            Parallelepiped::new(
                ratio(o.c, 1),
                o.gens.iter().map(|g| ratio(g.num, g.den)).collect(),
            )
            .expect("positive by construction")
        })
        .collect();
    canonical_sort(&mut found);
    if found.len() > limits.max_results {
        found.truncate(limits.max_results);
        truncated = true;
    }
    for p in &found {
        assert!(is_strict(p) && verify_in_set(p, s), "finder produced an invalid object: {p}");
    }
    BruteOutcome { found, truncated }
}
