use std::fmt::Write as _;

use num_integer::Integer;

use super::DensityError;

/// A finite set of positive integers together with the bound `N` of the
/// universe `[1, N]` it was drawn from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteIntegerSet {
    elements: Vec<u64>,
    universe: u64,
}

impl FiniteIntegerSet {
    /// Sorts and deduplicates `elements`; rejects zero and anything above `universe`.
    pub fn new(mut elements: Vec<u64>, universe: u64) -> Result<Self, DensityError> {
        elements.sort_unstable();
        elements.dedup();
        if elements.first() == Some(&0) {
            return Err(DensityError::NonpositiveElement);
        }
        if let Some(&max) = elements.last() {
            if max > universe {
                return Err(DensityError::OutsideUniverse {
                    element: max,
                    universe,
                });
            }
        }
        Ok(FiniteIntegerSet { elements, universe })
    }

    pub fn empty(universe: u64) -> Self {
        FiniteIntegerSet {
            elements: Vec::new(),
            universe,
        }
    }

    /// `[1, n]` with universe `n`.
    pub fn full(n: u64) -> Self {
        FiniteIntegerSet {
            elements: (1..=n).collect(),
            universe: n,
        }
    }

    /// `{k * step : k >= 1, k * step <= n}` with universe `n`.
    pub fn multiples(step: u64, n: u64) -> Self {
        assert!(step > 0, "step must be positive");
        FiniteIntegerSet {
            elements: (step..=n).step_by(step as usize).collect(),
            universe: n,
        }
    }

    pub(crate) fn from_sorted(elements: Vec<u64>, universe: u64) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elements.last().map_or(true, |&m| m <= universe));
        FiniteIntegerSet { elements, universe }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    /// `|S ∩ [1, n]|`.
    pub fn count_up_to(&self, n: u64) -> usize {
        self.elements.partition_point(|&x| x <= n)
    }

    pub fn is_subset(&self, other: &FiniteIntegerSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    pub fn filter(&self, mut keep: impl FnMut(u64) -> bool) -> FiniteIntegerSet {
        FiniteIntegerSet::from_sorted(self.iter().filter(|&n| keep(n)).collect(), self.universe)
    }

    /// Intersection; the universe is the smaller of the two.
    pub fn intersection(&self, other: &FiniteIntegerSet) -> FiniteIntegerSet {
        let (a, b) = (&self.elements, &other.elements);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        let universe = self.universe.min(other.universe);
        out.truncate(out.partition_point(|&x| x <= universe));
        FiniteIntegerSet::from_sorted(out, universe)
    }

    /// Union; the universe is the larger of the two.
    pub fn union(&self, other: &FiniteIntegerSet) -> FiniteIntegerSet {
        let mut all: Vec<u64> = self.iter().chain(other.iter()).collect();
        all.sort_unstable();
        all.dedup();
        FiniteIntegerSet::from_sorted(all, self.universe.max(other.universe))
    }

    /// Parses a set file: one positive integer per line, `#` comments, and an
    /// optional `N=<bound>` header (default: the largest element).
    pub fn parse(text: &str) -> Result<Self, DensityError> {
        let mut universe = None;
        let mut elements = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| DensityError::Parse {
                line: i + 1,
                reason: reason.to_string(),
            };
            if let Some(rest) = line.strip_prefix("N=") {
                if universe.is_some() || !elements.is_empty() {
                    return Err(bad("universe header must come first and only once"));
                }
                let n: u64 = rest.trim().parse().map_err(|_| bad("bad universe bound"))?;
                if n == 0 {
                    return Err(bad("universe bound must be positive"));
                }
                universe = Some(n);
                continue;
            }
            let n: u64 = line.parse().map_err(|_| bad("expected a positive integer"))?;
            if n == 0 {
                return Err(bad("elements must be positive"));
            }
            elements.push(n);
        }
        let universe = universe.unwrap_or_else(|| elements.iter().copied().max().unwrap_or(1));
        FiniteIntegerSet::new(elements, universe)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("N={}\n", self.universe);
        for n in &self.elements {
            let _ = writeln!(out, "{n}");
        }
        out
    }
}

/// `S ∩ R(m)`: elements coprime to `m`.
pub fn coprime_filter(s: &FiniteIntegerSet, m: u64) -> FiniteIntegerSet {
    assert!(m > 0, "m must be positive");
    if m == 1 {
        return s.clone();
    }
    s.filter(|n| n.gcd(&m) == 1)
}

/// Elements divisible by none of `primes`; equivalent to `coprime_filter`
/// with the product of the primes, without forming the product.
pub fn coprime_to_primes(s: &FiniteIntegerSet, primes: &[u64]) -> FiniteIntegerSet {
    s.filter(|n| primes.iter().all(|&p| n % p != 0))
}

/// `S_m = {n : m n ∈ S}` with universe `floor(N / m)`.
pub fn divide_set(s: &FiniteIntegerSet, m: u64) -> FiniteIntegerSet {
    assert!(m > 0, "m must be positive");
    let elements = s.iter().filter(|n| n % m == 0).map(|n| n / m).collect();
    FiniteIntegerSet::from_sorted(elements, s.universe / m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64], n: u64) -> FiniteIntegerSet {
        FiniteIntegerSet::new(v.to_vec(), n).unwrap()
    }

    #[test]
    fn construction_rejects_bad_elements() {
        assert_eq!(
            FiniteIntegerSet::new(vec![0, 1], 5),
            Err(DensityError::NonpositiveElement)
        );
        assert!(FiniteIntegerSet::new(vec![7], 5).is_err());
        assert_eq!(set(&[3, 1, 3], 5).elements(), &[1, 3]);
    }

    #[test]
    fn coprime_examples() {
        assert_eq!(coprime_filter(&FiniteIntegerSet::full(10), 6).elements(), &[1, 5, 7]);
        assert_eq!(coprime_filter(&set(&[4, 8, 16], 16), 2), FiniteIntegerSet::empty(16));
        let s = set(&[2, 9, 10], 10);
        assert_eq!(coprime_filter(&s, 1), s);
        assert_eq!(coprime_to_primes(&FiniteIntegerSet::full(10), &[2, 3]).elements(), &[1, 5, 7]);
    }

    #[test]
    fn divide_examples() {
        let s = set(&[6, 10, 15], 15);
        assert_eq!(divide_set(&s, 5).elements(), &[2, 3]);
        assert_eq!(divide_set(&s, 5).universe(), 3);
        assert_eq!(divide_set(&s, 1), s);
        assert!(divide_set(&s, 7).is_empty());
    }

    #[test]
    fn set_file_round_trip() {
        let s = FiniteIntegerSet::parse("# header\nN=20\n3\n1 # inline\n\n7\n").unwrap();
        assert_eq!(s, set(&[1, 3, 7], 20));
        assert_eq!(FiniteIntegerSet::parse(&s.to_text()).unwrap(), s);
        assert_eq!(FiniteIntegerSet::parse("4\n9\n").unwrap().universe(), 9);
        assert!(FiniteIntegerSet::parse("N=5\n6\n").is_err());
        assert!(FiniteIntegerSet::parse("x\n").is_err());
        assert!(FiniteIntegerSet::parse("1\nN=5\n").is_err());
    }

    #[test]
    fn intersection_takes_smaller_universe() {
        let a = set(&[1, 2, 3, 8], 10);
        let b = set(&[2, 3, 4], 4);
        assert_eq!(a.intersection(&b), set(&[2, 3], 4));
        assert_eq!(a.union(&b), set(&[1, 2, 3, 4, 8], 10));
        assert_eq!(a.count_up_to(3), 3);
        assert!(set(&[2, 3], 4).is_subset(&a));
    }
}
