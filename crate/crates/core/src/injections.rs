//! Finite partial injections of ω and their orbit structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::{nth_prime, BitString};
use crate::error::{Error, Result};
use crate::oracle::{FixedPoints, GroupOracle};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PartialInjection {
    forward: BTreeMap<u64, u64>,
    backward: BTreeMap<u64, u64>,
}

impl PartialInjection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut s = Self::new();
        for (n, m) in pairs {
            s.insert(n, m)?;
        }
        Ok(s)
    }

    /// Like `from_pairs` but silently drops any pair that would break injectivity.
    pub fn from_pairs_lossy(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut s = Self::new();
        for (n, m) in pairs {
            let _ = s.insert(n, m);
        }
        s
    }

    /// The permutation `i ↦ perm[i]` of `{0, …, len−1}`.
    pub fn from_permutation(perm: &[u64]) -> Result<Self> {
        Self::from_pairs(perm.iter().enumerate().map(|(i, &v)| (i as u64, v)))
    }

    /// Adds `n ↦ m`. Re-inserting an existing pair is a no-op.
    pub fn insert(&mut self, n: u64, m: u64) -> Result<()> {
        match (self.forward.get(&n), self.backward.get(&m)) {
            (Some(&v), _) if v == m => Ok(()),
            (Some(_), _) | (_, Some(_)) => Err(Error::NotInjective(n, m)),
            (None, None) => {
                self.forward.insert(n, m);
                self.backward.insert(m, n);
                Ok(())
            }
        }
    }

    pub fn get(&self, n: u64) -> Option<u64> {
        self.forward.get(&n).copied()
    }

    pub fn get_inverse(&self, m: u64) -> Option<u64> {
        self.backward.get(&m).copied()
    }

    pub fn in_domain(&self, n: u64) -> bool {
        self.forward.contains_key(&n)
    }

    pub fn in_range(&self, m: u64) -> bool {
        self.backward.contains_key(&m)
    }

    pub fn domain(&self) -> impl Iterator<Item = u64> + '_ {
        self.forward.keys().copied()
    }

    pub fn range(&self) -> impl Iterator<Item = u64> + '_ {
        self.backward.keys().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.forward.iter().map(|(&n, &m)| (n, m))
    }

    /// `dom(s) ∪ ran(s)`.
    pub fn support(&self) -> BTreeSet<u64> {
        self.domain().chain(self.range()).collect()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_subset_of(&self, other: &PartialInjection) -> bool {
        self.pairs().all(|(n, m)| other.get(n) == Some(m))
    }

    pub fn inverse(&self) -> PartialInjection {
        PartialInjection { forward: self.backward.clone(), backward: self.forward.clone() }
    }

    /// `self ∘ other`, defined where `other` is defined and lands in `dom(self)`.
    pub fn compose(&self, other: &PartialInjection) -> PartialInjection {
        let pairs = other.pairs().filter_map(|(n, m)| self.get(m).map(|v| (n, v)));
        PartialInjection::from_pairs(pairs).expect("composition of injections is injective")
    }

    pub fn orbit_of(&self, n: u64) -> Orbit {
        let mut elements = BTreeSet::from([n]);
        let mut cur = n;
        let mut n_plus = None;
        loop {
            match self.get(cur) {
                Some(next) if next == n => break,
                Some(next) => {
                    elements.insert(next);
                    cur = next;
                }
                None => {
                    n_plus = Some(cur);
                    break;
                }
            }
        }
        let Some(n_plus) = n_plus else {
            return Orbit { elements, closed: true, n_minus: None, n_plus: None };
        };
        let mut cur = n;
        while let Some(prev) = self.get_inverse(cur) {
            elements.insert(prev);
            cur = prev;
        }
        Orbit { elements, closed: false, n_minus: Some(cur), n_plus: Some(n_plus) }
    }

    /// Every orbit meeting `dom(s) ∪ ran(s)`, ordered by minimum.
    pub fn orbits(&self) -> Vec<Orbit> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for p in self.support() {
            if seen.contains(&p) {
                continue;
            }
            let orbit = self.orbit_of(p);
            seen.extend(orbit.elements.iter().copied());
            out.push(orbit);
        }
        out
    }

    pub fn closed_orbits(&self) -> Vec<Orbit> {
        self.orbits().into_iter().filter(|o| o.closed).collect()
    }

    pub fn open_orbits(&self) -> Vec<Orbit> {
        self.orbits().into_iter().filter(|o| !o.closed).collect()
    }

    /// Least natural outside every closed orbit.
    pub fn least_uncovered(&self) -> u64 {
        let covered: BTreeSet<u64> = self.closed_orbits().into_iter().flat_map(|o| o.elements).collect();
        (0..).find(|p| !covered.contains(p)).expect("finite set")
    }

    pub fn is_nice(&self) -> bool {
        let bound = self.least_uncovered();
        self.closed_orbits().iter().all(|o| o.min() < bound)
    }

    /// Parities of closed-orbit sizes, orbits taken in order of their minima.
    pub fn o_partial(&self) -> Result<BitString> {
        if !self.is_nice() {
            return Err(Error::NotNiceInjection);
        }
        Ok(self.closed_orbits().iter().map(|o| o.len() % 2 == 1).collect::<Vec<_>>().into())
    }

    /// Bit `n` is the parity of the number of closed orbits of size `p_n`, for `n ≤ upto`.
    pub fn o_dagger(&self, upto: usize) -> BitString {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for o in self.closed_orbits() {
            *counts.entry(o.len()).or_default() += 1;
        }
        (0..=upto)
            .map(|n| counts.get(&(nth_prime(n) as usize)).copied().unwrap_or(0) % 2 == 1)
            .collect::<Vec<_>>()
            .into()
    }

    pub fn codes_up_to(&self, r: &BitString, n: usize) -> Result<bool> {
        if r.len() <= n {
            return Err(Error::PrefixTooShort { needed: n + 1, available: r.len() });
        }
        Ok(self.o_dagger(n) == r.prefix(n + 1))
    }
}

impl Serialize for PartialInjection {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[u64; 2]> = self.pairs().map(|(n, m)| [n, m]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PartialInjection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[u64; 2]>::deserialize(deserializer)?;
        let mut s = PartialInjection::new();
        for [n, m] in pairs {
            if s.in_domain(n) {
                return Err(serde::de::Error::custom(format!("duplicate domain point {n}")));
            }
            s.insert(n, m).map_err(serde::de::Error::custom)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub elements: BTreeSet<u64>,
    pub closed: bool,
    /// The element outside the range (open orbits only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_minus: Option<u64>,
    /// The element outside the domain (open orbits only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_plus: Option<u64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn min(&self) -> u64 {
        *self.elements.iter().next().expect("orbits are nonempty")
    }
}

/// The finite graph of `w[s]` for a word containing `x` or `x⁻¹`.
pub fn word_graph(w: &Word, s: &PartialInjection, oracle: &dyn GroupOracle) -> Result<PartialInjection> {
    let letters = w.letters();
    let Some(pos) = letters.iter().rposition(|l| !matches!(l, Letter::Group(_))) else {
        return Err(Error::PreconditionViolated(format!("word {w} has no x letter")));
    };
    // Every input must be carried by the group suffix into dom(s) or ran(s).
    let targets: Vec<u64> = match letters[pos] {
        Letter::X => s.domain().collect(),
        _ => s.range().collect(),
    };
    let mut graph = PartialInjection::new();
    for mut p in targets {
        for &letter in letters[pos + 1..].iter() {
            let Letter::Group(g) = letter else { unreachable!() };
            p = oracle.eval_inverse(g, p)?;
        }
        if let Some(v) = w.evaluate(s, oracle, p)? {
            graph.insert(p, v)?;
        }
    }
    Ok(graph)
}

/// `fix(w[s])`. Exact: for words with an `x` letter every fixed point lies in
/// the finite domain of `w[s]`; pure group words defer to the oracle.
pub fn fixed_points(w: &Word, s: &PartialInjection, oracle: &dyn GroupOracle) -> Result<FixedPoints> {
    if !w.has_variable() {
        return match w.letters() {
            [] => Ok(FixedPoints::all()),
            [Letter::Group(g)] => oracle.fixed_points(*g),
            _ => unreachable!("reduced pure group words have at most one letter"),
        };
    }
    let graph = word_graph(w, s, oracle)?;
    Ok(FixedPoints::exact(graph.pairs().filter(|(n, m)| n == m).map(|(n, _)| n).collect()))
}
