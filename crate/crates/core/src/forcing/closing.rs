//! Closing orbits: of `s` itself, for parity coding, and of a word's
//! evaluation `v[s]`, for prime-parity coding.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::injections::{word_graph, PartialInjection};
use crate::oracle::{GroupElementId, GroupOracle};
use crate::words::{graph_restriction, Letter, Word};

use super::{certify, nonidentity_letters, require_valid, Condition, Flavor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedOrbit {
    pub condition: Condition,
    /// `K = |O_s(n)| + L`; every `k > K` is achievable.
    pub k_bound: usize,
    /// `L`, the longest word in `E`.
    pub max_word_len: usize,
    /// Fresh points inserted between `n₊` and `n₋`, in orbit order.
    pub chain: Vec<u64>,
}

/// `(K, L)` for closing the orbit of `n`.
pub fn orbit_bound(c: &Condition, n: u64) -> (usize, usize) {
    let l = c.max_word_len();
    (c.injection.orbit_of(n).len() + l, l)
}

/// Closes the open orbit of `n` at size exactly `k`, leaving every `fix(w[s])` alone.
pub fn close_orbit(c: &Condition, n: u64, k: usize, oracle: &dyn GroupOracle) -> Result<ClosedOrbit> {
    let s = &c.injection;
    let orbit = s.orbit_of(n);
    if orbit.closed {
        return Err(Error::PreconditionViolated(format!("the orbit of {n} is already closed")));
    }
    let (bound, l) = orbit_bound(c, n);
    if k <= bound {
        return Err(Error::KTooSmall { k, bound });
    }
    let (n_minus, n_plus) = (orbit.n_minus.unwrap_or(n), orbit.n_plus.unwrap_or(n));
    let letters = nonidentity_letters(&c.words, oracle)?;
    let mut occupied = s.support();
    occupied.insert(n);
    let mut chain: Vec<u64> = Vec::with_capacity(k - orbit.len());
    let mut a = 0u64;
    while chain.len() < k - orbit.len() {
        if fresh_for_chain(a, &occupied, &letters, oracle)? {
            occupied.insert(a);
            chain.push(a);
        }
        a += 1;
    }
    let mut t = s.clone();
    let mut prev = n_plus;
    for &p in &chain {
        t.insert(prev, p)?;
        prev = p;
    }
    t.insert(prev, n_minus)?;

    let closed = t.orbit_of(n);
    if !closed.closed || closed.len() != k {
        return Err(Error::InvalidExtension(format!("orbit of {n} has size {} after closing", closed.len())));
    }
    let condition = c.with_injection(t);
    certify(&condition, c, oracle)?;
    require_valid(&condition, oracle)?;
    Ok(ClosedOrbit { condition, k_bound: bound, max_word_len: l, chain })
}

fn fresh_for_chain(
    a: u64,
    occupied: &BTreeSet<u64>,
    letters: &BTreeSet<GroupElementId>,
    oracle: &dyn GroupOracle,
) -> Result<bool> {
    if occupied.contains(&a) {
        return Ok(false);
    }
    for &g in letters {
        let image = oracle.eval(g, a)?;
        if image == a || occupied.contains(&image) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closes the orbit of the least point outside every closed orbit, at the
/// least length above `K` whose parity is the next bit of `r`.
pub fn code_next_orbit(c: &Condition, oracle: &dyn GroupOracle) -> Result<ClosedOrbit> {
    let Flavor::Coding(r) = &c.flavor else {
        return Err(Error::PreconditionViolated("orbit coding needs the coding flavor".into()));
    };
    let index = c.injection.closed_orbits().len();
    let bit = r.get(index).ok_or(Error::PrefixTooShort { needed: index + 1, available: r.len() })?;
    let n = c.injection.least_uncovered();
    let (bound, _) = orbit_bound(c, n);
    let k = bound + if (bound + 1) % 2 == usize::from(bit) { 1 } else { 2 };
    close_orbit(c, n, k, oracle)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongClosure {
    pub condition: Condition,
    /// Every chain point lies at or above this bound.
    pub n_bound: u64,
    /// The new closed orbit of `v[t]`.
    pub orbit: BTreeSet<u64>,
}

const STRONG_CLOSURE_ATTEMPTS: usize = 8;

/// Adds exactly one closed orbit of size `k` to `v[s]` using fresh points.
pub fn strong_close_orbit(c: &Condition, v: &Word, k: usize, oracle: &dyn GroupOracle) -> Result<StrongClosure> {
    let (root, power) = v.indecomposable_root()?;
    if power != 1 || &root != v {
        return Err(Error::PreconditionViolated(format!("{v} is not indecomposable")));
    }
    if k == 0 {
        return Err(Error::PreconditionViolated("orbit size must be positive".into()));
    }
    let vk = v.power(k, oracle)?;
    if c.words.contains(&vk) {
        return Err(Error::PreconditionViolated(format!("{vk} is already in E")));
    }
    let mut family = c.words.clone();
    family.insert(v.clone());
    let letters = graph_restriction(&family, oracle)?;
    let products = products_up_to_three(&letters, oracle)?;

    let s = &c.injection;
    let mut n_bound = 0u64;
    for &g in &letters {
        for p in s.support() {
            n_bound = n_bound.max(oracle.eval(g, p)? + 1);
        }
    }
    let before = closed_sizes(&word_graph(v, s, oracle)?);
    let mut floor = n_bound;
    let mut last_failure = String::new();
    for _ in 0..STRONG_CLOSURE_ATTEMPTS {
        let (t, orbit, top) = build_cycle(s, &vk, v.len(), floor, &products, oracle)?;
        let candidate = c.with_injection(t);
        let mut expected = before.clone();
        expected.push(k);
        expected.sort_unstable();
        let after = closed_sizes(&word_graph(v, &candidate.injection, oracle)?);
        if after != expected {
            last_failure = format!("closed orbits of {v} became {after:?}, expected {expected:?}");
        } else {
            match certify(&candidate, c, oracle) {
                Ok(_) => return Ok(StrongClosure { condition: candidate, n_bound: floor, orbit }),
                Err(e) => last_failure = e.to_string(),
            }
        }
        floor = top + 1;
    }
    Err(Error::InvalidExtension(last_failure))
}

fn closed_sizes(graph: &PartialInjection) -> Vec<usize> {
    let mut sizes: Vec<usize> = graph.closed_orbits().iter().map(|o| o.len()).collect();
    sizes.sort_unstable();
    sizes
}

fn products_up_to_three(letters: &BTreeSet<GroupElementId>, oracle: &dyn GroupOracle) -> Result<BTreeSet<GroupElementId>> {
    let mut out = letters.clone();
    for _ in 0..2 {
        let mut next = out.clone();
        for &a in &out {
            for &b in letters {
                next.insert(oracle.compose(a, b)?);
            }
        }
        out = next;
    }
    out.remove(&GroupElementId::IDENTITY);
    Ok(out)
}

/// Walks the letters of `v^k` right to left, picking fresh points for every
/// `x`-step and following the oracle on group letters, then closes the cycle.
fn build_cycle(
    s: &PartialInjection,
    vk: &Word,
    period: usize,
    floor: u64,
    products: &BTreeSet<GroupElementId>,
    oracle: &dyn GroupOracle,
) -> Result<(PartialInjection, BTreeSet<u64>, u64)> {
    let steps: Vec<Letter> = vk.letters().iter().rev().copied().collect();
    let m = steps.len();
    let mut occupied = s.support();
    let mut next_candidate = floor;
    let mut fresh = |occupied: &mut BTreeSet<u64>| -> Result<u64> {
        loop {
            let a = next_candidate;
            next_candidate += 1;
            if occupied.contains(&a) {
                continue;
            }
            let mut images = BTreeSet::from([a]);
            let mut ok = true;
            for &g in products {
                let image = oracle.eval(g, a)?;
                if occupied.contains(&image) || !images.insert(image) {
                    ok = false;
                    break;
                }
            }
            if ok {
                occupied.insert(a);
                return Ok(a);
            }
        }
    };

    let mut q: Vec<u64> = vec![0; m + 1];
    q[1] = fresh(&mut occupied)?;
    for i in 1..m {
        q[i + 1] = match steps[i] {
            Letter::Group(g) => {
                let p = oracle.eval(g, q[i])?;
                occupied.insert(p);
                p
            }
            _ => fresh(&mut occupied)?,
        };
    }
    q[0] = q[m];
    let mut t = s.clone();
    for i in 0..m {
        match steps[i] {
            Letter::X => t.insert(q[i], q[i + 1])?,
            Letter::XInverse => t.insert(q[i + 1], q[i])?,
            Letter::Group(_) => {}
        }
    }
    let orbit = (0..m).step_by(period).map(|i| q[i]).collect();
    let top = q.iter().copied().max().unwrap_or(floor);
    Ok((t, orbit, top))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::injections::fixed_points;
    use crate::oracle::{TranslationOracle, TrivialOracle};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn close_isolated_point() {
        let triv = TrivialOracle;
        let c = Condition::with(PartialInjection::new(), [w("x")], Flavor::Plain);
        let out = close_orbit(&c, 0, 3, &triv).unwrap();
        assert_eq!((out.k_bound, out.max_word_len), (2, 1));
        let orbit = out.condition.injection.orbit_of(0);
        assert!(orbit.closed);
        assert_eq!(orbit.len(), 3);
        assert!(fixed_points(&w("x"), &out.condition.injection, &triv).unwrap().points.is_empty());
        assert_eq!(close_orbit(&c, 0, 2, &triv), Err(Error::KTooSmall { k: 2, bound: 2 }));
    }

    #[test]
    fn close_avoids_dividing_powers() {
        let triv = TrivialOracle;
        let c = Condition::with(PartialInjection::new(), [w("x^3")], Flavor::Plain);
        let out = close_orbit(&c, 0, 5, &triv).unwrap();
        assert!(fixed_points(&w("x^3"), &out.condition.injection, &triv).unwrap().points.is_empty());
        assert_eq!(out.condition.injection.orbit_of(0).len(), 5);
    }

    #[test]
    fn coding_lengths_follow_parity() {
        let triv = TrivialOracle;
        let odd = Condition::with(PartialInjection::new(), [w("x")], Flavor::Coding("1".parse().unwrap()));
        assert_eq!(code_next_orbit(&odd, &triv).unwrap().condition.injection.orbit_of(0).len(), 3);
        let even = Condition::with(PartialInjection::new(), [w("x")], Flavor::Coding("0".parse().unwrap()));
        assert_eq!(code_next_orbit(&even, &triv).unwrap().condition.injection.orbit_of(0).len(), 4);

        let two = Condition::with(PartialInjection::new(), [w("x")], Flavor::Coding("10".parse().unwrap()));
        let once = code_next_orbit(&two, &triv).unwrap().condition;
        let twice = code_next_orbit(&once, &triv).unwrap().condition;
        assert_eq!(twice.injection.o_partial().unwrap().to_string(), "10");
        assert!(matches!(code_next_orbit(&twice, &triv), Err(Error::PrefixTooShort { needed: 3, .. })));
    }

    #[test]
    fn strong_closure_on_trivial_group() {
        let triv = TrivialOracle;
        let c = Condition::new(Flavor::Dagger("1".parse().unwrap()));
        let out = strong_close_orbit(&c, &w("x"), 2, &triv).unwrap();
        let sizes = closed_sizes(&out.condition.injection);
        assert_eq!(sizes, vec![2]);
        let c = Condition::with(PartialInjection::new(), [w("x")], Flavor::Dagger("1".parse().unwrap()));
        assert!(matches!(strong_close_orbit(&c, &w("x"), 1, &triv), Err(Error::PreconditionViolated(_))));
        assert!(matches!(strong_close_orbit(&c, &w("x^2"), 3, &triv), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn strong_closure_of_translated_word() {
        let tr = TranslationOracle;
        let v = w("g2.x");
        let c = Condition::with(PartialInjection::from_pairs([(0, 5)]).unwrap(), [v.clone()], Flavor::Plain);
        let out = strong_close_orbit(&c, &v, 3, &tr).unwrap();
        let graph = word_graph(&v, &out.condition.injection, &tr).unwrap();
        assert_eq!(closed_sizes(&graph), vec![3]);
        assert_eq!(out.orbit.len(), 3);
        assert_eq!(out.condition.injection.len(), 4);
        assert!(out.orbit.iter().all(|&p| p >= out.n_bound));
    }
}
