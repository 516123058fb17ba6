//! One-point extensions: putting a given point into the domain or the range.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::oracle::GroupOracle;

use super::{leq, nonidentity_letters, validate, Condition};

/// Values outside this set are guaranteed to work as `s(n)`: the support,
/// `n` itself, every image of those points under `E↾G`, and the known fixed
/// points of `E↾G`.
pub fn domain_exclusion_set(c: &Condition, n: u64, oracle: &dyn GroupOracle) -> Result<BTreeSet<u64>> {
    exclusion_set(c, n, oracle)
}

/// The range-side counterpart of [`domain_exclusion_set`].
pub fn range_exclusion_set(c: &Condition, m: u64, oracle: &dyn GroupOracle) -> Result<BTreeSet<u64>> {
    exclusion_set(c, m, oracle)
}

fn exclusion_set(c: &Condition, anchor: u64, oracle: &dyn GroupOracle) -> Result<BTreeSet<u64>> {
    let mut base = c.injection.support();
    base.insert(anchor);
    let mut out = base.clone();
    for g in nonidentity_letters(&c.words, oracle)? {
        for &p in &base {
            out.insert(oracle.eval(g, p)?);
        }
        out.extend(oracle.fixed_points(g)?.points);
    }
    Ok(out)
}

fn works(candidate: &Condition, c: &Condition, oracle: &dyn GroupOracle) -> Result<bool> {
    Ok(validate(candidate, oracle)?.is_none() && leq(candidate, c, oracle)?.is_ok())
}

/// `(s ∪ {(n, m)}, E)` for the least `m` giving a valid extension.
pub fn extend_domain(c: &Condition, n: u64, oracle: &dyn GroupOracle) -> Result<Condition> {
    if c.injection.in_domain(n) {
        return Err(Error::PreconditionViolated(format!("{n} is already in the domain")));
    }
    let limit = exclusion_set(c, n, oracle)?.last().map_or(0, |&x| x + 1);
    for m in 0..=limit {
        if c.injection.in_range(m) {
            continue;
        }
        let mut s = c.injection.clone();
        s.insert(n, m)?;
        let candidate = c.with_injection(s);
        if works(&candidate, c, oracle)? {
            return Ok(candidate);
        }
    }
    Err(Error::InvalidExtension(format!("no value for {n} up to {limit}")))
}

/// `(s ∪ {(n, m)}, E)` for the least `n` giving a valid extension.
pub fn extend_range(c: &Condition, m: u64, oracle: &dyn GroupOracle) -> Result<Condition> {
    if c.injection.in_range(m) {
        return Err(Error::PreconditionViolated(format!("{m} is already in the range")));
    }
    let limit = exclusion_set(c, m, oracle)?.last().map_or(0, |&x| x + 1);
    for n in 0..=limit {
        if c.injection.in_domain(n) {
            continue;
        }
        let mut s = c.injection.clone();
        s.insert(n, m)?;
        let candidate = c.with_injection(s);
        if works(&candidate, c, oracle)? {
            return Ok(candidate);
        }
    }
    Err(Error::InvalidExtension(format!("no preimage for {m} up to {limit}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::Flavor;
    use crate::injections::PartialInjection;
    use crate::oracle::{TranslationOracle, TrivialOracle};
    use crate::words::Word;
    use proptest::prelude::*;

    fn cond(pairs: &[(u64, u64)], words: &[&str]) -> Condition {
        Condition::with(
            PartialInjection::from_pairs(pairs.iter().copied()).unwrap(),
            words.iter().map(|w| w.parse::<Word>().unwrap()),
            Flavor::Plain,
        )
    }

    #[test]
    fn domain_examples() {
        let triv = TrivialOracle;
        assert_eq!(extend_domain(&cond(&[], &["x"]), 0, &triv).unwrap().injection.get(0), Some(1));
        assert_eq!(extend_domain(&cond(&[(0, 1)], &["x"]), 2, &triv).unwrap().injection.get(2), Some(0));
        assert_eq!(extend_domain(&cond(&[], &[]), 5, &triv).unwrap().injection.get(5), Some(0));
        assert!(extend_domain(&cond(&[(5, 0)], &[]), 5, &triv).is_err());
    }

    #[test]
    fn range_examples() {
        let triv = TrivialOracle;
        assert_eq!(extend_range(&cond(&[], &["x"]), 0, &triv).unwrap().injection.get_inverse(0), Some(1));
        assert_eq!(extend_range(&cond(&[(0, 1)], &[]), 0, &triv).unwrap().injection.get_inverse(0), Some(1));
        assert_eq!(extend_range(&cond(&[], &[]), 9, &triv).unwrap().injection.get_inverse(9), Some(0));
    }

    #[test]
    fn coding_flavor_refuses_bad_closure() {
        // closing {0, 1} would give an even orbit first, against r = 1
        let triv = TrivialOracle;
        let c = Condition::with(
            PartialInjection::from_pairs([(0, 1)]).unwrap(),
            [],
            Flavor::Coding("1".parse().unwrap()),
        );
        let out = extend_domain(&c, 1, &triv).unwrap();
        assert_eq!(out.injection.get(1), Some(2));
    }

    proptest! {
        #[test]
        fn values_outside_exclusion_work(
            pairs in prop::collection::vec((0u64..10, 0u64..10), 0..6),
            shift in -3i64..=3,
            n in 0u64..12,
        ) {
            let tr = TranslationOracle;
            let g = TranslationOracle::element(shift);
            let words = [Word::x(), Word::from_reduced(vec![crate::words::Letter::Group(g), crate::words::Letter::X]).unwrap_or_else(|_| Word::x())];
            let c = Condition::with(PartialInjection::from_pairs_lossy(pairs), words, Flavor::Plain);
            prop_assume!(!c.injection.in_domain(n));
            let excluded = domain_exclusion_set(&c, n, &tr).unwrap();
            for m in 0..40u64 {
                if excluded.contains(&m) {
                    continue;
                }
                let mut s = c.injection.clone();
                s.insert(n, m).unwrap();
                prop_assert!(works(&c.with_injection(s), &c, &tr).unwrap());
            }
        }
    }
}
