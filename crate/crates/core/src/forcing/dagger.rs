//! Adding words to conditions while keeping the prime-parity code intact.

use std::collections::BTreeSet;

use crate::bits::prime_index;
use crate::error::{Error, Result};
use crate::injections::word_graph;
use crate::oracle::GroupOracle;
use crate::words::Word;

use super::{require_valid, strong_close_orbit, Condition, Flavor};

/// Closes `words` under cyclic conjugates, their inverses, and lower powers of roots.
pub fn dagger_closure(words: &BTreeSet<Word>, oracle: &dyn GroupOracle) -> Result<BTreeSet<Word>> {
    let mut out = BTreeSet::new();
    let mut pending: Vec<Word> = words.iter().cloned().collect();
    while let Some(w) = pending.pop() {
        if !out.insert(w.clone()) {
            continue;
        }
        let mut related: Vec<Word> = w.cyclic_conjugates_and_inverses(oracle)?.into_iter().collect();
        let (v, k) = w.indecomposable_root()?;
        for l in 1..k {
            related.push(v.power(l, oracle)?);
        }
        pending.extend(related.into_iter().filter(|u| !out.contains(u)));
    }
    Ok(out)
}

/// A condition below `c` whose word set contains `w`.
///
/// Plain and coding conditions simply record the word. Dagger conditions
/// first add `v^{k-1}` for the root `v^k = w`, flip the parity of
/// `p_n`-orbits of `v[s]` when `k = p_n` disagrees with `r(n)`, and close the
/// word set.
pub fn add_word(c: &Condition, w: &Word, oracle: &dyn GroupOracle) -> Result<Condition> {
    if !w.is_nice() {
        return Err(Error::NotNice);
    }
    if let Some(g) = w.group_letters().find(|&g| !oracle.contains(g)) {
        return Err(Error::UnknownGroupElement(g));
    }
    if c.words.contains(w) {
        return Ok(c.clone());
    }
    let Flavor::Dagger(r) = &c.flavor else {
        let mut out = c.clone();
        out.words.insert(w.clone());
        return Ok(out);
    };
    let (v, k) = w.indecomposable_root()?;
    let mut cur = if k > 1 { add_word(c, &v.power(k - 1, oracle)?, oracle)? } else { c.clone() };
    if let Some(n) = prime_index(k as u64) {
        let wanted = r.get(n).ok_or(Error::PrefixTooShort { needed: n + 1, available: r.len() })?;
        let have = word_graph(&v, &cur.injection, oracle)?.o_dagger(n).get(n) == Some(true);
        if have != wanted {
            cur = strong_close_orbit(&cur, &v, k, oracle)?.condition;
        }
    }
    let mut words = cur.words.clone();
    words.insert(w.clone());
    cur.words = dagger_closure(&words, oracle)?;
    require_valid(&cur, oracle)?;
    Ok(cur)
}
