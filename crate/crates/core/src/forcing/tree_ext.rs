//! Meeting a positive tree: extend `s` so that it agrees with some branch
//! extension at a new index.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::oracle::{Certification, GroupOracle};
use crate::trees::{Node, TreeOracle};
use crate::words::{graph_restriction, Occurrence, Word};

use super::{leq, nonidentity_letters, one_occurrence_subwords, validate, Condition, Flavor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManyExtensions {
    pub node: Node,
    /// Pairs `(k, t'(k))`, each a one-point extension of `s` below the condition.
    pub options: Vec<(u64, u64)>,
}

/// Extends `node` inside the tree until more than `n` indices `k` give
/// one-point extensions `(s ∪ {(k, t'(k))}, E)` below `c`.
///
/// Every word of `c` must have exactly one occurrence of `x`.
pub fn many_extensions(
    c: &Condition,
    tree: &dyn TreeOracle,
    node: &[u64],
    n: usize,
    oracle: &dyn GroupOracle,
) -> Result<ManyExtensions> {
    for w in &c.words {
        if w.occurrence_class()? != Occurrence::W1 {
            return Err(Error::PreconditionViolated(format!("{w} has more than one occurrence of x")));
        }
    }
    if !tree.contains(node) {
        return Err(Error::PreconditionViolated(format!("node {node:?} is not in the tree")));
    }
    let letters = graph_restriction(&c.words, oracle)?;
    let plain = Condition { flavor: Flavor::Plain, ..c.clone() };
    let mut cur: Node = node.to_vec();
    let mut options = Vec::new();
    while options.len() <= n {
        let k = cur.len() as u64;
        let mut forbidden = BTreeSet::new();
        if !c.injection.in_domain(k) {
            forbidden.extend(c.injection.range().map(|v| (k, v)));
            for &g in &letters {
                forbidden.insert((k, oracle.eval(g, k)?));
            }
        }
        let next = tree.extend(&cur, &forbidden)?;
        if next.len() <= cur.len() || !next.starts_with(&cur) {
            return Err(Error::TreeRefusedExtension);
        }
        for (i, &v) in next.iter().enumerate().skip(cur.len()) {
            let i = i as u64;
            if c.injection.in_domain(i) || c.injection.in_range(v) {
                continue;
            }
            let mut s = c.injection.clone();
            s.insert(i, v)?;
            if leq(&plain.with_injection(s), &plain, oracle)?.is_ok() {
                options.push((i, v));
            }
        }
        cur = next;
    }
    Ok(ManyExtensions { node: cur, options })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeExtension {
    pub condition: Condition,
    pub node: Node,
    /// The index where the new pair agrees with the tree node.
    pub k: u64,
    /// The bound `N` computed from the condition and the oracle.
    pub n_bound: u64,
}

/// `(s', E) ≤ (s, E)` and `t' ⊇ t` in the tree with `t'(k) = s'(k)` at a new index `k`.
pub fn tree_extend(c: &Condition, tree: &dyn TreeOracle, node: &[u64], oracle: &dyn GroupOracle) -> Result<TreeExtension> {
    let mut e0: BTreeSet<Word> = BTreeSet::new();
    for w in &c.words {
        match w.occurrence_class()? {
            Occurrence::W1 => {
                e0.insert(w.clone());
            }
            Occurrence::WMoreThan1 => e0.extend(one_occurrence_subwords(w)),
        }
    }
    let n_bound = bound_n(c, oracle)?;
    let scratch = Condition { injection: c.injection.clone(), words: e0, flavor: Flavor::Plain };
    let found = many_extensions(&scratch, tree, node, 2 * n_bound as usize, oracle)?;
    let mut options = found.options.clone();
    options.sort_unstable();
    for (k, v) in options {
        if k < n_bound || v < n_bound {
            continue;
        }
        let mut s = c.injection.clone();
        s.insert(k, v)?;
        let candidate = c.with_injection(s);
        if validate(&candidate, oracle)?.is_none() && leq(&candidate, c, oracle)?.is_ok() {
            return Ok(TreeExtension { condition: candidate, node: found.node, k, n_bound });
        }
    }
    Err(Error::InvalidExtension("no tree option above the bound extends the condition".into()))
}

/// Least `N` with `dom(s) ∪ ran(s) ⊆ N`, `g[dom(s) ∪ ran(s)] ⊆ N` and the
/// exactly known fixed points of every nonidentity `g ∈ E↾G` below `N`.
fn bound_n(c: &Condition, oracle: &dyn GroupOracle) -> Result<u64> {
    let support = c.injection.support();
    let mut n = support.last().map_or(0, |&m| m + 1);
    for g in nonidentity_letters(&c.words, oracle)? {
        for &p in &support {
            n = n.max(oracle.eval(g, p)? + 1);
        }
        // Window-limited answers depend on how far the oracle has grown, so
        // only exact ones feed the bound; replay must see the same N.
        let fp = oracle.fixed_points(g)?;
        if fp.certification == Certification::Exact {
            n = n.max(fp.known_bound());
        }
    }
    Ok(n)
}
