//! Injective trees: explicit finite ones for checking, and generated ones
//! that drive the engine through an extension oracle.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::injections::PartialInjection;

pub type Node = Vec<u64>;

fn is_injective(node: &[u64]) -> bool {
    let mut seen = BTreeSet::new();
    node.iter().all(|v| seen.insert(*v))
}

/// A finite prefix-closed set of injective sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitTree {
    nodes: BTreeSet<Node>,
}

impl ExplicitTree {
    /// Validates injectivity and prefix closure; the root is always present.
    pub fn new(nodes: impl IntoIterator<Item = Node>) -> Result<Self> {
        let mut set: BTreeSet<Node> = nodes.into_iter().collect();
        set.insert(Vec::new());
        for node in &set {
            if !is_injective(node) {
                return Err(Error::Parse(format!("node {node:?} is not injective")));
            }
            if !node.is_empty() && !set.contains(&node[..node.len() - 1]) {
                return Err(Error::Parse(format!("node {node:?} has no parent")));
            }
        }
        Ok(ExplicitTree { nodes: set })
    }

    /// The prefix closure of the given branches.
    pub fn from_branches(branches: impl IntoIterator<Item = Node>) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        for b in branches {
            for len in 0..=b.len() {
                nodes.insert(b[..len].to_vec());
            }
        }
        Self::new(nodes)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn contains(&self, node: &[u64]) -> bool {
        self.nodes.contains(node)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn extensions_of<'a>(&'a self, s: &'a [u64]) -> impl Iterator<Item = &'a Node> + 'a {
        self.nodes.range(s.to_vec()..).take_while(move |t| t.starts_with(s)).filter(move |t| t.len() > s.len())
    }

    /// Whether `s` has a proper extension in the tree.
    pub fn is_leaf(&self, s: &[u64]) -> bool {
        self.extensions_of(s).next().is_none()
    }
}

impl Serialize for ExplicitTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.nodes.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExplicitTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let nodes = Vec::<Node>::deserialize(deserializer)?;
        ExplicitTree::new(nodes).map_err(serde::de::Error::custom)
    }
}

/// A function known on `[0, window)`, e.g. the graph of a group element or
/// of a stage injection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphedFunction {
    pub values: BTreeMap<u64, u64>,
    pub window: u64,
}

impl GraphedFunction {
    /// Every index below `window` must have a value.
    pub fn new(values: BTreeMap<u64, u64>, window: u64) -> Self {
        GraphedFunction { values, window }
    }

    /// Total on the least initial segment covered by `s`'s domain.
    pub fn from_injection(s: &PartialInjection) -> Self {
        let values: BTreeMap<u64, u64> = s.pairs().collect();
        let window = (0..).find(|k| !values.contains_key(k)).expect("finite map");
        GraphedFunction { values, window }
    }

    pub fn value(&self, k: u64) -> Result<u64> {
        if k >= self.window {
            return Err(Error::WindowTooSmall { required: k + 1 });
        }
        self.values.get(&k).copied().ok_or(Error::WindowTooSmall { required: k + 1 })
    }
}

/// Leaves of a finite truncation are exempt: their extensions were cut off,
/// so the quantifier over `s ∈ T` ranges over nodes with children.
fn interior(tree: &ExplicitTree) -> impl Iterator<Item = &Node> {
    tree.nodes().filter(|s| !tree.is_leaf(s))
}

/// Above every non-leaf node some extension escapes every graph in `family`.
pub fn is_positive_explicit(tree: &ExplicitTree, family: &[GraphedFunction]) -> bool {
    interior(tree).all(|s| {
        tree.extensions_of(s).any(|t| {
            (s.len()..t.len()).any(|k| {
                family.iter().all(|g| g.values.get(&(k as u64)) != Some(&t[k]))
            })
        })
    })
}

/// Above every non-leaf node some extension agrees with `g` at a new index.
pub fn densely_diagonalizes(g: &GraphedFunction, tree: &ExplicitTree) -> Result<bool> {
    let depth = tree.depth() as u64;
    if depth > g.window {
        return Err(Error::WindowTooSmall { required: depth });
    }
    Ok(diagonalization_witness(g, tree)?.1.is_none())
}

/// Per non-leaf node, an extension `t` and index `k` with `t(k) = g(k)`;
/// the second component is the first node without one.
#[allow(clippy::type_complexity)]
pub fn diagonalization_witness(
    g: &GraphedFunction,
    tree: &ExplicitTree,
) -> Result<(Vec<(Node, Node, u64)>, Option<Node>)> {
    let mut witnesses = Vec::new();
    for s in interior(tree) {
        let mut found = None;
        'search: for t in tree.extensions_of(s) {
            for k in s.len()..t.len() {
                if g.value(k as u64)? == t[k] {
                    found = Some((t.clone(), k as u64));
                    break 'search;
                }
            }
        }
        match found {
            Some((t, k)) => witnesses.push((s.clone(), t, k)),
            None => return Ok((witnesses, Some(s.clone()))),
        }
    }
    Ok((witnesses, None))
}

/// Tree access through an extension oracle, which must be a pure function of
/// its arguments.
pub trait TreeOracle {
    fn contains(&self, node: &[u64]) -> bool;

    /// A strictly longer node above `node` whose new values avoid every
    /// `(index, value)` pair in `forbidden`.
    fn extend(&self, node: &[u64], forbidden: &BTreeSet<(u64, u64)>) -> Result<Node>;

    /// The explicit subtree of nodes up to `depth` with values below `values`.
    fn truncate(&self, depth: usize, values: u64) -> ExplicitTree {
        let mut nodes = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for node in &frontier {
                for v in 0..values {
                    let mut child: Node = node.clone();
                    child.push(v);
                    if is_injective(&child) && self.contains(&child) {
                        next.push(child);
                    }
                }
            }
            nodes.extend(next.iter().cloned());
            frontier = next;
        }
        ExplicitTree::new(nodes).expect("truncations are prefix closed")
    }
}

/// All injective sequences.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullTree;

pub fn full_injective_tree() -> FullTree {
    FullTree
}

impl TreeOracle for FullTree {
    fn contains(&self, node: &[u64]) -> bool {
        is_injective(node)
    }

    fn extend(&self, node: &[u64], forbidden: &BTreeSet<(u64, u64)>) -> Result<Node> {
        let index = node.len() as u64;
        let v = (0..)
            .find(|v| !node.contains(v) && !forbidden.contains(&(index, *v)))
            .expect("finitely many exclusions");
        let mut out = node.to_vec();
        out.push(v);
        Ok(out)
    }
}

/// Injective sequences whose value at each index lies in a seeded random set
/// of density `per_mille / 1000`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseTree {
    pub seed: u64,
    pub per_mille: u16,
}

const SPARSE_SCAN_LIMIT: u64 = 1 << 20;

impl SparseTree {
    pub fn new(seed: u64, per_mille: u16) -> Self {
        SparseTree { seed, per_mille: per_mille.clamp(1, 1000) }
    }

    pub fn allows(&self, index: u64, value: u64) -> bool {
        let h = splitmix(self.seed ^ splitmix(index.wrapping_mul(0x9e37_79b9) ^ splitmix(value)));
        h % 1000 < u64::from(self.per_mille)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl TreeOracle for SparseTree {
    fn contains(&self, node: &[u64]) -> bool {
        is_injective(node) && node.iter().enumerate().all(|(i, &v)| self.allows(i as u64, v))
    }

    fn extend(&self, node: &[u64], forbidden: &BTreeSet<(u64, u64)>) -> Result<Node> {
        let index = node.len() as u64;
        let v = (0..SPARSE_SCAN_LIMIT)
            .find(|v| self.allows(index, *v) && !node.contains(v) && !forbidden.contains(&(index, *v)))
            .ok_or(Error::TreeRefusedExtension)?;
        let mut out = node.to_vec();
        out.push(v);
        Ok(out)
    }
}

/// Serializable choice of generated tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TreeSpec {
    Full,
    Sparse { seed: u64, per_mille: u16 },
}

impl TreeSpec {
    pub fn oracle(&self) -> Box<dyn TreeOracle> {
        match *self {
            TreeSpec::Full => Box::new(FullTree),
            TreeSpec::Sparse { seed, per_mille } => Box::new(SparseTree::new(seed, per_mille)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(values: &[u64]) -> GraphedFunction {
        GraphedFunction::new(values.iter().enumerate().map(|(i, &v)| (i as u64, v)).collect(), values.len() as u64)
    }

    #[test]
    fn full_tree_extensions() {
        let t = full_injective_tree();
        assert_eq!(t.extend(&[], &BTreeSet::from([(0, 0)])).unwrap(), vec![1]);
        assert_eq!(t.extend(&[5], &BTreeSet::new()).unwrap(), vec![5, 0]);
        assert_eq!(t.extend(&[0, 1], &BTreeSet::from([(2, 2), (2, 3)])).unwrap(), vec![0, 1, 4]);
    }

    #[test]
    fn positivity_examples() {
        let full = full_injective_tree().truncate(3, 10);
        assert!(is_positive_explicit(&full, &[]));
        let g = graph(&[4, 7, 1]);
        let branch = ExplicitTree::from_branches([vec![4, 7, 1]]).unwrap();
        assert!(!is_positive_explicit(&branch, std::slice::from_ref(&g)));
        let h = graph(&[2, 3, 5]);
        let two = ExplicitTree::from_branches([vec![4, 7, 1], vec![2, 3, 5]]).unwrap();
        assert!(!is_positive_explicit(&two, &[g.clone(), h.clone()]));
        // Above <4> the tree is g's own branch, so g alone already covers it.
        assert!(!is_positive_explicit(&two, std::slice::from_ref(&g)));
        assert!(is_positive_explicit(&two, &[]));
        let forked = ExplicitTree::from_branches([vec![4, 7, 1], vec![4, 3], vec![4, 7, 0], vec![2, 3, 5]]).unwrap();
        assert!(is_positive_explicit(&forked, &[g]));
        assert!(!is_positive_explicit(&forked, &[h]));
    }

    #[test]
    fn diagonalization_examples() {
        let g = graph(&[4, 7, 1]);
        let branch = ExplicitTree::from_branches([vec![4, 7, 1]]).unwrap();
        assert!(densely_diagonalizes(&g, &branch).unwrap());
        let other = ExplicitTree::from_branches([vec![0, 1, 2]]).unwrap();
        assert!(!densely_diagonalizes(&g, &other).unwrap());
        let full = full_injective_tree().truncate(3, 10);
        // The node (g(0), g(2)) only extends by values it already uses at the
        // next index, so exact evaluation on the truncation is false.
        assert!(!densely_diagonalizes(&g, &full).unwrap());
        let (_, counter) = diagonalization_witness(&g, &full).unwrap();
        assert!(counter.is_some());
        assert!(matches!(densely_diagonalizes(&graph(&[4]), &branch), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn validity_of_explicit_input() {
        assert!(ExplicitTree::new([vec![0], vec![0, 0]]).is_err());
        assert!(ExplicitTree::new([vec![0, 1]]).is_err());
        let t = ExplicitTree::from_branches([vec![2, 1], vec![0]]).unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "[[],[0],[2],[2,1]]");
        assert!(serde_json::from_str::<ExplicitTree>("[[],[1,1]]").is_err());
    }

    #[test]
    fn sparse_tree_stays_inside() {
        let t = SparseTree::new(7, 200);
        let mut node = Vec::new();
        for _ in 0..6 {
            node = t.extend(&node, &BTreeSet::new()).unwrap();
            assert!(t.contains(&node));
        }
    }

    proptest! {
        #[test]
        fn positivity_is_antitone(values in prop::collection::vec(0u64..6, 3), extra in prop::collection::vec(0u64..6, 3)) {
            let tree = full_injective_tree().truncate(2, 5);
            let small = vec![graph(&values)];
            let big = vec![graph(&values), graph(&extra)];
            if is_positive_explicit(&tree, &big) {
                prop_assert!(is_positive_explicit(&tree, &small));
            }
        }

        #[test]
        fn full_tree_never_refuses(node in prop::collection::btree_set(0u64..50, 0..6), forbidden in prop::collection::btree_set((0u64..8, 0u64..60), 0..30)) {
            let node: Vec<u64> = node.into_iter().collect();
            let out = full_injective_tree().extend(&node, &forbidden).unwrap();
            prop_assert_eq!(out.len(), node.len() + 1);
            prop_assert!(!forbidden.contains(&(node.len() as u64, out[node.len()])));
            prop_assert!(is_injective(&out));
        }
    }
}
