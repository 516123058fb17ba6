//! Conditions `(s, E)` in the three poset flavors, the extension order, and
//! the constructive extension lemmas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{nth_prime, BitString};
use crate::error::{Error, Result};
use crate::injections::{fixed_points, word_graph, PartialInjection};
use crate::oracle::{Certification, GroupOracle};
use crate::words::{Letter, Word};

mod closing;
mod dagger;
mod extend;
mod tree_ext;

pub use closing::{close_orbit, code_next_orbit, orbit_bound, strong_close_orbit, ClosedOrbit, StrongClosure};
pub use dagger::{add_word, dagger_closure};
pub use extend::{domain_exclusion_set, extend_domain, extend_range, range_exclusion_set};
pub use tree_ext::{many_extensions, tree_extend, ManyExtensions, TreeExtension};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Flavor {
    Plain,
    Coding(BitString),
    Dagger(BitString),
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Plain => "plain",
            Flavor::Coding(_) => "coding",
            Flavor::Dagger(_) => "dagger",
        }
    }

    pub fn target(&self) -> Option<&BitString> {
        match self {
            Flavor::Plain => None,
            Flavor::Coding(r) | Flavor::Dagger(r) => Some(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConditionRepr", into = "ConditionRepr")]
pub struct Condition {
    pub injection: PartialInjection,
    pub words: BTreeSet<Word>,
    pub flavor: Flavor,
}

#[derive(Serialize, Deserialize)]
struct ConditionRepr {
    flavor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_prefix: Option<BitString>,
    injection: PartialInjection,
    words: Vec<Word>,
}

impl From<Condition> for ConditionRepr {
    fn from(c: Condition) -> Self {
        ConditionRepr {
            flavor: c.flavor.name().to_string(),
            r_prefix: c.flavor.target().cloned(),
            injection: c.injection,
            words: c.words.into_iter().collect(),
        }
    }
}

impl TryFrom<ConditionRepr> for Condition {
    type Error = Error;

    fn try_from(repr: ConditionRepr) -> Result<Self> {
        let flavor = match (repr.flavor.as_str(), repr.r_prefix) {
            ("plain", None) => Flavor::Plain,
            ("coding", Some(r)) => Flavor::Coding(r),
            ("dagger", Some(r)) => Flavor::Dagger(r),
            (name, r) => {
                return Err(Error::Parse(format!("flavor {name:?} with r_prefix present = {}", r.is_some())))
            }
        };
        Ok(Condition { injection: repr.injection, words: repr.words.into_iter().collect(), flavor })
    }
}

impl Condition {
    pub fn new(flavor: Flavor) -> Self {
        Condition { injection: PartialInjection::new(), words: BTreeSet::new(), flavor }
    }

    pub fn with(injection: PartialInjection, words: impl IntoIterator<Item = Word>, flavor: Flavor) -> Self {
        Condition { injection, words: words.into_iter().collect(), flavor }
    }

    pub fn with_injection(&self, injection: PartialInjection) -> Self {
        Condition { injection, words: self.words.clone(), flavor: self.flavor.clone() }
    }

    /// Longest word in `E`, or 0 when `E` is empty.
    pub fn max_word_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// The first clause a condition fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub clause: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.clause, self.detail)
    }
}

fn violation(clause: &'static str, detail: impl Into<String>) -> Option<Violation> {
    Some(Violation { clause, detail: detail.into() })
}

/// Checks every invariant of the condition's flavor; `Ok(None)` means valid.
pub fn validate(c: &Condition, oracle: &dyn GroupOracle) -> Result<Option<Violation>> {
    for w in &c.words {
        if !w.is_nice() {
            return Ok(violation("nice words", format!("{w} is not nice")));
        }
        if let Some(g) = w.group_letters().find(|&g| !oracle.contains(g)) {
            return Ok(violation("nice words", format!("{w} uses unknown element {g}")));
        }
    }
    match &c.flavor {
        Flavor::Plain => Ok(None),
        Flavor::Coding(r) => {
            if !c.injection.is_nice() {
                return Ok(violation("nice injection", "a closed orbit starts above the least uncovered point"));
            }
            let code = c.injection.o_partial()?;
            if !code.is_prefix_of(r) {
                return Ok(violation("codes r", format!("orbit code {code} is not a prefix of {r}")));
            }
            Ok(None)
        }
        Flavor::Dagger(r) => validate_dagger(c, r, oracle),
    }
}

fn validate_dagger(c: &Condition, r: &BitString, oracle: &dyn GroupOracle) -> Result<Option<Violation>> {
    let mut max_power: BTreeMap<Word, usize> = BTreeMap::new();
    for w in &c.words {
        for u in w.cyclic_conjugates_and_inverses(oracle)? {
            if !c.words.contains(&u) {
                return Ok(violation("cyclic closure", format!("{u} (from {w}) missing")));
            }
        }
        let (v, k) = w.indecomposable_root()?;
        for l in 1..k {
            let p = v.power(l, oracle)?;
            if !c.words.contains(&p) {
                return Ok(violation("power closure", format!("{p} (from {w}) missing")));
            }
        }
        let e = max_power.entry(v).or_default();
        *e = (*e).max(k);
    }
    for (v, k) in max_power {
        let coded: Vec<usize> = (0..).take_while(|&n| nth_prime(n) as usize <= k).collect();
        let Some(&top) = coded.last() else { continue };
        if top >= r.len() {
            return Ok(violation("codes r", format!("target too short for {v}^{k}")));
        }
        let graph = word_graph(&v, &c.injection, oracle)?;
        if !graph.codes_up_to(r, top)? {
            return Ok(violation(
                "codes r",
                format!("{v} codes {} but r begins {}", graph.o_dagger(top), r.prefix(top + 1)),
            ));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixpointSnapshot {
    pub word: Word,
    pub points: BTreeSet<u64>,
}

/// A checked instance of `upper ≤ lower`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCertificate {
    pub lower: Condition,
    pub upper: Condition,
    pub fixpoint_snapshots: Vec<FixpointSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refusal(pub String);

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Decides `upper ≤ lower`: graph and word-set inclusion, and unchanged
/// fixed points for every word of `lower`.
pub fn leq(
    upper: &Condition,
    lower: &Condition,
    oracle: &dyn GroupOracle,
) -> Result<std::result::Result<ExtensionCertificate, Refusal>> {
    if upper.flavor != lower.flavor {
        return Ok(Err(Refusal("flavors or targets differ".into())));
    }
    if !lower.injection.is_subset_of(&upper.injection) {
        return Ok(Err(Refusal("injection not extended".into())));
    }
    if let Some(w) = lower.words.iter().find(|w| !upper.words.contains(w)) {
        return Ok(Err(Refusal(format!("word {w} dropped"))));
    }
    let mut snapshots = Vec::with_capacity(lower.words.len());
    for w in &lower.words {
        let before = fixed_points(w, &lower.injection, oracle)?;
        let after = fixed_points(w, &upper.injection, oracle)?;
        if before != after {
            let gained: Vec<u64> = after.points.difference(&before.points).copied().collect();
            return Ok(Err(Refusal(format!("fix({w}) changed, gained {gained:?}"))));
        }
        debug_assert_eq!(before.certification, Certification::Exact);
        snapshots.push(FixpointSnapshot { word: w.clone(), points: before.points });
    }
    Ok(Ok(ExtensionCertificate { lower: lower.clone(), upper: upper.clone(), fixpoint_snapshots: snapshots }))
}

/// `leq` that turns a refusal into `InvalidExtension`.
pub(crate) fn certify(upper: &Condition, lower: &Condition, oracle: &dyn GroupOracle) -> Result<ExtensionCertificate> {
    leq(upper, lower, oracle)?.map_err(|r| Error::InvalidExtension(r.0))
}

/// Fails with `InvalidExtension` unless `c` satisfies its flavor.
pub(crate) fn require_valid(c: &Condition, oracle: &dyn GroupOracle) -> Result<()> {
    match validate(c, oracle)? {
        None => Ok(()),
        Some(v) => Err(Error::InvalidExtension(v.to_string())),
    }
}

/// `E↾G` without the identity.
pub(crate) fn nonidentity_letters(words: &BTreeSet<Word>, oracle: &dyn GroupOracle) -> Result<BTreeSet<crate::oracle::GroupElementId>> {
    let mut set = crate::words::graph_restriction(words, oracle)?;
    set.remove(&crate::oracle::GroupElementId::IDENTITY);
    Ok(set)
}

/// The nice one-occurrence subwords (`x` and `g x`) of `w`.
pub(crate) fn one_occurrence_subwords(w: &Word) -> BTreeSet<Word> {
    let letters = w.letters();
    let mut out = BTreeSet::new();
    for (i, &l) in letters.iter().enumerate() {
        if l != Letter::X {
            continue;
        }
        out.insert(Word::x());
        if let Some(&Letter::Group(g)) = i.checked_sub(1).and_then(|j| letters.get(j)) {
            out.insert(Word::from_reduced(vec![Letter::Group(g), Letter::X]).expect("reduced"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::TrivialOracle;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn inj(pairs: &[(u64, u64)]) -> PartialInjection {
        PartialInjection::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn validity_examples() {
        let triv = TrivialOracle;
        let c = Condition::with(PartialInjection::new(), [w("x")], Flavor::Plain);
        assert_eq!(validate(&c, &triv).unwrap(), None);
        let c = Condition::with(inj(&[(3, 3)]), [w("x")], Flavor::Plain);
        assert_eq!(validate(&c, &triv).unwrap(), None);
        let c = Condition::with(inj(&[(1, 2), (2, 1)]), [], Flavor::Coding("1".parse().unwrap()));
        assert_eq!(validate(&c, &triv).unwrap().unwrap().clause, "nice injection");
    }

    #[test]
    fn dagger_validity_needs_closure_and_code() {
        let triv = TrivialOracle;
        let r: BitString = "1".parse().unwrap();
        let c = Condition::with(PartialInjection::new(), [w("x^2")], Flavor::Dagger(r.clone()));
        assert_eq!(validate(&c, &triv).unwrap().unwrap().clause, "power closure");
        let c = Condition::with(PartialInjection::new(), [w("x"), w("x^2")], Flavor::Dagger(r.clone()));
        assert_eq!(validate(&c, &triv).unwrap().unwrap().clause, "codes r");
        let c = Condition::with(inj(&[(0, 1), (1, 0)]), [w("x"), w("x^2")], Flavor::Dagger(r));
        assert_eq!(validate(&c, &triv).unwrap(), None);
    }

    #[test]
    fn order_examples() {
        let triv = TrivialOracle;
        let c = Condition::with(inj(&[(0, 4)]), [w("x")], Flavor::Plain);
        let cert = leq(&c, &c, &triv).unwrap().unwrap();
        assert_eq!(cert.fixpoint_snapshots.len(), 1);
        let lower = Condition::with(PartialInjection::new(), [w("x")], Flavor::Plain);
        let upper = Condition::with(inj(&[(3, 3)]), [w("x")], Flavor::Plain);
        assert!(leq(&upper, &lower, &triv).unwrap().is_err());
        let lower = Condition::with(PartialInjection::new(), [w("x^2")], Flavor::Plain);
        let upper = Condition::with(inj(&[(0, 1), (1, 0)]), [w("x^2")], Flavor::Plain);
        let refusal = leq(&upper, &lower, &triv).unwrap().unwrap_err();
        assert!(refusal.0.contains("[0, 1]"));
    }

    #[test]
    fn condition_json() {
        let c = Condition::with(inj(&[(0, 1)]), [w("x")], Flavor::Coding("10".parse().unwrap()));
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"flavor": "coding", "r_prefix": "10", "injection": [[0, 1]], "words": ["x"]})
        );
        assert_eq!(serde_json::from_value::<Condition>(json).unwrap(), c);
        let plain = serde_json::to_value(Condition::new(Flavor::Plain)).unwrap();
        assert!(plain.get("r_prefix").is_none());
        assert!(serde_json::from_value::<Condition>(serde_json::json!({"flavor": "plain", "r_prefix": "1", "injection": [], "words": []})).is_err());
    }
}
