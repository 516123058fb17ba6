//! The run scheduler: meets a finite list of dense requirements, records a
//! checkable certificate per step, seals finished runs into stages and
//! drives the multi-stage construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::{is_prime, nth_prime, BitString};
use crate::error::{Error, Result};
use crate::forcing::{
    add_word, close_orbit, code_next_orbit, extend_domain, extend_range, leq, orbit_bound, tree_extend, validate,
    ClosedOrbit, Condition, ExtensionCertificate, Flavor,
};
use crate::injections::PartialInjection;
use crate::oracle::{GroupOracle, OracleSpec, StagedOracle};
use crate::trees::{diagonalization_witness, ExplicitTree, GraphedFunction, Node, TreeSpec};
use crate::words::Word;

mod replay;

pub use replay::{verify_trace, VerifyFailure};

/// How many times one step may grow the oracle window before giving up.
pub const WINDOW_RETRIES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DenseRequirement {
    DomainHits { n: u64 },
    RangeHits { m: u64 },
    WordAdded { word: Word },
    TreeDiagonalized { tree: TreeSpec, node: Node },
    OrbitCoded { index: usize },
}

impl std::fmt::Display for DenseRequirement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DenseRequirement::DomainHits { n } => write!(f, "{n} in dom"),
            DenseRequirement::RangeHits { m } => write!(f, "{m} in ran"),
            DenseRequirement::WordAdded { word } => write!(f, "word {word}"),
            DenseRequirement::TreeDiagonalized { tree, node } => write!(f, "tree {tree:?} above {node:?}"),
            DenseRequirement::OrbitCoded { index } => write!(f, "orbit {index} coded"),
        }
    }
}

/// The tree node `t'` and index `k` with `t'(k) = s(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeWitness {
    pub node: Node,
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub requirement: DenseRequirement,
    pub operation: String,
    pub certificate: ExtensionCertificate,
    /// Oracle growths needed before the step succeeded.
    pub window_growths: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_witness: Option<TreeWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub version: u32,
    pub prime_offset: String,
    pub pairing: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            version: 1,
            prime_offset: "p_0 = 2".into(),
            pairing: "0,-1,1,-2,2,... (n even -> n/2, n odd -> -(n+1)/2)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub conventions: Conventions,
    /// The oracle as it stood when the run finished.
    pub oracle: OracleSpec,
    pub initial: Condition,
    pub schedule: Vec<DenseRequirement>,
    pub steps: Vec<Step>,
    #[serde(rename = "final")]
    pub final_condition: Condition,
    pub decoded: BitString,
}

impl RunTrace {
    pub fn total_window_growths(&self) -> usize {
        self.steps.iter().map(|s| s.window_growths).sum()
    }
}

/// A sealed stage: every orbit of its injection is closed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletedStage {
    pub generator_index: usize,
    pub injection: PartialInjection,
    pub words: BTreeSet<Word>,
    pub target_bits: BitString,
    /// The injection covers `[0, window)`.
    pub window: u64,
}

impl CompletedStage {
    pub fn condition(&self) -> Condition {
        Condition {
            injection: self.injection.clone(),
            words: self.words.clone(),
            flavor: Flavor::Dagger(self.target_bits.clone()),
        }
    }
}

pub(crate) struct Outcome {
    pub condition: Condition,
    pub operation: &'static str,
    pub witness: Option<TreeWitness>,
}

/// Meets one requirement with the matching forcing operation.
pub(crate) fn execute(c: &Condition, req: &DenseRequirement, oracle: &dyn GroupOracle) -> Result<Outcome> {
    let done = |condition, operation| Ok(Outcome { condition, operation, witness: None });
    match req {
        DenseRequirement::DomainHits { n } if c.injection.in_domain(*n) => done(c.clone(), "already_met"),
        DenseRequirement::DomainHits { n } => done(extend_domain(c, *n, oracle)?, "extend_domain"),
        DenseRequirement::RangeHits { m } if c.injection.in_range(*m) => done(c.clone(), "already_met"),
        DenseRequirement::RangeHits { m } => done(extend_range(c, *m, oracle)?, "extend_range"),
        DenseRequirement::WordAdded { word } if c.words.contains(word) => done(c.clone(), "already_met"),
        DenseRequirement::WordAdded { word } => done(add_word(c, word, oracle)?, "add_word"),
        DenseRequirement::TreeDiagonalized { tree, node } => {
            let out = tree_extend(c, tree.oracle().as_ref(), node, oracle)?;
            Ok(Outcome {
                condition: out.condition,
                operation: "tree_extend",
                witness: Some(TreeWitness { node: out.node, k: out.k }),
            })
        }
        DenseRequirement::OrbitCoded { index } => {
            if !matches!(c.flavor, Flavor::Coding(_)) {
                return Err(Error::PreconditionViolated("orbit coding needs the coding flavor".into()));
            }
            let mut cur = c.clone();
            while cur.injection.closed_orbits().len() <= *index {
                cur = code_next_orbit(&cur, oracle)?.condition;
            }
            let op = if &cur == c { "already_met" } else { "code_next_orbit" };
            done(cur, op)
        }
    }
}

/// Calls `f`, growing the oracle and retrying whenever it reports a window
/// that is too small. Each growth at least doubles the window. Returns the
/// result and the number of growths.
pub fn with_window_retries<T>(
    oracle: &mut dyn GroupOracle,
    mut f: impl FnMut(&dyn GroupOracle) -> Result<T>,
) -> Result<(T, usize)> {
    let mut growths = 0;
    loop {
        match f(&*oracle) {
            Err(Error::WindowTooSmall { required }) if growths < WINDOW_RETRIES => {
                let before = oracle.window();
                // Doubling keeps long upward scans within the retry budget.
                let after = oracle.grow_window(required.max(before.saturating_mul(2)))?;
                if after <= before {
                    return Err(Error::WindowTooSmall { required });
                }
                growths += 1;
            }
            other => return other.map(|v| (v, growths)),
        }
    }
}

/// Bits committed by a condition: orbit parities for coding, and for dagger
/// the prime-parity code of `s` at every prime `p_n` with `x^{p_n}` in `E`.
pub fn decoded_bits(c: &Condition) -> Result<BitString> {
    match &c.flavor {
        Flavor::Plain => Ok(BitString::default()),
        Flavor::Coding(_) => c.injection.o_partial(),
        Flavor::Dagger(_) => {
            let top = c.words.iter().filter_map(|w| match w.nice_blocks()?.as_slice() {
                [b] if b.group.is_none() => Some(b.exponent as u64),
                _ => None,
            });
            let top = top.max().unwrap_or(0);
            let count = (0..).take_while(|&n| nth_prime(n) <= top).count();
            Ok(match count {
                0 => BitString::default(),
                c1 => PartialInjection::o_dagger(&c.injection, c1 - 1),
            })
        }
    }
}

/// Processes the schedule in order from the empty condition of `flavor`.
pub fn run(flavor: Flavor, schedule: &[DenseRequirement], oracle: &mut dyn GroupOracle) -> Result<RunTrace> {
    let initial = Condition::new(flavor);
    let mut cur = initial.clone();
    let mut steps = Vec::with_capacity(schedule.len());
    for (i, req) in schedule.iter().enumerate() {
        let step_error = |e: Error| Error::Step { step: i, source: Box::new(e) };
        // The order and validity checks read the oracle too, so they share the retries.
        let attempt = |o: &dyn GroupOracle| {
            let outcome = execute(&cur, req, o)?;
            let certificate = leq(&outcome.condition, &cur, o)?.map_err(|r| Error::InvalidExtension(r.0))?;
            if let Some(v) = validate(&outcome.condition, o)? {
                return Err(Error::InvalidExtension(v.to_string()));
            }
            Ok((outcome, certificate))
        };
        let ((outcome, certificate), growths) = with_window_retries(oracle, attempt).map_err(step_error)?;
        steps.push(Step {
            requirement: req.clone(),
            operation: outcome.operation.to_string(),
            certificate,
            window_growths: growths,
            tree_witness: outcome.witness,
        });
        cur = outcome.condition;
    }
    let decoded = decoded_bits(&cur)?;
    Ok(RunTrace {
        conventions: Conventions::default(),
        oracle: oracle.spec(),
        initial,
        schedule: schedule.to_vec(),
        steps,
        final_condition: cur,
        decoded,
    })
}

/// Primes that no seal orbit may have: `p` with `v^p` in `E` for some root `v`.
pub fn obligated_primes(c: &Condition) -> BTreeSet<usize> {
    if !matches!(c.flavor, Flavor::Dagger(_)) {
        return BTreeSet::new();
    }
    let top = c.words.iter().filter_map(|w| w.indecomposable_root().ok()).map(|(_, k)| k).max().unwrap_or(0);
    (2..=top).filter(|&p| is_prime(p as u64)).collect()
}

const SEAL_LENGTH_ATTEMPTS: usize = 64;

/// Closes the orbit of `n` at the least admissible length that keeps the
/// condition valid.
pub fn seal_orbit(c: &Condition, n: u64, oracle: &dyn GroupOracle) -> Result<ClosedOrbit> {
    if let Flavor::Coding(_) = c.flavor {
        if n == c.injection.least_uncovered() {
            return code_next_orbit(c, oracle);
        }
    }
    let (bound, _) = orbit_bound(c, n);
    let obligated = obligated_primes(c);
    let mut last = None;
    for k in (bound + 1..).filter(|k| !obligated.contains(k)).take(SEAL_LENGTH_ATTEMPTS) {
        match close_orbit(c, n, k, oracle) {
            Ok(out) => return Ok(out),
            Err(e @ Error::InvalidExtension(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::InvalidExtension(format!("no admissible length for {n}"))))
}

/// Closes every open orbit, least minimum first.
pub fn seal_condition(c: &Condition, oracle: &mut dyn GroupOracle) -> Result<Condition> {
    let mut cur = c.clone();
    while let Some(open) = cur.injection.open_orbits().first().cloned() {
        let n = match cur.flavor {
            Flavor::Coding(_) => cur.injection.least_uncovered(),
            _ => open.min(),
        };
        let (closed, _) = with_window_retries(oracle, |o| seal_orbit(&cur, n, o))?;
        cur = closed.condition;
    }
    Ok(cur)
}

/// Seals the final condition of a finished run into a stage.
pub fn seal(trace: &RunTrace, generator_index: usize, oracle: &mut dyn GroupOracle) -> Result<CompletedStage> {
    let sealed = seal_condition(&trace.final_condition, oracle)?;
    if let Err(r) = leq(&sealed, &trace.final_condition, &*oracle)? {
        return Err(Error::InvalidExtension(r.0));
    }
    let window = (0..).find(|&p| !sealed.injection.in_domain(p)).expect("finite injection");
    Ok(CompletedStage {
        generator_index,
        injection: sealed.injection,
        words: sealed.words,
        target_bits: trace.final_condition.flavor.target().cloned().unwrap_or_default(),
        window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedRun {
    pub stages: Vec<CompletedStage>,
    pub traces: Vec<RunTrace>,
}

/// Stage `i` is a dagger run over the group generated by the earlier
/// stages, with target `targets[i]`.
pub fn staged_run(targets: &[BitString], schedules: &[Vec<DenseRequirement>]) -> Result<StagedRun> {
    if targets.len() != schedules.len() {
        return Err(Error::PreconditionViolated("one schedule per target".into()));
    }
    let mut oracle = StagedOracle::new(Vec::new());
    let mut traces = Vec::with_capacity(targets.len());
    for (i, (r, schedule)) in targets.iter().zip(schedules).enumerate() {
        let trace = run(Flavor::Dagger(r.clone()), schedule, &mut oracle)?;
        let stage = seal(&trace, i, &mut oracle)?;
        oracle.push_stage(stage)?;
        traces.push(trace);
    }
    Ok(StagedRun { stages: oracle.into_stages(), traces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    OrbitOrder,
    PrimeParity,
}

/// Bits `0..=upto` of the orbit code or the prime-parity code of `s`.
pub fn decode(s: &PartialInjection, mode: DecodeMode, upto: usize) -> Result<BitString> {
    match mode {
        DecodeMode::OrbitOrder => Ok(s.o_partial()?.prefix(upto + 1)),
        DecodeMode::PrimeParity => Ok(s.o_dagger(upto)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TightnessReport {
    /// `(s, t, k)` per non-leaf node `s`: `t ⊇ s` in the tree and `t(k) = f(k)`.
    Witnessed(Vec<(Node, Node, u64)>),
    Counterexample(Node),
}

/// Checks that the stage injection densely diagonalizes each explicit tree.
pub fn verify_tightness_sample(stage: &CompletedStage, trees: &[ExplicitTree]) -> Result<Vec<TightnessReport>> {
    let f = GraphedFunction::from_injection(&stage.injection);
    trees
        .iter()
        .map(|tree| {
            let depth = tree.depth() as u64;
            if depth > f.window {
                return Err(Error::WindowTooSmall { required: depth });
            }
            let (witnesses, counter) = diagonalization_witness(&f, tree)?;
            Ok(match counter {
                Some(node) => TightnessReport::Counterexample(node),
                None => TightnessReport::Witnessed(witnesses),
            })
        })
        .collect()
}

/// For each tree step, the explicit tree spanned by the requested node and
/// the witness branch cut just after the hit index.
pub fn tightness_samples(trace: &RunTrace) -> Result<Vec<ExplicitTree>> {
    trace
        .steps
        .iter()
        .filter_map(|s| s.tree_witness.as_ref())
        .map(|w| ExplicitTree::from_branches([w.node[..=w.k as usize].to_vec()]))
        .collect()
}

/// `DomainHits`/`RangeHits` for `0..n`, interleaved with `OrbitCoded(i)`
/// (coding) or `WordAdded(x^{i+1})` (dagger).
pub fn auto_schedule(flavor: &Flavor, n: usize) -> Vec<DenseRequirement> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(DenseRequirement::DomainHits { n: i as u64 });
        out.push(DenseRequirement::RangeHits { m: i as u64 });
        match flavor {
            Flavor::Plain => {}
            Flavor::Coding(_) => out.push(DenseRequirement::OrbitCoded { index: i }),
            Flavor::Dagger(_) => out.push(DenseRequirement::WordAdded { word: Word::x_power(i as i64 + 1) }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::injections::word_graph;
    use crate::oracle::{TranslationOracle, TrivialOracle};

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn plain_domain_run() {
        let schedule: Vec<_> = (0..5).map(|n| DenseRequirement::DomainHits { n }).collect();
        let trace = run(Flavor::Plain, &schedule, &mut TrivialOracle).unwrap();
        assert!((0..5).all(|n| trace.final_condition.injection.in_domain(n)));
        assert_eq!(trace.steps.len(), 5);
    }

    #[test]
    fn coding_round_trip() {
        let r = bits("1011");
        let flavor = Flavor::Coding(r.clone());
        let trace = run(flavor.clone(), &auto_schedule(&flavor, 4), &mut TrivialOracle).unwrap();
        assert_eq!(trace.decoded, r);
        assert_eq!(decode(&trace.final_condition.injection, DecodeMode::OrbitOrder, 3).unwrap(), r);
        for pair in trace.steps.windows(2) {
            assert_eq!(pair[0].certificate.upper, pair[1].certificate.lower);
        }
    }

    #[test]
    fn dagger_round_trip() {
        let schedule: Vec<_> = ["x", "x^2", "x^3"]
            .iter()
            .map(|w| DenseRequirement::WordAdded { word: w.parse().unwrap() })
            .collect();
        let trace = run(Flavor::Dagger(bits("11")), &schedule, &mut TrivialOracle).unwrap();
        assert!(trace.final_condition.injection.codes_up_to(&bits("11"), 1).unwrap());
        assert_eq!(trace.decoded, bits("11"));
    }

    #[test]
    fn seal_closes_everything() {
        let flavor = Flavor::Dagger(bits("10"));
        let mut schedule = auto_schedule(&flavor, 3);
        schedule.push(DenseRequirement::DomainHits { n: 9 });
        let trace = run(flavor, &schedule, &mut TranslationOracle).unwrap();
        assert!(!trace.final_condition.injection.open_orbits().is_empty());
        let before = trace.final_condition.injection.o_dagger(1);
        let stage = seal(&trace, 0, &mut TranslationOracle).unwrap();
        assert!(stage.injection.open_orbits().is_empty());
        assert_eq!(stage.injection.o_dagger(1), before);
        assert!(validate(&stage.condition(), &TranslationOracle).unwrap().is_none());
        let again = RunTrace { final_condition: stage.condition(), ..trace };
        assert_eq!(seal(&again, 0, &mut TranslationOracle).unwrap().injection, stage.injection);
    }

    #[test]
    fn seal_avoids_obligated_primes() {
        let c = Condition::with(PartialInjection::new(), ["x".parse().unwrap(), "x^2".parse().unwrap()], Flavor::Dagger(bits("0")));
        assert_eq!(obligated_primes(&c), BTreeSet::from([2]));
        let sealed = seal_orbit(&c, 0, &TrivialOracle).unwrap();
        assert_eq!(sealed.condition.injection.orbit_of(0).len(), 4);
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&PartialInjection::new(), DecodeMode::PrimeParity, 3).unwrap(), bits("0000"));
        let s = PartialInjection::from_pairs([(0, 1), (1, 2), (2, 0), (3, 4), (4, 3)]).unwrap();
        assert_eq!(decode(&s, DecodeMode::OrbitOrder, 1).unwrap(), bits("10"));
        let gap = PartialInjection::from_pairs([(0, 1), (1, 2), (2, 0), (5, 6), (6, 5)]).unwrap();
        assert_eq!(decode(&gap, DecodeMode::OrbitOrder, 1), Err(Error::NotNiceInjection));
    }

    #[test]
    fn two_stages_grow_the_window() {
        let s0 = StagedOracle::generator(0);
        let gx = Word::from_reduced(vec![crate::words::Letter::Group(s0), crate::words::Letter::X]).unwrap();
        let words = |extra: &[Word]| -> Vec<DenseRequirement> {
            let mut out: Vec<DenseRequirement> =
                (1..=3).map(|k| DenseRequirement::WordAdded { word: Word::x_power(k) }).collect();
            out.extend(extra.iter().map(|w| DenseRequirement::WordAdded { word: w.clone() }));
            out
        };
        let gx2 = Word::from_reduced([gx.letters(), gx.letters()].concat()).unwrap();
        let mut second = words(&[gx.clone(), gx2]);
        second.push(DenseRequirement::DomainHits { n: 60 });
        let staged = staged_run(&[bits("10"), bits("01")], &[words(&[]), second]).unwrap();
        assert_eq!(staged.stages.len(), 2);
        for (stage, r) in staged.stages.iter().zip(["10", "01"]) {
            assert_eq!(stage.injection.o_dagger(1), bits(r));
            assert!(stage.injection.open_orbits().is_empty());
        }
        assert!(staged.traces[1].total_window_growths() > 0);
        let oracle = StagedOracle::new(staged.stages[..1].to_vec());
        let graph = word_graph(&gx, &staged.stages[1].injection, &oracle);
        assert!(graph.is_ok());
    }

    #[test]
    fn tightness_reports() {
        let flavor = Flavor::Plain;
        let mut schedule = vec![DenseRequirement::TreeDiagonalized { tree: TreeSpec::Full, node: vec![] }];
        schedule.push(DenseRequirement::TreeDiagonalized { tree: TreeSpec::Sparse { seed: 4, per_mille: 100 }, node: vec![] });
        let trace = run(flavor, &schedule, &mut TrivialOracle).unwrap();
        let stage = seal(&trace, 0, &mut TrivialOracle).unwrap();
        let samples = tightness_samples(&trace).unwrap();
        let reports = verify_tightness_sample(&stage, &samples).unwrap();
        assert!(reports.iter().all(|r| matches!(r, TightnessReport::Witnessed(_))));
        assert!(verify_tightness_sample(&stage, &[]).unwrap().is_empty());
        let f = GraphedFunction::from_injection(&stage.injection);
        let off = f.value(0).unwrap() + 1;
        let disjoint = ExplicitTree::from_branches([vec![off]]).unwrap();
        let report = verify_tightness_sample(&stage, &[disjoint]).unwrap();
        assert_eq!(report, vec![TightnessReport::Counterexample(vec![])]);
    }
}
