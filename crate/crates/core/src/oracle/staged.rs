//! The group generated by finished stage injections `σ_0, …, σ_{m−1}`.
//!
//! An element is a freely reduced word in the `σ_j^{±1}`, packed into a
//! `u64` four bits per letter with the first-applied (rightmost) letter in
//! the lowest nibble: `σ_j` is `2j + 1` and `σ_j⁻¹` is `2j + 2`. Handles are
//! therefore stable when more stages are added, and `0` is the identity.

use std::collections::BTreeSet;

use crate::engine::{seal_orbit, CompletedStage};
use crate::error::{Error, Result};
use crate::forcing::leq;

use super::{Certification, FixedPoints, GroupElementId, GroupOracle, OracleSpec};

pub const MAX_GENERATORS: usize = 7;
const MAX_LETTERS: usize = 16;
const GROWTH_ATTEMPTS: usize = 64;

fn inverse_code(c: u8) -> u8 {
    if c % 2 == 1 {
        c + 1
    } else {
        c - 1
    }
}

fn push_reduced(codes: &mut Vec<u8>, c: u8) {
    if codes.last() == Some(&inverse_code(c)) {
        codes.pop();
    } else {
        codes.push(c);
    }
}

fn encode(codes: &[u8]) -> Result<GroupElementId> {
    if codes.len() > MAX_LETTERS {
        return Err(Error::ElementOverflow);
    }
    Ok(GroupElementId(codes.iter().rev().fold(0u64, |acc, &c| (acc << 4) | u64::from(c))))
}

/// Letter codes, first-applied first.
fn decode(a: GroupElementId, generators: usize) -> Result<Vec<u8>> {
    let mut codes = Vec::new();
    let mut rest = a.0;
    while rest != 0 {
        let c = (rest & 0xf) as u8;
        rest >>= 4;
        if c == 0 || usize::from(c) > 2 * generators || codes.last() == Some(&inverse_code(c)) {
            return Err(Error::UnknownGroupElement(a));
        }
        codes.push(c);
    }
    Ok(codes)
}

fn least_uncovered(stage: &CompletedStage) -> u64 {
    (0..).find(|&p| !stage.injection.in_domain(p)).expect("finite injection")
}

fn eval_in(stages: &[CompletedStage], a: GroupElementId, n: u64) -> Result<u64> {
    let mut p = n;
    for c in decode(a, stages.len())? {
        let s = &stages[usize::from((c - 1) / 2)].injection;
        let next = if c % 2 == 1 { s.get(p) } else { s.get_inverse(p) };
        p = next.ok_or(Error::WindowTooSmall { required: p + 1 })?;
    }
    Ok(p)
}

fn window_of(stages: &[CompletedStage]) -> u64 {
    stages.iter().map(least_uncovered).min().unwrap_or(u64::MAX)
}

fn fixed_points_in(stages: &[CompletedStage], a: GroupElementId) -> Result<FixedPoints> {
    decode(a, stages.len())?;
    if a.is_identity() {
        return Ok(FixedPoints::all());
    }
    let window = window_of(stages);
    let mut points = BTreeSet::new();
    for p in 0..window {
        match eval_in(stages, a, p) {
            Ok(q) if q == p => {
                points.insert(p);
            }
            Ok(_) => {}
            Err(Error::WindowTooSmall { .. }) => {
                return Ok(FixedPoints { points, certification: Certification::ExactBelow(p) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(FixedPoints { points, certification: Certification::ExactBelow(window) })
}

macro_rules! read_only_group {
    () => {
        fn contains(&self, a: GroupElementId) -> bool {
            decode(a, self.stages().len()).is_ok()
        }

        fn compose(&self, a: GroupElementId, b: GroupElementId) -> Result<GroupElementId> {
            let mut codes = decode(b, self.stages().len())?;
            for c in decode(a, self.stages().len())? {
                push_reduced(&mut codes, c);
            }
            encode(&codes)
        }

        fn invert(&self, a: GroupElementId) -> Result<GroupElementId> {
            let codes: Vec<u8> = decode(a, self.stages().len())?.into_iter().rev().map(inverse_code).collect();
            encode(&codes)
        }

        fn eval(&self, a: GroupElementId, n: u64) -> Result<u64> {
            eval_in(self.stages(), a, n)
        }

        fn eval_inverse(&self, a: GroupElementId, n: u64) -> Result<u64> {
            eval_in(self.stages(), self.invert(a)?, n)
        }

        fn fixed_points(&self, a: GroupElementId) -> Result<FixedPoints> {
            fixed_points_in(self.stages(), a)
        }

        fn window(&self) -> u64 {
            window_of(self.stages())
        }
    };
}

/// The staged group with its window growth machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedOracle {
    stages: Vec<CompletedStage>,
    growths: usize,
}

impl StagedOracle {
    pub fn new(stages: Vec<CompletedStage>) -> Self {
        StagedOracle { stages, growths: 0 }
    }

    /// Handle of `σ_i`.
    pub fn generator(i: usize) -> GroupElementId {
        assert!(i < MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        GroupElementId(2 * i as u64 + 1)
    }

    pub fn stages(&self) -> &[CompletedStage] {
        &self.stages
    }

    pub fn into_stages(self) -> Vec<CompletedStage> {
        self.stages
    }

    pub fn push_stage(&mut self, stage: CompletedStage) -> Result<()> {
        if self.stages.len() >= MAX_GENERATORS {
            return Err(Error::ElementOverflow);
        }
        self.stages.push(stage);
        Ok(())
    }

    /// Number of stage orbits closed by window growth so far.
    pub fn growth_count(&self) -> usize {
        self.growths
    }

    /// Closes fresh orbits of stage `i` until it covers `[0, n)`.
    fn grow_stage(&mut self, i: usize, n: u64) -> Result<()> {
        while least_uncovered(&self.stages[i]) < n {
            let p = least_uncovered(&self.stages[i]);
            let lower = self.stages[i].condition();
            let mut attempts = 0;
            let closed = loop {
                attempts += 1;
                if attempts > GROWTH_ATTEMPTS {
                    return Err(Error::StageExtensionFailed(format!("stage {i} could not cover {p}")));
                }
                let prefix = StagePrefix { stages: &self.stages[..i] };
                match seal_orbit(&lower, p, &prefix) {
                    Ok(closed) => break closed,
                    Err(Error::WindowTooSmall { required }) => {
                        let before = window_of(&self.stages[..i]);
                        for j in 0..i {
                            self.grow_stage(j, required)?;
                        }
                        if window_of(&self.stages[..i]) <= before {
                            return Err(Error::StageExtensionFailed(format!("no progress growing below stage {i}")));
                        }
                    }
                    Err(e) => return Err(Error::StageExtensionFailed(e.to_string())),
                }
            };
            let prefix = StagePrefix { stages: &self.stages[..i] };
            if let Err(refusal) = leq(&closed.condition, &lower, &prefix)? {
                return Err(Error::StageExtensionFailed(refusal.0));
            }
            let stage = &mut self.stages[i];
            stage.injection = closed.condition.injection;
            stage.window = least_uncovered(stage);
            self.growths += 1;
        }
        Ok(())
    }
}

impl GroupOracle for StagedOracle {
    read_only_group!();

    fn grow_window(&mut self, n: u64) -> Result<u64> {
        for i in 0..self.stages.len() {
            self.grow_stage(i, n)?;
        }
        Ok(self.window())
    }

    fn spec(&self) -> OracleSpec {
        OracleSpec::Staged { stages: self.stages.clone() }
    }
}

trait Stages {
    fn stages(&self) -> &[CompletedStage];
}

impl Stages for StagedOracle {
    fn stages(&self) -> &[CompletedStage] {
        &self.stages
    }
}

/// Read-only view of the first stages, the ambient group of the next stage.
#[derive(Debug, Clone, Copy)]
pub struct StagePrefix<'a> {
    pub stages: &'a [CompletedStage],
}

impl Stages for StagePrefix<'_> {
    fn stages(&self) -> &[CompletedStage] {
        self.stages
    }
}

impl GroupOracle for StagePrefix<'_> {
    read_only_group!();

    fn grow_window(&mut self, n: u64) -> Result<u64> {
        if self.window() >= n {
            Ok(self.window())
        } else {
            Err(Error::StageExtensionFailed("a stage prefix view cannot grow".into()))
        }
    }

    fn spec(&self) -> OracleSpec {
        OracleSpec::Staged { stages: self.stages.to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::injections::PartialInjection;
    use crate::words::Word;
    use proptest::prelude::*;
    use std::collections::BTreeSet as Set;

    /// σ_0 = (0 1 2)(3 4), σ_1 = (0 3)(1 2 4 5)
    fn sample() -> StagedOracle {
        let stage = |i, perm: &[u64]| CompletedStage {
            generator_index: i,
            injection: PartialInjection::from_permutation(perm).unwrap(),
            words: Set::from([Word::x()]),
            target_bits: BitString::zeros(1),
            window: perm.len() as u64,
        };
        StagedOracle::new(vec![stage(0, &[1, 2, 0, 4, 3, 5]), stage(1, &[3, 2, 4, 0, 5, 1])])
    }

    #[test]
    fn generators_act_by_stage_injections() {
        let g = sample();
        let s0 = StagedOracle::generator(0);
        assert_eq!(g.eval(s0, 0).unwrap(), 1);
        assert!(g.compose(s0, g.invert(s0).unwrap()).unwrap().is_identity());
        assert_eq!(g.window(), 6);
        assert_eq!(g.eval(s0, 6), Err(Error::WindowTooSmall { required: 7 }));
        assert!(!g.contains(GroupElementId(5)));
        assert!(!g.contains(GroupElementId(0x21)));
    }

    #[test]
    fn fixed_points_inside_window() {
        let g = sample();
        let s0 = StagedOracle::generator(0);
        let fp = g.fixed_points(s0).unwrap();
        assert_eq!(fp.points, Set::from([5]));
        assert_eq!(fp.certification, Certification::ExactBelow(6));
    }

    #[test]
    fn free_powers_differ_from_identity() {
        let g = sample();
        let s0 = StagedOracle::generator(0);
        let mut power = s0;
        for _ in 1..8 {
            assert!(!power.is_identity());
            power = g.compose(power, s0).unwrap();
        }
    }

    #[test]
    fn overflow_is_reported() {
        let g = sample();
        let s0 = StagedOracle::generator(0);
        let mut power = s0;
        let mut result = Ok(power);
        for _ in 0..20 {
            result = g.compose(power, s0);
            match result {
                Ok(p) => power = p,
                Err(_) => break,
            }
        }
        assert_eq!(result, Err(Error::ElementOverflow));
    }

    fn element(codes: &[u8]) -> GroupElementId {
        let mut reduced = Vec::new();
        for &c in codes {
            push_reduced(&mut reduced, c);
        }
        encode(&reduced).unwrap()
    }

    proptest! {
        #[test]
        fn group_laws(a in prop::collection::vec(1u8..=4, 0..4), b in prop::collection::vec(1u8..=4, 0..4), c in prop::collection::vec(1u8..=4, 0..4), n in 0u64..6) {
            let g = sample();
            let (a, b, c) = (element(&a), element(&b), element(&c));
            prop_assert_eq!(
                g.compose(g.compose(a, b).unwrap(), c).unwrap(),
                g.compose(a, g.compose(b, c).unwrap()).unwrap()
            );
            prop_assert!(g.compose(a, g.invert(a).unwrap()).unwrap().is_identity());
            let ab = g.compose(a, b).unwrap();
            prop_assert_eq!(g.eval(ab, n).unwrap(), g.eval(a, g.eval(b, n).unwrap()).unwrap());
            prop_assert_eq!(g.eval_inverse(a, g.eval(a, n).unwrap()).unwrap(), n);
        }
    }
}
