//! The ambient cofinitary group, seen through a finite query window.
//!
//! Every implementation uses `GroupElementId(0)` for the identity, so words
//! can be checked for reducedness without consulting an oracle.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;

mod staged;
mod translation;
mod trivial;

pub use staged::{StagePrefix, StagedOracle, MAX_GENERATORS};
pub use translation::{pair_to_integer, integer_to_pair, TranslationOracle};
pub use trivial::TrivialOracle;

/// Handle of a group element. The canonical form behind it is owned by the
/// oracle that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElementId(pub u64);

impl GroupElementId {
    pub const IDENTITY: GroupElementId = GroupElementId(0);

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }
}

impl fmt::Display for GroupElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bound")]
pub enum Certification {
    /// The set is the complete fixed-point set.
    Exact,
    /// Every fixed point below the bound is listed; nothing is claimed above it.
    ExactBelow(u64),
    /// The element is the identity: every natural is fixed.
    AllNaturals,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub points: BTreeSet<u64>,
    pub certification: Certification,
}

impl FixedPoints {
    pub fn all() -> Self {
        FixedPoints { points: BTreeSet::new(), certification: Certification::AllNaturals }
    }

    pub fn exact(points: BTreeSet<u64>) -> Self {
        FixedPoints { points, certification: Certification::Exact }
    }

    /// Least `N` such that every known fixed point lies below it.
    pub fn known_bound(&self) -> u64 {
        self.points.iter().next_back().map_or(0, |&m| m + 1)
    }
}

pub trait GroupOracle {
    fn contains(&self, a: GroupElementId) -> bool;

    /// `a ∘ b`: apply `b` first.
    fn compose(&self, a: GroupElementId, b: GroupElementId) -> Result<GroupElementId>;

    fn invert(&self, a: GroupElementId) -> Result<GroupElementId>;

    fn eval(&self, a: GroupElementId, n: u64) -> Result<u64>;

    fn eval_inverse(&self, a: GroupElementId, n: u64) -> Result<u64>;

    fn fixed_points(&self, a: GroupElementId) -> Result<FixedPoints>;

    /// Every generator is certified on `[0, window)`.
    fn window(&self) -> u64;

    /// Grows the certified window to at least `n`; returns the new window.
    fn grow_window(&mut self, n: u64) -> Result<u64>;

    /// Serializable description of the oracle in its current state.
    fn spec(&self) -> OracleSpec;

    fn identity(&self) -> GroupElementId {
        GroupElementId::IDENTITY
    }

    fn is_identity(&self, a: GroupElementId) -> bool {
        a.is_identity()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OracleSpec {
    Trivial,
    Translation,
    Staged { stages: Vec<crate::engine::CompletedStage> },
}

impl OracleSpec {
    pub fn build(&self) -> Box<dyn GroupOracle> {
        match self {
            OracleSpec::Trivial => Box::new(TrivialOracle),
            OracleSpec::Translation => Box::new(TranslationOracle),
            OracleSpec::Staged { stages } => Box::new(StagedOracle::new(stages.clone())),
        }
    }
}

pub fn trivial_oracle() -> TrivialOracle {
    TrivialOracle
}

pub fn translation_oracle() -> TranslationOracle {
    TranslationOracle
}

pub fn staged_oracle(stages: Vec<crate::engine::CompletedStage>) -> StagedOracle {
    StagedOracle::new(stages)
}
