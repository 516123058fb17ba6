//! ℤ acting on itself by translation, transported to ω by the zig-zag pairing
//! `0 ↦ 0, 1 ↦ −1, 2 ↦ 1, 3 ↦ −2, 4 ↦ 2, …`.
//!
//! The element "translate by `k`" has handle `integer_to_pair(k)`, so `g2` is
//! `z ↦ z + 1` and `g1` is `z ↦ z − 1`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::{FixedPoints, GroupElementId, GroupOracle, OracleSpec};

/// Decodes a natural into the integer it stands for.
pub fn pair_to_integer(n: u64) -> i64 {
    if n.is_multiple_of(2) {
        (n / 2) as i64
    } else {
        -(n.div_ceil(2) as i64)
    }
}

pub fn integer_to_pair(z: i64) -> u64 {
    if z >= 0 {
        2 * z as u64
    } else {
        2 * z.unsigned_abs() - 1
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TranslationOracle;

impl TranslationOracle {
    pub fn element(k: i64) -> GroupElementId {
        GroupElementId(integer_to_pair(k))
    }

    pub fn shift(a: GroupElementId) -> i64 {
        pair_to_integer(a.0)
    }

    fn apply(k: i64, n: u64) -> Result<u64> {
        let z = pair_to_integer(n).checked_add(k).ok_or(Error::ElementOverflow)?;
        Ok(integer_to_pair(z))
    }
}

impl GroupOracle for TranslationOracle {
    fn contains(&self, _a: GroupElementId) -> bool {
        true
    }

    fn compose(&self, a: GroupElementId, b: GroupElementId) -> Result<GroupElementId> {
        let k = Self::shift(a).checked_add(Self::shift(b)).ok_or(Error::ElementOverflow)?;
        Ok(Self::element(k))
    }

    fn invert(&self, a: GroupElementId) -> Result<GroupElementId> {
        Ok(Self::element(-Self::shift(a)))
    }

    fn eval(&self, a: GroupElementId, n: u64) -> Result<u64> {
        Self::apply(Self::shift(a), n)
    }

    fn eval_inverse(&self, a: GroupElementId, n: u64) -> Result<u64> {
        Self::apply(-Self::shift(a), n)
    }

    fn fixed_points(&self, a: GroupElementId) -> Result<FixedPoints> {
        if a.is_identity() {
            Ok(FixedPoints::all())
        } else {
            Ok(FixedPoints::exact(BTreeSet::new()))
        }
    }

    fn window(&self) -> u64 {
        u64::MAX
    }

    fn grow_window(&mut self, _n: u64) -> Result<u64> {
        Ok(u64::MAX)
    }

    fn spec(&self) -> OracleSpec {
        OracleSpec::Translation
    }
}
