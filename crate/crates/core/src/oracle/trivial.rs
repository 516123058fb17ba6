use crate::error::{Error, Result};

use super::{FixedPoints, GroupElementId, GroupOracle, OracleSpec};

/// The one-element group.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialOracle;

impl TrivialOracle {
    fn check(&self, a: GroupElementId) -> Result<()> {
        if a.is_identity() {
            Ok(())
        } else {
            Err(Error::UnknownGroupElement(a))
        }
    }
}

impl GroupOracle for TrivialOracle {
    fn contains(&self, a: GroupElementId) -> bool {
        a.is_identity()
    }

    fn compose(&self, a: GroupElementId, b: GroupElementId) -> Result<GroupElementId> {
        self.check(a)?;
        self.check(b)?;
        Ok(GroupElementId::IDENTITY)
    }

    fn invert(&self, a: GroupElementId) -> Result<GroupElementId> {
        self.check(a)?;
        Ok(a)
    }

    fn eval(&self, a: GroupElementId, n: u64) -> Result<u64> {
        self.check(a)?;
        Ok(n)
    }

    fn eval_inverse(&self, a: GroupElementId, n: u64) -> Result<u64> {
        self.check(a)?;
        Ok(n)
    }

    fn fixed_points(&self, a: GroupElementId) -> Result<FixedPoints> {
        self.check(a)?;
        Ok(FixedPoints::all())
    }

    fn window(&self) -> u64 {
        u64::MAX
    }

    fn grow_window(&mut self, _n: u64) -> Result<u64> {
        Ok(u64::MAX)
    }

    fn spec(&self) -> OracleSpec {
        OracleSpec::Trivial
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Certification;

    #[test]
    fn one_element_group() {
        let g = TrivialOracle;
        let id = g.identity();
        assert!(g.is_identity(id));
        assert_eq!(g.compose(id, id).unwrap(), id);
        assert_eq!(g.eval(id, 17).unwrap(), 17);
        assert_eq!(g.fixed_points(id).unwrap().certification, Certification::AllNaturals);
        assert_eq!(g.eval(GroupElementId(3), 0), Err(Error::UnknownGroupElement(GroupElementId(3))));
    }
}
