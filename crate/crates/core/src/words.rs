//! Words in the language `G ∪ {x, x⁻¹}`.
//!
//! A word is stored leftmost letter first; the leftmost letter is applied
//! last, so `g.x` evaluated at `n` is `g(s(n))`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::injections::PartialInjection;
use crate::oracle::{GroupElementId, GroupOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    X,
    XInverse,
    Group(GroupElementId),
}

impl Letter {
    fn is_variable(self) -> bool {
        matches!(self, Letter::X | Letter::XInverse)
    }

    fn cancels(self, other: Letter) -> bool {
        matches!((self, other), (Letter::X, Letter::XInverse) | (Letter::XInverse, Letter::X))
    }
}

/// One block `g x^k` of a nice word. `group` is `None` only for a pure power `x^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub group: Option<GroupElementId>,
    pub exponent: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occurrence {
    /// Exactly one occurrence of `x` or `x⁻¹`.
    W1,
    WMoreThan1,
}

/// A reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn x() -> Self {
        Word::x_power(1)
    }

    pub fn x_power(k: i64) -> Self {
        let letter = if k >= 0 { Letter::X } else { Letter::XInverse };
        Word { letters: vec![letter; k.unsigned_abs() as usize] }
    }

    pub fn group(g: GroupElementId) -> Self {
        if g.is_identity() {
            Word::identity()
        } else {
            Word { letters: vec![Letter::Group(g)] }
        }
    }

    /// Builds a word from letters that are already reduced; the check is
    /// purely syntactic (handle 0 is the identity in every oracle).
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self> {
        for (i, &l) in letters.iter().enumerate() {
            if l == Letter::Group(GroupElementId::IDENTITY) {
                return Err(Error::Parse("identity letter inside a reduced word".into()));
            }
            if let Some(&next) = letters.get(i + 1) {
                if l.cancels(next) {
                    return Err(Error::Parse("adjacent x and x^-1".into()));
                }
                if !l.is_variable() && !next.is_variable() {
                    return Err(Error::Parse("adjacent group letters".into()));
                }
            }
        }
        Ok(Word { letters })
    }

    /// Free reduction; adjacent group letters are composed by the oracle.
    pub fn reduce(raw: &[Letter], oracle: &dyn GroupOracle) -> Result<Self> {
        let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
        for &letter in raw {
            if let Letter::Group(g) = letter {
                if !oracle.contains(g) {
                    return Err(Error::UnknownGroupElement(g));
                }
                if g.is_identity() {
                    continue;
                }
            }
            match (out.last().copied(), letter) {
                (Some(prev), next) if prev.cancels(next) => {
                    out.pop();
                }
                (Some(Letter::Group(a)), Letter::Group(b)) => {
                    out.pop();
                    let ab = oracle.compose(a, b)?;
                    if !ab.is_identity() {
                        out.push(Letter::Group(ab));
                    }
                }
                _ => out.push(letter),
            }
        }
        Ok(Word { letters: out })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Number of letters, counting `x^k` as `|k|` letters.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// `self · other`, with `other` applied first.
    pub fn concat(&self, other: &Word, oracle: &dyn GroupOracle) -> Result<Word> {
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Word::reduce(&raw, oracle)
    }

    pub fn inverse(&self, oracle: &dyn GroupOracle) -> Result<Word> {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|&l| {
                Ok(match l {
                    Letter::X => Letter::XInverse,
                    Letter::XInverse => Letter::X,
                    Letter::Group(g) => Letter::Group(oracle.invert(g)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word { letters })
    }

    pub fn power(&self, k: usize, oracle: &dyn GroupOracle) -> Result<Word> {
        let raw: Vec<Letter> = std::iter::repeat_n(self.letters.iter().copied(), k).flatten().collect();
        Word::reduce(&raw, oracle)
    }

    pub fn group_letters(&self) -> impl Iterator<Item = GroupElementId> + '_ {
        self.letters.iter().filter_map(|l| match l {
            Letter::Group(g) => Some(*g),
            _ => None,
        })
    }

    pub fn has_variable(&self) -> bool {
        self.letters.iter().any(|l| l.is_variable())
    }

    /// Number of `x` letters minus number of `x⁻¹` letters.
    pub fn exponent_sum(&self) -> i64 {
        self.letters
            .iter()
            .map(|l| match l {
                Letter::X => 1,
                Letter::XInverse => -1,
                Letter::Group(_) => 0,
            })
            .sum()
    }

    pub fn variable_count(&self) -> usize {
        self.letters.iter().filter(|l| l.is_variable()).count()
    }

    /// The block decomposition `g_l x^{k_l} … g_0 x^{k_0}` when the word is nice.
    pub fn nice_blocks(&self) -> Option<Vec<Block>> {
        let first = *self.letters.first()?;
        if self.letters.iter().all(|&l| l == Letter::X) {
            return Some(vec![Block { group: None, exponent: self.len() as i64 }]);
        }
        if first.is_variable() || *self.letters.last()? != Letter::X {
            return None;
        }
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < self.letters.len() {
            let Letter::Group(g) = self.letters[i] else { return None };
            i += 1;
            let mut exponent = 0i64;
            while let Some(&l) = self.letters.get(i) {
                match l {
                    Letter::X => exponent += 1,
                    Letter::XInverse => exponent -= 1,
                    Letter::Group(_) => break,
                }
                i += 1;
            }
            if exponent == 0 {
                return None;
            }
            blocks.push(Block { group: Some(g), exponent });
        }
        Some(blocks)
    }

    pub fn is_nice(&self) -> bool {
        self.nice_blocks().is_some()
    }

    pub fn from_blocks(blocks: &[Block]) -> Word {
        let mut letters = Vec::new();
        for b in blocks {
            if let Some(g) = b.group {
                letters.push(Letter::Group(g));
            }
            letters.extend(Word::x_power(b.exponent).letters);
        }
        Word { letters }
    }

    pub fn occurrence_class(&self) -> Result<Occurrence> {
        if !self.is_nice() {
            return Err(Error::NotNice);
        }
        Ok(if self.variable_count() == 1 { Occurrence::W1 } else { Occurrence::WMoreThan1 })
    }

    /// All rotations of the letter sequence, each re-reduced.
    pub fn rotations(&self, oracle: &dyn GroupOracle) -> Result<Vec<Word>> {
        let n = self.letters.len();
        (0..n.max(1))
            .map(|i| {
                let mut raw = self.letters[i.min(n)..].to_vec();
                raw.extend_from_slice(&self.letters[..i.min(n)]);
                Word::reduce(&raw, oracle)
            })
            .collect()
    }

    /// Nice members among the rotations of `self` and their inverses.
    pub fn cyclic_conjugates_and_inverses(&self, oracle: &dyn GroupOracle) -> Result<BTreeSet<Word>> {
        if !self.is_nice() {
            return Err(Error::NotNice);
        }
        let mut out = BTreeSet::new();
        for r in self.rotations(oracle)? {
            let inv = r.inverse(oracle)?;
            for candidate in [r, inv] {
                if candidate.is_nice() {
                    out.insert(candidate);
                }
            }
        }
        Ok(out)
    }

    /// The indecomposable `v` and maximal `k` with `v^k = self`.
    pub fn indecomposable_root(&self) -> Result<(Word, usize)> {
        let blocks = self.nice_blocks().ok_or(Error::NotNice)?;
        if blocks[0].group.is_none() {
            return Ok((Word::x(), blocks[0].exponent as usize));
        }
        let b = blocks.len();
        for period in (1..=b).filter(|d| b % d == 0) {
            if (period..b).all(|i| blocks[i] == blocks[i - period]) {
                return Ok((Word::from_blocks(&blocks[..period]), b / period));
            }
        }
        unreachable!("the full block sequence is always a period")
    }

    pub fn is_indecomposable(&self) -> bool {
        matches!(self.indecomposable_root(), Ok((_, 1)))
    }

    /// `w[s](n)`, or `None` when some step is undefined.
    pub fn evaluate(&self, s: &PartialInjection, oracle: &dyn GroupOracle, n: u64) -> Result<Option<u64>> {
        let mut cur = n;
        for &letter in self.letters.iter().rev() {
            let next = match letter {
                Letter::X => s.get(cur),
                Letter::XInverse => s.get_inverse(cur),
                Letter::Group(g) => Some(oracle.eval(g, cur)?),
            };
            match next {
                Some(v) => cur = v,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }
}

/// `E↾G`: the identity together with every group letter of `words` and its inverse.
pub fn graph_restriction<'a>(
    words: impl IntoIterator<Item = &'a Word>,
    oracle: &dyn GroupOracle,
) -> Result<BTreeSet<GroupElementId>> {
    let mut out = BTreeSet::from([GroupElementId::IDENTITY]);
    for w in words {
        for g in w.group_letters() {
            out.insert(g);
            out.insert(oracle.invert(g)?);
        }
    }
    Ok(out)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            if !first {
                f.write_str(".")?;
            }
            first = false;
            match self.letters[i] {
                Letter::Group(g) => {
                    write!(f, "{g}")?;
                    i += 1;
                }
                l => {
                    let run = self.letters[i..].iter().take_while(|&&m| m == l).count();
                    let exp = if l == Letter::X { run as i64 } else { -(run as i64) };
                    if exp == 1 {
                        f.write_str("x")?;
                    } else {
                        write!(f, "x^{exp}")?;
                    }
                    i += run;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts exactly the canonical text form produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        let mut prev_was_variable = false;
        for token in s.split('.') {
            if let Some(id) = token.strip_prefix('g') {
                if id.is_empty() || (id.len() > 1 && id.starts_with('0')) || !id.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::Parse(format!("bad group token {token:?}")));
                }
                let id: u64 = id.parse().map_err(|_| Error::Parse(format!("bad group token {token:?}")))?;
                letters.push(Letter::Group(GroupElementId(id)));
                prev_was_variable = false;
                continue;
            }
            let exp: i64 = if token == "x" {
                1
            } else if let Some(e) = token.strip_prefix("x^") {
                let e: i64 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?;
                if e == 0 || e == 1 || e.to_string() != token[2..] {
                    return Err(Error::Parse(format!("non-canonical exponent in {token:?}")));
                }
                e
            } else {
                return Err(Error::Parse(format!("unknown token {token:?}")));
            };
            if prev_was_variable {
                return Err(Error::Parse("adjacent x tokens must be merged".into()));
            }
            prev_was_variable = true;
            letters.extend(Word::x_power(exp).letters);
        }
        Word::from_reduced(letters)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
