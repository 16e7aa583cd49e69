use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BLOCKS: usize = 2;
pub const MAX_BLOCKS: usize = 5;

/// Display names, indexed by block.
pub const COLORS: [&str; MAX_BLOCKS] = ["red", "green", "blue", "yellow", "purple"];

/// Number of binary predicates over `n_blocks` blocks: one close bit per unordered pair and
/// two above bits per pair.
pub fn predicate_count(n_blocks: usize) -> Result<usize> {
    if n_blocks < MIN_BLOCKS {
        return Err(Error::InvalidWorld(n_blocks));
    }
    Ok(3 * n_blocks * (n_blocks - 1) / 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u8);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        COLORS.get(self.index()).copied().unwrap_or("?")
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BlockId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(i) = COLORS.iter().position(|c| c.eq_ignore_ascii_case(s)) {
            return Ok(BlockId(i as u8));
        }
        s.parse::<u8>()
            .ok()
            .filter(|&i| (i as usize) < MAX_BLOCKS)
            .map(BlockId)
            .ok_or_else(|| Error::MalformedConfiguration(format!("unknown block {s:?}")))
    }
}

/// A spatial predicate between two blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    /// Symmetric proximity; stored with `a < b`.
    Close(BlockId, BlockId),
    /// `Above(a, b)`: `a` sits higher than `b` within the same structure.
    Above(BlockId, BlockId),
}

impl Predicate {
    pub fn close(a: BlockId, b: BlockId) -> Self {
        if a <= b {
            Predicate::Close(a, b)
        } else {
            Predicate::Close(b, a)
        }
    }

    pub fn blocks(self) -> (BlockId, BlockId) {
        match self {
            Predicate::Close(a, b) | Predicate::Above(a, b) => (a, b),
        }
    }

    pub fn involves(self, block: BlockId) -> bool {
        let (a, b) = self.blocks();
        a == block || b == block
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Close(a, b) => write!(f, "close({a},{b})"),
            Predicate::Above(a, b) => write!(f, "above({a},{b})"),
        }
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedConfiguration(format!("malformed predicate {s:?}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let (a, b): (BlockId, BlockId) = (a.parse()?, b.parse()?);
        if a == b {
            return Err(bad());
        }
        match &s[..open] {
            "close" => Ok(Predicate::close(a, b)),
            "above" => Ok(Predicate::Above(a, b)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A block world of fixed size, owning the canonical predicate indexing: close pairs in
/// lexicographic order, then above ordered pairs in lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct World {
    n: u8,
}

impl World {
    pub fn new(n_blocks: usize) -> Result<Self> {
        if n_blocks < MIN_BLOCKS {
            return Err(Error::InvalidWorld(n_blocks));
        }
        if n_blocks > MAX_BLOCKS {
            return Err(Error::UnsupportedSize(n_blocks));
        }
        Ok(World { n: n_blocks as u8 })
    }

    pub fn n_blocks(self) -> usize {
        self.n as usize
    }

    pub fn blocks(self) -> impl Iterator<Item = BlockId> {
        (0..self.n).map(BlockId)
    }

    pub fn close_count(self) -> usize {
        let n = self.n_blocks();
        n * (n - 1) / 2
    }

    pub fn predicate_count(self) -> usize {
        3 * self.close_count()
    }

    pub fn index_of(self, p: Predicate) -> usize {
        let n = self.n_blocks();
        match p {
            Predicate::Close(a, b) => {
                let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
                debug_assert!(i != j && j < n);
                (0..i).map(|r| n - 1 - r).sum::<usize>() + (j - i - 1)
            }
            Predicate::Above(a, b) => {
                let (i, j) = (a.index(), b.index());
                debug_assert!(i != j && i < n && j < n);
                self.close_count() + i * (n - 1) + if j < i { j } else { j - 1 }
            }
        }
    }

    pub fn predicate(self, index: usize) -> Option<Predicate> {
        let n = self.n_blocks();
        let cc = self.close_count();
        if index < cc {
            let mut rem = index;
            for i in 0..n {
                let row = n - 1 - i;
                if rem < row {
                    return Some(Predicate::Close(BlockId(i as u8), BlockId((i + 1 + rem) as u8)));
                }
                rem -= row;
            }
            None
        } else if index < 3 * cc {
            let rem = index - cc;
            let i = rem / (n - 1);
            let r = rem % (n - 1);
            let j = if r < i { r } else { r + 1 };
            Some(Predicate::Above(BlockId(i as u8), BlockId(j as u8)))
        } else {
            None
        }
    }

    /// All predicates in canonical index order.
    pub fn predicates(self) -> impl Iterator<Item = Predicate> {
        (0..self.predicate_count()).map(move |i| self.predicate(i).expect("index in range"))
    }

    pub fn contains(self, block: BlockId) -> bool {
        block.index() < self.n_blocks()
    }
}

impl TryFrom<usize> for World {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        World::new(n)
    }
}

impl From<World> for usize {
    fn from(w: World) -> usize {
        w.n_blocks()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_counts() {
        assert_eq!(predicate_count(3).unwrap(), 9);
        assert_eq!(predicate_count(2).unwrap(), 3);
        assert_eq!(predicate_count(5).unwrap(), 30);
        assert_eq!(predicate_count(1), Err(Error::InvalidWorld(1)));
        assert_eq!(World::new(6), Err(Error::UnsupportedSize(6)));
    }

    #[test]
    fn canonical_order_n3() {
        let w = World::new(3).unwrap();
        let names: Vec<String> = w.predicates().map(|p| p.to_string()).collect();
        assert_eq!(
            names,
            [
                "close(red,green)",
                "close(red,blue)",
                "close(green,blue)",
                "above(red,green)",
                "above(red,blue)",
                "above(green,red)",
                "above(green,blue)",
                "above(blue,red)",
                "above(blue,green)",
            ]
        );
    }

    #[test]
    fn indexing_round_trips() {
        for n in MIN_BLOCKS..=MAX_BLOCKS {
            let w = World::new(n).unwrap();
            for i in 0..w.predicate_count() {
                let p = w.predicate(i).unwrap();
                assert_eq!(w.index_of(p), i);
                assert_eq!(p.to_string().parse::<Predicate>().unwrap(), p);
            }
            assert!(w.predicate(w.predicate_count()).is_none());
        }
    }

    #[test]
    fn close_is_unordered() {
        let (r, g) = (BlockId(0), BlockId(1));
        assert_eq!(Predicate::close(g, r), Predicate::close(r, g));
        assert_eq!("close(green,red)".parse::<Predicate>().unwrap(), Predicate::close(r, g));
    }
}
