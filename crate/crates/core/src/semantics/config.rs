use std::fmt;

use serde::{Deserialize, Serialize};

use super::world::{BlockId, Predicate, World};
use crate::error::{Error, Result};

/// Binary vector of close/above predicate values, in the world's canonical predicate order.
///
/// Bits are packed most-significant-first, so the derived ordering on configurations of the
/// same world coincides with lexicographic ordering of their bit strings.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    world: World,
    word: u32,
}

impl Configuration {
    pub fn zeros(world: World) -> Self {
        Configuration { world, word: 0 }
    }

    pub fn from_bits(world: World, bits: &[u8]) -> Result<Self> {
        let len = world.predicate_count();
        if bits.len() != len {
            return Err(Error::Dimension { expected: len, actual: bits.len() });
        }
        let mut c = Configuration::zeros(world);
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => c.set_index(i, true),
                other => {
                    return Err(Error::MalformedConfiguration(format!(
                        "bit {i} has value {other}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(c)
    }

    /// Parses a fixed-order bit string such as `"111110100"`.
    pub fn parse(world: World, s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::MalformedConfiguration(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(world, &bits)
    }

    /// Parses a bit string, inferring the world size from its length.
    pub fn parse_any(s: &str) -> Result<Self> {
        let len = s.trim().len();
        let world = (2..=super::world::MAX_BLOCKS)
            .filter_map(|n| World::new(n).ok())
            .find(|w| w.predicate_count() == len)
            .ok_or_else(|| Error::MalformedConfiguration(format!("no world has {len} predicates")))?;
        Self::parse(world, s)
    }

    pub fn world(&self) -> World {
        self.world
    }

    pub fn len(&self) -> usize {
        self.world.predicate_count()
    }

    pub fn is_empty(&self) -> bool {
        self.word == 0
    }

    fn mask(&self, index: usize) -> u32 {
        debug_assert!(index < self.len());
        1 << (self.len() - 1 - index)
    }

    pub fn get_index(&self, index: usize) -> bool {
        self.word & self.mask(index) != 0
    }

    pub fn set_index(&mut self, index: usize, value: bool) {
        let m = self.mask(index);
        if value {
            self.word |= m;
        } else {
            self.word &= !m;
        }
    }

    pub fn get(&self, p: Predicate) -> bool {
        self.get_index(self.world.index_of(p))
    }

    pub fn set(&mut self, p: Predicate, value: bool) {
        self.set_index(self.world.index_of(p), value)
    }

    pub fn with(mut self, p: Predicate, value: bool) -> Self {
        self.set(p, value);
        self
    }

    pub fn close(&self, a: BlockId, b: BlockId) -> bool {
        a != b && self.get(Predicate::close(a, b))
    }

    pub fn above(&self, a: BlockId, b: BlockId) -> bool {
        a != b && self.get(Predicate::Above(a, b))
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get_index(i) as u8).collect()
    }

    pub fn ones(&self) -> usize {
        self.word.count_ones() as usize
    }

    /// Predicate indices whose values differ between `self` and `other`.
    pub fn diff(&self, other: &Configuration) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.get_index(i) != other.get_index(i))
            .collect()
    }

    /// Iterates every configuration of the world (all `2^len` bit patterns) in lexicographic order.
    pub fn all_patterns(world: World) -> impl Iterator<Item = Configuration> {
        let len = world.predicate_count() as u32;
        (0u64..(1u64 << len)).map(move |w| Configuration { world, word: w as u32 })
    }

    /// The no-predicate-true configuration: every block on its own, far from the others.
    pub fn all_zero(world: World) -> Self {
        Self::zeros(world)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get_index(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Accepts either the bit-string form or the integer-array form.
impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Text(String),
            Bits(Vec<u8>),
        }
        match Wire::deserialize(d)? {
            Wire::Text(s) => Configuration::parse_any(&s),
            Wire::Bits(bits) => {
                let s: String = bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
                if bits.iter().any(|&b| b > 1) {
                    Err(Error::MalformedConfiguration("bits must be 0 or 1".into()))
                } else {
                    Configuration::parse_any(&s)
                }
            }
        }
        .map_err(serde::de::Error::custom)
    }
}
