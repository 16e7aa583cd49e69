use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::inventory::{Inventory, Sentence, Transformation};
use crate::error::{Error, Result};
use crate::semantics::Configuration;

/// Configurations of `universe` where the transformation's predicate holds its target value.
/// With `exclude_current`, the current configuration is never compatible: a sentence asks for
/// a change.
pub fn oracle_ground<'a>(
    transformation: Transformation,
    current: &Configuration,
    universe: impl IntoIterator<Item = &'a Configuration>,
    exclude_current: bool,
) -> BTreeSet<Configuration> {
    universe
        .into_iter()
        .filter(|c| c.get(transformation.predicate) == transformation.target)
        .filter(|c| !(exclude_current && *c == current))
        .copied()
        .collect()
}

/// Grounds a sentence with its hidden transformation.
pub fn ground_sentence<'a>(
    sentence: &Sentence,
    current: &Configuration,
    universe: impl IntoIterator<Item = &'a Configuration>,
) -> BTreeSet<Configuration> {
    oracle_ground(sentence.transformation, current, universe, true)
}

/// Symbolic grounding learned from (before, sentence, after) examples: for every sentence heard,
/// the transformations consistent with all of its examples so far.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundingTable {
    candidates: BTreeMap<String, BTreeSet<Transformation>>,
}

impl GroundingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Intersects the sentence's candidates with the predicate changes of one transition.
    pub fn induce(&mut self, before: &Configuration, text: &str, after: &Configuration) -> Result<()> {
        let changed: BTreeSet<Transformation> = before
            .diff(after)
            .into_iter()
            .map(|i| Transformation {
                predicate: after.world().predicate(i).expect("index within world"),
                target: after.get_index(i),
            })
            .collect();
        if changed.is_empty() {
            return Err(Error::InvalidParameter("an example needs before != after".into()));
        }
        let next: BTreeSet<Transformation> = match self.candidates.get(text) {
            Some(current) => current.intersection(&changed).copied().collect(),
            None => changed,
        };
        if next.is_empty() {
            return Err(Error::InconsistentData(text.to_string()));
        }
        self.candidates.insert(text.to_string(), next);
        Ok(())
    }

    pub fn candidates(&self, text: &str) -> Option<&BTreeSet<Transformation>> {
        self.candidates.get(text)
    }

    pub fn is_converged(&self, text: &str) -> bool {
        self.candidates.get(text).is_some_and(|c| c.len() == 1)
    }

    /// The learned transformation once a sentence has a single candidate.
    pub fn grounding(&self, text: &str) -> Option<Transformation> {
        self.candidates
            .get(text)
            .filter(|c| c.len() == 1)
            .and_then(|c| c.iter().next().copied())
    }

    pub fn converged_count(&self) -> usize {
        self.candidates.values().filter(|c| c.len() == 1).count()
    }

    pub fn heard_count(&self) -> usize {
        self.candidates.len()
    }
}

/// Where leaf sentences get their meaning.
#[derive(Clone, Copy, Debug)]
pub enum GroundingSource<'a> {
    /// The inventory's hidden transformations.
    Oracle(&'a Inventory),
    /// Induced groundings; leaves must be converged.
    Induced(&'a Inventory, &'a GroundingTable),
}

impl<'a> GroundingSource<'a> {
    pub fn inventory(&self) -> &'a Inventory {
        match self {
            GroundingSource::Oracle(inv) | GroundingSource::Induced(inv, _) => inv,
        }
    }

    pub fn transformation(&self, text: &str) -> Result<Transformation> {
        match self {
            GroundingSource::Oracle(inv) => Ok(inv.get(text)?.transformation),
            GroundingSource::Induced(inv, table) => {
                let sentence = inv.get(text)?;
                table
                    .grounding(&sentence.text)
                    .ok_or_else(|| Error::NotYetGrounded(sentence.text.clone()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::build_inventory;
    use crate::semantics::{enumerate_valid_configs, BlockId, Predicate, World};

    fn w3() -> World {
        World::new(3).unwrap()
    }

    #[test]
    fn red_above_green_from_scatter() {
        let inv = build_inventory(3).unwrap();
        let universe = enumerate_valid_configs(3).unwrap();
        let z = Configuration::zeros(w3());
        let got = ground_sentence(inv.get("get red above green").unwrap(), &z, &universe);
        let brute: BTreeSet<_> = universe
            .iter()
            .copied()
            .filter(|c| c.get(Predicate::Above(BlockId(0), BlockId(1))))
            .collect();
        assert_eq!(got, brute);
        assert!(!got.is_empty());
    }

    #[test]
    fn already_satisfied_current_is_excluded() {
        let inv = build_inventory(3).unwrap();
        let z = Configuration::zeros(w3());
        let got = ground_sentence(inv.get("put red far from green").unwrap(), &z, [&z]);
        assert!(got.is_empty());
        let kept = oracle_ground(inv.get("put red far from green").unwrap().transformation, &z, [&z], false);
        assert_eq!(kept, BTreeSet::from([z]));
    }

    #[test]
    fn polarity_partitions_the_universe() {
        let inv = build_inventory(3).unwrap();
        let universe = enumerate_valid_configs(3).unwrap();
        let z = Configuration::zeros(w3());
        let on = ground_sentence(inv.get("put red close to green").unwrap(), &z, &universe);
        let off = ground_sentence(inv.get("put red far from green").unwrap(), &z, &universe);
        assert!(on.is_disjoint(&off));
        assert_eq!(on.len() + off.len() + 1, universe.len());
    }

    #[test]
    fn induction_paths() {
        let w = w3();
        let mut table = GroundingTable::new();
        let z = Configuration::zeros(w);
        let close = Configuration::parse(w, "100000000").unwrap();
        table.induce(&z, "put red close to green", &close).unwrap();
        assert!(table.is_converged("put red close to green"));

        let stacked = Configuration::parse(w, "100100000").unwrap();
        table.induce(&z, "put red above green", &stacked).unwrap();
        assert!(!table.is_converged("put red above green"));
        table.induce(&close, "put red above green", &stacked).unwrap();
        assert_eq!(
            table.grounding("put red above green").unwrap().predicate,
            Predicate::Above(BlockId(0), BlockId(1))
        );

        let err = table.induce(&stacked, "put red above green", &close);
        assert_eq!(err, Err(Error::InconsistentData("put red above green".into())));
        assert!(table.is_converged("put red above green"), "failed example leaves the table intact");
    }
}
