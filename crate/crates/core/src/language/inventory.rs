use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semantics::{Predicate, World};

/// Surface templates shipped with the crate.
pub const TEMPLATES_JSON: &str = include_str!("../../data/templates.json");
/// The expanded three-block inventory.
pub const SENTENCES_N3_JSON: &str = include_str!("../../data/sentences_n3.json");

/// The predicate change a sentence asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transformation {
    pub predicate: Predicate,
    #[serde(with = "bit")]
    pub target: bool,
}

mod bit {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("target must be 0 or 1, got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    /// Hidden from the learner; used by the tutor and by oracle grounding.
    #[serde(flatten)]
    pub transformation: Transformation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Relation {
    Close,
    Above,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Template {
    relation: Relation,
    #[serde(with = "bit")]
    target: bool,
    pattern: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inventory {
    world: World,
    sentences: Vec<Sentence>,
    by_text: HashMap<String, usize>,
}

impl Inventory {
    fn from_sentences(world: World, sentences: Vec<Sentence>) -> Result<Self> {
        let mut by_text = HashMap::with_capacity(sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            let (a, b) = s.transformation.predicate.blocks();
            if !world.contains(a) || !world.contains(b) {
                return Err(Error::InventoryLoad(format!("{:?} names a block outside the world", s.text)));
            }
            if by_text.insert(s.text.clone(), i).is_some() {
                return Err(Error::InventoryLoad(format!("duplicate sentence {:?}", s.text)));
            }
        }
        Ok(Inventory { world, sentences, by_text })
    }

    /// Expands a template table: close templates over both argument orders of every pair,
    /// above templates over every ordered pair.
    pub fn from_templates(world: World, templates_json: &str) -> Result<Self> {
        let templates: Vec<Template> =
            serde_json::from_str(templates_json).map_err(|e| Error::InventoryLoad(e.to_string()))?;
        let mut sentences = Vec::new();
        for t in &templates {
            if !t.pattern.contains("{a}") || !t.pattern.contains("{b}") {
                return Err(Error::InventoryLoad(format!("template {:?} must mention {{a}} and {{b}}", t.pattern)));
            }
            for p in world.predicates() {
                let (a, b) = p.blocks();
                let orders = match (t.relation, p) {
                    (Relation::Close, Predicate::Close(..)) => vec![(a, b), (b, a)],
                    (Relation::Above, Predicate::Above(..)) => vec![(a, b)],
                    _ => continue,
                };
                for (x, y) in orders {
                    sentences.push(Sentence {
                        text: t.pattern.replace("{a}", x.name()).replace("{b}", y.name()),
                        transformation: Transformation { predicate: p, target: t.target },
                    });
                }
            }
        }
        Self::from_sentences(world, sentences)
    }

    /// Loads an expanded `[{text, predicate, target}]` table.
    pub fn from_json(world: World, sentences_json: &str) -> Result<Self> {
        let sentences: Vec<Sentence> =
            serde_json::from_str(sentences_json).map_err(|e| Error::InventoryLoad(e.to_string()))?;
        Self::from_sentences(world, sentences)
    }

    pub fn world(&self) -> World {
        self.world
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, text: &str) -> Result<&Sentence> {
        self.by_text
            .get(text.trim())
            .map(|&i| &self.sentences[i])
            .ok_or_else(|| Error::UnknownSentence(text.to_string()))
    }

    pub fn sentences_for(&self, predicate: Predicate, target: bool) -> Vec<&Sentence> {
        self.sentences
            .iter()
            .filter(|s| s.transformation == Transformation { predicate, target })
            .collect()
    }

    /// The `k` inventory entries closest to `text` by edit distance.
    pub fn nearest(&self, text: &str, k: usize) -> Vec<&str> {
        let mut scored: Vec<(usize, &str)> = self
            .sentences
            .iter()
            .map(|s| (strsim::levenshtein(text, &s.text), s.text.as_str()))
            .collect();
        scored.sort();
        scored.into_iter().take(k).map(|(_, t)| t).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.sentences).expect("sentences serialize")
    }
}

/// The template-generated inventory for a world size; the three-block inventory is loaded from
/// the shipped table.
pub fn build_inventory(n_blocks: usize) -> Result<Inventory> {
    let world = World::new(n_blocks)?;
    if n_blocks == 3 {
        Inventory::from_json(world, SENTENCES_N3_JSON)
    } else {
        Inventory::from_templates(world, TEMPLATES_JSON)
    }
}
