use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grounding::{oracle_ground, GroundingSource};
use super::inventory::Inventory;
use crate::error::{Error, Result};
use crate::semantics::Configuration;

/// Logical combination of instruction sentences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(String),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn leaf(text: impl Into<String>) -> Self {
        Expr::Leaf(text.into())
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Self {
        Expr::Not(Box::new(a))
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Leaf(_) => 0,
            Expr::Not(a) => 1 + a.depth(),
            Expr::And(a, b) | Expr::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<&str> {
        match self {
            Expr::Leaf(t) => vec![t.as_str()],
            Expr::Not(a) => a.leaves(),
            Expr::And(a, b) | Expr::Or(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    /// Every leaf names an inventory sentence.
    pub fn check_leaves(&self, inventory: &Inventory) -> Result<()> {
        self.leaves().into_iter().try_for_each(|t| inventory.get(t).map(|_| ()))
    }
}

/// Wire form: `{"op": "leaf", "sentence": ...}` or `{"op": "and"|"or"|"not", "children": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExprWire {
    op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentence: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<ExprWire>,
}

impl From<&Expr> for ExprWire {
    fn from(e: &Expr) -> Self {
        let node = |op: &str, children: Vec<ExprWire>| ExprWire { op: op.into(), sentence: None, children };
        match e {
            Expr::Leaf(t) => ExprWire { op: "leaf".into(), sentence: Some(t.clone()), children: vec![] },
            Expr::And(a, b) => node("and", vec![a.as_ref().into(), b.as_ref().into()]),
            Expr::Or(a, b) => node("or", vec![a.as_ref().into(), b.as_ref().into()]),
            Expr::Not(a) => node("not", vec![a.as_ref().into()]),
        }
    }
}

impl TryFrom<ExprWire> for Expr {
    type Error = Error;

    fn try_from(w: ExprWire) -> Result<Self> {
        let arity = |n: usize| {
            if w.children.len() == n {
                Ok(())
            } else {
                Err(Error::MalformedExpression(format!(
                    "{:?} takes {n} children, got {}",
                    w.op,
                    w.children.len()
                )))
            }
        };
        match w.op.as_str() {
            "leaf" => {
                arity(0)?;
                w.sentence
                    .map(Expr::Leaf)
                    .ok_or_else(|| Error::MalformedExpression("leaf without sentence".into()))
            }
            "not" => {
                arity(1)?;
                let [a]: [ExprWire; 1] = w.children.try_into().expect("arity checked");
                Ok(Expr::not(a.try_into()?))
            }
            "and" | "or" => {
                arity(2)?;
                let is_and = w.op == "and";
                let [a, b]: [ExprWire; 2] = w.children.try_into().expect("arity checked");
                let (a, b) = (a.try_into()?, b.try_into()?);
                Ok(if is_and { Expr::and(a, b) } else { Expr::or(a, b) })
            }
            other => Err(Error::MalformedExpression(format!("unknown operator {other:?}"))),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExprWire::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ExprWire::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

/// Set semantics within the discovered goals: leaves ground against `discovered`, `and` is
/// intersection, `or` is union and `not` is the complement within `discovered`.
pub fn ground_expression(
    expr: &Expr,
    current: &Configuration,
    discovered: &BTreeSet<Configuration>,
    source: GroundingSource<'_>,
) -> Result<BTreeSet<Configuration>> {
    Ok(match expr {
        Expr::Leaf(text) => oracle_ground(source.transformation(text)?, current, discovered, true),
        Expr::And(a, b) => {
            let a = ground_expression(a, current, discovered, source)?;
            let b = ground_expression(b, current, discovered, source)?;
            a.intersection(&b).copied().collect()
        }
        Expr::Or(a, b) => {
            let mut a = ground_expression(a, current, discovered, source)?;
            a.extend(ground_expression(b, current, discovered, source)?);
            a
        }
        Expr::Not(a) => {
            let a = ground_expression(a, current, discovered, source)?;
            discovered.difference(&a).copied().collect()
        }
    })
}

/// Random expression for evaluation: node kind uniform over leaf/and/or/not, leaves forced at
/// `max_depth`, leaf sentences uniform over the inventory.
pub fn sample_expression<R: Rng + ?Sized>(inventory: &Inventory, max_depth: usize, rng: &mut R) -> Expr {
    fn go<R: Rng + ?Sized>(inv: &Inventory, depth: usize, max_depth: usize, rng: &mut R) -> Expr {
        let kind = if depth >= max_depth { 0 } else { rng.gen_range(0..4) };
        match kind {
            0 => Expr::Leaf(inv.sentences()[rng.gen_range(0..inv.len())].text.clone()),
            1 => Expr::and(go(inv, depth + 1, max_depth, rng), go(inv, depth + 1, max_depth, rng)),
            2 => Expr::or(go(inv, depth + 1, max_depth, rng), go(inv, depth + 1, max_depth, rng)),
            _ => Expr::not(go(inv, depth + 1, max_depth, rng)),
        }
    }
    go(inventory, 0, max_depth, rng)
}
