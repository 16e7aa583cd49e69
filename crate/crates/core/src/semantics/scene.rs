use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::Configuration;
use super::world::{BlockId, Predicate, World};
use crate::error::{Error, Result};

/// One physical structure on the table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Single(BlockId),
    /// Bottom-to-top, at least two blocks.
    Stack(Vec<BlockId>),
    /// One block resting on two adjacent base blocks; the base is kept sorted.
    Pyramid { top: BlockId, base: [BlockId; 2] },
}

impl Structure {
    pub fn pyramid(top: BlockId, a: BlockId, b: BlockId) -> Self {
        Structure::Pyramid { top, base: if a <= b { [a, b] } else { [b, a] } }
    }

    pub fn blocks(&self) -> Vec<BlockId> {
        match self {
            Structure::Single(b) => vec![*b],
            Structure::Stack(s) => s.clone(),
            Structure::Pyramid { top, base } => vec![base[0], base[1], *top],
        }
    }

    /// The block with nothing on it.
    pub fn clear_block(&self) -> BlockId {
        match self {
            Structure::Single(b) => *b,
            Structure::Stack(s) => *s.last().expect("non-empty stack"),
            Structure::Pyramid { top, .. } => *top,
        }
    }

    pub fn contains(&self, block: BlockId) -> bool {
        match self {
            Structure::Single(b) => *b == block,
            Structure::Stack(s) => s.contains(&block),
            Structure::Pyramid { top, base } => *top == block || base.contains(&block),
        }
    }

    /// Height of the tallest column in the structure.
    pub fn height(&self) -> usize {
        match self {
            Structure::Single(_) => 1,
            Structure::Stack(s) => s.len(),
            Structure::Pyramid { .. } => 2,
        }
    }

    fn normalized(self) -> Self {
        match self {
            Structure::Pyramid { top, base } => Structure::pyramid(top, base[0], base[1]),
            other => other,
        }
    }
}

/// A physical realization of a configuration: structures grouped into proximity clusters.
///
/// Scenes are kept in canonical form (structures sorted within clusters, clusters sorted), so
/// structural equality is scene identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scene {
    world: World,
    clusters: Vec<Vec<Structure>>,
}

/// Wire form: a flat structure list plus clusters given as indices into it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneWire {
    pub structures: Vec<Structure>,
    pub clusters: Vec<Vec<usize>>,
}

impl Scene {
    /// Builds a scene from grouped structures, validating every invariant.
    pub fn from_clusters(world: World, clusters: Vec<Vec<Structure>>) -> Result<Self> {
        let mut seen = vec![false; world.n_blocks()];
        for (ci, cluster) in clusters.iter().enumerate() {
            if cluster.is_empty() {
                return Err(Error::InvalidScene(format!("cluster {ci} is empty")));
            }
            for s in cluster {
                match s {
                    Structure::Stack(blocks) if blocks.len() < 2 => {
                        return Err(Error::InvalidScene("a stack needs at least two blocks".into()))
                    }
                    Structure::Pyramid { top, base } if base[0] == base[1] || base.contains(top) => {
                        return Err(Error::InvalidScene(
                            "a pyramid needs three distinct blocks".into(),
                        ))
                    }
                    _ => {}
                }
                for b in s.blocks() {
                    if !world.contains(b) {
                        return Err(Error::InvalidScene(format!(
                            "block {} is out of range for {} blocks",
                            b.index(),
                            world.n_blocks()
                        )));
                    }
                    if std::mem::replace(&mut seen[b.index()], true) {
                        return Err(Error::InvalidScene(format!("block {b} appears more than once")));
                    }
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidScene(format!(
                "block {} is missing",
                BlockId(missing as u8)
            )));
        }
        Ok(Self::canonical(world, clusters))
    }

    fn canonical(world: World, clusters: Vec<Vec<Structure>>) -> Self {
        let mut clusters: Vec<Vec<Structure>> = clusters
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|c| {
                let mut c: Vec<Structure> = c.into_iter().map(Structure::normalized).collect();
                c.sort();
                c
            })
            .collect();
        clusters.sort();
        Scene { world, clusters }
    }

    pub fn from_wire(world: World, wire: &SceneWire) -> Result<Self> {
        let mut used = vec![false; wire.structures.len()];
        let mut clusters = Vec::with_capacity(wire.clusters.len());
        for (ci, members) in wire.clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidScene(format!("cluster {ci} is empty")));
            }
            let mut cluster = Vec::with_capacity(members.len());
            for &si in members {
                let s = wire.structures.get(si).ok_or_else(|| {
                    Error::InvalidScene(format!("cluster {ci} references unknown structure {si}"))
                })?;
                if std::mem::replace(&mut used[si], true) {
                    return Err(Error::InvalidScene(format!(
                        "structure {si} belongs to more than one cluster"
                    )));
                }
                cluster.push(s.clone());
            }
            clusters.push(cluster);
        }
        if let Some(si) = used.iter().position(|u| !u) {
            return Err(Error::InvalidScene(format!("structure {si} is in no cluster")));
        }
        Self::from_clusters(world, clusters)
    }

    pub fn to_wire(&self) -> SceneWire {
        let mut structures = Vec::new();
        let mut clusters = Vec::new();
        for c in &self.clusters {
            let mut ids = Vec::new();
            for s in c {
                ids.push(structures.len());
                structures.push(s.clone());
            }
            clusters.push(ids);
        }
        SceneWire { structures, clusters }
    }

    /// Every block on its own, far from all others.
    pub fn scattered(world: World) -> Self {
        Self::canonical(world, world.blocks().map(|b| vec![Structure::Single(b)]).collect())
    }

    pub fn world(&self) -> World {
        self.world
    }

    pub fn clusters(&self) -> &[Vec<Structure>] {
        &self.clusters
    }

    pub fn structures(&self) -> impl Iterator<Item = &Structure> {
        self.clusters.iter().flatten()
    }

    /// Cluster and structure indices holding `block`.
    pub fn locate(&self, block: BlockId) -> Option<(usize, usize)> {
        self.clusters.iter().enumerate().find_map(|(ci, c)| {
            c.iter().position(|s| s.contains(block)).map(|si| (ci, si))
        })
    }

    /// Blocks with nothing resting on them, in index order.
    pub fn clear_blocks(&self) -> Vec<BlockId> {
        let mut v: Vec<BlockId> = self.structures().map(Structure::clear_block).collect();
        v.sort();
        v
    }

    pub fn is_clear(&self, block: BlockId) -> bool {
        self.structures().any(|s| s.clear_block() == block)
    }

    /// Height of the tallest stack in the scene (1 when there is no stack).
    pub fn max_stack_height(&self) -> usize {
        self.structures()
            .map(|s| match s {
                Structure::Stack(v) => v.len(),
                _ => 1,
            })
            .max()
            .unwrap_or(0)
    }

    /// Reads off the predicate vector: blocks sharing a cluster are close; a block is above every
    /// block beneath it in the same structure.
    pub fn extract_config(&self) -> Configuration {
        let mut c = Configuration::zeros(self.world);
        for cluster in &self.clusters {
            let blocks: Vec<BlockId> = cluster.iter().flat_map(Structure::blocks).collect();
            for (i, &a) in blocks.iter().enumerate() {
                for &b in &blocks[i + 1..] {
                    c.set(Predicate::close(a, b), true);
                }
            }
            for s in cluster {
                match s {
                    Structure::Single(_) => {}
                    Structure::Stack(v) => {
                        for (lo, &below) in v.iter().enumerate() {
                            for &above in &v[lo + 1..] {
                                c.set(Predicate::Above(above, below), true);
                            }
                        }
                    }
                    Structure::Pyramid { top, base } => {
                        c.set(Predicate::Above(*top, base[0]), true);
                        c.set(Predicate::Above(*top, base[1]), true);
                    }
                }
            }
        }
        c
    }

    /// Reconstructs the unique scene realizing `config`, if one exists.
    pub fn realize(config: &Configuration) -> Option<Scene> {
        let world = config.world();
        let n = world.n_blocks();
        let blocks: Vec<BlockId> = world.blocks().collect();

        // proximity components
        let mut component: Vec<usize> = (0..n).collect();
        for a in 0..n {
            for b in a + 1..n {
                if config.close(blocks[a], blocks[b]) {
                    let (ca, cb) = (component[a], component[b]);
                    for c in component.iter_mut() {
                        if *c == cb {
                            *c = ca;
                        }
                    }
                }
            }
        }

        let below: Vec<Vec<BlockId>> = blocks
            .iter()
            .map(|&a| blocks.iter().copied().filter(|&b| config.above(a, b)).collect())
            .collect();

        // direct support: what each block rests on
        let mut rests_on: Vec<Option<BlockId>> = vec![None; n];
        let mut pyramid_tops: Vec<BlockId> = Vec::new();
        for &a in &blocks {
            let under = &below[a.index()];
            if under.is_empty() {
                continue;
            }
            let direct = under.iter().copied().find(|&b| {
                let rest = &below[b.index()];
                rest.len() + 1 == under.len() && rest.iter().all(|x| under.contains(x))
            });
            if let Some(b) = direct {
                rests_on[a.index()] = Some(b);
            } else if under.len() == 2 && under.iter().all(|b| below[b.index()].is_empty()) {
                pyramid_tops.push(a);
            } else {
                return None;
            }
        }

        let mut load = vec![0usize; n];
        for b in rests_on.iter().flatten() {
            load[b.index()] += 1;
        }
        for &top in &pyramid_tops {
            for b in &below[top.index()] {
                load[b.index()] += 1;
            }
            if load[top.index()] > 0 {
                return None;
            }
        }
        if load.iter().any(|&l| l > 1) {
            return None;
        }
        // a pyramid top must stay clear
        for &top in &pyramid_tops {
            if rests_on.contains(&Some(top)) {
                return None;
            }
        }

        let mut structures: Vec<Structure> = Vec::new();
        let in_pyramid = |b: BlockId| {
            pyramid_tops.contains(&b) || pyramid_tops.iter().any(|t| below[t.index()].contains(&b))
        };
        for &bottom in &blocks {
            if rests_on[bottom.index()].is_some() || in_pyramid(bottom) {
                continue;
            }
            let mut column = vec![bottom];
            let mut cur = bottom;
            while let Some(next) = blocks.iter().copied().find(|x| rests_on[x.index()] == Some(cur)) {
                column.push(next);
                cur = next;
            }
            structures.push(if column.len() == 1 {
                Structure::Single(bottom)
            } else {
                Structure::Stack(column)
            });
        }
        for &top in &pyramid_tops {
            let base = &below[top.index()];
            structures.push(Structure::pyramid(top, base[0], base[1]));
        }

        let mut grouped: BTreeMap<usize, Vec<Structure>> = BTreeMap::new();
        for s in structures {
            let comp = component[s.blocks()[0].index()];
            grouped.entry(comp).or_default().push(s);
        }
        let scene = Scene::from_clusters(world, grouped.into_values().collect()).ok()?;
        (scene.extract_config() == *config).then_some(scene)
    }
}

/// True iff some scene realizes `config`.
///
/// Cheap necessary conditions are checked first (above implies close, antisymmetry, acyclicity,
/// transitive closure), then the realizing scene is reconstructed.
pub fn is_valid(config: &Configuration) -> bool {
    let world = config.world();
    let blocks: Vec<BlockId> = world.blocks().collect();
    for &a in &blocks {
        for &b in &blocks {
            if a == b || !config.above(a, b) {
                continue;
            }
            if !config.close(a, b) || config.above(b, a) {
                return false;
            }
            for &c in &blocks {
                if c != a && c != b && config.above(b, c) && !config.above(a, c) {
                    return false;
                }
            }
        }
    }
    Scene::realize(config).is_some()
}

impl Serialize for Scene {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

impl SceneWire {
    /// The world implied by the number of blocks listed.
    pub fn infer_world(&self) -> Result<World> {
        World::new(self.structures.iter().map(|s| s.blocks().len()).sum())
    }
}

/// The number of blocks is inferred from the wire form; every block must appear once.
impl<'de> Deserialize<'de> for Scene {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SceneWire::deserialize(d)?;
        let world = wire.infer_world().map_err(serde::de::Error::custom)?;
        Scene::from_wire(world, &wire).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w3() -> World {
        World::new(3).unwrap()
    }
    const R: BlockId = BlockId(0);
    const G: BlockId = BlockId(1);
    const B: BlockId = BlockId(2);

    #[test]
    fn extract_examples() {
        let two_stack = Scene::from_clusters(
            w3(),
            vec![vec![Structure::Stack(vec![G, R])], vec![Structure::Single(B)]],
        )
        .unwrap();
        assert_eq!(two_stack.extract_config().to_string(), "100100000");

        let tower = Scene::from_clusters(w3(), vec![vec![Structure::Stack(vec![B, G, R])]]).unwrap();
        assert_eq!(tower.extract_config().to_string(), "111110100");

        let pyramid = Scene::from_clusters(w3(), vec![vec![Structure::pyramid(R, G, B)]]).unwrap();
        assert_eq!(pyramid.extract_config().to_string(), "111110000");
    }

    #[test]
    fn validity_examples() {
        assert!(is_valid(&Configuration::zeros(w3())));
        let above_not_close = Configuration::zeros(w3()).with(Predicate::Above(R, G), true);
        assert!(!is_valid(&above_not_close));
        let both = Configuration::zeros(w3())
            .with(Predicate::close(R, G), true)
            .with(Predicate::Above(R, G), true)
            .with(Predicate::Above(G, R), true);
        assert!(!is_valid(&both));
        // close must be transitive
        let chain = Configuration::parse(w3(), "101000000").unwrap();
        assert!(!is_valid(&chain));
    }

    #[test]
    fn malformed_scenes_name_the_violation() {
        let dup = Scene::from_clusters(
            w3(),
            vec![vec![Structure::Single(R), Structure::Single(R)], vec![Structure::Single(B)]],
        );
        assert!(matches!(dup, Err(Error::InvalidScene(m)) if m.contains("more than once")));
        let missing = Scene::from_clusters(w3(), vec![vec![Structure::Single(R), Structure::Single(G)]]);
        assert!(matches!(missing, Err(Error::InvalidScene(m)) if m.contains("missing")));
        let short = Scene::from_clusters(w3(), vec![vec![Structure::Stack(vec![R])]]);
        assert!(short.is_err());
    }

    #[test]
    fn wire_round_trip() {
        let s = Scene::from_clusters(
            w3(),
            vec![vec![Structure::Stack(vec![G, R]), Structure::Single(B)]],
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"structures":[{"single":2},{"stack":[1,0]}],"clusters":[[0,1]]}"#);
        let wire: SceneWire = serde_json::from_str(&json).unwrap();
        assert_eq!(Scene::from_wire(w3(), &wire).unwrap(), s);
    }

    #[test]
    fn realize_inverts_extract() {
        let s = Scene::from_clusters(w3(), vec![vec![Structure::pyramid(G, R, B)]]).unwrap();
        assert_eq!(Scene::realize(&s.extract_config()), Some(s));
    }
}
