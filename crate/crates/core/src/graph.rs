//! Goal graph: valid configurations linked when one block move turns one into the other.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semantics::{enumerate_scenes, legal_successors, Configuration, Scene, World, MAX_BLOCKS};

/// A discovered goal next to an undiscovered one, one move apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrontierPair {
    pub frontier: Configuration,
    pub beyond: Configuration,
}

/// JSON export: lexicographically sorted nodes and undirected edges as index pairs `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<Configuration>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug)]
pub struct GoalGraph {
    world: World,
    nodes: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    adjacency: Vec<Vec<usize>>,
    reverse: Vec<Vec<usize>>,
    move_targets: Vec<Vec<usize>>,
    scenes: Vec<Scene>,
}

impl GoalGraph {
    /// Builds the full graph from the scene grammar: every scene, every legal move.
    pub fn build_full(n_blocks: usize) -> Result<Self> {
        let world = World::new(n_blocks)?;
        let mut scenes = enumerate_scenes(world);
        scenes.sort_by_key(Scene::extract_config);
        let nodes: Vec<Configuration> = scenes.iter().map(Scene::extract_config).collect();
        let index: HashMap<Configuration, usize> =
            nodes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        debug_assert_eq!(index.len(), nodes.len(), "scene to configuration map is injective");
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut move_targets = vec![Vec::new(); nodes.len()];
        for (i, scene) in scenes.iter().enumerate() {
            move_targets[i] = legal_successors(scene)
                .iter()
                .map(|(_, s)| index[&s.extract_config()])
                .collect();
            let mut next: Vec<usize> = move_targets[i].iter().copied().filter(|&j| j != i).collect();
            next.sort_unstable();
            next.dedup();
            adjacency[i] = next;
        }
        let mut reverse = vec![Vec::new(); nodes.len()];
        for (i, out) in adjacency.iter().enumerate() {
            for &j in out {
                reverse[j].push(i);
            }
        }
        Ok(GoalGraph { world, nodes, index, adjacency, reverse, move_targets, scenes })
    }

    /// Process-wide cached full graph for a world size.
    pub fn shared(world: World) -> Arc<GoalGraph> {
        static CACHE: [OnceLock<Arc<GoalGraph>>; MAX_BLOCKS + 1] =
            [const { OnceLock::new() }; MAX_BLOCKS + 1];
        CACHE[world.n_blocks()]
            .get_or_init(|| Arc::new(GoalGraph::build_full(world.n_blocks()).expect("supported size")))
            .clone()
    }

    pub fn world(&self) -> World {
        self.world
    }

    pub fn nodes(&self) -> &[Configuration] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.index.contains_key(c)
    }

    pub fn node_index(&self, c: &Configuration) -> Result<usize> {
        self.index.get(c).copied().ok_or(Error::UnknownNode(*c))
    }

    pub fn node(&self, i: usize) -> Configuration {
        self.nodes[i]
    }

    /// The unique scene realizing a node.
    pub fn scene(&self, c: &Configuration) -> Result<&Scene> {
        Ok(&self.scenes[self.node_index(c)?])
    }

    /// Successor node of every legal move from node `i`, in move order. Distinct moves can
    /// lead to the same configuration.
    pub fn move_targets(&self, i: usize) -> &[usize] {
        &self.move_targets[i]
    }

    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn neighbors(&self, c: &Configuration) -> Result<Vec<Configuration>> {
        let i = self.node_index(c)?;
        Ok(self.adjacency[i].iter().map(|&j| self.nodes[j]).collect())
    }

    pub fn has_edge(&self, from: &Configuration, to: &Configuration) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&i), Some(&j)) => self.adjacency[i].binary_search(&j).is_ok(),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency
            .iter()
            .enumerate()
            .all(|(i, out)| out.iter().all(|&j| self.adjacency[j].binary_search(&i).is_ok()))
    }

    /// Breadth-first hop counts from `source` over nodes admitted by `allowed`.
    pub fn distances_from(&self, source: usize, allowed: impl Fn(usize) -> bool) -> Vec<Option<usize>> {
        self.bfs(source, &self.adjacency, allowed)
    }

    fn bfs(&self, source: usize, adj: &[Vec<usize>], allowed: impl Fn(usize) -> bool) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        if !allowed(source) {
            return dist;
        }
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued nodes have a distance");
            for &v in &adj[u] {
                if dist[v].is_none() && allowed(v) {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Minimal node sequence `from..=to` through admitted nodes. Among equally short paths the
    /// lexicographically smallest next configuration is taken at every step.
    pub fn shortest_path_within(
        &self,
        from: usize,
        to: usize,
        allowed: impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        if !allowed(from) {
            return None;
        }
        let to_target = self.bfs(to, &self.reverse, &allowed);
        let mut d = to_target[from]?;
        let mut path = vec![from];
        let mut cur = from;
        while d > 0 {
            let next = self.adjacency[cur]
                .iter()
                .copied()
                .find(|&v| to_target[v] == Some(d - 1))
                .expect("distance labels admit a descending step");
            path.push(next);
            cur = next;
            d -= 1;
        }
        Some(path)
    }

    /// Shortest path over the whole graph; `Ok(None)` when `to` is unreachable.
    pub fn shortest_path(&self, from: &Configuration, to: &Configuration) -> Result<Option<Vec<Configuration>>> {
        let (i, j) = (self.node_index(from)?, self.node_index(to)?);
        Ok(self
            .shortest_path_within(i, j, |_| true)
            .map(|p| p.into_iter().map(|k| self.nodes[k]).collect()))
    }

    /// Sub-goal sequence from `current` to `goal`: the shortest path without its first node.
    pub fn decompose(&self, current: &Configuration, goal: &Configuration) -> Result<Option<Vec<Configuration>>> {
        Ok(self.shortest_path(current, goal)?.map(|p| p[1..].to_vec()))
    }

    /// All (discovered, undiscovered neighbor) pairs, sorted.
    pub fn frontier_pairs(&self, discovered: &BTreeSet<Configuration>) -> Vec<FrontierPair> {
        let mut out = Vec::new();
        for f in discovered {
            let Some(&i) = self.index.get(f) else { continue };
            for &j in &self.adjacency[i] {
                let b = self.nodes[j];
                if !discovered.contains(&b) {
                    out.push(FrontierPair { frontier: *f, beyond: b });
                }
            }
        }
        out
    }

    pub fn export(&self) -> GraphExport {
        self.export_subgraph(|_| true)
    }

    /// Export restricted to a node subset (e.g. a learner's discovered goals).
    pub fn export_subset(&self, keep: &BTreeSet<Configuration>) -> GraphExport {
        self.export_subgraph(|c| keep.contains(c))
    }

    fn export_subgraph(&self, keep: impl Fn(&Configuration) -> bool) -> GraphExport {
        let kept: Vec<usize> = (0..self.nodes.len()).filter(|&i| keep(&self.nodes[i])).collect();
        let position: HashMap<usize, usize> = kept.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut edges = Vec::new();
        for (p, &i) in kept.iter().enumerate() {
            for &j in &self.adjacency[i] {
                if let Some(&q) = position.get(&j) {
                    if p < q {
                        edges.push([p, q]);
                    }
                }
            }
        }
        GraphExport { nodes: kept.iter().map(|&i| self.nodes[i]).collect(), edges }
    }
}
