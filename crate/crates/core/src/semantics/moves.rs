use serde::{Deserialize, Serialize};

use super::scene::{Scene, Structure};
use super::world::BlockId;
use crate::error::{Error, Result};

/// Where a lifted block is put down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// On the table, far from every other block.
    AloneFar,
    /// On the table next to the structures of a cluster (index into the pre-move scene).
    JoinCluster(usize),
    /// On top of a clear single block or stack top.
    OnTop(BlockId),
    /// Across two clear single blocks of one cluster, forming a pyramid.
    Bridge(BlockId, BlockId),
}

/// Moving exactly one clear block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub block: BlockId,
    pub placement: Placement,
}

impl Move {
    pub fn new(block: BlockId, placement: Placement) -> Self {
        Move { block, placement }
    }
}

fn illegal(msg: impl Into<String>) -> Error {
    Error::IllegalMove(msg.into())
}

/// Removes a clear block from its structure, leaving it in hand. Cluster indices are preserved
/// (the block's cluster may become empty).
fn lift(scene: &Scene, block: BlockId) -> Result<Vec<Vec<Structure>>> {
    let (ci, si) = scene
        .locate(block)
        .ok_or_else(|| illegal(format!("block {} is not in the scene", block.index())))?;
    let mut clusters = scene.clusters().to_vec();
    let s = clusters[ci].remove(si);
    if s.clear_block() != block {
        return Err(illegal(format!("block {block} is not clear")));
    }
    match s {
        Structure::Single(_) => {}
        Structure::Stack(mut v) => {
            v.pop();
            clusters[ci].push(if v.len() == 1 { Structure::Single(v[0]) } else { Structure::Stack(v) });
        }
        Structure::Pyramid { base, .. } => {
            clusters[ci].push(Structure::Single(base[0]));
            clusters[ci].push(Structure::Single(base[1]));
        }
    }
    Ok(clusters)
}

fn find(clusters: &[Vec<Structure>], block: BlockId) -> Option<(usize, usize)> {
    clusters.iter().enumerate().find_map(|(ci, c)| {
        c.iter().position(|s| s.contains(block)).map(|si| (ci, si))
    })
}

/// Applies a move, returning the resulting scene.
///
/// Target clearness is judged with the moved block already lifted. Placements that reproduce
/// the same scene are rejected as no-ops.
pub fn apply_move(scene: &Scene, mv: &Move) -> Result<Scene> {
    let block = mv.block;
    if !scene.world().contains(block) {
        return Err(illegal(format!("block {} is out of range", block.index())));
    }
    let mut clusters = lift(scene, block)?;
    match mv.placement {
        Placement::AloneFar => clusters.push(vec![Structure::Single(block)]),
        Placement::JoinCluster(ci) => {
            let c = clusters
                .get_mut(ci)
                .ok_or_else(|| illegal(format!("cluster {ci} does not exist")))?;
            c.push(Structure::Single(block));
        }
        Placement::OnTop(target) => {
            if target == block {
                return Err(illegal("a block cannot be put on itself"));
            }
            let (ci, si) = find(&clusters, target)
                .ok_or_else(|| illegal(format!("target {} is not in the scene", target.index())))?;
            let s = &mut clusters[ci][si];
            if s.clear_block() != target {
                return Err(illegal(format!("target {target} is not clear")));
            }
            match s {
                Structure::Single(t) => *s = Structure::Stack(vec![*t, block]),
                Structure::Stack(v) => v.push(block),
                Structure::Pyramid { .. } => {
                    return Err(illegal(format!("cannot stack on pyramid top {target}")))
                }
            }
        }
        Placement::Bridge(x, y) => {
            if x == y {
                return Err(illegal("bridge targets must be distinct"));
            }
            if x == block || y == block {
                return Err(illegal("a block cannot bridge itself"));
            }
            let (cx, sx) = find(&clusters, x)
                .ok_or_else(|| illegal(format!("target {} is not in the scene", x.index())))?;
            let (cy, sy) = find(&clusters, y)
                .ok_or_else(|| illegal(format!("target {} is not in the scene", y.index())))?;
            for (t, c, s) in [(x, cx, sx), (y, cy, sy)] {
                match &clusters[c][s] {
                    Structure::Single(_) => {}
                    st if st.clear_block() == t => {
                        return Err(illegal(format!("bridge target {t} must be a lone block")))
                    }
                    _ => return Err(illegal(format!("bridge target {t} is not clear"))),
                }
            }
            if cx != cy {
                return Err(illegal(format!("bridge targets {x} and {y} are not in the same cluster")));
            }
            let (hi, lo) = if sx > sy { (sx, sy) } else { (sy, sx) };
            clusters[cx].remove(hi);
            clusters[cx].remove(lo);
            clusters[cx].push(Structure::pyramid(block, x, y));
        }
    }
    let next = Scene::from_clusters(scene.world(), clusters.into_iter().filter(|c| !c.is_empty()).collect())?;
    if next == *scene {
        return Err(illegal("placement reproduces the same scene"));
    }
    Ok(next)
}

/// Every single-block move that yields a different well-formed scene.
pub fn legal_moves(scene: &Scene) -> Vec<Move> {
    legal_successors(scene).into_iter().map(|(m, _)| m).collect()
}

/// Legal moves paired with the scenes they produce.
pub fn legal_successors(scene: &Scene) -> Vec<(Move, Scene)> {
    let world = scene.world();
    let n_clusters = scene.clusters().len();
    let mut out = Vec::new();
    for block in scene.clear_blocks() {
        let mut candidates = vec![Placement::AloneFar];
        candidates.extend((0..n_clusters).map(Placement::JoinCluster));
        candidates.extend(world.blocks().filter(|&t| t != block).map(Placement::OnTop));
        for x in world.blocks() {
            for y in world.blocks().filter(|&y| y > x) {
                if x != block && y != block {
                    candidates.push(Placement::Bridge(x, y));
                }
            }
        }
        for placement in candidates {
            let mv = Move::new(block, placement);
            if let Ok(next) = apply_move(scene, &mv) {
                out.push((mv, next));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::World;

    const R: BlockId = BlockId(0);
    const G: BlockId = BlockId(1);
    const B: BlockId = BlockId(2);

    fn w3() -> World {
        World::new(3).unwrap()
    }

    #[test]
    fn scattered_singles_have_twelve_moves() {
        let moves = legal_moves(&Scene::scattered(w3()));
        assert_eq!(moves.len(), 12);
        assert!(moves.iter().all(|m| m.placement != Placement::AloneFar));
        assert!(moves.iter().all(|m| !matches!(m.placement, Placement::Bridge(..))));
    }

    #[test]
    fn only_tops_are_clear() {
        let tower = Scene::from_clusters(w3(), vec![vec![Structure::Stack(vec![B, G, R])]]).unwrap();
        assert!(legal_moves(&tower).iter().all(|m| m.block == R));
        let pyr = Scene::from_clusters(w3(), vec![vec![Structure::pyramid(R, G, B)]]).unwrap();
        assert!(legal_moves(&pyr).iter().all(|m| m.block == R));
    }

    #[test]
    fn unstack_to_far() {
        let s = Scene::from_clusters(
            w3(),
            vec![vec![Structure::Stack(vec![G, R])], vec![Structure::Single(B)]],
        )
        .unwrap();
        let next = apply_move(&s, &Move::new(R, Placement::AloneFar)).unwrap();
        assert_eq!(next, Scene::scattered(w3()));
    }

    #[test]
    fn bridge_builds_pyramid() {
        let s = Scene::from_clusters(
            w3(),
            vec![vec![Structure::Single(R), Structure::Single(G)], vec![Structure::Single(B)]],
        )
        .unwrap();
        let next = apply_move(&s, &Move::new(B, Placement::Bridge(R, G))).unwrap();
        assert_eq!(next.extract_config().to_string(), "111000011");
    }

    #[test]
    fn bottom_of_stack_cannot_move() {
        let tower = Scene::from_clusters(w3(), vec![vec![Structure::Stack(vec![B, G, R])]]).unwrap();
        let err = apply_move(&tower, &Move::new(B, Placement::AloneFar)).unwrap_err();
        assert!(matches!(err, Error::IllegalMove(m) if m.contains("not clear")));
    }

    #[test]
    fn bridge_across_clusters_is_rejected() {
        let err = apply_move(&Scene::scattered(w3()), &Move::new(B, Placement::Bridge(R, G))).unwrap_err();
        assert!(matches!(err, Error::IllegalMove(m) if m.contains("same cluster")));
    }
}
