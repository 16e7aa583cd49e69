use std::collections::BTreeSet;

use super::config::Configuration;
use super::scene::{Scene, Structure};
use super::world::{BlockId, World};
use crate::error::Result;

fn permutations(items: &[BlockId]) -> Vec<Vec<BlockId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// All structures that can be built from exactly the blocks in `set`.
fn structures_over(set: &[BlockId]) -> Vec<Structure> {
    match set.len() {
        0 => Vec::new(),
        1 => vec![Structure::Single(set[0])],
        k => {
            let mut out: Vec<Structure> = permutations(set).into_iter().map(Structure::Stack).collect();
            if k == 3 {
                for i in 0..3 {
                    let base: Vec<BlockId> = (0..3).filter(|&j| j != i).map(|j| set[j]).collect();
                    out.push(Structure::pyramid(set[i], base[0], base[1]));
                }
            }
            out
        }
    }
}

fn structure_partitions(remaining: &[BlockId]) -> Vec<Vec<Structure>> {
    let Some((&first, rest)) = remaining.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    // choose which of `rest` join `first`'s structure
    for mask in 0u32..(1 << rest.len()) {
        let mut members = vec![first];
        let mut others = Vec::new();
        for (i, &b) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                members.push(b);
            } else {
                others.push(b);
            }
        }
        let heads = structures_over(&members);
        if heads.is_empty() {
            continue;
        }
        let tails = structure_partitions(&others);
        for head in &heads {
            for tail in &tails {
                let mut v = vec![head.clone()];
                v.extend(tail.iter().cloned());
                out.push(v);
            }
        }
    }
    out
}

fn set_partitions<T: Clone>(items: &[T]) -> Vec<Vec<Vec<T>>> {
    let Some((first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for part in set_partitions(rest) {
        for i in 0..part.len() {
            let mut p = part.clone();
            p[i].insert(0, first.clone());
            out.push(p);
        }
        let mut p = part;
        p.insert(0, vec![first.clone()]);
        out.push(p);
    }
    out
}

/// Every scene of the grammar: each partition of the blocks into singles, stacks and pyramids,
/// combined with each grouping of those structures into proximity clusters. Sorted, deduplicated.
pub fn enumerate_scenes(world: World) -> Vec<Scene> {
    let blocks: Vec<BlockId> = world.blocks().collect();
    let mut scenes = BTreeSet::new();
    for structures in structure_partitions(&blocks) {
        for clusters in set_partitions(&structures) {
            let scene = Scene::from_clusters(world, clusters).expect("grammar yields valid scenes");
            scenes.insert(scene);
        }
    }
    scenes.into_iter().collect()
}

/// Scenes made only of single blocks (every grouping into clusters).
pub fn enumerate_flat_scenes(world: World) -> Vec<Scene> {
    let singles: Vec<Structure> = world.blocks().map(Structure::Single).collect();
    let mut v: Vec<Scene> = set_partitions(&singles)
        .into_iter()
        .map(|c| Scene::from_clusters(world, c).expect("singles form valid scenes"))
        .collect();
    v.sort();
    v
}

/// The set of configurations realized by some scene, for 2..=5 blocks.
pub fn enumerate_valid_configs(n_blocks: usize) -> Result<BTreeSet<Configuration>> {
    let world = World::new(n_blocks)?;
    Ok(enumerate_scenes(world).iter().map(Scene::extract_config).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn two_blocks_have_four_configurations() {
        let set = enumerate_valid_configs(2).unwrap();
        let strings: Vec<String> = set.iter().map(|c| c.to_string()).collect();
        assert_eq!(strings, ["000", "100", "101", "110"]);
    }

    #[test]
    fn unsupported_sizes() {
        assert_eq!(enumerate_valid_configs(6), Err(Error::UnsupportedSize(6)));
        assert_eq!(enumerate_valid_configs(1), Err(Error::InvalidWorld(1)));
    }

    #[test]
    fn stack_and_pyramid_present() {
        let set = enumerate_valid_configs(3).unwrap();
        let w = World::new(3).unwrap();
        assert!(set.contains(&Configuration::parse(w, "111110100").unwrap()));
        assert!(set.contains(&Configuration::parse(w, "111110000").unwrap()));
    }

    #[test]
    fn flat_scenes_are_bell_numbered() {
        assert_eq!(enumerate_flat_scenes(World::new(3).unwrap()).len(), 5);
        assert_eq!(enumerate_flat_scenes(World::new(5).unwrap()).len(), 52);
    }
}
