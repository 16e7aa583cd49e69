//! Blocks, predicates, configurations, scenes and single-block moves.

mod config;
mod enumerate;
mod moves;
mod scene;
mod world;

pub use config::Configuration;
pub use enumerate::{enumerate_flat_scenes, enumerate_scenes, enumerate_valid_configs};
pub use moves::{apply_move, legal_moves, legal_successors, Move, Placement};
pub use scene::{is_valid, Scene, SceneWire, Structure};
pub use world::{predicate_count, BlockId, Predicate, World, COLORS, MAX_BLOCKS, MIN_BLOCKS};

/// Extracts the predicate vector of a scene.
pub fn extract_config(scene: &Scene) -> Configuration {
    scene.extract_config()
}
