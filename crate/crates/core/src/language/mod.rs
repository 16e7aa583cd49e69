//! Sentences, their grounding to configuration sets, and instruction following.

mod expr;
mod grounding;
mod instruct;
mod inventory;

pub use expr::{ground_expression, sample_expression, Expr};
pub use grounding::{ground_sentence, oracle_ground, GroundingSource, GroundingTable};
pub use instruct::{follow_instruction, select_goal, AttemptRecord, InstructionContext, InstructionOutcome};
pub use inventory::{build_inventory, Inventory, Sentence, Transformation, SENTENCES_N3_JSON, TEMPLATES_JSON};
