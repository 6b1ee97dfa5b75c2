//! Knowledge states, their updates and tree renderings.

pub mod ktree;
pub mod state;
pub mod tree;
pub mod update;

pub use ktree::{ktree_update_g, ktree_update_h, KTree};
pub use state::{JointKnowledge, KnowledgeState};
pub use tree::{from_knowledge_tree, joint_tree_text, to_knowledge_tree, KnowledgeTree};
pub use update::{delta, delta_general, delta_labelled, Updater};
