//! Multi-agent knowledge-based subset construction for games with imperfect
//! information against Nature, with strategy synthesis on the expansions.

pub mod error;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod knowledge;
pub mod mkbsc;
pub mod random;
pub mod strategy;
pub mod synth;

pub use error::{Error, ParseError, Result};
pub use game::{
    add_dummy_agent, observation_of, play_satisfies, successors, validate_game, ActionId, AgentId,
    BlockId, Game, GameBuilder, JointAction, Lasso, LocId, LocSet, Objective, ObjectiveKind,
    Partition, Transition, ValidationReport, Violation,
};
pub use knowledge::{JointKnowledge, KTree, KnowledgeState, KnowledgeTree};
pub use mkbsc::{
    check_pdk, compose_and_prune, kbsc, mkbsc_expand, project, translate_objective, Case,
    ExpandedGame, PerfectInfoGame, SingleAgentGame,
};
pub use strategy::{MemorylessStrategy, Profile, ProfileVerdict, Transducer};
pub use synth::{global_loop, Algorithm, SynthConfig, SynthOutcome};
