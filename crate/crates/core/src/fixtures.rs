//! Games shipped with the crate, parsed from the files under `fixtures/`.

use crate::game::{Game, Objective};
use crate::io::dsl::{parse_game, parse_objective};

pub const CUP_GAME: &str = include_str!("../fixtures/cup.game");
pub const CUP_GOOD_OBJ: &str = include_str!("../fixtures/cup_good.obj");
pub const CUP_WIN_OBJ: &str = include_str!("../fixtures/cup_win.obj");
pub const CUP_FIRST_ORDER_PROFILE: &str = include_str!("../fixtures/cup_first_order.profile");
pub const CUP_SECOND_ORDER_PROFILE: &str = include_str!("../fixtures/cup_second_order.profile");
pub const TURN_GAME: &str = include_str!("../fixtures/turn.game");
pub const TURN_WIN_OBJ: &str = include_str!("../fixtures/turn_win.obj");
pub const SPURIOUS_GAME: &str = include_str!("../fixtures/spurious.game");
pub const SPURIOUS_GOAL_OBJ: &str = include_str!("../fixtures/spurious_goal.obj");
pub const ORIENTATION_GAME: &str = include_str!("../fixtures/orientation.game");
pub const ORIENTATION_WIN_OBJ: &str = include_str!("../fixtures/orientation_win.obj");
pub const ORIENTATION_TRANSDUCERS: &str = include_str!("../fixtures/orientation.transducers");

fn game(src: &str) -> Game {
    parse_game(src).expect("shipped fixture parses")
}

fn objective(src: &str, g: &Game) -> Objective {
    parse_objective(src, g).expect("shipped objective parses")
}

/// Two robots lifting a cup; only `r0` can feel the grip.
pub fn cup() -> Game {
    game(CUP_GAME)
}

pub fn cup_reach_good(g: &Game) -> Objective {
    objective(CUP_GOOD_OBJ, g)
}

pub fn cup_reach_win(g: &Game) -> Objective {
    objective(CUP_WIN_OBJ, g)
}

/// Turn-based game where the second agent has to guess the first one's move.
pub fn turn() -> Game {
    game(TURN_GAME)
}

pub fn turn_reach_win(g: &Game) -> Objective {
    objective(TURN_WIN_OBJ, g)
}

/// A game whose expansion lacks perfect distributed knowledge.
pub fn spurious() -> Game {
    game(SPURIOUS_GAME)
}

pub fn spurious_reach_goal(g: &Game) -> Objective {
    objective(SPURIOUS_GOAL_OBJ, g)
}

/// The cup has to be oriented before lifting; memoryless play cannot win.
pub fn orientation() -> Game {
    game(ORIENTATION_GAME)
}

pub fn orientation_reach_win(g: &Game) -> Objective {
    objective(ORIENTATION_WIN_OBJ, g)
}
