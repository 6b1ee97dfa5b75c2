//! Strategy synthesis on expansions and the iterate-until-found loop.

pub mod enumerate;
pub mod heuristic;
pub mod iso;

use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::game::{Game, Objective, ObjectiveKind};
use crate::mkbsc::{expand_parent, translate_objective, Case, ExpandedGame, Limits, Parent};
use crate::strategy::{induced_profile, restrict_to_plays, Profile, Transducer};

pub use enumerate::{enumerate_profiles, Choice};
pub use heuristic::heuristic_synth;
pub use iso::{game_isomorphic, is_isomorphism, IsoResult};

/// Counts search nodes against optional node and time limits.
#[derive(Clone, Debug)]
pub struct Meter {
    nodes: u64,
    max_nodes: Option<u64>,
    deadline: Option<Instant>,
}

impl Meter {
    pub fn new(max_nodes: Option<u64>, max_time: Option<Duration>) -> Self {
        Meter { nodes: 0, max_nodes, deadline: max_time.map(|d| Instant::now() + d) }
    }

    pub fn unlimited() -> Self {
        Meter::new(None, None)
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.max_nodes.is_some_and(|m| self.nodes > m) {
            return Err(Error::BudgetExceeded(format!("search visited more than {} nodes", self.max_nodes.unwrap())));
        }
        if self.nodes.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(Error::BudgetExceeded("time limit reached".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Exhaustive,
    Heuristic,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "heuristic" => Ok(Algorithm::Heuristic),
            _ => Err(format!("unknown algorithm {s} (expected exhaustive or heuristic)")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
    /// Largest expansion (in locations) that may be built.
    pub max_states: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub algorithm: Algorithm,
    pub max_iterations: usize,
    pub case: Case,
    pub budget: Budget,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { algorithm: Algorithm::Exhaustive, max_iterations: 5, case: Case::NN, budget: Budget::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Found {
    pub level: usize,
    pub expansion: Arc<ExpandedGame>,
    /// The objective translated to `expansion`.
    pub objective: Objective,
    pub choice: Choice,
    pub profile: Profile,
    /// Induced transducers restricted to the plays of the profile.
    pub transducers: Vec<Transducer>,
}

#[derive(Clone, Debug)]
pub enum SynthOutcome {
    Found(Box<Found>),
    /// No profile at `level`, and the next expansion is isomorphic.
    Stable(usize),
    BoundReached(usize),
}

/// Synthesises on one expansion. `parent_obj` is the objective on the
/// game `eg` was expanded from.
pub fn synthesize_at(
    eg: &ExpandedGame,
    obj: &Objective,
    parent_obj: &Objective,
    algorithm: Algorithm,
    meter: &mut Meter,
) -> Result<Option<Choice>> {
    match (algorithm, obj.kind) {
        (Algorithm::Heuristic, ObjectiveKind::Reach) => heuristic_synth(eg, obj, parent_obj, meter),
        _ => enumerate_profiles(eg.game(), obj, meter),
    }
}

fn limits(b: &Budget) -> Limits {
    Limits { max_states: b.max_states }
}

/// Expands, translates and synthesises level by level until a profile is
/// found, the expansions stabilise, or `max_iterations` is reached.
pub fn global_loop(g: &Game, obj: &Objective, cfg: &SynthConfig) -> Result<SynthOutcome> {
    if cfg.max_iterations == 0 {
        return Err(Error::Unsupported("at least one iteration is required".into()));
    }
    obj.check(g)?;
    let base = Arc::new(g.clone());
    let mut meter = Meter::new(cfg.budget.max_nodes, cfg.budget.max_time);
    let mut eg = Arc::new(expand_parent(Parent::Base(base.clone()), cfg.case, limits(&cfg.budget))?);
    let mut parent_obj = obj.clone();
    let mut cur = translate_objective(obj, &eg)?;
    for j in 1..=cfg.max_iterations {
        if let Some(choice) = synthesize_at(&eg, &cur, &parent_obj, cfg.algorithm, &mut meter)? {
            let profile = Profile::from_blocks(&eg, &choice);
            let ts = induced_profile(&eg, &profile)?;
            let transducers = restrict_to_plays(&base, obj, &ts);
            return Ok(SynthOutcome::Found(Box::new(Found {
                level: j,
                expansion: eg,
                objective: cur,
                choice,
                profile,
                transducers,
            })));
        }
        let next = Arc::new(expand_parent(Parent::Expanded(eg.clone()), cfg.case, limits(&cfg.budget))?);
        let next_obj = translate_objective(&cur, &next)?;
        if game_isomorphic(eg.game(), Some(&cur), next.game(), Some(&next_obj)).isomorphic {
            return Ok(SynthOutcome::Stable(j));
        }
        parent_obj = cur;
        cur = next_obj;
        eg = next;
    }
    Ok(SynthOutcome::BoundReached(cfg.max_iterations))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizationInfo {
    /// Smallest `j` with `G^{jK}` isomorphic to `G^{(j+1)K}`; level 0 is the base game.
    pub stable_at: Option<usize>,
    /// Location counts per level, starting with the base game.
    pub sizes: Vec<usize>,
}

/// Looks for stabilisation among levels `0..=max`.
pub fn stabilization(g: &Game, obj: Option<&Objective>, case: Case, max: usize, budget: &Budget) -> Result<StabilizationInfo> {
    let base = Arc::new(g.clone());
    let mut sizes = vec![g.num_locations()];
    let mut prev: Option<Arc<ExpandedGame>> = None;
    let mut prev_obj = obj.cloned();
    for j in 0..=max {
        let parent = match &prev {
            None => Parent::Base(base.clone()),
            Some(p) => Parent::Expanded(p.clone()),
        };
        let eg = Arc::new(expand_parent(parent, case, limits(budget))?);
        let o = prev_obj.as_ref().map(|o| translate_objective(o, &eg)).transpose()?;
        let prev_game: &Game = prev.as_ref().map_or(&base, |p| p.game());
        if game_isomorphic(prev_game, prev_obj.as_ref(), eg.game(), o.as_ref()).isomorphic {
            return Ok(StabilizationInfo { stable_at: Some(j), sizes });
        }
        sizes.push(eg.game().num_locations());
        prev = Some(eg);
        prev_obj = o;
    }
    Ok(StabilizationInfo { stable_at: None, sizes })
}
