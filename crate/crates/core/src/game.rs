//! The game arena: a team of agents playing against Nature on a finite graph
//! whose edges carry joint actions, with one observation partition per agent.
//!
//! Locations, actions and agents are interned to dense indices. Declaration
//! order fixes the total order that every canonical form downstream relies on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Error;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(
    /// Dense 0-based agent index.
    AgentId
);
id_type!(
    /// Dense 0-based location index.
    LocId
);
id_type!(
    /// Index into one agent's action list.
    ActionId
);
id_type!(
    /// Index of a block within one agent's observation partition.
    BlockId
);

/// A sorted, duplicate-free set of locations.
pub type LocSet = Vec<LocId>;

/// One action per agent, in agent order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointAction(pub Vec<ActionId>);

impl JointAction {
    #[inline]
    pub fn get(&self, agent: AgentId) -> ActionId {
        self.0[agent.0]
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: LocId,
    pub action: JointAction,
    pub to: LocId,
}

/// An agent's observation partition of the location set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<LocSet>,
    block_of: Vec<Option<BlockId>>,
}

impl Partition {
    /// Builds the block lookup. Overlaps and gaps are kept as-is so that
    /// [`validate_game`] can report them; the first block wins on overlap.
    pub fn new(blocks: Vec<LocSet>, num_locations: usize) -> Self {
        let mut block_of = vec![None; num_locations];
        let blocks: Vec<LocSet> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort();
                b.dedup();
                b
            })
            .collect();
        for (i, block) in blocks.iter().enumerate() {
            for l in block {
                if let Some(slot) = block_of.get_mut(l.0) {
                    if slot.is_none() {
                        *slot = Some(BlockId(i));
                    }
                }
            }
        }
        Partition { blocks, block_of }
    }

    /// Every location in its own block.
    pub fn discrete(num_locations: usize) -> Self {
        Partition::new(
            (0..num_locations).map(|l| vec![LocId(l)]).collect(),
            num_locations,
        )
    }

    pub fn blocks(&self) -> &[LocSet] {
        &self.blocks
    }

    pub fn block(&self, b: BlockId) -> &[LocId] {
        &self.blocks[b.0]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, l: LocId) -> Option<BlockId> {
        self.block_of.get(l.0).copied().flatten()
    }

    /// Finds the block equal to `set`, if any.
    pub fn find_block(&self, set: &[LocId]) -> Option<BlockId> {
        let first = *set.first()?;
        let b = self.block_of(first)?;
        (self.blocks[b.0] == set).then_some(b)
    }
}

/// A multi-agent game with imperfect information against Nature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    agents: Vec<String>,
    locations: Vec<String>,
    initial: LocId,
    actions: Vec<Vec<String>>,
    transitions: Vec<Transition>,
    observations: Vec<Partition>,
    out: Vec<Vec<(JointAction, LocId)>>,
}

impl Game {
    /// Assembles a game without checking its invariants. Use
    /// [`validate_game`] or [`Game::new`] when the input is untrusted.
    pub fn from_parts(
        agents: Vec<String>,
        locations: Vec<String>,
        initial: LocId,
        actions: Vec<Vec<String>>,
        observations: Vec<Vec<LocSet>>,
        transitions: Vec<Transition>,
    ) -> Game {
        let n = locations.len();
        let observations = observations
            .into_iter()
            .map(|blocks| Partition::new(blocks, n))
            .collect();
        let mut transitions = transitions;
        transitions.sort();
        transitions.dedup();
        let mut out = vec![Vec::new(); n];
        for t in &transitions {
            if t.from.0 < n && t.to.0 < n {
                out[t.from.0].push((t.action.clone(), t.to));
            }
        }
        Game {
            agents,
            locations,
            initial,
            actions,
            transitions,
            observations,
            out,
        }
    }

    /// Assembles a game and rejects it if any invariant is violated.
    pub fn new(
        agents: Vec<String>,
        locations: Vec<String>,
        initial: LocId,
        actions: Vec<Vec<String>>,
        observations: Vec<Vec<LocSet>>,
        transitions: Vec<Transition>,
    ) -> Result<Game, Error> {
        let g = Game::from_parts(agents, locations, initial, actions, observations, transitions);
        let report = validate_game(&g);
        if report.is_empty() {
            Ok(g)
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn locations(&self) -> impl Iterator<Item = LocId> + '_ {
        (0..self.locations.len()).map(LocId)
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agents[a.0]
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn location_name(&self, l: LocId) -> &str {
        &self.locations[l.0]
    }

    pub fn location_names(&self) -> &[String] {
        &self.locations
    }

    pub fn initial(&self) -> LocId {
        self.initial
    }

    pub fn actions(&self, a: AgentId) -> &[String] {
        &self.actions[a.0]
    }

    pub fn action_name(&self, a: AgentId, act: ActionId) -> &str {
        &self.actions[a.0][act.0]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn observations(&self, a: AgentId) -> &Partition {
        &self.observations[a.0]
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|n| n == name).map(AgentId)
    }

    pub fn location_by_name(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|n| n == name).map(LocId)
    }

    pub fn action_by_name(&self, a: AgentId, name: &str) -> Option<ActionId> {
        self.actions.get(a.0)?.iter().position(|n| n == name).map(ActionId)
    }

    /// Outgoing edges of `l`, sorted by joint action then target.
    pub fn out_edges(&self, l: LocId) -> &[(JointAction, LocId)] {
        &self.out[l.0]
    }

    pub fn block_of(&self, a: AgentId, l: LocId) -> Option<BlockId> {
        self.observations.get(a.0)?.block_of(l)
    }

    /// The unique block of `a`'s partition containing `l`.
    pub fn observation_of(&self, a: AgentId, l: LocId) -> Result<&[LocId], Error> {
        if a.0 >= self.agents.len() {
            return Err(Error::UnknownAgent(a.0.to_string()));
        }
        if l.0 >= self.locations.len() {
            return Err(Error::UnknownLocation(l.0.to_string()));
        }
        let b = self.observations[a.0]
            .block_of(l)
            .ok_or_else(|| Error::UnknownLocation(self.locations[l.0].clone()))?;
        Ok(self.observations[a.0].block(b))
    }

    /// `{ l' | (l, σ, l') ∈ Δ }`. Empty when σ is not available at `l`.
    pub fn successors(&self, l: LocId, action: &JointAction) -> LocSet {
        self.out[l.0]
            .iter()
            .filter(|(a, _)| a == action)
            .map(|&(_, to)| to)
            .collect()
    }

    pub fn has_transition(&self, from: LocId, action: &JointAction, to: LocId) -> bool {
        self.out[from.0].iter().any(|(a, t)| a == action && *t == to)
    }

    /// Every joint action in the full product of the agents' action sets, in
    /// lexicographic order.
    pub fn joint_actions(&self) -> Vec<JointAction> {
        let mut all = vec![Vec::new()];
        for acts in &self.actions {
            let mut next = Vec::with_capacity(all.len() * acts.len());
            for prefix in &all {
                for i in 0..acts.len() {
                    let mut v: Vec<ActionId> = prefix.clone();
                    v.push(ActionId(i));
                    next.push(v);
                }
            }
            all = next;
        }
        all.into_iter().map(JointAction).collect()
    }

    pub fn format_joint_action(&self, ja: &JointAction) -> String {
        let names: Vec<&str> = ja
            .0
            .iter()
            .enumerate()
            .map(|(i, &act)| self.action_name(AgentId(i), act))
            .collect();
        format!("({})", names.join(","))
    }

    pub fn format_set(&self, set: &[LocId]) -> String {
        let names: Vec<&str> = set.iter().map(|&l| self.location_name(l)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Locations reachable from the initial location.
    pub fn reachable(&self) -> BTreeSet<LocId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.initial];
        while let Some(l) = stack.pop() {
            if l.0 >= self.num_locations() || !seen.insert(l) {
                continue;
            }
            stack.extend(self.out[l.0].iter().map(|&(_, t)| t));
        }
        seen
    }

    /// True when no two distinct locations are indistinguishable for every agent.
    pub fn locations_distinguishable(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.locations().all(|l| {
            let sig: Vec<Option<BlockId>> = self.agents().map(|a| self.block_of(a, l)).collect();
            seen.insert(sig)
        })
    }
}

/// A single invariant violation found by [`validate_game`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    NoLocations,
    InitialUndeclared,
    MissingObservations { agent: String },
    NoActions { agent: String },
    EmptyBlock { agent: String, block: usize },
    BlockUndeclaredLocation { agent: String, block: usize },
    PartitionOverlap { agent: String, location: String },
    PartitionNotCovering { agent: String, location: String },
    TransitionLocationUndeclared { transition: usize },
    ArityMismatch { transition: usize, expected: usize, found: usize },
    ActionUndeclared { transition: usize, agent: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "no agents declared"),
            Violation::NoLocations => write!(f, "no locations declared"),
            Violation::InitialUndeclared => write!(f, "initial location is not declared"),
            Violation::MissingObservations { agent } => {
                write!(f, "agent {agent} has no observation partition")
            }
            Violation::NoActions { agent } => write!(f, "agent {agent} has no actions"),
            Violation::EmptyBlock { agent, block } => {
                write!(f, "agent {agent}: observation block #{block} is empty")
            }
            Violation::BlockUndeclaredLocation { agent, block } => {
                write!(f, "agent {agent}: observation block #{block} names an undeclared location")
            }
            Violation::PartitionOverlap { agent, location } => write!(
                f,
                "agent {agent}: location {location} appears in more than one observation block"
            ),
            Violation::PartitionNotCovering { agent, location } => write!(
                f,
                "agent {agent}: partition does not cover Loc (location {location} is in no block)"
            ),
            Violation::TransitionLocationUndeclared { transition } => {
                write!(f, "transition #{transition} references an undeclared location")
            }
            Violation::ArityMismatch { transition, expected, found } => write!(
                f,
                "transition #{transition}: joint action has {found} components, expected {expected}"
            ),
            Violation::ActionUndeclared { transition, agent } => {
                write!(f, "transition #{transition}: action of agent {agent} is not declared")
            }
        }
    }
}

/// The list of violations; empty iff the game is well formed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_game(g: &Game) -> ValidationReport {
    let mut violations = Vec::new();
    let n = g.num_locations();
    if g.agents.is_empty() {
        violations.push(Violation::NoAgents);
    }
    if n == 0 {
        violations.push(Violation::NoLocations);
    }
    if g.initial.0 >= n {
        violations.push(Violation::InitialUndeclared);
    }
    for (ai, name) in g.agents.iter().enumerate() {
        if g.actions.get(ai).is_none_or(|a| a.is_empty()) {
            violations.push(Violation::NoActions { agent: name.clone() });
        }
        let Some(part) = g.observations.get(ai) else {
            violations.push(Violation::MissingObservations { agent: name.clone() });
            continue;
        };
        let mut count = vec![0usize; n];
        for (bi, block) in part.blocks.iter().enumerate() {
            if block.is_empty() {
                violations.push(Violation::EmptyBlock { agent: name.clone(), block: bi });
            }
            if block.iter().any(|l| l.0 >= n) {
                violations.push(Violation::BlockUndeclaredLocation {
                    agent: name.clone(),
                    block: bi,
                });
            }
            for l in block.iter().filter(|l| l.0 < n) {
                count[l.0] += 1;
            }
        }
        for (l, &c) in count.iter().enumerate() {
            if c > 1 {
                violations.push(Violation::PartitionOverlap {
                    agent: name.clone(),
                    location: g.locations[l].clone(),
                });
            } else if c == 0 {
                violations.push(Violation::PartitionNotCovering {
                    agent: name.clone(),
                    location: g.locations[l].clone(),
                });
            }
        }
    }
    for (ti, t) in g.transitions.iter().enumerate() {
        if t.from.0 >= n || t.to.0 >= n {
            violations.push(Violation::TransitionLocationUndeclared { transition: ti });
        }
        if t.action.arity() != g.agents.len() {
            violations.push(Violation::ArityMismatch {
                transition: ti,
                expected: g.agents.len(),
                found: t.action.arity(),
            });
            continue;
        }
        for (ai, act) in t.action.0.iter().enumerate() {
            if g.actions.get(ai).is_none_or(|a| act.0 >= a.len()) {
                violations.push(Violation::ActionUndeclared {
                    transition: ti,
                    agent: g.agents[ai].clone(),
                });
            }
        }
    }
    ValidationReport { violations }
}

/// Convenience wrapper over [`Game::observation_of`].
pub fn observation_of(g: &Game, a: AgentId, l: LocId) -> Result<&[LocId], Error> {
    g.observation_of(a, l)
}

/// Convenience wrapper over [`Game::successors`].
pub fn successors(g: &Game, l: LocId, action: &JointAction) -> LocSet {
    g.successors(l, action)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectiveKind {
    Reach,
    Safe,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveKind::Reach => write!(f, "reach"),
            ObjectiveKind::Safe => write!(f, "safe"),
        }
    }
}

/// An objective observable for the team: a set of (agent, observation block)
/// targets. A location counts as a target when at least one agent observes
/// one of its target blocks there.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub targets: BTreeSet<(AgentId, BlockId)>,
}

impl Objective {
    pub fn new(
        kind: ObjectiveKind,
        targets: impl IntoIterator<Item = (AgentId, BlockId)>,
        g: &Game,
    ) -> Result<Objective, Error> {
        let obj = Objective { kind, targets: targets.into_iter().collect() };
        obj.check(g)?;
        Ok(obj)
    }

    /// Builds an objective from (agent, block-as-location-set) pairs.
    pub fn from_sets(
        kind: ObjectiveKind,
        targets: &[(AgentId, LocSet)],
        g: &Game,
    ) -> Result<Objective, Error> {
        let mut resolved = BTreeSet::new();
        for (a, set) in targets {
            if a.0 >= g.num_agents() {
                return Err(Error::UnknownAgent(a.0.to_string()));
            }
            let mut set = set.clone();
            set.sort();
            set.dedup();
            let b = g.observations(*a).find_block(&set).ok_or_else(|| {
                Error::NotObservable(format!(
                    "{} is not an observation of agent {}",
                    g.format_set(&set),
                    g.agent_name(*a)
                ))
            })?;
            resolved.insert((*a, b));
        }
        Objective::new(kind, resolved, g)
    }

    /// Every block of every agent; for Safe this is the trivial objective.
    pub fn all_blocks(kind: ObjectiveKind, g: &Game) -> Objective {
        let targets = g
            .agents()
            .flat_map(|a| (0..g.observations(a).len()).map(move |b| (a, BlockId(b))))
            .collect();
        Objective { kind, targets }
    }

    pub fn check(&self, g: &Game) -> Result<(), Error> {
        for &(a, b) in &self.targets {
            if a.0 >= g.num_agents() {
                return Err(Error::UnknownAgent(a.0.to_string()));
            }
            if b.0 >= g.observations(a).len() {
                return Err(Error::NotObservable(format!(
                    "block #{} is not an observation of agent {}",
                    b.0,
                    g.agent_name(a)
                )));
            }
        }
        Ok(())
    }

    /// Whether some agent observes a target block at `l`.
    pub fn covers(&self, g: &Game, l: LocId) -> bool {
        g.agents()
            .any(|a| g.block_of(a, l).is_some_and(|b| self.targets.contains(&(a, b))))
    }

    /// Per-location coverage bitmap.
    pub fn coverage(&self, g: &Game) -> Vec<bool> {
        g.locations().map(|l| self.covers(g, l)).collect()
    }

    /// The agents whose targets cover `l`; a finer per-location signature
    /// than [`Objective::covers`].
    pub fn covering_agents(&self, g: &Game, l: LocId) -> Vec<AgentId> {
        g.agents()
            .filter(|&a| g.block_of(a, l).is_some_and(|b| self.targets.contains(&(a, b))))
            .collect()
    }
}

/// A finite representation of an infinite play: `locations[0..]` followed by
/// the cycle `locations[cycle_start..]` repeated forever. `actions[i]` labels
/// the step out of `locations[i]`; the last action closes the cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub locations: Vec<LocId>,
    pub actions: Vec<JointAction>,
    pub cycle_start: usize,
}

impl Lasso {
    pub fn check(&self, g: &Game) -> Result<(), Error> {
        let bad = |why: &str| Err(Error::InvalidPlay(why.to_string()));
        if self.locations.is_empty() {
            return bad("empty play");
        }
        if self.locations[0] != g.initial() {
            return bad("play does not start at the initial location");
        }
        if self.cycle_start >= self.locations.len() {
            return bad("cycle start out of range");
        }
        if self.actions.len() != self.locations.len() {
            return bad("one joint action per position is required");
        }
        if self.locations.iter().any(|l| l.0 >= g.num_locations()) {
            return bad("undeclared location");
        }
        for i in 0..self.locations.len() {
            let from = self.locations[i];
            let to = if i + 1 < self.locations.len() {
                self.locations[i + 1]
            } else {
                self.locations[self.cycle_start]
            };
            if !g.has_transition(from, &self.actions[i], to) {
                return Err(Error::InvalidPlay(format!(
                    "no transition {} {} -> {}",
                    g.location_name(from),
                    g.format_joint_action(&self.actions[i]),
                    g.location_name(to)
                )));
            }
        }
        Ok(())
    }
}

pub fn play_satisfies(obj: &Objective, lasso: &Lasso, g: &Game) -> Result<bool, Error> {
    lasso.check(g)?;
    obj.check(g)?;
    let mut covered = lasso.locations.iter().map(|&l| obj.covers(g, l));
    Ok(match obj.kind {
        ObjectiveKind::Reach => covered.any(|c| c),
        ObjectiveKind::Safe => covered.all(|c| c),
    })
}

/// Adds an agent with singleton observations and a single idling action
/// appended to every joint action.
pub fn add_dummy_agent(g: &Game) -> Game {
    let mut name = "dummy".to_string();
    while g.agent_by_name(&name).is_some() {
        name.push('_');
    }
    let mut agents = g.agents.clone();
    agents.push(name);
    let mut actions = g.actions.clone();
    actions.push(vec!["idle".to_string()]);
    let mut observations: Vec<Vec<LocSet>> =
        g.observations.iter().map(|p| p.blocks.clone()).collect();
    observations.push(g.locations().map(|l| vec![l]).collect());
    let transitions = g
        .transitions
        .iter()
        .map(|t| {
            let mut ja = t.action.0.clone();
            ja.push(ActionId(0));
            Transition { from: t.from, action: JointAction(ja), to: t.to }
        })
        .collect();
    Game::from_parts(agents, g.locations.clone(), g.initial, actions, observations, transitions)
}

/// Name-based builder, mostly for fixtures and tests.
#[derive(Clone, Debug, Default)]
pub struct GameBuilder {
    agents: Vec<String>,
    locations: Vec<String>,
    initial: Option<String>,
    actions: BTreeMap<String, Vec<String>>,
    observations: BTreeMap<String, Vec<Vec<String>>>,
    transitions: Vec<(String, Vec<String>, String)>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn agents<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.agents = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn locations<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.locations = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn initial(mut self, name: impl Into<String>) -> Self {
        self.initial = Some(name.into());
        self
    }

    pub fn actions<S: Into<String>>(
        mut self,
        agent: impl Into<String>,
        names: impl IntoIterator<Item = S>,
    ) -> Self {
        self.actions.insert(agent.into(), names.into_iter().map(Into::into).collect());
        self
    }

    pub fn observation<S: Into<String> + Clone>(
        mut self,
        agent: impl Into<String>,
        blocks: &[&[S]],
    ) -> Self {
        let blocks = blocks
            .iter()
            .map(|b| b.iter().cloned().map(Into::into).collect())
            .collect();
        self.observations.insert(agent.into(), blocks);
        self
    }

    /// Singleton blocks for `agent`.
    pub fn perfect_observation(mut self, agent: impl Into<String>) -> Self {
        let blocks = self.locations.iter().map(|l| vec![l.clone()]).collect();
        self.observations.insert(agent.into(), blocks);
        self
    }

    pub fn transition(mut self, from: &str, action: &[&str], to: &str) -> Self {
        self.transitions.push((
            from.to_string(),
            action.iter().map(|s| s.to_string()).collect(),
            to.to_string(),
        ));
        self
    }

    /// Adds `from -σ-> to` for every joint action σ.
    pub fn transition_all(mut self, from: &str, to: &str) -> Self {
        let mut all: Vec<Vec<String>> = vec![Vec::new()];
        for agent in &self.agents {
            let acts = self.actions.get(agent).cloned().unwrap_or_default();
            all = all
                .into_iter()
                .flat_map(|p| {
                    acts.iter().map(move |a| {
                        let mut v = p.clone();
                        v.push(a.clone());
                        v
                    })
                })
                .collect();
        }
        for ja in all {
            self.transitions.push((from.to_string(), ja, to.to_string()));
        }
        self
    }

    pub fn build(self) -> Result<Game, Error> {
        let loc = |name: &str, locations: &[String]| {
            locations
                .iter()
                .position(|l| l == name)
                .map(LocId)
                .ok_or_else(|| Error::UnknownLocation(name.to_string()))
        };
        let initial = loc(
            self.initial.as_deref().ok_or(Error::UnknownLocation("<initial>".into()))?,
            &self.locations,
        )?;
        let mut actions = Vec::new();
        let mut observations = Vec::new();
        for agent in &self.agents {
            actions.push(
                self.actions
                    .get(agent)
                    .cloned()
                    .ok_or_else(|| Error::UnknownAgent(agent.clone()))?,
            );
            let blocks = self
                .observations
                .get(agent)
                .ok_or_else(|| Error::UnknownAgent(agent.clone()))?;
            let mut resolved = Vec::new();
            for block in blocks {
                let mut set = Vec::new();
                for l in block {
                    set.push(loc(l, &self.locations)?);
                }
                resolved.push(set);
            }
            observations.push(resolved);
        }
        let mut transitions = Vec::new();
        for (from, ja, to) in &self.transitions {
            if ja.len() != self.agents.len() {
                return Err(Error::Invalid(ValidationReport {
                    violations: vec![Violation::ArityMismatch {
                        transition: transitions.len(),
                        expected: self.agents.len(),
                        found: ja.len(),
                    }],
                }));
            }
            let mut acts = Vec::new();
            for (i, name) in ja.iter().enumerate() {
                let pos = actions[i]
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| Error::UnknownAction(name.clone()))?;
                acts.push(ActionId(pos));
            }
            transitions.push(Transition {
                from: loc(from, &self.locations)?,
                action: JointAction(acts),
                to: loc(to, &self.locations)?,
            });
        }
        Game::new(self.agents, self.locations, initial, actions, observations, transitions)
    }
}
