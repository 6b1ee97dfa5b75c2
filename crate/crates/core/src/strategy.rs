//! Memoryless profiles over expansions, the transducers they induce on the
//! base game, knowledge-based execution, and exhaustive profile validation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::game::{
    ActionId, AgentId, BlockId, Game, JointAction, Lasso, LocId, Objective, ObjectiveKind,
};
use crate::knowledge::state::KnowledgeState;
use crate::knowledge::update::Updater;
use crate::mkbsc::{part_label, Case, ExpandedGame};

/// One agent's memoryless strategy over its level-`level` knowledge states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessStrategy {
    pub agent: AgentId,
    pub level: usize,
    pub actions: BTreeMap<KnowledgeState, ActionId>,
}

impl MemorylessStrategy {
    pub fn action(&self, s: &KnowledgeState) -> Option<ActionId> {
        self.actions.get(s).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub level: usize,
    pub strategies: Vec<MemorylessStrategy>,
}

impl Profile {
    /// Builds a profile from per-block action choices in `eg`.
    pub fn from_blocks(eg: &ExpandedGame, choice: &[Vec<ActionId>]) -> Profile {
        let strategies = eg
            .game()
            .agents()
            .map(|a| {
                let mut actions = BTreeMap::new();
                for (b, &act) in choice[a.0].iter().enumerate() {
                    let p = eg.block_part(a, BlockId(b));
                    actions.insert(eg.part_label(a, p).clone(), act);
                }
                // Part states that never occur in a joint state get the first action.
                for p in 0..eg.part(a).len() {
                    actions.entry(eg.part_label(a, p).clone()).or_insert(ActionId(0));
                }
                MemorylessStrategy { agent: a, level: eg.level(), actions }
            })
            .collect();
        Profile { level: eg.level(), strategies }
    }

    /// Fills every unlisted part state of `eg` with the agent's first action.
    /// Returns the completed profile and how many entries were added.
    pub fn completed(&self, eg: &ExpandedGame) -> (Profile, usize) {
        let mut out = self.clone();
        let mut added = 0;
        for s in &mut out.strategies {
            for p in 0..eg.part(s.agent).len() {
                let k = eg.part_label(s.agent, p);
                if !s.actions.contains_key(k) {
                    s.actions.insert(k.clone(), ActionId(0));
                    added += 1;
                }
            }
        }
        (out, added)
    }

    pub fn check_level(&self, eg: &ExpandedGame) -> Result<()> {
        if self.level != eg.level() || self.strategies.len() != eg.game().num_agents() {
            return Err(Error::StrategyUndefined(format!(
                "profile is for level {} with {} agents, game is level {} with {} agents",
                self.level,
                self.strategies.len(),
                eg.level(),
                eg.game().num_agents()
            )));
        }
        Ok(())
    }

    /// Actions indexed by part state of agent `a`; every part state must be covered.
    pub fn by_part(&self, eg: &ExpandedGame, a: AgentId) -> Result<Vec<ActionId>> {
        self.check_level(eg)?;
        let s = &self.strategies[a.0];
        (0..eg.part(a).len())
            .map(|p| {
                let k = eg.part_label(a, p);
                s.action(k).ok_or_else(|| {
                    Error::StrategyUndefined(format!(
                        "no action for {} of agent {}",
                        k.to_text(eg.base()),
                        eg.game().agent_name(a)
                    ))
                })
            })
            .collect()
    }

    /// Actions indexed by observation block of agent `a` in `eg`.
    pub fn by_block(&self, eg: &ExpandedGame, a: AgentId) -> Result<Vec<ActionId>> {
        let by_part = self.by_part(eg, a)?;
        Ok((0..eg.game().observations(a).len())
            .map(|b| by_part[eg.block_part(a, BlockId(b))])
            .collect())
    }
}

/// Input symbol of a transducer: the observed block, plus the joint action
/// just played when actions are observable.
pub type Input = (Option<JointAction>, BlockId);

/// A finite-memory observation-based strategy (Moore machine).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    pub agent: AgentId,
    pub case: Case,
    pub memory: Vec<String>,
    pub initial: usize,
    pub output: Vec<ActionId>,
    pub next: BTreeMap<(usize, Input), usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step<M> {
    Continue { memory: M, action: ActionId },
    Halt,
}

impl Transducer {
    pub fn len(&self) -> usize {
        self.memory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memory.is_empty()
    }

    pub fn input_for(&self, action: &JointAction, obs: BlockId) -> Input {
        match self.case {
            Case::NN => (None, obs),
            Case::NY => (Some(action.clone()), obs),
        }
    }
}

/// One round: from memory `m` on input `o`, move to `τ(m, o)` and emit its output.
pub fn run_step(t: &Transducer, m: usize, o: &Input) -> Step<usize> {
    match t.next.get(&(m, o.clone())) {
        Some(&m2) => Step::Continue { memory: m2, action: t.output[m2] },
        None => Step::Halt,
    }
}

/// The transducer induced by a memoryless strategy on agent `a`'s part of `eg`.
/// `actions` is indexed by part state.
pub fn induced_transducer(eg: &ExpandedGame, a: AgentId, actions: &[ActionId]) -> Result<Transducer> {
    let part = eg.part(a);
    let base = eg.base();
    if actions.len() != part.len() {
        return Err(Error::StrategyUndefined(format!(
            "strategy covers {} of {} knowledge states",
            actions.len(),
            part.len()
        )));
    }
    let mut next = BTreeMap::new();
    for (s, edges) in part.edges.iter().enumerate() {
        for (label, s2) in edges {
            let own = match eg.case() {
                Case::NN => label[0],
                Case::NY => label[a.0],
            };
            if own != actions[s] {
                continue;
            }
            let hat = eg.part_hat(a, *s2);
            let ob = base.block_of(a, hat[0]).expect("partition covers locations");
            let input = match eg.case() {
                Case::NN => (None, ob),
                Case::NY => (Some(JointAction(label.clone())), ob),
            };
            if let Some(prev) = next.insert((s, input), *s2) {
                if prev != *s2 {
                    return Err(Error::MalformedState(
                        "two successors share an observation".into(),
                    ));
                }
            }
        }
    }
    Ok(Transducer {
        agent: a,
        case: eg.case(),
        memory: (0..part.len()).map(|p| eg.part_label(a, p).to_text(base)).collect(),
        initial: part.initial,
        output: actions.to_vec(),
        next,
    })
}

/// Observation-based memoryless play in `g` as a transducer whose memory is
/// the current observation.
pub fn memoryless_transducer(g: &Game, a: AgentId, actions: &[ActionId], case: Case) -> Transducer {
    let blocks = g.observations(a).len();
    let mut next = BTreeMap::new();
    for (m, &own) in actions.iter().enumerate().take(blocks) {
        for o in 0..blocks {
            match case {
                Case::NN => {
                    next.insert((m, (None, BlockId(o))), o);
                }
                Case::NY => {
                    for ja in g.joint_actions() {
                        if ja.get(a) == own {
                            next.insert((m, (Some(ja), BlockId(o))), o);
                        }
                    }
                }
            }
        }
    }
    Transducer {
        agent: a,
        case,
        memory: g.observations(a).blocks().iter().map(|b| g.format_set(b)).collect(),
        initial: g.block_of(a, g.initial()).expect("partition covers locations").0,
        output: actions.to_vec(),
        next,
    }
}

/// Drops memory states unreachable from the initial one and renames the
/// rest `m0, m1, …` in breadth-first order.
pub fn prune_transducer(t: &Transducer) -> Transducer {
    let mut order = vec![t.initial];
    let mut rank: HashMap<usize, usize> = HashMap::from([(t.initial, 0)]);
    let mut q = VecDeque::from([t.initial]);
    while let Some(m) = q.pop_front() {
        for (_, &m2) in t.next.range((m, (None, BlockId(0)))..).take_while(|((x, _), _)| *x == m) {
            if let std::collections::hash_map::Entry::Vacant(e) = rank.entry(m2) {
                e.insert(order.len());
                order.push(m2);
                q.push_back(m2);
            }
        }
    }
    rename(t, &order, &rank)
}

fn rename(t: &Transducer, order: &[usize], rank: &HashMap<usize, usize>) -> Transducer {
    let next = t
        .next
        .iter()
        .filter_map(|((m, i), m2)| Some(((*rank.get(m)?, i.clone()), *rank.get(m2)?)))
        .collect();
    Transducer {
        agent: t.agent,
        case: t.case,
        memory: (0..order.len()).map(|i| format!("m{i}")).collect(),
        initial: 0,
        output: order.iter().map(|&m| t.output[m]).collect(),
        next,
    }
}

/// Keeps only the memory states that some play of the profile visits
/// strictly before meeting a Reach objective (every visited one for Safe),
/// then prunes. Behaviour on those plays is unchanged; memory is not
/// updated on entering a Reach target.
pub fn restrict_to_plays(g: &Game, obj: &Objective, ts: &[Transducer]) -> Vec<Transducer> {
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ts.len()];
    let start = (g.initial(), ts.iter().map(|t| t.initial).collect::<Vec<_>>());
    let mut seen = BTreeSet::from([start.clone()]);
    let mut q = VecDeque::from([start]);
    while let Some((l, ms)) = q.pop_front() {
        if obj.kind == ObjectiveKind::Reach && obj.covers(g, l) {
            continue;
        }
        for (a, &m) in ms.iter().enumerate() {
            used[a].insert(m);
        }
        let sigma = JointAction(ts.iter().zip(&ms).map(|(t, &m)| t.output[m]).collect());
        for l2 in g.successors(l, &sigma) {
            let mut ms2 = Vec::with_capacity(ms.len());
            for (a, t) in ts.iter().enumerate() {
                let ob = g.block_of(AgentId(a), l2).expect("partition covers locations");
                match t.next.get(&(ms[a], t.input_for(&sigma, ob))) {
                    Some(&m2) => ms2.push(m2),
                    None => break,
                }
            }
            if ms2.len() == ts.len() && seen.insert((l2, ms2.clone())) {
                q.push_back((l2, ms2));
            }
        }
    }
    ts.iter()
        .enumerate()
        .map(|(a, t)| {
            let mut kept = t.clone();
            kept.next.retain(|(m, _), m2| used[a].contains(m) && used[a].contains(m2));
            prune_transducer(&kept)
        })
        .collect()
}

/// Result of one knowledge-based step.
pub fn run_kbs_step(
    updater: &Updater<'_>,
    s: &KnowledgeState,
    alpha: &MemorylessStrategy,
    o: &Input,
) -> Result<Step<KnowledgeState>> {
    let a = alpha.agent;
    let act = alpha.action(s).ok_or_else(|| {
        Error::StrategyUndefined(format!("no action for {}", s.to_text(updater.game())))
    })?;
    let label = match (updater.case(), &o.0) {
        (Case::NN, _) => vec![act],
        (Case::NY, Some(ja)) => {
            if ja.get(a) != act {
                return Ok(Step::Halt);
            }
            part_label(Case::NY, ja, a)
        }
        (Case::NY, None) => {
            return Err(Error::StrategyUndefined("joint action missing from input".into()))
        }
    };
    match updater.delta(s, &label, o.1, a)? {
        None => Ok(Step::Halt),
        Some(s2) => {
            let next = alpha.action(&s2).ok_or_else(|| {
                Error::StrategyUndefined(format!("no action for {}", s2.to_text(updater.game())))
            })?;
            Ok(Step::Continue { memory: s2, action: next })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockReason {
    /// The prescribed joint action has no transition at the location.
    Unavailable(JointAction),
    /// Some agent's memory update is undefined on what it observed.
    MemoryUndefined(AgentId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProfileVerdict {
    Winning,
    NotWinning(Lasso),
    /// A play halts before the objective is settled. `prefix` ends at the
    /// blocking location; `actions[i]` leaves `prefix[i]`.
    Blocked {
        prefix: Vec<LocId>,
        actions: Vec<JointAction>,
        reason: BlockReason,
    },
}

impl ProfileVerdict {
    pub fn is_winning(&self) -> bool {
        matches!(self, ProfileVerdict::Winning)
    }
}

type Config = (LocId, Vec<usize>);

enum Succ {
    Next(Vec<(LocId, Vec<usize>)>),
    Halt(BlockReason),
}

struct Product<'a> {
    g: &'a Game,
    ts: &'a [Transducer],
    /// Reach objective whose targets end the play, so no memory update is
    /// needed on entering them.
    reach: Option<&'a Objective>,
}

impl Product<'_> {
    fn action(&self, ms: &[usize]) -> JointAction {
        JointAction(self.ts.iter().zip(ms).map(|(t, &m)| t.output[m]).collect())
    }

    fn succ(&self, (l, ms): &Config) -> Succ {
        let sigma = self.action(ms);
        let targets = self.g.successors(*l, &sigma);
        if targets.is_empty() {
            return Succ::Halt(BlockReason::Unavailable(sigma));
        }
        let mut out = Vec::with_capacity(targets.len());
        for l2 in targets {
            let mut ms2 = Vec::with_capacity(ms.len());
            for (a, t) in self.ts.iter().enumerate() {
                let ob = self.g.block_of(AgentId(a), l2).expect("partition covers locations");
                match t.next.get(&(ms[a], t.input_for(&sigma, ob))) {
                    Some(&m2) => ms2.push(m2),
                    None => break,
                }
            }
            if ms2.len() < ms.len() {
                if self.reach.is_some_and(|o| o.covers(self.g, l2)) {
                    ms2 = ms.clone();
                } else {
                    return Succ::Halt(BlockReason::MemoryUndefined(AgentId(ms2.len())));
                }
            }
            out.push((l2, ms2));
        }
        Succ::Next(out)
    }

    fn lasso(&self, path: &[Config], cycle_start: usize) -> Lasso {
        Lasso {
            locations: path.iter().map(|c| c.0).collect(),
            actions: path.iter().map(|c| self.action(&c.1)).collect(),
            cycle_start,
        }
    }

    fn blocked(&self, path: &[Config], reason: BlockReason) -> ProfileVerdict {
        ProfileVerdict::Blocked {
            prefix: path.iter().map(|c| c.0).collect(),
            actions: path.iter().map(|c| self.action(&c.1)).collect(),
            reason,
        }
    }

    /// DFS from the end of `path` through configurations accepted by
    /// `inside`; returns a cycle or a halt if one is found.
    fn search(
        &self,
        path: &mut Vec<Config>,
        inside: &dyn Fn(&Config) -> bool,
        done: &mut BTreeSet<Config>,
    ) -> Option<ProfileVerdict> {
        let mut on_path: HashMap<Config, usize> =
            path.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let mut stack: Vec<(Vec<Config>, usize)> = Vec::new();
        let top = path.last().cloned().expect("non-empty path");
        match self.succ(&top) {
            Succ::Halt(r) => return Some(self.blocked(path, r)),
            Succ::Next(s) => stack.push((s, 0)),
        }
        while let Some((succs, i)) = stack.last_mut() {
            if *i >= succs.len() {
                stack.pop();
                let c = path.pop().expect("path tracks stack");
                on_path.remove(&c);
                done.insert(c);
                if stack.is_empty() {
                    break;
                }
                continue;
            }
            let c = succs[*i].clone();
            *i += 1;
            if !inside(&c) || done.contains(&c) {
                continue;
            }
            if let Some(&start) = on_path.get(&c) {
                return Some(ProfileVerdict::NotWinning(self.lasso(path, start)));
            }
            path.push(c.clone());
            on_path.insert(c.clone(), path.len() - 1);
            match self.succ(&c) {
                Succ::Halt(r) => return Some(self.blocked(path, r)),
                Succ::Next(s) => stack.push((s, 0)),
            }
        }
        None
    }
}

/// Decides whether the transducer profile wins `obj` against every
/// resolution of the non-determinism in `g`.
pub fn validate_profile(g: &Game, obj: &Objective, ts: &[Transducer]) -> Result<ProfileVerdict> {
    obj.check(g)?;
    if ts.len() != g.num_agents() {
        return Err(Error::PartCountMismatch { expected: g.num_agents(), found: ts.len() });
    }
    let reach = (obj.kind == ObjectiveKind::Reach).then_some(obj);
    let prod = Product { g, ts, reach };
    let init: Config = (g.initial(), ts.iter().map(|t| t.initial).collect());
    let target = |c: &Config| obj.covers(g, c.0);
    match obj.kind {
        ObjectiveKind::Reach => {
            if target(&init) {
                return Ok(ProfileVerdict::Winning);
            }
            let mut path = vec![init];
            let mut done = BTreeSet::new();
            Ok(prod
                .search(&mut path, &|c| !target(c), &mut done)
                .unwrap_or(ProfileVerdict::Winning))
        }
        ObjectiveKind::Safe => {
            // Breadth-first over all reachable configurations; the first
            // unsafe one or halt decides.
            let mut parent: HashMap<Config, Option<Config>> = HashMap::from([(init.clone(), None)]);
            let mut q = VecDeque::from([init]);
            let path_to = |c: &Config, parent: &HashMap<Config, Option<Config>>| {
                let mut p = vec![c.clone()];
                while let Some(Some(prev)) = parent.get(p.last().unwrap()) {
                    p.push(prev.clone());
                }
                p.reverse();
                p
            };
            while let Some(c) = q.pop_front() {
                if !target(&c) {
                    let mut path = path_to(&c, &parent);
                    let mut done = BTreeSet::new();
                    return Ok(prod.search(&mut path, &|_| true, &mut done).unwrap_or_else(|| {
                        // Only reached when every continuation was already
                        // explored without a cycle, which cannot happen in
                        // a finite product without halts.
                        prod.blocked(&path_to(&c, &parent), BlockReason::MemoryUndefined(AgentId(0)))
                    }));
                }
                match prod.succ(&c) {
                    Succ::Halt(r) => return Ok(prod.blocked(&path_to(&c, &parent), r)),
                    Succ::Next(s) => {
                        for c2 in s {
                            if !parent.contains_key(&c2) {
                                parent.insert(c2.clone(), Some(c.clone()));
                                q.push_back(c2);
                            }
                        }
                    }
                }
            }
            Ok(ProfileVerdict::Winning)
        }
    }
}

/// Validates a memoryless profile of `eg` (actions per block) on `eg`
/// itself, against an objective expressed on `eg`.
pub fn validate_memoryless(g: &Game, obj: &Objective, choice: &[Vec<ActionId>]) -> Result<ProfileVerdict> {
    let ts: Vec<Transducer> = g
        .agents()
        .map(|a| memoryless_transducer(g, a, &choice[a.0], Case::NN))
        .collect();
    validate_profile(g, obj, &ts)
}

/// The induced transducers of a complete profile.
pub fn induced_profile(eg: &ExpandedGame, profile: &Profile) -> Result<Vec<Transducer>> {
    eg.game()
        .agents()
        .map(|a| induced_transducer(eg, a, &profile.by_part(eg, a)?))
        .collect()
}
