//! The multi-agent knowledge-based subset construction: projection onto each
//! agent, single-agent subset construction, pruned synchronous product and
//! the knowledge-induced observation partition.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{
    ActionId, AgentId, BlockId, Game, JointAction, LocId, LocSet, Objective, Partition,
    Transition,
};
use crate::knowledge::state::{intersect, JointKnowledge, KnowledgeState};

/// Which information the agents have about the actions played.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    /// No strategy knowledge, no action observability.
    NN,
    /// No strategy knowledge, joint actions are observed.
    NY,
}

impl std::str::FromStr for Case {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(Case::NN),
            "ny" => Ok(Case::NY),
            other => Err(format!("unknown case {other}, expected nn or ny")),
        }
    }
}

/// The action label an agent sees on a base edge: its own action in case NN,
/// the whole joint action in case NY.
pub type PartLabel = Vec<ActionId>;

pub fn part_label(case: Case, action: &JointAction, a: AgentId) -> PartLabel {
    match case {
        Case::NN => vec![action.get(a)],
        Case::NY => action.0.clone(),
    }
}

/// A one-agent game obtained by projecting a multi-agent game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleAgentGame {
    pub agent: AgentId,
    pub case: Case,
    pub num_locations: usize,
    pub initial: LocId,
    pub alphabet: Vec<PartLabel>,
    pub transitions: BTreeSet<(LocId, PartLabel, LocId)>,
    pub observations: Partition,
}

pub fn project(g: &Game, a: AgentId, case: Case) -> Result<SingleAgentGame> {
    if a.0 >= g.num_agents() {
        return Err(Error::UnknownAgent(a.0.to_string()));
    }
    let alphabet = match case {
        Case::NN => (0..g.actions(a).len()).map(|i| vec![ActionId(i)]).collect(),
        Case::NY => g.joint_actions().into_iter().map(|j| j.0).collect(),
    };
    let transitions = g
        .transitions()
        .iter()
        .map(|t| (t.from, part_label(case, &t.action, a), t.to))
        .collect();
    Ok(SingleAgentGame {
        agent: a,
        case,
        num_locations: g.num_locations(),
        initial: g.initial(),
        alphabet,
        transitions,
        observations: g.observations(a).clone(),
    })
}

/// The subset construction of one agent's projection. States are sorted;
/// `initial` is `{l_init}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectInfoGame {
    pub agent: AgentId,
    pub case: Case,
    pub states: Vec<LocSet>,
    pub initial: usize,
    /// Per state, `(label, successor)` sorted.
    pub edges: Vec<Vec<(PartLabel, usize)>>,
    /// The projected game's observation block containing each state.
    pub blocks: Vec<BlockId>,
}

impl PerfectInfoGame {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, set: &[LocId]) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_slice().cmp(set)).ok()
    }

    /// The successor of `s` under `label` inside observation block `block`.
    pub fn successor(&self, s: usize, label: &[ActionId], block: BlockId) -> Option<usize> {
        self.edges[s]
            .iter()
            .find(|(x, t)| x.as_slice() == label && self.blocks[*t] == block)
            .map(|&(_, t)| t)
    }

    pub fn successors(&self, s: usize, label: &[ActionId]) -> impl Iterator<Item = usize> + '_ {
        let label = label.to_vec();
        self.edges[s]
            .iter()
            .filter(move |(x, _)| *x == label)
            .map(|&(_, t)| t)
    }
}

pub fn kbsc(sg: &SingleAgentGame) -> PerfectInfoGame {
    let mut post: HashMap<(LocId, &PartLabel), Vec<LocId>> = HashMap::new();
    for (l, x, l2) in &sg.transitions {
        post.entry((*l, x)).or_default().push(*l2);
    }
    let block = |l: LocId| sg.observations.block_of(l).expect("partition covers locations");

    let init = vec![sg.initial];
    let mut index: HashMap<LocSet, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    index.insert(init, 0);
    let mut raw_edges: Vec<Vec<(PartLabel, usize)>> = vec![Vec::new()];
    let mut next = 0;
    while next < states.len() {
        let s = states[next].clone();
        for x in &sg.alphabet {
            let mut by_block: std::collections::BTreeMap<BlockId, LocSet> = Default::default();
            for &l in &s {
                if let Some(ts) = post.get(&(l, x)) {
                    for &t in ts {
                        by_block.entry(block(t)).or_default().push(t);
                    }
                }
            }
            for (_, mut succ) in by_block {
                succ.sort();
                succ.dedup();
                let id = *index.entry(succ.clone()).or_insert_with(|| {
                    states.push(succ);
                    raw_edges.push(Vec::new());
                    states.len() - 1
                });
                raw_edges[next].push((x.clone(), id));
            }
        }
        next += 1;
    }

    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&i, &j| states[i].cmp(&states[j]));
    let mut rank = vec![0; states.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sorted_states: Vec<LocSet> = order.iter().map(|&i| states[i].clone()).collect();
    let edges = order
        .iter()
        .map(|&i| {
            let mut e: Vec<(PartLabel, usize)> =
                raw_edges[i].iter().map(|(x, t)| (x.clone(), rank[*t])).collect();
            e.sort();
            e
        })
        .collect();
    let blocks = sorted_states.iter().map(|s| block(s[0])).collect();
    PerfectInfoGame {
        agent: sg.agent,
        case: sg.case,
        states: sorted_states,
        initial: rank[0],
        edges,
        blocks,
    }
}

/// What an expansion was built from.
#[derive(Clone, Debug)]
pub enum Parent {
    Base(Arc<Game>),
    Expanded(Arc<ExpandedGame>),
}

impl Parent {
    pub fn game(&self) -> &Game {
        match self {
            Parent::Base(g) => g,
            Parent::Expanded(eg) => eg.game(),
        }
    }

    pub fn level(&self) -> usize {
        match self {
            Parent::Base(_) => 0,
            Parent::Expanded(eg) => eg.level(),
        }
    }

    pub fn base(&self) -> &Arc<Game> {
        match self {
            Parent::Base(g) => g,
            Parent::Expanded(eg) => eg.base(),
        }
    }

    /// `ŝ_a` of a part state, given as a set of parent locations.
    fn hat(&self, s: &[LocId], a: AgentId) -> LocSet {
        match self {
            Parent::Base(_) => s.to_vec(),
            Parent::Expanded(eg) => eg.hat(s[0], a).to_vec(),
        }
    }

    /// `⋒` of a parent location.
    fn cap(&self, l: LocId) -> LocSet {
        match self {
            Parent::Base(_) => vec![l],
            Parent::Expanded(eg) => eg.cap(l).to_vec(),
        }
    }
}

/// `G^{jK}`: an ordinary game over joint knowledge states, together with the
/// parts it was composed from and its provenance.
#[derive(Clone, Debug)]
pub struct ExpandedGame {
    level: usize,
    case: Case,
    game: Game,
    parent: Parent,
    parts: Vec<PerfectInfoGame>,
    components: Vec<Vec<usize>>,
    part_blocks: Vec<Vec<Option<BlockId>>>,
    part_labels: Vec<Vec<KnowledgeState>>,
    part_hat: Vec<Vec<LocSet>>,
    labels: Vec<JointKnowledge>,
    caps: Vec<LocSet>,
}

impl ExpandedGame {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn case(&self) -> Case {
        self.case
    }

    /// The expansion viewed as a plain game; locations are named `s0, s1, …`
    /// in canonical label order.
    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn parent(&self) -> &Parent {
        &self.parent
    }

    pub fn parent_game(&self) -> &Game {
        self.parent.game()
    }

    pub fn base(&self) -> &Arc<Game> {
        self.parent.base()
    }

    pub fn parts(&self) -> &[PerfectInfoGame] {
        &self.parts
    }

    pub fn part(&self, a: AgentId) -> &PerfectInfoGame {
        &self.parts[a.0]
    }

    /// Index of location `l`'s `a`-component in `part(a)`.
    pub fn component(&self, l: LocId, a: AgentId) -> usize {
        self.components[l.0][a.0]
    }

    /// The block of agent `a` in this game that corresponds to part state `p`,
    /// if `p` occurs in some reachable joint state.
    pub fn part_block(&self, a: AgentId, p: usize) -> Option<BlockId> {
        self.part_blocks[a.0][p]
    }

    /// The part state of agent `a` behind block `b`.
    pub fn block_part(&self, a: AgentId, b: BlockId) -> usize {
        let l = self.game.observations(a).block(b)[0];
        self.component(l, a)
    }

    pub fn label(&self, l: LocId) -> &JointKnowledge {
        &self.labels[l.0]
    }

    pub fn labels(&self) -> &[JointKnowledge] {
        &self.labels
    }

    pub fn part_label(&self, a: AgentId, p: usize) -> &KnowledgeState {
        &self.part_labels[a.0][p]
    }

    /// `ŝ_a` of part state `p` of agent `a`, as base locations.
    pub fn part_hat(&self, a: AgentId, p: usize) -> &[LocId] {
        &self.part_hat[a.0][p]
    }

    /// `ŝ(a)` of joint state `l`.
    pub fn hat(&self, l: LocId, a: AgentId) -> &[LocId] {
        self.part_hat(a, self.component(l, a))
    }

    /// `⋒s` of joint state `l`, as base locations.
    pub fn cap(&self, l: LocId) -> &[LocId] {
        &self.caps[l.0]
    }

    /// Plain intersection of the components, as parent locations.
    pub fn intersection(&self, l: LocId) -> LocSet {
        let mut acc: Option<LocSet> = None;
        for (a, &p) in self.components[l.0].iter().enumerate() {
            let s = &self.parts[a].states[p];
            acc = Some(match acc {
                None => s.clone(),
                Some(prev) => intersect(&prev, s),
            });
        }
        acc.unwrap_or_default()
    }

    pub fn state_text(&self, l: LocId) -> String {
        self.labels[l.0].to_text(self.base())
    }

    pub fn location_by_label(&self, label: &JointKnowledge) -> Option<LocId> {
        self.labels.binary_search(label).ok().map(LocId)
    }

    /// Agent `a`'s part state whose label is `k`.
    pub fn part_by_label(&self, a: AgentId, k: &KnowledgeState) -> Option<usize> {
        self.part_labels[a.0].binary_search(k).ok()
    }
}

/// Limits on expansion size. `None` means unbounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Limits {
    pub max_states: Option<usize>,
}

impl Limits {
    fn check(&self, n: usize) -> Result<()> {
        match self.max_states {
            Some(max) if n > max => Err(Error::BudgetExceeded(format!(
                "expansion exceeds {max} states"
            ))),
            _ => Ok(()),
        }
    }
}

/// Composes level-1 parts over `base`. The parts must come from
/// `kbsc(project(base, a, case))` for each agent `a` in order.
pub fn compose_and_prune(
    parts: Vec<PerfectInfoGame>,
    base: &Game,
    case: Case,
) -> Result<ExpandedGame> {
    assemble(Parent::Base(Arc::new(base.clone())), parts, case, Limits::default())
}

pub fn mkbsc_expand(g: &Game, case: Case) -> Result<ExpandedGame> {
    expand_parent(Parent::Base(Arc::new(g.clone())), case, Limits::default())
}

/// Expands an expanded game once more, keeping its case.
pub fn expand_again(eg: &Arc<ExpandedGame>) -> Result<ExpandedGame> {
    expand_parent(Parent::Expanded(eg.clone()), eg.case(), Limits::default())
}

pub fn expand_parent(parent: Parent, case: Case, limits: Limits) -> Result<ExpandedGame> {
    let g = parent.game();
    let parts = g
        .agents()
        .map(|a| project(g, a, case).map(|sg| kbsc(&sg)))
        .collect::<Result<Vec<_>>>()?;
    for p in &parts {
        limits.check(p.len())?;
    }
    assemble(parent, parts, case, limits)
}

/// Expands `g` to level `j` (`j >= 1`).
pub fn expand_to(g: &Game, case: Case, j: usize, limits: Limits) -> Result<Vec<Arc<ExpandedGame>>> {
    let mut out: Vec<Arc<ExpandedGame>> = Vec::new();
    let mut parent = Parent::Base(Arc::new(g.clone()));
    for _ in 0..j {
        let eg = Arc::new(expand_parent(parent, case, limits)?);
        parent = Parent::Expanded(eg.clone());
        out.push(eg);
    }
    Ok(out)
}

fn assemble(parent: Parent, parts: Vec<PerfectInfoGame>, case: Case, limits: Limits) -> Result<ExpandedGame> {
    let g = parent.game();
    let n = g.num_agents();
    if parts.len() != n {
        return Err(Error::PartCountMismatch { expected: n, found: parts.len() });
    }

    // Worklist over consistent tuples. The successor tuple reached through a
    // witnessing base edge (l, σ, l') is forced: each agent's part moves to
    // the unique state under its label that lies in the block of l'.
    let initial: Vec<usize> = parts.iter().map(|p| p.initial).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut tuples = vec![initial.clone()];
    index.insert(initial, 0);
    let mut raw_edges: Vec<(usize, JointAction, usize)> = Vec::new();
    let mut next = 0;
    while next < tuples.len() {
        let t = tuples[next].clone();
        let inter = tuple_intersection(&parts, &t);
        for &l in &inter {
            for (sigma, l2) in g.out_edges(l) {
                let mut succ = Vec::with_capacity(n);
                for (ai, p) in parts.iter().enumerate() {
                    let a = AgentId(ai);
                    let block = g.block_of(a, *l2).expect("partition covers locations");
                    let s = p
                        .successor(t[ai], &part_label(case, sigma, a), block)
                        .ok_or_else(|| {
                            Error::MalformedState("part lacks a successor for a base edge".into())
                        })?;
                    succ.push(s);
                }
                let id = match index.get(&succ) {
                    Some(&id) => id,
                    None => {
                        tuples.push(succ.clone());
                        limits.check(tuples.len())?;
                        index.insert(succ, tuples.len() - 1);
                        tuples.len() - 1
                    }
                };
                raw_edges.push((next, sigma.clone(), id));
            }
        }
        next += 1;
    }

    let mut order: Vec<usize> = (0..tuples.len()).collect();
    order.sort_by(|&i, &j| tuples[i].cmp(&tuples[j]));
    let mut rank = vec![0; tuples.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let components: Vec<Vec<usize>> = order.iter().map(|&i| tuples[i].clone()).collect();
    let transitions: Vec<Transition> = raw_edges
        .into_iter()
        .map(|(f, action, t)| Transition { from: LocId(rank[f]), action, to: LocId(rank[t]) })
        .collect();

    let mut part_blocks: Vec<Vec<Option<BlockId>>> =
        parts.iter().map(|p| vec![None; p.len()]).collect();
    let mut observations = Vec::with_capacity(n);
    for (ai, p) in parts.iter().enumerate() {
        let mut used: Vec<usize> = components.iter().map(|c| c[ai]).collect();
        used.sort();
        used.dedup();
        let mut blocks = Vec::with_capacity(used.len());
        for (bi, &s) in used.iter().enumerate() {
            part_blocks[ai][s] = Some(BlockId(bi));
            blocks.push(
                (0..components.len())
                    .filter(|&l| components[l][ai] == s)
                    .map(LocId)
                    .collect::<LocSet>(),
            );
        }
        debug_assert!(used.iter().all(|&s| s < p.len()));
        observations.push(blocks);
    }

    let game = Game::from_parts(
        g.agent_names().to_vec(),
        (0..components.len()).map(|i| format!("s{i}")).collect(),
        LocId(rank[0]),
        g.agents().map(|a| g.actions(a).to_vec()).collect(),
        observations,
        transitions,
    );

    let mut part_labels = Vec::with_capacity(n);
    let mut part_hat = Vec::with_capacity(n);
    for (ai, p) in parts.iter().enumerate() {
        let a = AgentId(ai);
        let mut labels = Vec::with_capacity(p.len());
        let mut hats = Vec::with_capacity(p.len());
        for s in &p.states {
            let label = match &parent {
                Parent::Base(_) => KnowledgeState::locations(s.iter().copied())?,
                Parent::Expanded(eg) => {
                    KnowledgeState::nested(s.iter().map(|&l| eg.label(l).clone()))?
                }
            };
            labels.push(label);
            hats.push(parent.hat(s, a));
        }
        part_labels.push(labels);
        part_hat.push(hats);
    }
    let labels: Vec<JointKnowledge> = components
        .iter()
        .map(|c| {
            JointKnowledge(c.iter().enumerate().map(|(a, &p)| part_labels[a][p].clone()).collect())
        })
        .collect();
    let caps = components
        .iter()
        .map(|c| {
            let mut cap: LocSet = tuple_intersection(&parts, c)
                .into_iter()
                .flat_map(|l| parent.cap(l))
                .collect();
            cap.sort();
            cap.dedup();
            cap
        })
        .collect();

    Ok(ExpandedGame {
        level: parent.level() + 1,
        case,
        game,
        parent,
        parts,
        components,
        part_blocks,
        part_labels,
        part_hat,
        labels,
        caps,
    })
}

fn tuple_intersection(parts: &[PerfectInfoGame], t: &[usize]) -> LocSet {
    let mut acc = parts[0].states[t[0]].clone();
    for (p, &s) in parts.iter().zip(t).skip(1) {
        acc = intersect(&acc, &p.states[s]);
    }
    acc
}

/// Outcome of a PDK check: the first joint state whose intersection is not a
/// singleton, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdkReport {
    pub witness: Option<LocId>,
}

impl PdkReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks that every joint state pins down a single location of the game it
/// was expanded from.
pub fn check_pdk(eg: &ExpandedGame) -> PdkReport {
    let witness = eg.game().locations().find(|&l| eg.intersection(l).len() != 1);
    PdkReport { witness }
}

/// `R^K`: the blocks of `eg` whose component lies inside a target block of
/// the game `eg` was expanded from.
pub fn translate_objective(obj: &Objective, eg: &ExpandedGame) -> Result<Objective> {
    obj.check(eg.parent_game())?;
    let mut targets = BTreeSet::new();
    for a in eg.game().agents() {
        let part = eg.part(a);
        for (b, _) in eg.game().observations(a).blocks().iter().enumerate() {
            let p = eg.block_part(a, BlockId(b));
            if obj.targets.contains(&(a, part.blocks[p])) {
                targets.insert((a, BlockId(b)));
            }
        }
    }
    Objective::new(obj.kind, targets, eg.game())
}

/// The base objective lifted directly to `eg` through `ŝ`.
pub fn lift_objective(obj: &Objective, eg: &ExpandedGame) -> Result<Objective> {
    let base = eg.base();
    obj.check(base)?;
    let mut targets = BTreeSet::new();
    for a in eg.game().agents() {
        for b in 0..eg.game().observations(a).len() {
            let p = eg.block_part(a, BlockId(b));
            let hat = eg.part_hat(a, p);
            let inside = obj
                .targets
                .iter()
                .any(|&(ta, tb)| ta == a && hat.iter().all(|&l| base.block_of(a, l) == Some(tb)));
            if inside {
                targets.insert((a, BlockId(b)));
            }
        }
    }
    Ok(Objective { kind: obj.kind, targets })
}

/// Translates a base objective level by level up to `eg`.
pub fn objective_at(obj: &Objective, chain: &[Arc<ExpandedGame>]) -> Result<Vec<Objective>> {
    let mut out = Vec::with_capacity(chain.len());
    let mut cur = obj.clone();
    for eg in chain {
        cur = translate_objective(&cur, eg)?;
        out.push(cur.clone());
    }
    Ok(out)
}
