//! Knowledge update `δ_a` and its generalisation `δ^j_a` to nested states,
//! computed directly on the base game without materialising expansions.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::game::{ActionId, AgentId, BlockId, Game, JointAction, LocId, LocSet};
use crate::knowledge::state::{intersect, JointKnowledge, KnowledgeState};
use crate::mkbsc::{part_label, Case};

/// `δ_a(s, σ_a, o_a)`; `None` when the result is empty.
pub fn delta(
    s: &[LocId],
    action: ActionId,
    obs: BlockId,
    g: &Game,
    a: AgentId,
) -> Option<LocSet> {
    delta_labelled(s, &[action], obs, g, a, Case::NN)
}

/// Knowledge update under an arbitrary part label (own action for NN,
/// joint action for NY).
pub fn delta_labelled(
    s: &[LocId],
    label: &[ActionId],
    obs: BlockId,
    g: &Game,
    a: AgentId,
    case: Case,
) -> Option<LocSet> {
    let mut out: LocSet = s
        .iter()
        .flat_map(|&l| g.out_edges(l))
        .filter(|(sigma, to)| {
            part_label(case, sigma, a) == label && g.block_of(a, *to) == Some(obs)
        })
        .map(|&(_, to)| to)
        .collect();
    out.sort();
    out.dedup();
    (!out.is_empty()).then_some(out)
}

type DeltaKey = (KnowledgeState, Vec<ActionId>, BlockId, AgentId);

/// Evaluates `δ^j` with memoisation. One instance per base game and case.
pub struct Updater<'g> {
    g: &'g Game,
    case: Case,
    cache: RefCell<HashMap<DeltaKey, Option<KnowledgeState>>>,
}

impl<'g> Updater<'g> {
    pub fn new(g: &'g Game, case: Case) -> Self {
        Updater { g, case, cache: RefCell::new(HashMap::new()) }
    }

    pub fn game(&self) -> &'g Game {
        self.g
    }

    pub fn case(&self) -> Case {
        self.case
    }

    /// `δ^j_a(s, label, o_a)` where `j` is the level of `s` and `o_a` is a
    /// block of `a` in the base game.
    pub fn delta(
        &self,
        s: &KnowledgeState,
        label: &[ActionId],
        obs: BlockId,
        a: AgentId,
    ) -> Result<Option<KnowledgeState>> {
        let key = (s.clone(), label.to_vec(), obs, a);
        if let Some(hit) = self.cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let out = self.compute(s, label, obs, a)?;
        self.cache.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    fn compute(
        &self,
        s: &KnowledgeState,
        label: &[ActionId],
        obs: BlockId,
        a: AgentId,
    ) -> Result<Option<KnowledgeState>> {
        let g = self.g;
        match s {
            KnowledgeState::Locations(set) => Ok(delta_labelled(set, label, obs, g, a, self.case)
                .map(KnowledgeState::Locations)),
            KnowledgeState::Nested { tuples, .. } => {
                let mut out = BTreeSet::new();
                for t in tuples {
                    // Joint actions and possible joint observations worth
                    // trying are read off the base edges leaving ⋒t.
                    let mut candidates: BTreeSet<(JointAction, Vec<BlockId>)> = BTreeSet::new();
                    for l in t.iterated_intersection()? {
                        for (sigma, to) in g.out_edges(l) {
                            if part_label(self.case, sigma, a) != label
                                || g.block_of(a, *to) != Some(obs)
                            {
                                continue;
                            }
                            let o = g.agents().map(|b| g.block_of(b, *to).unwrap()).collect();
                            candidates.insert((sigma.clone(), o));
                        }
                    }
                    'cand: for (sigma, o) in candidates {
                        let mut comps = Vec::with_capacity(g.num_agents());
                        for b in g.agents() {
                            let lb = part_label(self.case, &sigma, b);
                            match self.delta(t.component(b), &lb, o[b.0], b)? {
                                Some(c) => comps.push(c),
                                None => continue 'cand,
                            }
                        }
                        let next = JointKnowledge(comps);
                        if self.consistent(&next)? && self.realizable(t, &sigma, &next)? {
                            out.insert(next);
                        }
                    }
                }
                if out.is_empty() {
                    Ok(None)
                } else {
                    Ok(Some(KnowledgeState::nested(out)?))
                }
            }
        }
    }

    fn consistent(&self, t: &JointKnowledge) -> Result<bool> {
        match t.0.first() {
            Some(KnowledgeState::Locations(_)) => {
                let mut acc = t.0[0].as_locations().unwrap().to_vec();
                for c in &t.0[1..] {
                    acc = intersect(&acc, c.as_locations().ok_or_else(|| {
                        Error::MalformedState("mixed levels".into())
                    })?);
                }
                Ok(!acc.is_empty())
            }
            Some(KnowledgeState::Nested { .. }) => Ok(!t.common_tuples()?.is_empty()),
            None => Err(Error::MalformedState("empty tuple".into())),
        }
    }

    /// Whether `(t, σ, t')` is an edge of the expansion whose states are
    /// tuples of this level: some member of the intersection of `t` has a
    /// witnessing lower-level edge into the intersection of `t'`.
    fn realizable(&self, t: &JointKnowledge, sigma: &JointAction, next: &JointKnowledge) -> Result<bool> {
        match t.0.first() {
            Some(KnowledgeState::Locations(_)) => {
                let from = t.iterated_intersection()?;
                let Ok(to) = next.iterated_intersection() else {
                    return Ok(false);
                };
                Ok(from
                    .iter()
                    .any(|&l| to.iter().any(|&l2| self.g.has_transition(l, sigma, l2))))
            }
            _ => {
                let from = t.common_tuples()?;
                let to = next.common_tuples()?;
                for u in &from {
                    for v in &to {
                        if self.is_edge(u, sigma, v)? {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
        }
    }

    /// Full edge membership: each component of `v` is the update of the
    /// matching component of `u`, and the edge is consistent and realisable.
    pub fn is_edge(&self, u: &JointKnowledge, sigma: &JointAction, v: &JointKnowledge) -> Result<bool> {
        let g = self.g;
        for b in g.agents() {
            let hat = v.component(b).flatten_hat(b)?;
            let Some(ob) = g.block_of(b, hat[0]) else {
                return Ok(false);
            };
            let lb = part_label(self.case, sigma, b);
            if self.delta(u.component(b), &lb, ob, b)?.as_ref() != Some(v.component(b)) {
                return Ok(false);
            }
        }
        Ok(self.consistent(v)? && self.realizable(u, sigma, v)?)
    }
}

/// `δ^j_a` for the level of `s`, case NN. Level 1 is plain [`delta`].
pub fn delta_general(
    s: &KnowledgeState,
    action: ActionId,
    obs: BlockId,
    g: &Game,
    a: AgentId,
) -> Result<Option<KnowledgeState>> {
    Updater::new(g, Case::NN).delta(s, &[action], obs, a)
}
