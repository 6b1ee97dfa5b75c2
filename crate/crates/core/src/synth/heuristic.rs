//! Per-agent candidates from existential controllable predecessors, combined
//! by complete backtracking.
//!
//! For agent `a` the candidates are memoryless strategies on its
//! perfect-information part of the expansion under which some outcome
//! reaches a part state that meets the parent-level targets. Actions are
//! tried in order of existential attractor rank, so the first candidate of
//! a one-agent perfect-information game is the attractor strategy.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::game::{ActionId, AgentId, BlockId, Objective, ObjectiveKind};
use crate::mkbsc::{Case, ExpandedGame};
use crate::synth::enumerate::{search, Arena, Choice, Guide};
use crate::synth::Meter;

/// Existential attractor layers of `R_a` in agent `a`'s part: `rank[p]`
/// is the fewest steps some outcome needs from `p`, `None` if unreachable.
pub fn existential_ranks(eg: &ExpandedGame, a: AgentId, targets: &[bool]) -> Vec<Option<usize>> {
    let part = eg.part(a);
    let n = part.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, edges) in part.edges.iter().enumerate() {
        for (_, q) in edges {
            preds[*q].push(p);
        }
    }
    let mut rank = vec![None; n];
    let mut q = VecDeque::new();
    for p in 0..n {
        if targets[p] {
            rank[p] = Some(0);
            q.push_back(p);
        }
    }
    while let Some(p) = q.pop_front() {
        let r = rank[p].unwrap();
        for &pre in &preds[p] {
            if rank[pre].is_none() {
                rank[pre] = Some(r + 1);
                q.push_back(pre);
            }
        }
    }
    rank
}

/// Part states of agent `a` meeting a location covered by `parent_obj`.
fn part_targets(eg: &ExpandedGame, a: AgentId, parent_obj: &Objective) -> Vec<bool> {
    let covered = parent_obj.coverage(eg.parent_game());
    eg.part(a).states.iter().map(|s| s.iter().any(|l| covered[l.0])).collect()
}

struct Heuristic<'a> {
    eg: &'a ExpandedGame,
    arena: &'a Arena<'a>,
    targets: Vec<Vec<bool>>,
    ranks: Vec<Vec<Option<usize>>>,
}

impl Heuristic<'_> {
    fn own_action(&self, label: &[ActionId], a: usize) -> ActionId {
        match self.eg.case() {
            Case::NN => label[0],
            Case::NY => label[a],
        }
    }

    fn part_var(&self, a: usize, p: usize) -> Option<usize> {
        self.eg
            .part_block(AgentId(a), p)
            .map(|b| self.arena.offsets[a] + b.0)
    }
}

impl Guide for Heuristic<'_> {
    fn order(&self, v: usize) -> Vec<ActionId> {
        let a = self.arena.agent_of(v);
        let p = self.eg.block_part(AgentId(a), BlockId(v - self.arena.offsets[a]));
        let part = self.eg.part(AgentId(a));
        let k = self.eg.base().actions(AgentId(a)).len();
        let mut best: Vec<Option<usize>> = vec![None; k];
        for (label, q) in &part.edges[p] {
            let x = self.own_action(label, a).0;
            if let Some(r) = self.ranks[a][*q] {
                best[x] = Some(best[x].map_or(r, |b: usize| b.min(r)));
            }
        }
        let mut xs: Vec<ActionId> = (0..k).map(ActionId).collect();
        xs.sort_by_key(|x| best[x.0].unwrap_or(usize::MAX));
        xs
    }

    /// Fails when no outcome of agent `a`'s strategy so far can reach its
    /// targets; unassigned part states may take any action.
    fn prune(&self, v: usize, vals: &[Option<ActionId>]) -> Option<BTreeSet<usize>> {
        let a = self.arena.agent_of(v);
        let part = self.eg.part(AgentId(a));
        let mut seen = vec![false; part.len()];
        let mut stack = vec![part.initial];
        seen[part.initial] = true;
        while let Some(p) = stack.pop() {
            if self.targets[a][p] {
                return None;
            }
            let fixed = self.part_var(a, p).and_then(|w| vals[w]);
            for (label, q) in &part.edges[p] {
                if fixed.is_some_and(|x| x != self.own_action(label, a)) {
                    continue;
                }
                if !seen[*q] {
                    seen[*q] = true;
                    stack.push(*q);
                }
            }
        }
        let n = self.eg.game().observations(AgentId(a)).len();
        Some((self.arena.offsets[a]..self.arena.offsets[a] + n).filter(|&w| vals[w].is_some()).collect())
    }
}

/// Heuristic synthesis on `eg` for a Reach objective. `obj` is on `eg`,
/// `parent_obj` on its parent game.
pub fn heuristic_synth(
    eg: &ExpandedGame,
    obj: &Objective,
    parent_obj: &Objective,
    meter: &mut Meter,
) -> Result<Option<Choice>> {
    if obj.kind != ObjectiveKind::Reach {
        return Err(Error::Unsupported("the heuristic handles reachability objectives only".into()));
    }
    obj.check(eg.game())?;
    let arena = Arena::new(eg.game(), obj);
    let targets: Vec<Vec<bool>> = eg.game().agents().map(|a| part_targets(eg, a, parent_obj)).collect();
    let ranks = eg
        .game()
        .agents()
        .map(|a| existential_ranks(eg, a, &targets[a.0]))
        .collect();
    let h = Heuristic { eg, arena: &arena, targets, ranks };
    search(&arena, &h, meter)
}
