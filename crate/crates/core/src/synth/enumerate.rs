//! Exhaustive search for memoryless observation-based profiles.
//!
//! Variables are (agent, observation block) pairs in agent-major order.
//! Partial assignments are checked on the part of the arena they already
//! determine; a failure records which variables it read so that the search
//! can jump back past choices that did not cause it.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::game::{ActionId, AgentId, Game, JointAction, LocId, Objective, ObjectiveKind};
use crate::synth::Meter;

/// A memoryless profile: `choice[a][b]` is agent `a`'s action on block `b`.
pub type Choice = Vec<Vec<ActionId>>;

pub(crate) enum Partial {
    Win,
    Unknown,
    Fail(BTreeSet<usize>),
}

pub(crate) struct Arena<'a> {
    pub g: &'a Game,
    kind: ObjectiveKind,
    covered: Vec<bool>,
    /// `blocks[a][l]`
    blocks: Vec<Vec<usize>>,
    pub offsets: Vec<usize>,
    pub num_vars: usize,
}

impl<'a> Arena<'a> {
    pub fn new(g: &'a Game, obj: &Objective) -> Self {
        let blocks: Vec<Vec<usize>> = g
            .agents()
            .map(|a| g.locations().map(|l| g.block_of(a, l).expect("partition covers locations").0).collect())
            .collect();
        let mut offsets = Vec::with_capacity(g.num_agents());
        let mut n = 0;
        for a in g.agents() {
            offsets.push(n);
            n += g.observations(a).len();
        }
        Arena { g, kind: obj.kind, covered: obj.coverage(g), blocks, offsets, num_vars: n }
    }

    pub fn var(&self, a: usize, l: LocId) -> usize {
        self.offsets[a] + self.blocks[a][l.0]
    }

    pub fn agent_of(&self, v: usize) -> usize {
        self.offsets.iter().rposition(|&o| o <= v).expect("offsets start at zero")
    }

    /// Joint action at `l`, or `None` if some agent's class is unassigned.
    /// Every variable consulted is added to `read`.
    fn action_at(&self, l: LocId, vals: &[Option<ActionId>], read: &mut BTreeSet<usize>) -> Option<JointAction> {
        let mut out = Vec::with_capacity(self.blocks.len());
        for a in 0..self.blocks.len() {
            let v = self.var(a, l);
            out.push(vals[v]?);
            read.insert(v);
        }
        Some(JointAction(out))
    }

    pub fn check(&self, vals: &[Option<ActionId>]) -> Partial {
        match self.kind {
            ObjectiveKind::Reach => self.check_reach(vals),
            ObjectiveKind::Safe => self.check_safe(vals),
        }
    }

    fn check_reach(&self, vals: &[Option<ActionId>]) -> Partial {
        let n = self.g.num_locations();
        let init = self.g.initial();
        if self.covered[init.0] {
            return Partial::Win;
        }
        // 0 unvisited, 1 on stack, 2 finished
        let mut colour = vec![0u8; n];
        let mut read = BTreeSet::new();
        let mut unknown = false;
        let mut stack: Vec<(LocId, Vec<LocId>, usize)> = Vec::new();
        let open = |l: LocId, read: &mut BTreeSet<usize>, unknown: &mut bool| -> Option<Option<Vec<LocId>>> {
            match self.action_at(l, vals, read) {
                None => {
                    *unknown = true;
                    Some(None)
                }
                Some(sigma) => {
                    let succ = self.g.successors(l, &sigma);
                    if succ.is_empty() {
                        None
                    } else {
                        Some(Some(succ))
                    }
                }
            }
        };
        colour[init.0] = 1;
        match open(init, &mut read, &mut unknown) {
            None => return Partial::Fail(read),
            Some(None) => return Partial::Unknown,
            Some(Some(s)) => stack.push((init, s, 0)),
        }
        while let Some((l, succ, i)) = stack.last_mut() {
            if *i == succ.len() {
                colour[l.0] = 2;
                stack.pop();
                continue;
            }
            let l2 = succ[*i];
            *i += 1;
            if self.covered[l2.0] || colour[l2.0] == 2 {
                continue;
            }
            if colour[l2.0] == 1 {
                return Partial::Fail(read);
            }
            colour[l2.0] = 1;
            match open(l2, &mut read, &mut unknown) {
                None => return Partial::Fail(read),
                Some(None) => colour[l2.0] = 2,
                Some(Some(s)) => stack.push((l2, s, 0)),
            }
        }
        if unknown {
            Partial::Unknown
        } else {
            Partial::Win
        }
    }

    fn check_safe(&self, vals: &[Option<ActionId>]) -> Partial {
        let mut seen = vec![false; self.g.num_locations()];
        let mut read = BTreeSet::new();
        let mut unknown = false;
        let mut queue = vec![self.g.initial()];
        seen[self.g.initial().0] = true;
        while let Some(l) = queue.pop() {
            if !self.covered[l.0] {
                return Partial::Fail(read);
            }
            let Some(sigma) = self.action_at(l, vals, &mut read) else {
                unknown = true;
                continue;
            };
            let succ = self.g.successors(l, &sigma);
            if succ.is_empty() {
                return Partial::Fail(read);
            }
            for l2 in succ {
                if !seen[l2.0] {
                    seen[l2.0] = true;
                    queue.push(l2);
                }
            }
        }
        if unknown {
            Partial::Unknown
        } else {
            Partial::Win
        }
    }

    pub fn finish(&self, vals: &[Option<ActionId>]) -> Choice {
        (0..self.blocks.len())
            .map(|a| {
                let len = self.g.observations(AgentId(a)).len();
                (0..len).map(|b| vals[self.offsets[a] + b].unwrap_or(ActionId(0))).collect()
            })
            .collect()
    }
}

/// Hooks used to specialise the search.
pub(crate) trait Guide {
    /// Actions to try for variable `v`, in order.
    fn order(&self, v: usize) -> Vec<ActionId>;
    /// Extra pruning after assigning `v`; returns a conflict set on failure.
    fn prune(&self, _v: usize, _vals: &[Option<ActionId>]) -> Option<BTreeSet<usize>> {
        None
    }
}

struct Lexicographic<'a>(&'a Arena<'a>);

impl Guide for Lexicographic<'_> {
    fn order(&self, v: usize) -> Vec<ActionId> {
        let a = self.0.agent_of(v);
        (0..self.0.g.actions(AgentId(a)).len()).map(ActionId).collect()
    }
}

pub(crate) fn search(arena: &Arena<'_>, guide: &dyn Guide, meter: &mut Meter) -> Result<Option<Choice>> {
    let mut vals = vec![None; arena.num_vars];
    meter.tick()?;
    match arena.check(&vals) {
        Partial::Win => return Ok(Some(arena.finish(&vals))),
        Partial::Fail(_) => return Ok(None),
        Partial::Unknown => {}
    }
    match descend(arena, guide, 0, &mut vals, meter)? {
        Ok(c) => Ok(Some(c)),
        Err(_) => Ok(None),
    }
}

/// Ok(profile) on success, Err(conflict set) when every extension fails.
fn descend(
    arena: &Arena<'_>,
    guide: &dyn Guide,
    v: usize,
    vals: &mut Vec<Option<ActionId>>,
    meter: &mut Meter,
) -> Result<std::result::Result<Choice, BTreeSet<usize>>> {
    // An Unknown check always reads some unassigned variable, so v is in range.
    let mut conflict = BTreeSet::new();
    for x in guide.order(v) {
        meter.tick()?;
        vals[v] = Some(x);
        let outcome = match guide.prune(v, vals) {
            Some(c) => Partial::Fail(c),
            None => arena.check(vals),
        };
        match outcome {
            Partial::Win => return Ok(Ok(arena.finish(vals))),
            Partial::Fail(c) => {
                if !c.contains(&v) {
                    vals[v] = None;
                    return Ok(Err(c));
                }
                conflict.extend(c);
            }
            Partial::Unknown => match descend(arena, guide, v + 1, vals, meter)? {
                Ok(p) => return Ok(Ok(p)),
                Err(c) => {
                    if !c.contains(&v) {
                        vals[v] = None;
                        return Ok(Err(c));
                    }
                    conflict.extend(c);
                }
            },
        }
    }
    vals[v] = None;
    conflict.remove(&v);
    Ok(Err(conflict))
}

/// The first winning memoryless profile of `g` for `obj` in lexicographic
/// order (agents, then blocks, then actions in declaration order).
pub fn enumerate_profiles(g: &Game, obj: &Objective, meter: &mut Meter) -> Result<Option<Choice>> {
    obj.check(g)?;
    let arena = Arena::new(g, obj);
    search(&arena, &Lexicographic(&arena), meter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mkbsc::{check_pdk, expand_to, translate_objective, Case, Limits};
    use crate::strategy::validate_memoryless;

    /// Plain odometer over every profile.
    pub(crate) fn brute_force(g: &Game, obj: &Objective) -> Option<Choice> {
        let sizes: Vec<(usize, usize)> =
            g.agents().map(|a| (g.observations(a).len(), g.actions(a).len())).collect();
        let mut choice: Choice = sizes.iter().map(|&(b, _)| vec![ActionId(0); b]).collect();
        loop {
            if validate_memoryless(g, obj, &choice).unwrap().is_winning() {
                return Some(choice);
            }
            // increment, last digit fastest
            let mut carried = true;
            'inc: for a in (0..sizes.len()).rev() {
                for b in (0..sizes[a].0).rev() {
                    if choice[a][b].0 + 1 < sizes[a].1 {
                        choice[a][b].0 += 1;
                        carried = false;
                        break 'inc;
                    }
                    choice[a][b] = ActionId(0);
                }
            }
            if carried {
                return None;
            }
        }
    }

    #[test]
    fn cup_first_level_has_no_profile_for_win() {
        let g = fixtures::cup();
        let chain = expand_to(&g, Case::NN, 1, Limits::default()).unwrap();
        let obj = translate_objective(&fixtures::cup_reach_win(&g), &chain[0]).unwrap();
        assert_eq!(enumerate_profiles(chain[0].game(), &obj, &mut Meter::unlimited()).unwrap(), None);
        assert_eq!(brute_force(chain[0].game(), &obj), None);
    }

    #[test]
    fn cup_first_level_good_matches_brute_force() {
        let g = fixtures::cup();
        let chain = expand_to(&g, Case::NN, 1, Limits::default()).unwrap();
        let obj = translate_objective(&fixtures::cup_reach_good(&g), &chain[0]).unwrap();
        let got = enumerate_profiles(chain[0].game(), &obj, &mut Meter::unlimited()).unwrap();
        assert_eq!(got, brute_force(chain[0].game(), &obj));
        assert!(got.is_some());
        assert!(check_pdk(&chain[0]).holds());
    }

    #[test]
    fn initial_target_takes_first_profile() {
        let g = fixtures::cup();
        let obj = crate::io::dsl::parse_objective("reach\nr0 {start}\n", &g).unwrap();
        let got = enumerate_profiles(&g, &obj, &mut Meter::unlimited()).unwrap().unwrap();
        assert!(got.iter().flatten().all(|&x| x == ActionId(0)));
    }

    #[test]
    fn budget_is_reported() {
        let g = fixtures::cup();
        let chain = expand_to(&g, Case::NN, 2, Limits::default()).unwrap();
        let obj = translate_objective(&translate_objective(&fixtures::cup_reach_win(&g), &chain[0]).unwrap(), &chain[1]).unwrap();
        let mut meter = Meter::new(Some(3), None);
        assert!(matches!(
            enumerate_profiles(chain[1].game(), &obj, &mut meter),
            Err(crate::Error::BudgetExceeded(_))
        ));
    }
}
