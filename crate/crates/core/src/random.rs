//! Random small games for property tests and benchmarks.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::{ActionId, AgentId, BlockId, Game, JointAction, LocId, Objective, ObjectiveKind, Transition};

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub locations: RangeInclusive<usize>,
    pub agents: RangeInclusive<usize>,
    pub actions: RangeInclusive<usize>,
    /// Chance that a joint action is available at a location.
    pub density: f64,
    /// Most successors of one (location, joint action) pair.
    pub max_branching: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { locations: 2..=6, agents: 2..=3, actions: 1..=3, density: 0.6, max_branching: 2 }
    }
}

fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<LocId>> {
    let k = rng.gen_range(1..=n);
    let mut blocks = vec![Vec::new(); k];
    // Seed each block so none is empty.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (i, &l) in order.iter().enumerate() {
        let b = if i < k { i } else { rng.gen_range(0..k) };
        blocks[b].push(LocId(l));
    }
    for b in &mut blocks {
        b.sort();
    }
    blocks.sort();
    blocks
}

/// A valid game; every location has at least one outgoing transition.
pub fn random_game<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Game {
    let n = rng.gen_range(spec.locations.clone());
    let agents = rng.gen_range(spec.agents.clone());
    let actions: Vec<Vec<String>> = (0..agents)
        .map(|_| (0..rng.gen_range(spec.actions.clone())).map(|x| format!("x{x}")).collect())
        .collect();
    let observations = (0..agents).map(|_| random_partition(rng, n)).collect();
    let mut joint: Vec<JointAction> = vec![JointAction(Vec::new())];
    for acts in &actions {
        joint = joint
            .into_iter()
            .flat_map(|ja| {
                (0..acts.len()).map(move |x| {
                    let mut v = ja.0.clone();
                    v.push(ActionId(x));
                    JointAction(v)
                })
            })
            .collect();
    }
    let mut transitions = Vec::new();
    for l in 0..n {
        let mut any = false;
        for (i, ja) in joint.iter().enumerate() {
            let last = i + 1 == joint.len();
            if rng.gen_bool(spec.density) || (last && !any) {
                any = true;
                let k = rng.gen_range(1..=spec.max_branching.max(1));
                for _ in 0..k {
                    transitions.push(Transition { from: LocId(l), action: ja.clone(), to: LocId(rng.gen_range(0..n)) });
                }
            }
        }
    }
    Game::from_parts(
        (0..agents).map(|a| format!("p{a}")).collect(),
        (0..n).map(|l| format!("l{l}")).collect(),
        LocId(0),
        actions,
        observations,
        transitions,
    )
}

/// A random non-empty set of (agent, block) targets.
pub fn random_objective<R: Rng>(rng: &mut R, g: &Game, kind: ObjectiveKind) -> Objective {
    let all: Vec<(AgentId, BlockId)> = g
        .agents()
        .flat_map(|a| (0..g.observations(a).len()).map(move |b| (a, BlockId(b))))
        .collect();
    let k = rng.gen_range(1..=all.len().min(3));
    let targets: BTreeSet<_> = all.choose_multiple(rng, k).copied().collect();
    Objective { kind, targets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate_game;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_games_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let g = random_game(&mut rng, &RandomSpec::default());
            assert!(validate_game(&g).is_empty());
            assert!(g.locations().all(|l| !g.out_edges(l).is_empty()));
            let o = random_objective(&mut rng, &g, ObjectiveKind::Reach);
            o.check(&g).unwrap();
        }
    }
}
