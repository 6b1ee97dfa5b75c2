//! Shared checks for strategy suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mkbsc::game::{AgentId, BlockId, JointAction, LocId, LocSet};
use mkbsc::knowledge::update::Updater;
use mkbsc::mkbsc::ExpandedGame;
use mkbsc::strategy::{induced_transducer, run_kbs_step, run_step, Input, Profile, Step};
use mkbsc::synth::Choice;
use mkbsc::{ActionId, Case};
use rand::seq::SliceRandom;
use rand::Rng;

/// Maps a memoryless profile of `eg`'s parent game to `eg` through each
/// agent's component.
pub fn map_forward(eg: &ExpandedGame, parent: &Choice) -> Choice {
    eg.game()
        .agents()
        .map(|a| {
            (0..eg.game().observations(a).len())
                .map(|b| {
                    let p = eg.block_part(a, BlockId(b));
                    parent[a.0][eg.part(a).blocks[p].0]
                })
                .collect()
        })
        .collect()
}

fn random_input<R: Rng>(rng: &mut R, eg: &ExpandedGame, a: AgentId, own: ActionId, known: &[Input]) -> Input {
    let g = eg.base();
    if !known.is_empty() && rng.gen_bool(0.75) {
        return known.choose(rng).unwrap().clone();
    }
    let b = BlockId(rng.gen_range(0..g.observations(a).len()));
    match eg.case() {
        Case::NN => (None, b),
        Case::NY => {
            let mut ja: Vec<ActionId> = g.agents().map(|c| ActionId(rng.gen_range(0..g.actions(c).len()))).collect();
            if rng.gen_bool(0.8) {
                ja[a.0] = own;
            }
            (Some(JointAction(ja)), b)
        }
    }
}

/// Runs the induced transducer and the knowledge-based strategy side by
/// side on random input sequences; returns how many sequences disagree.
pub fn trace_mismatches<R: Rng>(eg: &ExpandedGame, profile: &Profile, rng: &mut R, sequences: usize, len: usize) -> usize {
    let updater = Updater::new(eg.base(), eg.case());
    let mut bad = 0;
    for a in eg.game().agents() {
        let actions = profile.by_part(eg, a).expect("complete profile");
        let t = induced_transducer(eg, a, &actions).expect("induced transducer");
        let alpha = &profile.strategies[a.0];
        for _ in 0..sequences {
            let mut m = t.initial;
            let mut k = eg.part_label(a, t.initial).clone();
            if alpha.action(&k) != Some(t.output[m]) {
                bad += 1;
                continue;
            }
            for _ in 0..len {
                let known: Vec<Input> = t.next.keys().filter(|(x, _)| *x == m).map(|(_, i)| i.clone()).collect();
                let o = random_input(rng, eg, a, t.output[m], &known);
                let left = run_step(&t, m, &o);
                let right = run_kbs_step(&updater, &k, alpha, &o).expect("knowledge step");
                match (left, right) {
                    (Step::Halt, Step::Halt) => break,
                    (Step::Continue { memory, action }, Step::Continue { memory: k2, action: x2 })
                        if action == x2 && t.memory[memory] == k2.to_text(eg.base()) =>
                    {
                        m = memory;
                        k = k2;
                    }
                    _ => {
                        bad += 1;
                        break;
                    }
                }
            }
        }
    }
    bad
}

/// For every joint state, joint action and joint observation, the set X
/// of base successors is non-empty exactly when a unique matching edge
/// exists, X lies within its intersection, and equals it under PDK.
pub fn characterisation(eg: &ExpandedGame, pdk_level1: bool) -> usize {
    let g = eg.base();
    let gg = eg.game();
    let joint_obs: Vec<Vec<BlockId>> = g.agents().fold(vec![Vec::new()], |acc, a| {
        acc.into_iter()
            .flat_map(|v| {
                (0..g.observations(a).len()).map(move |b| {
                    let mut v = v.clone();
                    v.push(BlockId(b));
                    v
                })
            })
            .collect()
    });
    let mut checked = 0;
    for s in gg.locations() {
        let cap_s = eg.cap(s);
        for ja in g.joint_actions() {
            for o in &joint_obs {
                let inside: LocSet = g
                    .locations()
                    .filter(|&l| g.agents().all(|a| g.block_of(a, l) == Some(o[a.0])))
                    .collect();
                let x: BTreeSet<LocId> = inside
                    .iter()
                    .copied()
                    .filter(|&l2| cap_s.iter().any(|&l| g.has_transition(l, &ja, l2)))
                    .collect();
                let matches: Vec<LocId> = gg
                    .out_edges(s)
                    .iter()
                    .filter(|(x2, _)| *x2 == ja)
                    .map(|&(_, t)| t)
                    .filter(|&t| g.agents().all(|a| eg.hat(t, a).iter().all(|&l| g.block_of(a, l) == Some(o[a.0]))))
                    .collect();
                assert_eq!(!x.is_empty(), !matches.is_empty(), "iff clause");
                if let Some(&t) = matches.first() {
                    assert_eq!(matches.len(), 1, "uniqueness");
                    let cap_t: BTreeSet<LocId> = eg.cap(t).iter().copied().collect();
                    assert!(x.is_subset(&cap_t), "subset clause");
                    if pdk_level1 {
                        assert_eq!(x, cap_t, "equality under PDK");
                    }
                }
                checked += 1;
            }
        }
    }
    checked
}
