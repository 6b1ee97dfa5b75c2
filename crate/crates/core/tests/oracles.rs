//! Expansion checked against independent brute-force constructions on
//! random games.

mod support;

use std::collections::BTreeSet;

use mkbsc::game::{validate_game, ActionId, AgentId, Game, JointAction, LocId, LocSet};
use mkbsc::mkbsc::{check_pdk, expand_to, kbsc, mkbsc_expand, project, Case, ExpandedGame, Limits};
use mkbsc::random::{random_game, RandomSpec};
use mkbsc::{add_dummy_agent, fixtures};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::characterisation;

fn label(case: Case, ja: &JointAction, a: AgentId) -> Vec<ActionId> {
    match case {
        Case::NN => vec![ja.get(a)],
        Case::NY => ja.0.clone(),
    }
}

type Subsets = (BTreeSet<LocSet>, BTreeSet<(LocSet, Vec<ActionId>, LocSet)>);
type Product = (BTreeSet<Vec<LocSet>>, BTreeSet<(Vec<LocSet>, JointAction, Vec<LocSet>)>);

/// Subset construction straight from the transition list.
fn subsets(g: &Game, a: AgentId, case: Case) -> Subsets {
    let labels: BTreeSet<Vec<ActionId>> = g.transitions().iter().map(|t| label(case, &t.action, a)).collect();
    let mut states = BTreeSet::from([vec![g.initial()]]);
    let mut edges = BTreeSet::new();
    let mut todo = vec![vec![g.initial()]];
    while let Some(s) = todo.pop() {
        for x in &labels {
            for o in g.observations(a).blocks() {
                let mut next: LocSet = g
                    .transitions()
                    .iter()
                    .filter(|t| s.contains(&t.from) && &label(case, &t.action, a) == x && o.contains(&t.to))
                    .map(|t| t.to)
                    .collect();
                next.sort();
                next.dedup();
                if next.is_empty() {
                    continue;
                }
                edges.insert((s.clone(), x.clone(), next.clone()));
                if states.insert(next.clone()) {
                    todo.push(next);
                }
            }
        }
    }
    (states, edges)
}

fn inter(sets: &[&LocSet]) -> LocSet {
    let mut acc = sets[0].clone();
    for s in &sets[1..] {
        acc.retain(|l| s.contains(l));
    }
    acc
}

/// All tuples of subsets, composed and pruned naively, reachable part only.
fn naive_product(g: &Game, case: Case) -> Product {
    let parts: Vec<_> = g.agents().map(|a| subsets(g, a, case)).collect();
    let init: Vec<LocSet> = g.agents().map(|_| vec![g.initial()]).collect();
    let mut seen = BTreeSet::from([init.clone()]);
    let mut edges = BTreeSet::new();
    let mut todo = vec![init];
    while let Some(t) = todo.pop() {
        let from = inter(&t.iter().collect::<Vec<_>>());
        for ja in g.joint_actions() {
            // candidate successor tuples: any combination of per-agent successors
            let mut cands: Vec<Vec<LocSet>> = vec![Vec::new()];
            for a in g.agents() {
                let succ: Vec<&LocSet> = parts[a.0]
                    .1
                    .iter()
                    .filter(|(s, x, _)| s == &t[a.0] && x == &label(case, &ja, a))
                    .map(|(_, _, n)| n)
                    .collect();
                cands = cands
                    .into_iter()
                    .flat_map(|c| {
                        succ.iter().map(move |n| {
                            let mut c = c.clone();
                            c.push((*n).clone());
                            c
                        })
                    })
                    .collect();
            }
            for c in cands {
                let to = inter(&c.iter().collect::<Vec<_>>());
                if to.is_empty() {
                    continue;
                }
                let real = from.iter().any(|&l| to.iter().any(|&l2| g.has_transition(l, &ja, l2)));
                if !real {
                    continue;
                }
                edges.insert((t.clone(), ja.clone(), c.clone()));
                if seen.insert(c.clone()) {
                    todo.push(c);
                }
            }
        }
    }
    (seen, edges)
}

fn tuple(eg: &ExpandedGame, l: LocId) -> Vec<LocSet> {
    eg.game().agents().map(|a| eg.part(a).states[eg.component(l, a)].clone()).collect()
}

fn games(seed: u64, n: usize) -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_game(&mut rng, &RandomSpec::default())).collect()
}

#[test]
fn kbsc_matches_brute_force_subsets() {
    for g in games(1, 60) {
        for case in [Case::NN, Case::NY] {
            for a in g.agents() {
                let p = kbsc(&project(&g, a, case).unwrap());
                let (states, edges) = subsets(&g, a, case);
                assert_eq!(p.states.iter().cloned().collect::<BTreeSet<_>>(), states);
                let got: BTreeSet<_> = p
                    .edges
                    .iter()
                    .enumerate()
                    .flat_map(|(s, es)| es.iter().map(move |(x, t)| (s, x.clone(), *t)))
                    .map(|(s, x, t)| (p.states[s].clone(), x, p.states[t].clone()))
                    .collect();
                assert_eq!(got, edges);
            }
        }
    }
}

#[test]
fn product_matches_naive_composition() {
    for g in games(2, 60) {
        for case in [Case::NN, Case::NY] {
            let eg = mkbsc_expand(&g, case).unwrap();
            assert!(validate_game(eg.game()).is_empty());
            let (states, edges) = naive_product(&g, case);
            let got: BTreeSet<_> = eg.game().locations().map(|l| tuple(&eg, l)).collect();
            assert_eq!(got, states);
            let got_edges: BTreeSet<_> = eg
                .game()
                .transitions()
                .iter()
                .map(|t| (tuple(&eg, t.from), t.action.clone(), tuple(&eg, t.to)))
                .collect();
            assert_eq!(got_edges, edges);
            // the observation of each agent is its own component
            for a in g.agents() {
                for u in eg.game().locations() {
                    for v in eg.game().locations() {
                        let same = eg.game().block_of(a, u) == eg.game().block_of(a, v);
                        assert_eq!(same, eg.component(u, a) == eg.component(v, a));
                    }
                }
            }
        }
    }
}

#[test]
fn characterisation_at_levels_one_and_two() {
    let spec = RandomSpec { locations: 2..=5, agents: 2..=2, actions: 1..=2, ..RandomSpec::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let g = random_game(&mut rng, &spec);
        let chain = expand_to(&g, Case::NN, 2, Limits::default()).unwrap();
        let pdk = check_pdk(&chain[0]).holds();
        assert!(characterisation(&chain[0], pdk) > 0);
        characterisation(&chain[1], pdk);
    }
}

#[test]
fn second_expansion_always_has_pdk() {
    for g in games(4, 40) {
        let chain = expand_to(&g, Case::NN, 2, Limits::default()).unwrap();
        assert!(check_pdk(&chain[1]).holds());
        if g.locations_distinguishable() {
            assert!(check_pdk(&chain[0]).holds());
        }
        let with_dummy = add_dummy_agent(&g);
        assert!(check_pdk(&mkbsc_expand(&with_dummy, Case::NN).unwrap()).holds());
    }
}

#[test]
fn expansions_of_fixtures_are_valid_games() {
    for g in [fixtures::cup(), fixtures::turn(), fixtures::spurious(), fixtures::orientation()] {
        for case in [Case::NN, Case::NY] {
            for eg in expand_to(&g, case, 2, Limits::default()).unwrap() {
                assert!(validate_game(eg.game()).is_empty());
                assert!(g.agents().all(|a| !eg.game().observations(a).is_empty()));
            }
        }
    }
}
