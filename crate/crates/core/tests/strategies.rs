mod support;

use mkbsc::fixtures;
use mkbsc::game::{Game, ObjectiveKind};
use mkbsc::mkbsc::{check_pdk, expand_to, objective_at, Case, Limits};
use mkbsc::random::{random_game, random_objective, RandomSpec};
use mkbsc::strategy::{induced_profile, validate_memoryless, validate_profile, Profile};
use mkbsc::synth::{enumerate_profiles, global_loop, heuristic_synth, Meter, SynthConfig, SynthOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{map_forward, trace_mismatches};

fn small() -> RandomSpec {
    RandomSpec { locations: 2..=5, agents: 2..=2, actions: 1..=2, ..RandomSpec::default() }
}

#[test]
fn winning_profiles_induce_winning_transducers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut found = 0;
    for _ in 0..200 {
        let g = random_game(&mut rng, &small());
        let obj = random_objective(&mut rng, &g, ObjectiveKind::Reach);
        let Ok(chain) = expand_to(&g, Case::NN, 2, Limits { max_states: Some(300) }) else { continue };
        let objs = objective_at(&obj, &chain).unwrap();
        for (eg, o) in chain.iter().zip(&objs) {
            if let Some(c) = enumerate_profiles(eg.game(), o, &mut Meter::unlimited()).unwrap() {
                found += 1;
                let p = Profile::from_blocks(eg, &c);
                let ts = induced_profile(eg, &p).unwrap();
                assert!(validate_profile(&g, &obj, &ts).unwrap().is_winning());
                assert_eq!(trace_mismatches(eg, &p, &mut rng, 50, 6), 0);
                // a winning profile stays winning one level up
                let up = mkbsc::mkbsc::expand_again(eg).unwrap();
                let o2 = mkbsc::mkbsc::translate_objective(o, &up).unwrap();
                assert!(validate_memoryless(up.game(), &o2, &map_forward(&up, &c)).unwrap().is_winning());
                break;
            }
        }
    }
    assert!(found >= 30, "only {found} games with a profile");
}

#[test]
fn base_profiles_map_to_winning_profiles_under_pdk() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..300 {
        let g = random_game(&mut rng, &small());
        let obj = random_objective(&mut rng, &g, ObjectiveKind::Reach);
        let Some(base) = enumerate_profiles(&g, &obj, &mut Meter::unlimited()).unwrap() else { continue };
        let eg = mkbsc::mkbsc::mkbsc_expand(&g, Case::NN).unwrap();
        if !check_pdk(&eg).holds() {
            continue;
        }
        let k = mkbsc::mkbsc::translate_objective(&obj, &eg).unwrap();
        assert!(validate_memoryless(eg.game(), &k, &map_forward(&eg, &base)).unwrap().is_winning());
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} games checked");
}

#[test]
fn heuristic_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let g: Game = random_game(&mut rng, &small());
        let obj = random_objective(&mut rng, &g, ObjectiveKind::Reach);
        let Ok(chain) = expand_to(&g, Case::NN, 2, Limits { max_states: Some(300) }) else { continue };
        let objs = objective_at(&obj, &chain).unwrap();
        for (j, eg) in chain.iter().enumerate() {
            let parent = if j == 0 { &obj } else { &objs[j - 1] };
            let e = enumerate_profiles(eg.game(), &objs[j], &mut Meter::unlimited()).unwrap();
            let h = heuristic_synth(eg, &objs[j], parent, &mut Meter::unlimited()).unwrap();
            assert_eq!(e.is_some(), h.is_some());
            if let Some(c) = h {
                assert!(validate_memoryless(eg.game(), &objs[j], &c).unwrap().is_winning());
            }
        }
    }
}

#[test]
fn stable_means_nothing_further_up() {
    for (g, obj) in [
        (fixtures::orientation(), fixtures::orientation_reach_win(&fixtures::orientation())),
        (fixtures::turn(), fixtures::turn_reach_win(&fixtures::turn())),
    ] {
        let cfg = SynthConfig { max_iterations: 4, ..SynthConfig::default() };
        let SynthOutcome::Stable(j) = global_loop(&g, &obj, &cfg).unwrap() else { panic!("expected Stable") };
        let chain = expand_to(&g, Case::NN, j + 2, Limits::default()).unwrap();
        let objs = objective_at(&obj, &chain).unwrap();
        for m in 1..=2 {
            let eg = &chain[j + m - 1];
            assert_eq!(enumerate_profiles(eg.game(), &objs[j + m - 1], &mut Meter::unlimited()).unwrap(), None);
        }
    }
}

#[test]
fn cup_second_order_traces_agree() {
    let g = fixtures::cup();
    let cfg = SynthConfig::default();
    let SynthOutcome::Found(f) = global_loop(&g, &fixtures::cup_reach_win(&g), &cfg).unwrap() else { panic!() };
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    assert_eq!(trace_mismatches(&f.expansion, &f.profile, &mut rng, 300, 8), 0);
}

#[test]
fn safety_synthesis() {
    let g = fixtures::cup();
    // stay out of spill: grab, then squeeze forever
    let obj = mkbsc::io::dsl::parse_objective("safe\nr0 {start}\nr0 {bad}\nr0 {good}\nr0 {win}\n", &g).unwrap();
    let cfg = SynthConfig { max_iterations: 2, ..SynthConfig::default() };
    match global_loop(&g, &obj, &cfg).unwrap() {
        SynthOutcome::Found(f) => assert!(validate_profile(&g, &obj, &f.transducers).unwrap().is_winning()),
        other => panic!("{other:?}"),
    }
}
