//! One PASS/FAIL line per acceptance criterion, each under its time limit.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mkbsc::fixtures;
use mkbsc::game::ObjectiveKind;
use mkbsc::io::profile::{parse_profile, parse_transducers};
use mkbsc::mkbsc::{check_pdk, expand_to, mkbsc_expand, translate_objective, Limits};
use mkbsc::random::{random_game, random_objective, RandomSpec};
use mkbsc::strategy::{validate_memoryless, validate_profile};
use mkbsc::synth::{enumerate_profiles, game_isomorphic, Found, Meter};
use mkbsc::{add_dummy_agent, global_loop, Case, SynthConfig, SynthOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{characterisation, map_forward, trace_mismatches};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mkbsc")).args(args).output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    ensure(out.status.success(), format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    Ok(text)
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

fn small() -> RandomSpec {
    RandomSpec { locations: 2..=5, agents: 2..=2, actions: 1..=2, ..RandomSpec::default() }
}

fn c1() -> Check {
    let out = cli(&[
        "check",
        &path("cup.game"),
        "--objective",
        &path("cup_good.obj"),
        "--profile",
        &path("cup_first_order.profile"),
    ])?;
    ensure(out.lines().any(|l| l == "verdict: winning"), out.clone())?;
    Ok("first-order profile wins on good".into())
}

fn c2() -> Check {
    let g = fixtures::cup();
    let eg = mkbsc_expand(&g, Case::NN).map_err(|e| e.to_string())?;
    let obj = translate_objective(&fixtures::cup_reach_win(&g), &eg).map_err(|e| e.to_string())?;
    let mut meter = Meter::unlimited();
    let r = enumerate_profiles(eg.game(), &obj, &mut meter).map_err(|e| e.to_string())?;
    ensure(r.is_none(), "found a first-order profile")?;
    Ok(format!("exhausted after {} nodes", meter.nodes()))
}

/// Criterion 3; the found profile is reused by criterion 8.
fn c3(keep: &mut Vec<Found>) -> Check {
    let g = fixtures::cup();
    let obj = fixtures::cup_reach_win(&g);
    let SynthOutcome::Found(f) = global_loop(&g, &obj, &SynthConfig::default()).map_err(|e| e.to_string())? else {
        return Err("no profile".into());
    };
    ensure(f.level == 2, format!("found at {}", f.level))?;
    let table = parse_profile(fixtures::CUP_SECOND_ORDER_PROFILE, &g).map_err(|e| e.to_string())?;
    let mut listed = 0;
    for (got, want) in f.profile.strategies.iter().zip(&table.strategies) {
        for (k, act) in &want.actions {
            ensure(got.action(k) == Some(*act), format!("differs at {}", k.to_text(&g)))?;
            listed += 1;
        }
    }
    ensure(validate_profile(&g, &obj, &f.transducers).map_err(|e| e.to_string())?.is_winning(), "not winning")?;
    keep.push(*f);
    Ok(format!("found at iteration 2, {listed} listed states agree"))
}

fn c4() -> Check {
    let out = cli(&["stabilize", &path("cup.game")])?;
    ensure(out.lines().any(|l| l == "stable at 2"), out.clone())?;
    let g = fixtures::cup();
    let chain = expand_to(&g, Case::NN, 3, Limits::default()).map_err(|e| e.to_string())?;
    let (k1, k2, k3) = (chain[0].game(), chain[1].game(), chain[2].game());
    ensure(game_isomorphic(k2, None, k3, None).isomorphic, "level 2 and 3 differ")?;
    ensure(!game_isomorphic(k1, None, k2, None).isomorphic, "level 1 and 2 isomorphic")?;
    Ok("stable at 2".into())
}

fn c5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let (mut n, mut sufficient, mut skipped) = (0, 0, 0);
    while n < 100 {
        let g = random_game(&mut rng, &RandomSpec::default());
        let Ok(chain) = expand_to(&g, Case::NN, 2, Limits { max_states: Some(2000) }) else {
            skipped += 1;
            continue;
        };
        ensure(check_pdk(&chain[1]).holds(), format!("second expansion lacks PDK:\n{}", mkbsc::io::dsl::serialize_game(&g)))?;
        if g.locations_distinguishable() {
            ensure(check_pdk(&chain[0]).holds(), "sufficient condition violated")?;
            sufficient += 1;
        }
        let d = mkbsc_expand(&add_dummy_agent(&g), Case::NN).map_err(|e| e.to_string())?;
        ensure(check_pdk(&d).holds(), "dummy agent lacks PDK")?;
        n += 1;
    }
    Ok(format!("{n} games, {sufficient} with distinguishable locations, {skipped} over 2000 states skipped"))
}

fn c6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut triples = 0;
    for _ in 0..50 {
        let g = random_game(&mut rng, &small());
        let chain = expand_to(&g, Case::NN, 2, Limits::default()).map_err(|e| e.to_string())?;
        let pdk = check_pdk(&chain[0]).holds();
        let run = |j: usize| std::panic::catch_unwind(|| characterisation(&chain[j], pdk));
        triples += run(0).map_err(|_| "level 1 clause failed")?;
        triples += run(1).map_err(|_| "level 2 clause failed")?;
    }
    Ok(format!("50 games, {triples} (s, action, observation) triples"))
}

fn c7(keep: &mut Vec<Found>) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let mut found = 0;
    while found < 30 {
        let g = random_game(&mut rng, &small());
        let obj = random_objective(&mut rng, &g, ObjectiveKind::Reach);
        let cfg = SynthConfig { max_iterations: 2, ..SynthConfig::default() };
        let Ok(SynthOutcome::Found(f)) = global_loop(&g, &obj, &cfg) else { continue };
        ensure(validate_profile(&g, &obj, &f.transducers).map_err(|e| e.to_string())?.is_winning(), "induced profile loses")?;
        found += 1;
        keep.push(*f);
    }
    let mut converse = 0;
    while converse < 30 {
        let g = random_game(&mut rng, &small());
        let obj = random_objective(&mut rng, &g, ObjectiveKind::Reach);
        let Some(base) = enumerate_profiles(&g, &obj, &mut Meter::unlimited()).map_err(|e| e.to_string())? else { continue };
        let eg = mkbsc_expand(&g, Case::NN).map_err(|e| e.to_string())?;
        if !check_pdk(&eg).holds() {
            continue;
        }
        let k = translate_objective(&obj, &eg).map_err(|e| e.to_string())?;
        let v = validate_memoryless(eg.game(), &k, &map_forward(&eg, &base)).map_err(|e| e.to_string())?;
        ensure(v.is_winning(), "mapped base profile loses")?;
        converse += 1;
    }
    Ok(format!("{found} synthesised, {converse} mapped under PDK"))
}

fn c8(keep: &[Found]) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut bad = 0;
    for f in keep {
        bad += trace_mismatches(&f.expansion, &f.profile, &mut rng, 1000, 10);
    }
    ensure(keep.len() >= 31, format!("only {} profiles", keep.len()))?;
    ensure(bad == 0, format!("{bad} sequences disagree"))?;
    Ok(format!("{} profiles, 1000 sequences per agent", keep.len()))
}

fn c9() -> Check {
    let g = fixtures::orientation();
    let obj = fixtures::orientation_reach_win(&g);
    let cfg = SynthConfig { max_iterations: 5, ..SynthConfig::default() };
    let out = global_loop(&g, &obj, &cfg).map_err(|e| e.to_string())?;
    let SynthOutcome::Stable(j) = out else { return Err(format!("{out:?}")) };
    let ts = parse_transducers(fixtures::ORIENTATION_TRANSDUCERS, &g).map_err(|e| e.to_string())?;
    ensure(validate_profile(&g, &obj, &ts).map_err(|e| e.to_string())?.is_winning(), "hand transducers lose")?;
    Ok(format!("stable at {j}, finite-memory profile wins"))
}

fn c10() -> Check {
    let g = fixtures::turn();
    let obj = fixtures::turn_reach_win(&g);
    let nn = global_loop(&g, &obj, &SynthConfig::default()).map_err(|e| e.to_string())?;
    let SynthOutcome::Stable(j) = nn else { return Err(format!("NN: {nn:?}")) };
    let cfg = SynthConfig { case: Case::NY, max_iterations: 2, ..SynthConfig::default() };
    let ny = global_loop(&g, &obj, &cfg).map_err(|e| e.to_string())?;
    let SynthOutcome::Found(f) = ny else { return Err(format!("NY: {ny:?}")) };
    ensure(validate_profile(&g, &obj, &f.transducers).map_err(|e| e.to_string())?.is_winning(), "NY profile loses")?;
    Ok(format!("NN stable at {j}, NY found at iteration {}", f.level))
}

fn main() -> ExitCode {
    // clause failures in the characterisation suite are reported, not printed
    std::panic::set_hook(Box::new(|_| {}));
    let mut keep = Vec::new();
    let secs = Duration::from_secs;
    let mut failed = 0;
    let mut report = |n: usize, limit: Option<Duration>, f: &mut dyn FnMut() -> Check| {
        let t = Instant::now();
        let r = f();
        let took = t.elapsed();
        let r = match (r, limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match r {
            Ok(m) => println!("criterion {n}: PASS ({took:.2?}) {m}"),
            Err(m) => {
                failed += 1;
                println!("criterion {n}: FAIL ({took:.2?}) {m}");
            }
        }
    };
    report(1, Some(secs(1)), &mut c1);
    report(2, Some(secs(10)), &mut c2);
    report(3, Some(secs(30)), &mut || c3(&mut keep));
    report(4, Some(secs(30)), &mut c4);
    report(5, Some(secs(120)), &mut c5);
    report(6, Some(secs(120)), &mut c6);
    report(7, Some(secs(300)), &mut || c7(&mut keep));
    report(8, None, &mut || c8(&keep));
    report(9, None, &mut c9);
    report(10, None, &mut c10);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
