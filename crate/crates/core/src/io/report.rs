//! Plain-text reports: `key: value` lines followed by tables.

use std::fmt::Write as _;

use crate::game::{Game, Lasso};
use crate::io::profile::{serialize_profile, serialize_transducers};
use crate::mkbsc::Case;
use crate::strategy::{BlockReason, ProfileVerdict};
use crate::synth::{Algorithm, SynthConfig, SynthOutcome};

pub fn case_name(c: Case) -> &'static str {
    match c {
        Case::NN => "nn",
        Case::NY => "ny",
    }
}

pub fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Exhaustive => "exhaustive",
        Algorithm::Heuristic => "heuristic",
    }
}

/// `l0 (a,b) l1 (a,b) [l2 (a,b) l3 (a,b)]*`, the bracket marking the cycle.
pub fn format_lasso(l: &Lasso, g: &Game) -> String {
    let mut out = String::new();
    for (i, (loc, act)) in l.locations.iter().zip(&l.actions).enumerate() {
        if i == l.cycle_start {
            out.push('[');
        }
        let _ = write!(out, "{} {}", g.location_name(*loc), g.format_joint_action(act));
        if i + 1 < l.locations.len() {
            out.push(' ');
        }
    }
    out.push_str("]*");
    out
}

pub fn format_verdict(v: &ProfileVerdict, g: &Game) -> String {
    match v {
        ProfileVerdict::Winning => "verdict: winning\n".into(),
        ProfileVerdict::NotWinning(l) => format!("verdict: not winning\ncounterexample: {}\n", format_lasso(l, g)),
        ProfileVerdict::Blocked { prefix, actions, reason } => {
            let mut out = String::from("verdict: blocked\n");
            let why = match reason {
                BlockReason::Unavailable(ja) => format!("joint action {} is unavailable", g.format_joint_action(ja)),
                BlockReason::MemoryUndefined(a) => format!("memory of agent {} has no successor", g.agent_name(*a)),
            };
            let _ = writeln!(out, "reason: {why}");
            let steps: Vec<String> = prefix
                .iter()
                .zip(actions)
                .map(|(l, a)| format!("{} {}", g.location_name(*l), g.format_joint_action(a)))
                .collect();
            let _ = writeln!(out, "prefix: {}", steps.join(" "));
            out
        }
    }
}

pub fn synth_report(outcome: &SynthOutcome, g: &Game, cfg: &SynthConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "case: {}", case_name(cfg.case));
    let _ = writeln!(out, "algorithm: {}", algorithm_name(cfg.algorithm));
    let _ = writeln!(out, "max iterations: {}", cfg.max_iterations);
    match outcome {
        SynthOutcome::Found(f) => {
            let _ = writeln!(out, "outcome: found at iteration {}", f.level);
            let _ = writeln!(out, "expansion locations: {}", f.expansion.game().num_locations());
            for t in &f.transducers {
                let _ = writeln!(out, "memory states {}: {}", g.agent_name(t.agent), t.len());
            }
            out.push_str("\n# profile\n");
            out.push_str(&serialize_profile(&f.profile, g));
            out.push_str("\n# transducers\n");
            out.push_str(&serialize_transducers(&f.transducers, g));
        }
        SynthOutcome::Stable(j) => {
            let _ = writeln!(out, "outcome: no profile, stable at {j}");
        }
        SynthOutcome::BoundReached(j) => {
            let _ = writeln!(out, "outcome: no profile up to iteration {j}");
        }
    }
    out
}
