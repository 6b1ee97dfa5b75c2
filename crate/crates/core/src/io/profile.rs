//! Profile files (`agent`, `level`, `STATE <state> -> <action>`) and
//! transducer files (`transducer`, `initial`, `memory`, `on`).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::game::{ActionId, AgentId, BlockId, Game, JointAction, LocId};
use crate::knowledge::state::KnowledgeState;
use crate::mkbsc::Case;
use crate::strategy::{MemorylessStrategy, Profile, Transducer};

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

/// Lines with comments stripped, paired with 1-based line numbers.
fn lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines().enumerate().filter_map(|(i, raw)| {
        let l = raw.split('#').next().unwrap_or("").trim_end();
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

fn column_of(line: &str, part: &str) -> usize {
    line.find(part).map_or(1, |i| i + 1)
}

pub fn parse_profile(src: &str, g: &Game) -> Result<Profile, ParseError> {
    let mut strategies: Vec<Option<MemorylessStrategy>> = vec![None; g.num_agents()];
    let mut level: Option<usize> = None;
    let mut current: Option<AgentId> = None;
    for (n, line) in lines(src) {
        let t = line.trim_start();
        let col = line.len() - t.len() + 1;
        if let Some(rest) = t.strip_prefix("agent ") {
            let name = rest.trim();
            let a = g
                .agent_by_name(name)
                .ok_or_else(|| err(n, column_of(line, name), format!("undeclared agent {name}")))?;
            if strategies[a.0].is_some() {
                return Err(err(n, col, format!("agent {name} listed twice")));
            }
            strategies[a.0] = Some(MemorylessStrategy {
                agent: a,
                level: level.unwrap_or(0),
                actions: BTreeMap::new(),
            });
            current = Some(a);
        } else if let Some(rest) = t.strip_prefix("level ") {
            let j: usize = rest
                .trim()
                .parse()
                .map_err(|_| err(n, column_of(line, rest.trim()), "level must be a number"))?;
            if level.is_some_and(|l| l != j) {
                return Err(err(n, col, "all strategies must share one level"));
            }
            level = Some(j);
            if let Some(a) = current {
                strategies[a.0].as_mut().unwrap().level = j;
            }
        } else if let Some(rest) = t.strip_prefix("STATE ") {
            let a = current.ok_or_else(|| err(n, col, "STATE before any agent line"))?;
            let (state, action) = rest
                .rsplit_once("->")
                .ok_or_else(|| err(n, col, "expected STATE <state> -> <action>"))?;
            let scol = column_of(line, state.trim());
            let s = KnowledgeState::parse(state.trim(), g)
                .map_err(|e| err(n, scol + e.column.saturating_sub(1), e.message))?;
            if level.is_some_and(|j| j != s.level()) {
                return Err(err(n, scol, format!("state is level {}, expected {}", s.level(), level.unwrap())));
            }
            let an = action.trim();
            let act = g.action_by_name(a, an).ok_or_else(|| {
                err(n, column_of(line, an), format!("undeclared action {an} for agent {}", g.agent_name(a)))
            })?;
            let strat = strategies[a.0].as_mut().unwrap();
            if strat.actions.insert(s, act).is_some() {
                return Err(err(n, scol, "state listed twice"));
            }
        } else {
            return Err(err(n, col, format!("unexpected line: {t}")));
        }
    }
    let level = level.ok_or_else(|| err(1, 1, "missing level line"))?;
    let strategies = strategies
        .into_iter()
        .enumerate()
        .map(|(a, s)| {
            let mut s = s.ok_or_else(|| err(1, 1, format!("no strategy for agent {}", g.agent_name(AgentId(a)))))?;
            s.level = level;
            Ok(s)
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Profile { level, strategies })
}

pub fn serialize_profile(p: &Profile, g: &Game) -> String {
    let mut out = String::new();
    for (i, s) in p.strategies.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "agent {}", g.agent_name(s.agent));
        let _ = writeln!(out, "level {}", p.level);
        for (k, act) in &s.actions {
            let _ = writeln!(out, "STATE {} -> {}", k.to_text(g), g.action_name(s.agent, *act));
        }
    }
    out
}

fn parse_block(tok: &str, g: &Game, a: AgentId, n: usize, col: usize) -> Result<BlockId, ParseError> {
    let inner = tok
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| err(n, col, format!("expected an observation like {{x,y}}, found {tok}")))?;
    let mut set: Vec<LocId> = inner
        .split(',')
        .map(|x| {
            let x = x.trim();
            g.location_by_name(x).ok_or_else(|| err(n, col, format!("undeclared location {x}")))
        })
        .collect::<Result<_, _>>()?;
    set.sort();
    g.observations(a)
        .find_block(&set)
        .ok_or_else(|| err(n, col, format!("{tok} is not an observation of agent {}", g.agent_name(a))))
}

fn parse_joint(tok: &str, g: &Game, n: usize, col: usize) -> Result<JointAction, ParseError> {
    let inner = tok
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| err(n, col, format!("expected a joint action, found {tok}")))?;
    let names: Vec<&str> = inner.split(',').map(str::trim).collect();
    if names.len() != g.num_agents() {
        return Err(err(n, col, format!("joint action needs {} components", g.num_agents())));
    }
    names
        .iter()
        .enumerate()
        .map(|(b, x)| {
            g.action_by_name(AgentId(b), x)
                .ok_or_else(|| err(n, col, format!("undeclared action {x}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(JointAction)
}

struct Draft {
    agent: AgentId,
    initial: Option<(String, usize)>,
    memory: Vec<(String, ActionId)>,
    index: HashMap<String, usize>,
    on: Vec<(usize, String, Option<JointAction>, BlockId, String)>,
}

/// Parses one transducer per agent. Inputs carrying a joint action make
/// the file a joint-action-observing profile.
pub fn parse_transducers(src: &str, g: &Game) -> Result<Vec<Transducer>, ParseError> {
    let mut drafts: Vec<Draft> = Vec::new();
    for (n, line) in lines(src) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let col = |t: &str| column_of(line, t);
        match toks[0] {
            "transducer" => {
                let name = toks.get(1).ok_or_else(|| err(n, 1, "transducer needs an agent"))?;
                let a = g
                    .agent_by_name(name)
                    .ok_or_else(|| err(n, col(name), format!("undeclared agent {name}")))?;
                if drafts.iter().any(|d| d.agent == a) {
                    return Err(err(n, col(name), format!("agent {name} listed twice")));
                }
                drafts.push(Draft { agent: a, initial: None, memory: Vec::new(), index: HashMap::new(), on: Vec::new() });
            }
            kw @ ("initial" | "memory" | "on") => {
                let d = drafts.last_mut().ok_or_else(|| err(n, 1, format!("{kw} before any transducer line")))?;
                match kw {
                    "initial" => {
                        let m = toks.get(1).ok_or_else(|| err(n, 1, "initial needs a memory state"))?;
                        d.initial = Some((m.to_string(), n));
                    }
                    "memory" => {
                        if toks.len() != 3 {
                            return Err(err(n, 1, "expected memory <state> <action>"));
                        }
                        let act = g.action_by_name(d.agent, toks[2]).ok_or_else(|| {
                            err(n, col(toks[2]), format!("undeclared action {}", toks[2]))
                        })?;
                        if d.index.insert(toks[1].to_string(), d.memory.len()).is_some() {
                            return Err(err(n, col(toks[1]), format!("memory state {} declared twice", toks[1])));
                        }
                        d.memory.push((toks[1].to_string(), act));
                    }
                    _ => {
                        let (joint, rest) = match toks.len() {
                            5 => (None, &toks[2..]),
                            6 => (Some(parse_joint(toks[2], g, n, col(toks[2]))?), &toks[3..]),
                            _ => return Err(err(n, 1, "expected on <state> [<joint action>] <observation> -> <state>")),
                        };
                        if rest[1] != "->" {
                            return Err(err(n, col(rest[1]), "expected ->"));
                        }
                        let b = parse_block(rest[0], g, d.agent, n, col(rest[0]))?;
                        d.on.push((n, toks[1].to_string(), joint, b, rest[2].to_string()));
                    }
                }
            }
            other => return Err(err(n, col(other), format!("unexpected line: {}", line.trim()))),
        }
    }
    let joint_inputs = drafts.iter().flat_map(|d| &d.on).map(|o| o.2.is_some()).collect::<Vec<_>>();
    let case = if joint_inputs.iter().any(|&j| j) { Case::NY } else { Case::NN };
    if joint_inputs.iter().any(|&j| j != (case == Case::NY)) {
        return Err(err(1, 1, "either every input names a joint action or none does"));
    }
    let mut out: Vec<Option<Transducer>> = vec![None; g.num_agents()];
    for d in drafts {
        let look = |m: &str, n: usize| {
            d.index.get(m).copied().ok_or_else(|| err(n, 1, format!("undeclared memory state {m}")))
        };
        let (init, n0) = d.initial.clone().ok_or_else(|| {
            err(1, 1, format!("transducer for {} has no initial line", g.agent_name(d.agent)))
        })?;
        let initial = look(&init, n0)?;
        let mut next = BTreeMap::new();
        for (n, from, joint, b, to) in &d.on {
            let key = (look(from, *n)?, (joint.clone(), *b));
            if next.insert(key, look(to, *n)?).is_some() {
                return Err(err(*n, 1, "transition listed twice"));
            }
        }
        out[d.agent.0] = Some(Transducer {
            agent: d.agent,
            case,
            memory: d.memory.iter().map(|m| m.0.clone()).collect(),
            initial,
            output: d.memory.iter().map(|m| m.1).collect(),
            next,
        });
    }
    out.into_iter()
        .enumerate()
        .map(|(a, t)| t.ok_or_else(|| err(1, 1, format!("no transducer for agent {}", g.agent_name(AgentId(a))))))
        .collect()
}

pub fn serialize_transducers(ts: &[Transducer], g: &Game) -> String {
    let mut out = String::new();
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let a = t.agent;
        let _ = writeln!(out, "transducer {}", g.agent_name(a));
        let _ = writeln!(out, "initial {}", t.memory[t.initial]);
        for (m, act) in t.memory.iter().zip(&t.output) {
            let _ = writeln!(out, "memory {m} {}", g.action_name(a, *act));
        }
        for ((m, (joint, b)), m2) in &t.next {
            let _ = write!(out, "on {} ", t.memory[*m]);
            if let Some(ja) = joint {
                let _ = write!(out, "{} ", g.format_joint_action(ja));
            }
            let _ = writeln!(out, "{} -> {}", g.format_set(g.observations(a).block(*b)), t.memory[*m2]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn profile_round_trip() {
        let g = fixtures::cup();
        for src in [fixtures::CUP_FIRST_ORDER_PROFILE, fixtures::CUP_SECOND_ORDER_PROFILE] {
            let p = parse_profile(src, &g).unwrap();
            assert_eq!(parse_profile(&serialize_profile(&p, &g), &g).unwrap(), p);
        }
        let p = parse_profile(fixtures::CUP_SECOND_ORDER_PROFILE, &g).unwrap();
        assert_eq!(p.level, 2);
        assert_eq!(p.strategies[0].actions.len(), 4);
        assert_eq!(p.strategies[1].actions.len(), 3);
    }

    #[test]
    fn profile_errors_have_positions() {
        let g = fixtures::cup();
        let e = parse_profile("agent r0\nlevel 1\nSTATE {start} -> jump\n", &g).unwrap_err();
        assert_eq!((e.line, e.column), (3, 18));
        let e = parse_profile("agent r0\nlevel 1\nSTATE {strat} -> grab\n", &g).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("strat"), "{}", e.message);
    }

    #[test]
    fn transducer_round_trip() {
        let g = fixtures::orientation();
        let ts = parse_transducers(fixtures::ORIENTATION_TRANSDUCERS, &g).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].len(), 4);
        assert_eq!(parse_transducers(&serialize_transducers(&ts, &g), &g).unwrap(), ts);
    }

    #[test]
    fn joint_action_inputs() {
        let g = fixtures::cup();
        let src = "transducer r0\ninitial a\nmemory a grab\nmemory b squeeze\non a (grab,grab) {good} -> b\n\
                   transducer r1\ninitial x\nmemory x grab\non x (grab,grab) {bad,good} -> x\n";
        let ts = parse_transducers(src, &g).unwrap();
        assert_eq!(ts[0].case, Case::NY);
        assert_eq!(parse_transducers(&serialize_transducers(&ts, &g), &g).unwrap(), ts);
        let bad = "transducer r0\ninitial a\nmemory a grab\non a {bad,good} -> a\n";
        assert!(parse_transducers(bad, &g).unwrap_err().message.contains("observation of agent r0"));
    }
}
