//! Line-oriented text format for games and objectives.
//!
//! ```text
//! agents: r0 r1
//! locations: start bad good
//! initial: start
//! actions r0: grab squeeze
//! obs r0: {start} {bad} {good}
//! transitions:
//! start (grab,grab) -> bad
//! ```
//!
//! List items may be separated by whitespace or commas. `#` starts a comment.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::game::{
    ActionId, AgentId, BlockId, Game, JointAction, LocId, Objective, ObjectiveKind, Transition,
};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, column: col, message: msg.into() }
}

fn tokenize_line(line_no: usize, line: &str) -> Result<Vec<Token>, ParseError> {
    let line = line.split('#').next().unwrap_or("");
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: line_no,
                col,
            });
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Sym("->"), line: line_no, col });
            i += 2;
        } else {
            let sym = match c {
                '{' => "{",
                '}' => "}",
                '(' => "(",
                ')' => ")",
                ',' => ",",
                ':' => ":",
                _ => return Err(err(line_no, col, format!("unexpected character '{c}'"))),
            };
            out.push(Token { tok: Tok::Sym(sym), line: line_no, col });
            i += 1;
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, line_len: usize) -> Self {
        Cursor { toks, pos: 0, line, end_col: line_len + 1 }
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or((self.line, self.end_col), |t| (t.line, t.col))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(err(l, c, msg))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.toks.get(self.pos), Some(Token { tok: Tok::Sym(x), .. }) if *x == s)
    }

    fn sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.peek_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected '{s}'"))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s.clone(), *line, *col))
            }
            _ => self.fail("expected identifier"),
        }
    }

    fn skip_commas(&mut self) {
        while self.peek_sym(",") {
            self.pos += 1;
        }
    }

    /// Identifiers separated by whitespace or commas, up to the end of line.
    fn ident_list(&mut self) -> Result<Vec<(String, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        self.skip_commas();
        while !self.at_end() {
            out.push(self.ident()?);
            self.skip_commas();
        }
        Ok(out)
    }

    /// `{a,b}` with positions of the members.
    fn set(&mut self) -> Result<Vec<(String, usize, usize)>, ParseError> {
        self.sym("{")?;
        let mut out = Vec::new();
        self.skip_commas();
        while !self.peek_sym("}") {
            out.push(self.ident()?);
            self.skip_commas();
        }
        self.sym("}")?;
        Ok(out)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.fail("unexpected trailing input")
        }
    }
}

type Named = (String, usize, usize);

#[derive(Default)]
struct Raw {
    agents: Option<(Vec<Named>, usize)>,
    locations: Option<(Vec<Named>, usize)>,
    initial: Option<Named>,
    actions: BTreeMap<String, (Vec<Named>, usize, usize)>,
    obs: BTreeMap<String, (Vec<Vec<Named>>, usize, usize)>,
    transitions: Vec<(Named, Vec<Named>, Named, usize, usize)>,
}

pub fn parse_game(src: &str) -> Result<Game, ParseError> {
    let mut raw = Raw::default();
    let mut in_transitions = false;
    let mut last_line = 1;
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let toks = tokenize_line(line_no, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(&toks, line_no, line.chars().count());
        let is_transition = toks.iter().any(|t| t.tok == Tok::Sym("->"));
        if is_transition {
            if !in_transitions {
                return c.fail("transition outside the transitions: section");
            }
            let from = c.ident()?;
            let (pl, pc) = c.here();
            c.sym("(")?;
            let mut acts = Vec::new();
            loop {
                acts.push(c.ident()?);
                if c.peek_sym(",") {
                    c.pos += 1;
                } else {
                    break;
                }
            }
            c.sym(")")?;
            c.sym("->")?;
            let to = c.ident()?;
            c.finish()?;
            raw.transitions.push((from, acts, to, pl, pc));
            continue;
        }
        let (kw, kl, kc) = c.ident()?;
        in_transitions = false;
        match kw.as_str() {
            "agents" | "locations" => {
                c.sym(":")?;
                let list = c.ident_list()?;
                let slot = if kw == "agents" { &mut raw.agents } else { &mut raw.locations };
                if slot.is_some() {
                    return Err(err(kl, kc, format!("duplicate {kw}: section")));
                }
                *slot = Some((list, kl));
            }
            "initial" => {
                c.sym(":")?;
                let l = c.ident()?;
                c.finish()?;
                if raw.initial.is_some() {
                    return Err(err(kl, kc, "duplicate initial: section"));
                }
                raw.initial = Some(l);
            }
            "actions" => {
                let (agent, al, ac) = c.ident()?;
                c.sym(":")?;
                let list = c.ident_list()?;
                if raw.actions.insert(agent.clone(), (list, al, ac)).is_some() {
                    return Err(err(al, ac, format!("duplicate actions for agent {agent}")));
                }
            }
            "obs" => {
                let (agent, al, ac) = c.ident()?;
                c.sym(":")?;
                let mut blocks = Vec::new();
                c.skip_commas();
                while !c.at_end() {
                    blocks.push(c.set()?);
                    c.skip_commas();
                }
                if raw.obs.insert(agent.clone(), (blocks, al, ac)).is_some() {
                    return Err(err(al, ac, format!("duplicate obs for agent {agent}")));
                }
            }
            "transitions" => {
                c.sym(":")?;
                c.finish()?;
                in_transitions = true;
            }
            other => return Err(err(kl, kc, format!("unknown section {other}"))),
        }
    }
    resolve(raw, last_line)
}

fn index_names(list: &[Named], what: &str) -> Result<HashMap<String, usize>, ParseError> {
    let mut map = HashMap::new();
    for (i, (n, l, c)) in list.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(err(*l, *c, format!("duplicate {what} {n}")));
        }
    }
    Ok(map)
}

fn resolve(raw: Raw, last_line: usize) -> Result<Game, ParseError> {
    let (agents, _) = raw.agents.ok_or_else(|| err(last_line, 1, "missing agents: section"))?;
    let (locations, _) =
        raw.locations.ok_or_else(|| err(last_line, 1, "missing locations: section"))?;
    if agents.is_empty() {
        return Err(err(1, 1, "no agents declared"));
    }
    if locations.is_empty() {
        return Err(err(1, 1, "no locations declared"));
    }
    let agent_ix = index_names(&agents, "agent")?;
    let loc_ix = index_names(&locations, "location")?;
    let lookup_loc = |(n, l, c): &Named| {
        loc_ix
            .get(n)
            .map(|&i| LocId(i))
            .ok_or_else(|| err(*l, *c, format!("undeclared location {n}")))
    };
    let initial = raw.initial.ok_or_else(|| err(last_line, 1, "missing initial: section"))?;
    let initial = lookup_loc(&initial)?;

    for (agent, (_, l, c)) in &raw.actions {
        if !agent_ix.contains_key(agent) {
            return Err(err(*l, *c, format!("undeclared agent {agent}")));
        }
    }
    for (agent, (_, l, c)) in &raw.obs {
        if !agent_ix.contains_key(agent) {
            return Err(err(*l, *c, format!("undeclared agent {agent}")));
        }
    }

    let mut actions = Vec::new();
    let mut action_ix = Vec::new();
    let mut observations = Vec::new();
    for (name, l, c) in &agents {
        let (acts, _, _) = raw
            .actions
            .get(name)
            .ok_or_else(|| err(*l, *c, format!("agent {name} has no actions section")))?;
        if acts.is_empty() {
            return Err(err(*l, *c, format!("agent {name} has no actions")));
        }
        action_ix.push(index_names(acts, "action")?);
        actions.push(acts.iter().map(|a| a.0.clone()).collect::<Vec<_>>());

        let (blocks, ol, oc) = raw
            .obs
            .get(name)
            .ok_or_else(|| err(*l, *c, format!("agent {name} has no obs section")))?;
        let mut seen: HashMap<LocId, ()> = HashMap::new();
        let mut resolved = Vec::new();
        for block in blocks {
            if block.is_empty() {
                return Err(err(*ol, *oc, format!("agent {name}: empty observation block")));
            }
            let mut set = Vec::new();
            for member in block {
                let loc = lookup_loc(member)?;
                if seen.insert(loc, ()).is_some() {
                    return Err(err(
                        member.1,
                        member.2,
                        format!(
                            "agent {name}: location {} appears in more than one observation block",
                            member.0
                        ),
                    ));
                }
                set.push(loc);
            }
            resolved.push(set);
        }
        if let Some((missing, _, _)) = locations.iter().find(|n| !seen.contains_key(&LocId(loc_ix[&n.0]))) {
            return Err(err(
                *ol,
                *oc,
                format!("agent {name}: partition does not cover Loc (location {missing} is in no block)"),
            ));
        }
        observations.push(resolved);
    }

    let mut transitions = Vec::new();
    for (from, acts, to, pl, pc) in &raw.transitions {
        if acts.len() != agents.len() {
            return Err(err(
                *pl,
                *pc,
                format!("joint action has {} components, expected {}", acts.len(), agents.len()),
            ));
        }
        let mut ja = Vec::new();
        for (i, (a, l, c)) in acts.iter().enumerate() {
            let id = action_ix[i]
                .get(a)
                .ok_or_else(|| err(*l, *c, format!("undeclared action {a} for agent {}", agents[i].0)))?;
            ja.push(ActionId(*id));
        }
        transitions.push(Transition {
            from: lookup_loc(from)?,
            action: JointAction(ja),
            to: lookup_loc(to)?,
        });
    }

    let g = Game::from_parts(
        agents.iter().map(|a| a.0.clone()).collect(),
        locations.iter().map(|l| l.0.clone()).collect(),
        initial,
        actions,
        observations,
        transitions,
    );
    let report = crate::game::validate_game(&g);
    if let Some(v) = report.violations.first() {
        return Err(err(1, 1, v.to_string()));
    }
    Ok(g)
}

fn write_list(out: &mut String, items: impl IntoIterator<Item = impl AsRef<str>>) {
    for item in items {
        out.push(' ');
        out.push_str(item.as_ref());
    }
}

pub fn serialize_game(g: &Game) -> String {
    let mut out = String::new();
    out.push_str("agents:");
    write_list(&mut out, g.agent_names());
    out.push_str("\nlocations:");
    write_list(&mut out, g.location_names());
    let _ = write!(out, "\ninitial: {}\n", g.location_name(g.initial()));
    for a in g.agents() {
        let _ = write!(out, "actions {}:", g.agent_name(a));
        write_list(&mut out, g.actions(a));
        out.push('\n');
    }
    for a in g.agents() {
        let _ = write!(out, "obs {}:", g.agent_name(a));
        for block in g.observations(a).blocks() {
            out.push(' ');
            out.push_str(&g.format_set(block));
        }
        out.push('\n');
    }
    out.push_str("transitions:\n");
    for t in g.transitions() {
        let _ = writeln!(
            out,
            "{} {} -> {}",
            g.location_name(t.from),
            g.format_joint_action(&t.action),
            g.location_name(t.to)
        );
    }
    out
}

/// `reach` or `safe`, then one `<agent> {members}` line per target.
pub fn parse_objective(src: &str, g: &Game) -> Result<Objective, ParseError> {
    let mut kind = None;
    let mut targets = Vec::new();
    let mut last_line = 1;
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let toks = tokenize_line(line_no, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(&toks, line_no, line.chars().count());
        if kind.is_none() {
            let (kw, l, col) = c.ident()?;
            kind = Some(match kw.as_str() {
                "reach" => ObjectiveKind::Reach,
                "safe" => ObjectiveKind::Safe,
                _ => return Err(err(l, col, "expected reach or safe")),
            });
            c.finish()?;
            continue;
        }
        let (agent, l, col) = c.ident()?;
        let a = g
            .agent_by_name(&agent)
            .ok_or_else(|| err(l, col, format!("undeclared agent {agent}")))?;
        let (bl, bc) = c.here();
        let members = c.set()?;
        c.finish()?;
        let mut set = Vec::new();
        for (n, ml, mc) in &members {
            set.push(
                g.location_by_name(n)
                    .ok_or_else(|| err(*ml, *mc, format!("undeclared location {n}")))?,
            );
        }
        set.sort();
        set.dedup();
        let b = g.observations(a).find_block(&set).ok_or_else(|| {
            err(bl, bc, format!("{} is not an observation of agent {agent}", g.format_set(&set)))
        })?;
        targets.push((a, b));
    }
    let kind = kind.ok_or_else(|| err(last_line, 1, "empty objective"))?;
    if targets.is_empty() {
        return Err(err(last_line, 1, "objective has no targets"));
    }
    Ok(Objective { kind, targets: targets.into_iter().collect() })
}

pub fn serialize_objective(obj: &Objective, g: &Game) -> String {
    let mut out = format!("{}\n", obj.kind);
    for &(a, b) in &obj.targets {
        let _ = writeln!(out, "{} {}", g.agent_name(a), g.format_set(g.observations(a).block(b)));
    }
    out
}

/// Resolves `(agent name, block member names)` pairs; handy in tests.
pub fn objective_from_names(
    kind: ObjectiveKind,
    targets: &[(&str, &[&str])],
    g: &Game,
) -> Option<Objective> {
    let mut resolved: Vec<(AgentId, BlockId)> = Vec::new();
    for (agent, members) in targets {
        let a = g.agent_by_name(agent)?;
        let mut set: Vec<LocId> =
            members.iter().map(|m| g.location_by_name(m)).collect::<Option<_>>()?;
        set.sort();
        resolved.push((a, g.observations(a).find_block(&set)?));
    }
    Objective::new(kind, resolved, g).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn minimal_game_parses() {
        let g = parse_game(
            "agents: a\nlocations: x\ninitial: x\nactions a: go\nobs a: {x}\ntransitions:\nx (go) -> x\n",
        )
        .unwrap();
        assert_eq!(g.num_locations(), 1);
        assert_eq!(g.transitions().len(), 1);
    }

    #[test]
    fn overlapping_blocks_name_the_location() {
        let e = parse_game(
            "agents: a\nlocations: x y\ninitial: x\nactions a: go\nobs a: {x,y} {y}\ntransitions:\n",
        )
        .unwrap_err();
        assert!(e.message.contains("location y"), "{e}");
        assert_eq!((e.line, e.column), (5, 15));
    }

    #[test]
    fn diagnostics_carry_positions() {
        let e = parse_game("agents: a\nlocations: x\ninitial: z\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 10));
        let e = parse_game(
            "agents: a b\nlocations: x\ninitial: x\nactions a: go\nactions b: go\nobs a: {x}\nobs b: {x}\ntransitions:\nx (go) -> x\n",
        )
        .unwrap_err();
        assert!(e.message.contains("expected 2"), "{e}");
        assert_eq!(e.line, 9);
        let e = parse_game("agents: a\nlocations: x ?\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 14));
        let e = parse_game(
            "agents: a\nlocations: x y\ninitial: x\nactions a: go\nobs a: {x}\ntransitions:\n",
        )
        .unwrap_err();
        assert!(e.message.contains("does not cover"), "{e}");
    }

    #[test]
    fn shipped_fixtures_round_trip() {
        for g in [fixtures::cup(), fixtures::turn(), fixtures::spurious(), fixtures::orientation()] {
            let text = serialize_game(&g);
            assert_eq!(parse_game(&text).unwrap(), g);
        }
    }

    #[test]
    fn turn_fixture_shape() {
        let g = fixtures::turn();
        assert_eq!(g.num_locations(), 10);
        assert_eq!(g.num_agents(), 2);
    }

    #[test]
    fn objective_round_trip() {
        let g = fixtures::cup();
        let obj = parse_objective("reach\nr0 {win}\n", &g).unwrap();
        assert_eq!(parse_objective(&serialize_objective(&obj, &g), &g).unwrap(), obj);
        assert!(parse_objective("reach\nr1 {bad}\n", &g).is_err());
        assert!(parse_objective("reach\n", &g).is_err());
        assert!(parse_objective("maybe\n", &g).is_err());
    }
}
