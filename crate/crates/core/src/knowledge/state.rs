//! Nested knowledge states: a level-1 state is a set of locations, a
//! level-(j+1) state is a set of agent-indexed tuples of level-j states.

use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::game::{AgentId, Game, LocId, LocSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnowledgeState {
    /// Level 1. Sorted, non-empty.
    Locations(LocSet),
    /// Level >= 2. Sorted, duplicate-free, non-empty; every tuple has
    /// components of level `level - 1`.
    Nested {
        level: usize,
        tuples: Vec<JointKnowledge>,
    },
}

/// One knowledge state per agent, all of the same level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointKnowledge(pub Vec<KnowledgeState>);

impl KnowledgeState {
    pub fn locations(set: impl IntoIterator<Item = LocId>) -> Result<Self> {
        let mut set: LocSet = set.into_iter().collect();
        set.sort();
        set.dedup();
        if set.is_empty() {
            return Err(Error::MalformedState("empty location set".into()));
        }
        Ok(KnowledgeState::Locations(set))
    }

    pub fn nested(tuples: impl IntoIterator<Item = JointKnowledge>) -> Result<Self> {
        let mut tuples: Vec<JointKnowledge> = tuples.into_iter().collect();
        tuples.sort();
        tuples.dedup();
        let first = tuples
            .first()
            .ok_or_else(|| Error::MalformedState("empty tuple set".into()))?;
        let inner = first.level()?;
        let arity = first.0.len();
        for t in &tuples {
            if t.0.len() != arity {
                return Err(Error::MalformedState("tuples of different arity".into()));
            }
            if t.level()? != inner {
                return Err(Error::MalformedState("tuples of mixed level".into()));
            }
        }
        Ok(KnowledgeState::Nested { level: inner + 1, tuples })
    }

    pub fn level(&self) -> usize {
        match self {
            KnowledgeState::Locations(_) => 1,
            KnowledgeState::Nested { level, .. } => *level,
        }
    }

    pub fn as_locations(&self) -> Option<&[LocId]> {
        match self {
            KnowledgeState::Locations(s) => Some(s),
            KnowledgeState::Nested { .. } => None,
        }
    }

    pub fn tuples(&self) -> &[JointKnowledge] {
        match self {
            KnowledgeState::Locations(_) => &[],
            KnowledgeState::Nested { tuples, .. } => tuples,
        }
    }

    /// The common `a`-th component of the tuples, when there is one.
    pub fn own_component(&self, a: AgentId) -> Result<&KnowledgeState> {
        let tuples = self.tuples();
        let first = tuples
            .first()
            .ok_or_else(|| Error::MalformedState("level-1 state has no components".into()))?;
        let c = first
            .0
            .get(a.0)
            .ok_or_else(|| Error::UnknownAgent(a.0.to_string()))?;
        if tuples.iter().any(|t| &t.0[a.0] != c) {
            return Err(Error::MalformedState(format!(
                "tuples disagree on component {}",
                a.0
            )));
        }
        Ok(c)
    }

    /// `ŝ_a`: repeatedly take the common `a`-th component down to a set of
    /// base locations.
    pub fn flatten_hat(&self, a: AgentId) -> Result<LocSet> {
        let mut cur = self;
        loop {
            match cur {
                KnowledgeState::Locations(s) => return Ok(s.clone()),
                KnowledgeState::Nested { .. } => cur = cur.own_component(a)?,
            }
        }
    }

    pub fn to_text(&self, g: &Game) -> String {
        let mut out = String::new();
        self.write_text(g, &mut out);
        out
    }

    fn write_text(&self, g: &Game, out: &mut String) {
        out.push('{');
        match self {
            KnowledgeState::Locations(s) => {
                for (i, l) in s.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(g.location_name(*l));
                }
            }
            KnowledgeState::Nested { tuples, .. } => {
                for (i, t) in tuples.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    t.write_text(g, out);
                }
            }
        }
        out.push('}');
    }

    /// Parses the canonical text form; whitespace between tokens is ignored.
    pub fn parse(text: &str, g: &Game) -> Result<Self, ParseError> {
        let mut p = StateParser { src: text, pos: 0, game: g };
        let s = p.state()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("trailing input after knowledge state"));
        }
        Ok(s)
    }
}

impl JointKnowledge {
    pub fn level(&self) -> Result<usize> {
        let first = self
            .0
            .first()
            .ok_or_else(|| Error::MalformedState("empty tuple".into()))?;
        let l = first.level();
        if self.0.iter().any(|c| c.level() != l) {
            return Err(Error::MalformedState("tuple components of mixed level".into()));
        }
        Ok(l)
    }

    pub fn component(&self, a: AgentId) -> &KnowledgeState {
        &self.0[a.0]
    }

    /// `⋒s`: intersect the components, then recurse into the surviving
    /// tuples and take the union of their iterated intersections.
    pub fn iterated_intersection(&self) -> Result<LocSet> {
        match self.0.first() {
            None => Err(Error::MalformedState("empty tuple".into())),
            Some(KnowledgeState::Locations(_)) => {
                let mut acc: Option<LocSet> = None;
                for c in &self.0 {
                    let s = c
                        .as_locations()
                        .ok_or_else(|| Error::MalformedState("mixed levels".into()))?;
                    acc = Some(match acc {
                        None => s.to_vec(),
                        Some(prev) => intersect(&prev, s),
                    });
                }
                let acc = acc.unwrap_or_default();
                if acc.is_empty() {
                    return Err(Error::Inconsistent("empty intersection".into()));
                }
                Ok(acc)
            }
            Some(KnowledgeState::Nested { .. }) => {
                let common = self.common_tuples()?;
                if common.is_empty() {
                    return Err(Error::Inconsistent("empty intersection".into()));
                }
                let mut out = Vec::new();
                for t in common {
                    out.extend(t.iterated_intersection()?);
                }
                out.sort();
                out.dedup();
                Ok(out)
            }
        }
    }

    /// Plain intersection of the components as sets of lower-level tuples.
    /// Only meaningful above level 1.
    pub fn common_tuples(&self) -> Result<Vec<&JointKnowledge>> {
        let mut comps = self.0.iter();
        let first = comps
            .next()
            .ok_or_else(|| Error::MalformedState("empty tuple".into()))?;
        let mut acc: Vec<&JointKnowledge> = first.tuples().iter().collect();
        for c in comps {
            let other = c.tuples();
            acc.retain(|t| other.binary_search(t).is_ok());
        }
        Ok(acc)
    }

    pub fn to_text(&self, g: &Game) -> String {
        let mut out = String::new();
        self.write_text(g, &mut out);
        out
    }

    fn write_text(&self, g: &Game, out: &mut String) {
        out.push('(');
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                out.push('|');
            }
            c.write_text(g, out);
        }
        out.push(')');
    }

    pub fn parse(text: &str, g: &Game) -> Result<Self, ParseError> {
        let mut p = StateParser { src: text, pos: 0, game: g };
        let t = p.tuple()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("trailing input after tuple"));
        }
        Ok(t)
    }
}

pub(crate) fn intersect(a: &[LocId], b: &[LocId]) -> LocSet {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct StateParser<'a> {
    src: &'a str,
    pos: usize,
    game: &'a Game,
}

impl StateParser<'_> {
    fn error(&self, msg: &str) -> ParseError {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { line, column, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            let mut msg = String::new();
            let _ = write!(msg, "expected '{c}'");
            Err(self.error(&msg))
        }
    }

    fn ident(&mut self) -> Result<&str, ParseError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected location name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn state(&mut self) -> Result<KnowledgeState, ParseError> {
        self.expect('{')?;
        if self.peek() == Some('(') {
            let mut tuples = vec![self.tuple()?];
            while self.peek() == Some(',') {
                self.pos += 1;
                tuples.push(self.tuple()?);
            }
            self.expect('}')?;
            let start = self.pos;
            KnowledgeState::nested(tuples).map_err(|e| {
                self.pos = start;
                self.error(&e.to_string())
            })
        } else {
            let mut locs = Vec::new();
            loop {
                let at = self.pos;
                let name = self.ident()?.to_string();
                let l = self.game.location_by_name(&name).ok_or_else(|| {
                    self.pos = at;
                    self.error(&format!("unknown location {name}"))
                })?;
                locs.push(l);
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.expect('}')?;
            Ok(KnowledgeState::locations(locs).expect("non-empty by construction"))
        }
    }

    fn tuple(&mut self) -> Result<JointKnowledge, ParseError> {
        self.expect('(')?;
        let mut comps = vec![self.state()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            comps.push(self.state()?);
        }
        self.expect(')')?;
        let t = JointKnowledge(comps);
        t.level().map_err(|e| self.error(&e.to_string()))?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn loc(g: &Game, n: &str) -> LocId {
        g.location_by_name(n).unwrap()
    }

    fn l1(g: &Game, names: &[&str]) -> KnowledgeState {
        KnowledgeState::locations(names.iter().map(|n| loc(g, n))).unwrap()
    }

    #[test]
    fn level_one_hat_is_identity() {
        let g = fixtures::cup();
        let s = l1(&g, &["good", "bad"]);
        assert_eq!(s.flatten_hat(AgentId(1)).unwrap(), vec![loc(&g, "bad"), loc(&g, "good")]);
        assert_eq!(s.to_text(&g), "{bad,good}");
    }

    #[test]
    fn robot0_side_of_level_two_state_flattens_to_good() {
        let g = fixtures::cup();
        let t = JointKnowledge(vec![l1(&g, &["good"]), l1(&g, &["bad", "good"])]);
        let s = KnowledgeState::nested([t.clone()]).unwrap();
        assert_eq!(s.level(), 2);
        assert_eq!(s.flatten_hat(AgentId(0)).unwrap(), vec![loc(&g, "good")]);
        assert_eq!(t.iterated_intersection().unwrap(), vec![loc(&g, "good")]);
        assert_eq!(s.to_text(&g), "{({good}|{bad,good})}");
    }

    #[test]
    fn disagreeing_components_are_rejected() {
        let g = fixtures::cup();
        let s = KnowledgeState::nested([
            JointKnowledge(vec![l1(&g, &["good"]), l1(&g, &["bad", "good"])]),
            JointKnowledge(vec![l1(&g, &["bad"]), l1(&g, &["bad", "good"])]),
        ])
        .unwrap();
        assert!(s.flatten_hat(AgentId(0)).is_err());
        assert_eq!(s.flatten_hat(AgentId(1)).unwrap().len(), 2);
    }

    #[test]
    fn mixed_levels_rejected() {
        let g = fixtures::cup();
        let inner = KnowledgeState::nested([JointKnowledge(vec![
            l1(&g, &["good"]),
            l1(&g, &["good"]),
        ])])
        .unwrap();
        let mixed = JointKnowledge(vec![inner.clone(), l1(&g, &["good"])]);
        assert!(KnowledgeState::nested([mixed]).is_err());
        let a = JointKnowledge(vec![inner.clone(), inner.clone()]);
        let b = JointKnowledge(vec![l1(&g, &["good"]), l1(&g, &["good"])]);
        assert!(KnowledgeState::nested([a, b]).is_err());
        assert!(KnowledgeState::locations([]).is_err());
    }

    #[test]
    fn empty_intersection_is_inconsistent() {
        let g = fixtures::cup();
        let t = JointKnowledge(vec![l1(&g, &["bad"]), l1(&g, &["good"])]);
        assert!(matches!(t.iterated_intersection(), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn parse_tolerates_whitespace() {
        let g = fixtures::cup();
        let s = KnowledgeState::parse(" { ( {good} | {good , bad} ) , ({bad}|{bad,good}) } ", &g)
            .unwrap();
        assert_eq!(s.to_text(&g), "{({bad}|{bad,good}),({good}|{bad,good})}");
        assert!(KnowledgeState::parse("{nowhere}", &g).is_err());
        assert!(KnowledgeState::parse("{good} x", &g).is_err());
        assert!(KnowledgeState::parse("{}", &g).is_err());
    }
}
