//! Knowledge trees: an agent's nested knowledge state with its own common
//! component factored out and the other agents' components kept as forests.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{AgentId, Game, LocSet};
use crate::knowledge::state::{JointKnowledge, KnowledgeState};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnowledgeTree {
    Leaf(LocSet),
    Node {
        agent: AgentId,
        own: Box<KnowledgeTree>,
        /// One forest per other agent, in agent order. Each forest is sorted.
        others: Vec<(AgentId, Vec<KnowledgeTree>)>,
    },
}

impl KnowledgeTree {
    /// Number of factoring steps; a level-1 state gives depth 0.
    pub fn depth(&self) -> usize {
        match self {
            KnowledgeTree::Leaf(_) => 0,
            KnowledgeTree::Node { own, others, .. } => {
                let forest = others
                    .iter()
                    .flat_map(|(_, f)| f.iter().map(KnowledgeTree::depth))
                    .max()
                    .unwrap_or(0);
                1 + own.depth().max(forest)
            }
        }
    }

    /// The set of base locations at the root.
    pub fn root(&self) -> &[crate::game::LocId] {
        match self {
            KnowledgeTree::Leaf(s) => s,
            KnowledgeTree::Node { own, .. } => own.root(),
        }
    }

    /// `{root}[agent: child; child]`, recursively.
    pub fn to_text(&self, g: &Game) -> String {
        let mut out = String::new();
        self.write_text(g, &mut out);
        out
    }

    fn write_text(&self, g: &Game, out: &mut String) {
        match self {
            KnowledgeTree::Leaf(s) => out.push_str(&g.format_set(s)),
            KnowledgeTree::Node { own, others, .. } => {
                own.write_text(g, out);
                for (b, forest) in others {
                    let _ = write!(out, "[{}: ", g.agent_name(*b));
                    for (i, t) in forest.iter().enumerate() {
                        if i > 0 {
                            out.push_str("; ");
                        }
                        t.write_text(g, out);
                    }
                    out.push(']');
                }
            }
        }
    }
}

/// Factors `s`, agent `a`'s knowledge state, into a tree.
pub fn to_knowledge_tree(s: &KnowledgeState, a: AgentId) -> Result<KnowledgeTree> {
    match s {
        KnowledgeState::Locations(set) => Ok(KnowledgeTree::Leaf(set.clone())),
        KnowledgeState::Nested { tuples, .. } => {
            let own = s
                .own_component(a)
                .map_err(|e| Error::FactoringViolated(e.to_string()))?;
            let arity = tuples[0].0.len();
            let mut others = Vec::new();
            let mut product = 1usize;
            for b in (0..arity).map(AgentId).filter(|&b| b != a) {
                let mut comps: Vec<&KnowledgeState> = tuples.iter().map(|t| t.component(b)).collect();
                comps.sort();
                comps.dedup();
                product = product.saturating_mul(comps.len());
                let mut forest = comps
                    .into_iter()
                    .map(|c| to_knowledge_tree(c, b))
                    .collect::<Result<Vec<_>>>()?;
                forest.sort();
                others.push((b, forest));
            }
            if product != tuples.len() {
                return Err(Error::FactoringViolated(
                    "tuple set is not the product of its components".into(),
                ));
            }
            Ok(KnowledgeTree::Node {
                agent: a,
                own: Box::new(to_knowledge_tree(own, a)?),
                others,
            })
        }
    }
}

pub fn from_knowledge_tree(t: &KnowledgeTree) -> Result<KnowledgeState> {
    match t {
        KnowledgeTree::Leaf(set) => KnowledgeState::locations(set.iter().copied()),
        KnowledgeTree::Node { agent, own, others } => {
            let own = from_knowledge_tree(own)?;
            let mut partial: Vec<Vec<(AgentId, KnowledgeState)>> = vec![vec![(*agent, own)]];
            for (b, forest) in others {
                let states = forest.iter().map(from_knowledge_tree).collect::<Result<Vec<_>>>()?;
                if states.is_empty() {
                    return Err(Error::FactoringViolated("empty forest".into()));
                }
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        states.iter().map(move |s| {
                            let mut q = p.clone();
                            q.push((*b, s.clone()));
                            q
                        })
                    })
                    .collect();
            }
            let tuples = partial.into_iter().map(|mut comps| {
                comps.sort_by_key(|(b, _)| *b);
                JointKnowledge(comps.into_iter().map(|(_, s)| s).collect())
            });
            KnowledgeState::nested(tuples)
        }
    }
}

/// Text for a joint state as one tree per agent, separated by ` / `.
pub fn joint_tree_text(s: &JointKnowledge, g: &Game) -> Result<String> {
    let mut parts = Vec::with_capacity(s.0.len());
    for (a, c) in s.0.iter().enumerate() {
        parts.push(to_knowledge_tree(c, AgentId(a))?.to_text(g));
    }
    Ok(parts.join(" / "))
}
