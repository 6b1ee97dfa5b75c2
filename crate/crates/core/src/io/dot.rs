//! Graphviz export of games and expansions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::game::{AgentId, Game, LocId};
use crate::knowledge::tree::joint_tree_text;
use crate::mkbsc::ExpandedGame;

#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// Label expansion states with their knowledge trees.
    pub show_trees: bool,
    /// Agents whose observation relation is drawn; `None` draws all.
    pub agents: Option<Vec<AgentId>>,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn lines(ls: &[String]) -> String {
    ls.iter().map(|l| escape(l)).collect::<Vec<_>>().join("\\n")
}

/// `label` gives the lines of each node label.
fn render(g: &Game, label: &dyn Fn(LocId) -> Vec<String>, opts: &DotOptions) -> String {
    let mut out = String::from("digraph G {\n  rankdir=LR;\n  node [shape=box];\n");
    let _ = writeln!(out, "  init [shape=point];");
    for l in g.locations() {
        let _ = writeln!(out, "  n{} [label=\"{}\"];", l.0, lines(&label(l)));
    }
    let _ = writeln!(out, "  init -> n{};", g.initial().0);
    let mut grouped: BTreeMap<(LocId, LocId), Vec<String>> = BTreeMap::new();
    for t in g.transitions() {
        grouped.entry((t.from, t.to)).or_default().push(g.format_joint_action(&t.action));
    }
    for ((from, to), labels) in &grouped {
        let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", from.0, to.0, lines(labels));
    }
    for a in g.agents() {
        if opts.agents.as_ref().is_some_and(|f| !f.contains(&a)) {
            continue;
        }
        for block in g.observations(a).blocks() {
            for (i, u) in block.iter().enumerate() {
                for v in &block[i + 1..] {
                    let _ = writeln!(
                        out,
                        "  n{} -> n{} [dir=none, style=dashed, label=\"{}\"];",
                        u.0,
                        v.0,
                        escape(g.agent_name(a))
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(g: &Game, opts: &DotOptions) -> String {
    render(g, &|l| vec![g.location_name(l).to_string()], opts)
}

/// Nodes are labelled with canonical knowledge states, or with one
/// knowledge tree per agent when `show_trees` is set and the state factors.
pub fn export_dot_expanded(eg: &ExpandedGame, opts: &DotOptions) -> String {
    let base = eg.base();
    render(
        eg.game(),
        &|l| {
            let label = eg.label(l);
            if opts.show_trees {
                if let Ok(t) = joint_tree_text(label, base) {
                    return t.split(" / ").map(str::to_string).collect();
                }
            }
            vec![label.to_text(base)]
        },
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::GameBuilder;
    use crate::mkbsc::{expand_to, Case, Limits};

    #[test]
    fn one_location() {
        let g = GameBuilder::new()
            .agents(["a"])
            .locations(["x"])
            .initial("x")
            .actions("a", ["go"])
            .perfect_observation("a")
            .transition_all("x", "x")
            .build()
            .unwrap();
        let d = export_dot(&g, &DotOptions::default());
        assert_eq!(d.matches("[label=\"x\"]").count(), 1);
        assert!(d.contains("n0 -> n0 [label=\"(go)\"]"));
    }

    #[test]
    fn trees_and_determinism() {
        let g = fixtures::cup();
        let chain = expand_to(&g, Case::NN, 2, Limits::default()).unwrap();
        let opts = DotOptions { show_trees: true, agents: None };
        let d = export_dot_expanded(&chain[1], &opts);
        assert!(d.contains("{good}[r1: {bad,good}]\\n{bad,good}[r0: {bad}; {good}]"), "{d}");
        let again = export_dot_expanded(&expand_to(&g, Case::NN, 2, Limits::default()).unwrap()[1], &opts);
        assert_eq!(d, again);
        let only_r0 = export_dot(&g, &DotOptions { show_trees: false, agents: Some(vec![AgentId(0)]) });
        assert!(!only_r0.contains("style=dashed"));
        assert!(export_dot(&g, &DotOptions::default()).contains("style=dashed, label=\"r1\""));
    }
}
