//! k-trees: a location with, per agent, a forest of lower trees that the
//! agent considers possible. Each tree in agent `a`'s forest is
//! `a`-objective, i.e. its own `a`-forest is empty.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::game::{ActionId, AgentId, BlockId, Game, JointAction, LocId};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KTree {
    pub depth: usize,
    pub root: LocId,
    pub forests: Vec<BTreeSet<KTree>>,
}

impl KTree {
    /// A 0-tree.
    pub fn leaf(root: LocId, agents: usize) -> KTree {
        KTree { depth: 0, root, forests: vec![BTreeSet::new(); agents] }
    }

    pub fn node(root: LocId, forests: Vec<BTreeSet<KTree>>) -> Result<KTree> {
        let depth = forests
            .iter()
            .flatten()
            .map(|t| t.depth)
            .max()
            .map_or(1, |d| d + 1);
        let t = KTree { depth, root, forests };
        t.validate(depth, t.forests.len())?;
        Ok(t)
    }

    pub fn is_objective(&self, a: AgentId) -> bool {
        self.forests.get(a.0).is_none_or(|f| f.is_empty())
    }

    /// Checks that this is a well-formed `k`-tree over `agents` agents.
    pub fn validate(&self, k: usize, agents: usize) -> Result<()> {
        if self.depth != k {
            return Err(Error::MalformedState(format!("expected a {k}-tree, found depth {}", self.depth)));
        }
        if self.forests.len() != agents {
            return Err(Error::MalformedState("one forest per agent required".into()));
        }
        if k == 0 {
            if self.forests.iter().any(|f| !f.is_empty()) {
                return Err(Error::MalformedState("0-tree with children".into()));
            }
            return Ok(());
        }
        for (a, forest) in self.forests.iter().enumerate() {
            for t in forest {
                t.validate(k - 1, agents)?;
                if !t.is_objective(AgentId(a)) {
                    return Err(Error::MalformedState(format!(
                        "tree in forest {a} is not {a}-objective"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `G_k(t, σ, l')`.
pub fn ktree_update_g(k: usize, t: &KTree, action: &JointAction, to: LocId, g: &Game) -> KTree {
    if k == 0 {
        return KTree::leaf(to, g.num_agents());
    }
    let forests = g
        .agents()
        .map(|a| {
            let ob = g.block_of(a, to).expect("partition covers locations");
            ktree_update_h(k - 1, a, &t.forests[a.0], action.get(a), ob, g)
        })
        .collect();
    KTree { depth: k, root: to, forests }
}

/// `H_{k,a}(F, σ_a, o_a)`.
pub fn ktree_update_h(
    k: usize,
    a: AgentId,
    forest: &BTreeSet<KTree>,
    action: ActionId,
    obs: BlockId,
    g: &Game,
) -> BTreeSet<KTree> {
    let mut out = BTreeSet::new();
    for t in forest {
        for (sigma, l) in g.out_edges(t.root) {
            if sigma.get(a) == action && g.block_of(a, *l) == Some(obs) {
                out.insert(ktree_update_g(k, t, sigma, *l, g));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;

    fn three() -> Game {
        GameBuilder::new()
            .agents(["1", "2"])
            .locations(["l1", "l2", "l3"])
            .initial("l1")
            .actions("1", ["x"])
            .actions("2", ["x"])
            .perfect_observation("1")
            .perfect_observation("2")
            .transition_all("l1", "l2")
            .build()
            .unwrap()
    }

    #[test]
    fn g0_is_target_location() {
        let g = three();
        let t = KTree::leaf(LocId(0), 2);
        let u = ktree_update_g(0, &t, &JointAction(vec![ActionId(0), ActionId(0)]), LocId(2), &g);
        assert_eq!(u, KTree::leaf(LocId(2), 2));
    }

    #[test]
    fn two_tree_from_the_appendix_validates() {
        let (l1, l2, l3) = (LocId(0), LocId(1), LocId(2));
        let leafs = |ls: &[LocId]| ls.iter().map(|&l| KTree::leaf(l, 2)).collect::<BTreeSet<_>>();
        let one = |root, f1: BTreeSet<KTree>, f2: BTreeSet<KTree>| KTree {
            depth: 1,
            root,
            forests: vec![f1, f2],
        };
        let f1: BTreeSet<KTree> = [
            one(l1, BTreeSet::new(), leafs(&[l1])),
            one(l2, BTreeSet::new(), leafs(&[l2, l3])),
        ]
        .into();
        let f2: BTreeSet<KTree> = [
            one(l2, leafs(&[l1, l2]), BTreeSet::new()),
            one(l3, leafs(&[l3]), BTreeSet::new()),
        ]
        .into();
        let t = KTree::node(l2, vec![f1, f2]).unwrap();
        assert_eq!(t.depth, 2);
        t.validate(2, 2).unwrap();
        assert!(t.validate(1, 2).is_err());

        let bad = KTree::node(l2, vec![leafs(&[l1]).into_iter().map(|x| one(x.root, leafs(&[l1]), BTreeSet::new())).collect(), BTreeSet::new()]);
        assert!(bad.is_err());
    }
}
