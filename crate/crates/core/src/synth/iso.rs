//! Isomorphism of games as labelled, partitioned graphs with objectives.
//! Location names and knowledge labels are ignored.

use std::collections::{BTreeMap, HashMap};

use crate::game::{AgentId, Game, JointAction, LocId, Objective};

/// Own colour, coloured out- and in-edges, per-agent block colours.
type Signature = (usize, Vec<(JointAction, usize)>, Vec<(JointAction, usize)>, Vec<Vec<usize>>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoResult {
    pub isomorphic: bool,
    /// `mapping[l]` is the image of `l` when isomorphic.
    pub mapping: Option<Vec<LocId>>,
}

struct Side<'a> {
    g: &'a Game,
    covered: Vec<Vec<bool>>,
    edges: HashMap<(LocId, LocId), Vec<JointAction>>,
    in_edges: Vec<Vec<(JointAction, LocId)>>,
}

impl<'a> Side<'a> {
    fn new(g: &'a Game, obj: Option<&Objective>) -> Self {
        let covered = g
            .agents()
            .map(|a| {
                g.locations()
                    .map(|l| {
                        obj.is_some_and(|o| o.targets.contains(&(a, g.block_of(a, l).unwrap())))
                    })
                    .collect()
            })
            .collect();
        let mut edges: HashMap<(LocId, LocId), Vec<JointAction>> = HashMap::new();
        let mut in_edges = vec![Vec::new(); g.num_locations()];
        for t in g.transitions() {
            edges.entry((t.from, t.to)).or_default().push(t.action.clone());
            in_edges[t.to.0].push((t.action.clone(), t.from));
        }
        for v in edges.values_mut() {
            v.sort();
        }
        Side { g, covered, edges, in_edges }
    }

    fn seed(&self, l: LocId) -> Vec<usize> {
        let g = self.g;
        let mut s = vec![usize::from(l == g.initial()), g.out_edges(l).len(), self.in_edges[l.0].len()];
        for a in g.agents() {
            s.push(g.observation_of(a, l).unwrap().len());
            s.push(usize::from(self.covered[a.0][l.0]));
        }
        s
    }

    /// Signature of `l` under the current colouring.
    fn signature(&self, l: LocId, colour: &[usize]) -> Signature {
        let g = self.g;
        let mut out: Vec<_> = g.out_edges(l).iter().map(|(x, t)| (x.clone(), colour[t.0])).collect();
        out.sort();
        let mut inn: Vec<_> = self.in_edges[l.0].iter().map(|(x, f)| (x.clone(), colour[f.0])).collect();
        inn.sort();
        let blocks = g
            .agents()
            .map(|a| {
                let mut c: Vec<usize> = g.observation_of(a, l).unwrap().iter().map(|m| colour[m.0]).collect();
                c.sort();
                c
            })
            .collect();
        (colour[l.0], out, inn, blocks)
    }
}

/// Stable colouring of the disjoint union; colours are comparable across sides.
fn refine(s1: &Side<'_>, s2: &Side<'_>) -> (Vec<usize>, Vec<usize>) {
    let index = |sigs: Vec<Vec<usize>>| {
        let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for s in &sigs {
            let n = ids.len();
            ids.entry(s.clone()).or_insert(n);
        }
        // Renumber in sorted order so both sides agree.
        let order: BTreeMap<Vec<usize>, usize> = ids.keys().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        sigs.iter().map(|s| order[s]).collect::<Vec<_>>()
    };
    let n1 = s1.g.num_locations();
    let seeds: Vec<Vec<usize>> = s1.g.locations().map(|l| s1.seed(l)).chain(s2.g.locations().map(|l| s2.seed(l))).collect();
    let mut colour = index(seeds);
    let mut classes = colour.iter().collect::<std::collections::BTreeSet<_>>().len();
    loop {
        let (c1, c2) = colour.split_at(n1);
        let sigs: Vec<_> = s1
            .g
            .locations()
            .map(|l| s1.signature(l, c1))
            .chain(s2.g.locations().map(|l| s2.signature(l, c2)))
            .collect();
        let mut ids: BTreeMap<&_, usize> = BTreeMap::new();
        for s in &sigs {
            ids.insert(s, 0);
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i;
        }
        let next: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
        let count = ids.len();
        colour = next;
        if count == classes {
            break;
        }
        classes = count;
    }
    let c2 = colour.split_off(n1);
    (colour, c2)
}

pub fn game_isomorphic(g1: &Game, obj1: Option<&Objective>, g2: &Game, obj2: Option<&Objective>) -> IsoResult {
    let no = IsoResult { isomorphic: false, mapping: None };
    if g1.num_locations() != g2.num_locations()
        || g1.num_agents() != g2.num_agents()
        || g1.transitions().len() != g2.transitions().len()
        || g1.agents().any(|a| g1.actions(a).len() != g2.actions(a).len())
    {
        return no;
    }
    let s1 = Side::new(g1, obj1);
    let s2 = Side::new(g2, obj2);
    let (c1, c2) = refine(&s1, &s2);
    let mut h1 = c1.clone();
    let mut h2 = c2.clone();
    h1.sort();
    h2.sort();
    if h1 != h2 {
        return no;
    }
    // Assign locations with the rarest colours first.
    let mut freq: HashMap<usize, usize> = HashMap::new();
    for &c in &c1 {
        *freq.entry(c).or_default() += 1;
    }
    let mut order: Vec<LocId> = g1.locations().collect();
    order.sort_by_key(|l| (freq[&c1[l.0]], l.0));
    let mut map = vec![None; g1.num_locations()];
    let mut used = vec![false; g2.num_locations()];
    if backtrack(&s1, &s2, &c1, &c2, &order, 0, &mut map, &mut used) {
        IsoResult { isomorphic: true, mapping: Some(map.into_iter().map(Option::unwrap).collect()) }
    } else {
        no
    }
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    s1: &Side<'_>,
    s2: &Side<'_>,
    c1: &[usize],
    c2: &[usize],
    order: &[LocId],
    i: usize,
    map: &mut Vec<Option<LocId>>,
    used: &mut Vec<bool>,
) -> bool {
    let Some(&u) = order.get(i) else {
        return true;
    };
    for v in s2.g.locations() {
        if used[v.0] || c2[v.0] != c1[u.0] || !compatible(s1, s2, map, u, v) {
            continue;
        }
        map[u.0] = Some(v);
        used[v.0] = true;
        if backtrack(s1, s2, c1, c2, order, i + 1, map, used) {
            return true;
        }
        map[u.0] = None;
        used[v.0] = false;
    }
    false
}

fn compatible(s1: &Side<'_>, s2: &Side<'_>, map: &[Option<LocId>], u: LocId, v: LocId) -> bool {
    if (u == s1.g.initial()) != (v == s2.g.initial()) {
        return false;
    }
    let empty = Vec::new();
    let labels = |s: &Side<'_>, x: LocId, y: LocId| s.edges.get(&(x, y)).unwrap_or(&empty).clone();
    if labels(s1, u, u) != labels(s2, v, v) {
        return false;
    }
    for a in s1.g.agents() {
        if s1.covered[a.0][u.0] != s2.covered[a.0][v.0] {
            return false;
        }
    }
    for (w, m) in map.iter().enumerate() {
        let Some(m) = *m else { continue };
        let w = LocId(w);
        if labels(s1, u, w) != labels(s2, v, m) || labels(s1, w, u) != labels(s2, m, v) {
            return false;
        }
        for a in s1.g.agents() {
            let same1 = s1.g.block_of(a, u) == s1.g.block_of(a, w);
            let same2 = s2.g.block_of(a, v) == s2.g.block_of(a, m);
            if same1 != same2 {
                return false;
            }
        }
    }
    true
}

/// Checks a claimed mapping directly.
pub fn is_isomorphism(g1: &Game, obj1: Option<&Objective>, g2: &Game, obj2: Option<&Objective>, f: &[LocId]) -> bool {
    if f.len() != g1.num_locations() || g1.num_locations() != g2.num_locations() {
        return false;
    }
    let mut seen = vec![false; g2.num_locations()];
    for &m in f {
        if seen[m.0] {
            return false;
        }
        seen[m.0] = true;
    }
    if f[g1.initial().0] != g2.initial() {
        return false;
    }
    let e1: std::collections::BTreeSet<_> =
        g1.transitions().iter().map(|t| (f[t.from.0], t.action.clone(), f[t.to.0])).collect();
    let e2: std::collections::BTreeSet<_> =
        g2.transitions().iter().map(|t| (t.from, t.action.clone(), t.to)).collect();
    if e1 != e2 {
        return false;
    }
    let s1 = Side::new(g1, obj1);
    let s2 = Side::new(g2, obj2);
    g1.agents().all(|a: AgentId| {
        g1.locations().all(|u| {
            s1.covered[a.0][u.0] == s2.covered[a.0][f[u.0].0]
                && g1.locations().all(|w| {
                    (g1.block_of(a, u) == g1.block_of(a, w)) == (g2.block_of(a, f[u.0]) == g2.block_of(a, f[w.0]))
                })
        })
    })
}
