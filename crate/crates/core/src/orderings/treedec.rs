use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate_germane, Bid, ObjectGraph, Ordering, Provenance};

/// Tree decomposition of an object graph. Bags are object-id sets keyed by
/// tree node id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub tree_nodes: Vec<String>,
    pub tree_edges: Vec<(String, String)>,
    pub bags: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
}

impl TreeDecomposition {
    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.values().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Sorts every list so that equal decompositions serialize identically.
    pub fn canonicalize(&mut self) {
        self.tree_nodes.sort();
        for (a, b) in &mut self.tree_edges {
            if a > b {
                std::mem::swap(a, b);
            }
        }
        self.tree_edges.sort();
        for bag in self.bags.values_mut() {
            bag.sort();
            bag.dedup();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdViolation {
    /// Tree nodes/edges do not form a single tree.
    NotATree(String),
    UnknownObject { tree_node: String, object: String },
    /// Property 1: object in no bag.
    UncoveredObject(String),
    /// Property 2: object-graph edge contained in no bag.
    UncoveredEdge(String, String),
    /// Property 3: the tree nodes holding this object are disconnected.
    DisconnectedOccurrence(String),
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::NotATree(why) => write!(f, "not a tree: {why}"),
            TdViolation::UnknownObject { tree_node, object } => {
                write!(f, "bag {tree_node} holds undeclared object {object}")
            }
            TdViolation::UncoveredObject(o) => write!(f, "object {o} is in no bag"),
            TdViolation::UncoveredEdge(a, b) => write!(f, "edge {a}-{b} is in no bag"),
            TdViolation::DisconnectedOccurrence(o) => {
                write!(f, "bags holding {o} do not form a subtree")
            }
        }
    }
}

struct Tree {
    adj: Vec<Vec<usize>>,
    bags: Vec<Vec<usize>>,
}

/// Resolves ids and checks the tree shape; object-level problems are pushed
/// onto `out`.
fn resolve(og: &ObjectGraph, td: &TreeDecomposition, out: &mut Vec<TdViolation>) -> Option<Tree> {
    let mut index = HashMap::new();
    for (i, t) in td.tree_nodes.iter().enumerate() {
        if index.insert(t.as_str(), i).is_some() {
            out.push(TdViolation::NotATree(format!("duplicate tree node {t}")));
            return None;
        }
    }
    let n = td.tree_nodes.len();
    if n == 0 {
        out.push(TdViolation::NotATree("no tree nodes".into()));
        return None;
    }
    if td.tree_edges.len() + 1 != n {
        out.push(TdViolation::NotATree(format!(
            "{} edges for {} nodes",
            td.tree_edges.len(),
            n
        )));
        return None;
    }
    let mut adj = vec![Vec::new(); n];
    for (a, b) in &td.tree_edges {
        let (Some(&u), Some(&v)) = (index.get(a.as_str()), index.get(b.as_str())) else {
            out.push(TdViolation::NotATree(format!("edge {a}-{b} names an unknown node")));
            return None;
        };
        if u == v {
            out.push(TdViolation::NotATree(format!("self-loop on {a}")));
            return None;
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !std::mem::replace(&mut seen[v], true) {
                count += 1;
                stack.push(v);
            }
        }
    }
    if count != n {
        out.push(TdViolation::NotATree("tree edges are disconnected".into()));
        return None;
    }
    if let Some(t) = td.bags.keys().find(|t| !index.contains_key(t.as_str())) {
        out.push(TdViolation::NotATree(format!("bag for unknown tree node {t}")));
        return None;
    }
    if let Some(root) = td.root.as_ref().filter(|r| !index.contains_key(r.as_str())) {
        out.push(TdViolation::NotATree(format!("unknown root {root}")));
        return None;
    }
    let mut bags = vec![Vec::new(); n];
    for (t, objs) in &td.bags {
        let ti = index[t.as_str()];
        for o in objs {
            match og.index_of(o) {
                Some(oi) => bags[ti].push(oi),
                None => out.push(TdViolation::UnknownObject {
                    tree_node: t.clone(),
                    object: o.clone(),
                }),
            }
        }
        bags[ti].sort_unstable();
        bags[ti].dedup();
    }
    Some(Tree { adj, bags })
}

/// Reports every violated decomposition property with a concrete witness.
pub fn validate_tree_decomposition(og: &ObjectGraph, td: &TreeDecomposition) -> Vec<TdViolation> {
    let mut out = Vec::new();
    let Some(tree) = resolve(og, td, &mut out) else {
        return out;
    };
    let mut occurrences = vec![Vec::new(); og.len()];
    for (t, bag) in tree.bags.iter().enumerate() {
        for &o in bag {
            occurrences[o].push(t);
        }
    }
    for (o, occ) in occurrences.iter().enumerate() {
        if occ.is_empty() {
            out.push(TdViolation::UncoveredObject(og.objects()[o].clone()));
        }
    }
    for (a, b) in og.edges() {
        let covered = occurrences[a]
            .iter()
            .any(|&t| tree.bags[t].binary_search(&b).is_ok());
        if !covered {
            let names = og.objects();
            out.push(TdViolation::UncoveredEdge(names[a].clone(), names[b].clone()));
        }
    }
    // A vertex subset of a tree is connected iff it spans |subset| - 1 edges.
    let mut inner_edges = vec![0usize; og.len()];
    for (u, list) in tree.adj.iter().enumerate() {
        for &v in list.iter().filter(|&&v| v > u) {
            let (small, large) = if tree.bags[u].len() <= tree.bags[v].len() {
                (u, v)
            } else {
                (v, u)
            };
            for &o in &tree.bags[small] {
                if tree.bags[large].binary_search(&o).is_ok() {
                    inner_edges[o] += 1;
                }
            }
        }
    }
    for (o, occ) in occurrences.iter().enumerate() {
        if !occ.is_empty() && inner_edges[o] + 1 != occ.len() {
            out.push(TdViolation::DisconnectedOccurrence(og.objects()[o].clone()));
        }
    }
    out
}

/// Orders bids by the deepest-first position of their topmost intersecting
/// bag, attaching that bag as each bid's frontier set.
///
/// The tree is rooted at `td.root` (or the lowest tree-node id) and ordered
/// by reverse pre-order with children visited by ascending id, so every
/// tree node follows all of its descendants. `bids[v]` is node `v` of the
/// resulting ordering.
pub fn tree_decomposition_ordering(
    og: &ObjectGraph,
    td: &TreeDecomposition,
    bids: &[Bid],
) -> Result<Ordering> {
    let violations = validate_tree_decomposition(og, td);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::validation("tree_decomposition", list.join("; ")));
    }
    if let Some(bad) = validate_germane(og, bids)?.first() {
        return Err(Error::validation(
            format!("bids/{bad}"),
            format!("bid {bad} is not a connected object set"),
        ));
    }
    let mut ignored = Vec::new();
    let tree = resolve(og, td, &mut ignored).expect("validated above");
    let n = td.tree_nodes.len();
    let root = match &td.root {
        Some(r) => td.tree_nodes.iter().position(|t| t == r).expect("validated"),
        None => (0..n).min_by_key(|&t| &td.tree_nodes[t]).expect("non-empty tree"),
    };

    let mut preorder = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = vec![root];
    while let Some(t) = stack.pop() {
        if preorder[t] != usize::MAX {
            continue;
        }
        preorder[t] = next;
        next += 1;
        let mut children: Vec<usize> = tree.adj[t]
            .iter()
            .copied()
            .filter(|&c| preorder[c] == usize::MAX)
            .collect();
        // Pushed in reverse so the smallest id is visited first.
        children.sort_by(|&a, &b| td.tree_nodes[b].cmp(&td.tree_nodes[a]));
        stack.extend(children);
    }

    // Topmost tree node holding each object.
    let mut top = vec![usize::MAX; og.len()];
    for (t, bag) in tree.bags.iter().enumerate() {
        for &o in bag {
            if top[o] == usize::MAX || preorder[t] < preorder[top[o]] {
                top[o] = t;
            }
        }
    }
    let t_of: Vec<usize> = bids
        .iter()
        .map(|b| {
            b.objects
                .iter()
                .map(|o| top[og.index_of(o).expect("germane check resolved ids")])
                .min_by_key(|&t| preorder[t])
                .expect("bids are non-empty")
        })
        .collect();

    let mut perm: Vec<usize> = (0..bids.len()).collect();
    perm.sort_by(|&a, &b| {
        preorder[t_of[b]]
            .cmp(&preorder[t_of[a]])
            .then_with(|| bids[a].id.cmp(&bids[b].id))
    });
    let frontier = t_of
        .iter()
        .map(|&t| tree.bags[t].iter().map(|&o| og.objects()[o].clone()).collect())
        .collect();
    Ordering::new(perm, Provenance::TreeDecomposition)?.with_frontier_sets(frontier)
}

/// Tree decomposition by repeatedly eliminating a minimum-degree vertex
/// (ties to the lowest index). Width is heuristic.
pub fn min_degree_heuristic_decomposition(og: &ObjectGraph) -> TreeDecomposition {
    let n = og.len();
    if n == 0 {
        return TreeDecomposition::default();
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|o| og.neighbors(o).iter().copied().collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|o| (adj[o].len(), o)).collect();
    let mut step = vec![usize::MAX; n];
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut neighbourhoods: Vec<Vec<usize>> = Vec::with_capacity(n);

    while let Some((_, v)) = queue.pop_first() {
        step[v] = bags.len();
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nbrs {
            queue.remove(&(adj[a].len(), a));
            adj[a].remove(&v);
        }
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &nbrs {
            queue.insert((adj[a].len(), a));
        }
        let mut bag = nbrs.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        neighbourhoods.push(nbrs);
    }

    let width = (bags.len() - 1).to_string().len();
    let name = |i: usize| format!("t{i:0width$}");
    let mut tree_edges = Vec::with_capacity(bags.len().saturating_sub(1));
    for (i, nbrs) in neighbourhoods.iter().enumerate() {
        // Parent: the neighbour eliminated next; isolated pieces hang off the
        // following bag so the forest becomes one tree.
        let parent = nbrs.iter().map(|&a| step[a]).min().or((i + 1 < bags.len()).then_some(i + 1));
        if let Some(p) = parent {
            tree_edges.push((name(i), name(p)));
        }
    }
    let mut td = TreeDecomposition {
        tree_nodes: (0..bags.len()).map(name).collect(),
        tree_edges,
        bags: bags
            .iter()
            .enumerate()
            .map(|(i, bag)| (name(i), bag.iter().map(|&o| og.objects()[o].clone()).collect()))
            .collect(),
        root: Some(name(bags.len() - 1)),
    };
    td.canonicalize();
    td
}
