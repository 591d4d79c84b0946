//! Brute-force oracles that work from bid object lists alone, sharing no code
//! with the library beyond its data types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use auctol::budgets::{ConstraintKind, ConstraintSet};
use auctol::graph::Bid;
use auctol::orderings::TreeDecomposition;

/// Conflict masks by bid position: bit j of `adj[i]` is set when bids i and
/// j share an object.
pub fn conflict_masks(bids: &[Bid]) -> Vec<u64> {
    assert!(bids.len() <= 64);
    let sets: Vec<BTreeSet<&str>> = bids
        .iter()
        .map(|b| b.objects.iter().map(String::as_str).collect())
        .collect();
    (0..bids.len())
        .map(|i| {
            (0..bids.len())
                .filter(|&j| j != i && !sets[i].is_disjoint(&sets[j]))
                .fold(0u64, |m, j| m | 1 << j)
        })
        .collect()
}

fn independent(adj: &[u64], mask: u64) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if adj[i] & mask != 0 {
            return false;
        }
    }
    true
}

fn revenue(bids: &[Bid], mask: u64) -> i64 {
    (0..bids.len()).filter(|&i| mask >> i & 1 == 1).map(|i| bids[i].price).sum()
}

/// Group masks by bid position with their limit; the flag marks budget
/// (price-sum) limits as opposed to count limits.
fn group_masks(bids: &[Bid], cs: Option<&ConstraintSet>) -> Vec<(u64, i64, bool)> {
    let pos: BTreeMap<&str, usize> = bids.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    cs.map(|cs| {
        cs.groups
            .iter()
            .map(|g| {
                let mask = g.members.iter().fold(0u64, |m, id| m | 1 << pos[id.as_str()]);
                match cs.kind {
                    ConstraintKind::Weighted => (mask, g.b.unwrap() as i64, true),
                    _ => (mask, g.k.unwrap() as i64, false),
                }
            })
            .collect()
    })
    .unwrap_or_default()
}

fn within_limits(bids: &[Bid], groups: &[(u64, i64, bool)], mask: u64) -> bool {
    groups.iter().all(|&(gm, limit, weighted)| {
        let chosen = mask & gm;
        if weighted {
            revenue(bids, chosen) <= limit
        } else {
            chosen.count_ones() as i64 <= limit
        }
    })
}

/// Best revenue over every conflict-free subset of bids that meets every
/// group limit. Walks all independent sets depth first.
pub fn brute_optimum(bids: &[Bid], cs: Option<&ConstraintSet>) -> i64 {
    let n = bids.len();
    assert!(n <= 40, "brute force on {n} bids");
    let adj = conflict_masks(bids);
    let groups = group_masks(bids, cs);
    let mut best = 0;
    let mut stack = vec![(0usize, 0u64)];
    while let Some((i, mask)) = stack.pop() {
        if i == n {
            if within_limits(bids, &groups, mask) {
                best = best.max(revenue(bids, mask));
            }
            continue;
        }
        stack.push((i + 1, mask));
        if adj[i] & mask == 0 {
            stack.push((i + 1, mask | 1 << i));
        }
    }
    best
}

/// Whether the bids with ids `selected` are pairwise conflict-free and meet
/// every group limit.
pub fn is_feasible(bids: &[Bid], cs: Option<&ConstraintSet>, selected: &[&str]) -> bool {
    let adj = conflict_masks(bids);
    let mask = selected.iter().fold(0u64, |m, id| {
        m | 1 << bids.iter().position(|b| b.id == *id).expect("selected id exists")
    });
    independent(&adj, mask) && within_limits(bids, &group_masks(bids, cs), mask)
}

/// β of the orientation given by `order` (bid ids, first processed first):
/// the largest conflict-free set among any bid's later neighbours, at least 1.
pub fn brute_beta(bids: &[Bid], order: &[String]) -> usize {
    let adj = conflict_masks(bids);
    let pos: BTreeMap<&str, usize> = bids.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let seq: Vec<usize> = order.iter().map(|id| pos[id.as_str()]).collect();
    let mut beta = 1;
    for (r, &v) in seq.iter().enumerate() {
        let later: Vec<usize> = seq[r + 1..].iter().copied().filter(|&u| adj[v] >> u & 1 == 1).collect();
        assert!(later.len() <= 20);
        for sub in 0u32..1 << later.len() {
            let mask = (0..later.len())
                .filter(|&j| sub >> j & 1 == 1)
                .fold(0u64, |m, j| m | 1 << later[j]);
            if independent(&adj, mask) {
                beta = beta.max(mask.count_ones() as usize);
            }
        }
    }
    beta
}

/// Every ordered pair A before B that shares an object has B meeting the
/// frontier set of A. Returns the first failing pair of ids.
pub fn frontier_failure(
    bids: &[Bid],
    order: &[String],
    frontier: &BTreeMap<String, Vec<String>>,
) -> Option<(String, String)> {
    let by_id: BTreeMap<&str, &Bid> = bids.iter().map(|b| (b.id.as_str(), b)).collect();
    for (i, a) in order.iter().enumerate() {
        let oa: BTreeSet<&String> = by_id[a.as_str()].objects.iter().collect();
        let fa: BTreeSet<&String> = frontier[a].iter().collect();
        for b in &order[i + 1..] {
            let ob: BTreeSet<&String> = by_id[b.as_str()].objects.iter().collect();
            if !oa.is_disjoint(&ob) && fa.is_disjoint(&ob) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

/// Problems with `td` as a tree decomposition of the object graph given by
/// `objects` and `edges`: the tree must be connected and acyclic, every
/// object and edge must sit in a bag, and the bags holding one object must
/// form a connected subtree.
pub fn td_problems(objects: &[String], edges: &[(String, String)], td: &TreeDecomposition) -> Vec<String> {
    let mut out = Vec::new();
    let nodes: BTreeSet<&String> = td.tree_nodes.iter().collect();
    if td.tree_edges.len() + 1 != nodes.len() {
        out.push(format!("{} tree edges for {} nodes", td.tree_edges.len(), nodes.len()));
    }
    let reach = |allowed: &dyn Fn(&String) -> bool, start: &String| -> BTreeSet<String> {
        let mut seen = BTreeSet::from([start.clone()]);
        let mut stack = vec![start.clone()];
        while let Some(t) = stack.pop() {
            for (a, b) in &td.tree_edges {
                let next = if *a == t {
                    b
                } else if *b == t {
                    a
                } else {
                    continue;
                };
                if allowed(next) && seen.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
        seen
    };
    if let Some(first) = nodes.iter().next() {
        if reach(&|_| true, first).len() != nodes.len() {
            out.push("tree is disconnected".into());
        }
    }
    let holds = |t: &String, o: &String| td.bags.get(t).is_some_and(|bag| bag.contains(o));
    for o in objects {
        let with: Vec<&String> = nodes.iter().copied().filter(|t| holds(t, o)).collect();
        match with.first() {
            None => out.push(format!("object {o} in no bag")),
            Some(start) => {
                if reach(&|t| holds(t, o), start).len() != with.len() {
                    out.push(format!("bags holding {o} are not connected"));
                }
            }
        }
    }
    for (a, b) in edges {
        if !nodes.iter().any(|t| holds(t, a) && holds(t, b)) {
            out.push(format!("edge {a}-{b} in no bag"));
        }
    }
    out
}
