//! Seeded instance generators, one per graph family.

use std::collections::{BTreeMap, BTreeSet};

use super::rng::{stage, StageRng};
use super::{Instance, Metadata, OrderingSpec};
use crate::budgets::{ConstraintKind, ConstraintSet, Group};
use crate::graph::Bid;
use crate::orderings::min_degree_heuristic_decomposition;

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

fn name(prefix: &str, i: usize, w: usize) -> String {
    format!("{prefix}{i:0w$}")
}

fn metadata(family: &str, seed: u64, description: String) -> Metadata {
    Metadata {
        seed: Some(seed),
        family: family.to_string(),
        description,
    }
}

fn prices(n: usize, (lo, hi): (i64, i64), seed: u64) -> Vec<i64> {
    let mut rng = StageRng::new(seed, stage::WEIGHTS);
    (0..n).map(|_| rng.range(lo, hi)).collect()
}

/// Intervals over the points `0..2n`, each spanning 1 to 4 consecutive points.
/// The object graph is the path through the points, so every bid is germane
/// and the conflict graph is an interval graph.
pub fn gen_interval(n: usize, weights: (i64, i64), seed: u64) -> Instance {
    let m = (2 * n).max(1);
    let (pw, bw) = (width(m), width(n));
    let points: Vec<String> = (0..m).map(|p| name("p", p, pw)).collect();
    let mut rng = StageRng::new(seed, stage::STRUCTURE);
    let price = prices(n, weights, seed);
    let mut spans: Vec<(usize, usize)> = (0..n)
        .map(|_| {
            let start = rng.index(m);
            (start, 1 + rng.index(4.min(m - start)))
        })
        .collect();
    // Bids are numbered left to right.
    spans.sort_unstable();
    let bids = spans
        .into_iter()
        .enumerate()
        .map(|(i, (start, len))| {
            Bid {
                id: name("b", i, bw),
                objects: points[start..start + len].to_vec(),
                price: price[i],
                group: None,
            }
        })
        .collect();
    let mut inst = Instance::new(
        metadata(
            "interval",
            seed,
            format!("{n} intervals over {m} points, prices {}..={}", weights.0, weights.1),
        ),
        bids,
    );
    inst.object_edges = Some(points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect());
    inst.objects = Some(points);
    inst.ordering = Some(OrderingSpec::Chordal);
    inst.canonicalize();
    inst
}

/// Interval bids split among bidders, each bidder winning at most one.
/// The conflict graph is an interval graph and the bidder cliques are
/// disjoint, so the union has β ≤ 2 under the interval ordering.
pub fn gen_interval_selection(n_groups: usize, per_group: usize, seed: u64) -> Instance {
    let n = n_groups * per_group;
    let mut inst = gen_interval(n, (1, 100), seed);
    let gw = width(n_groups);
    let mut groups: Vec<Group> = (0..n_groups)
        .map(|g| Group {
            label: name("bidder", g, gw),
            members: Vec::new(),
            k: Some(1),
            b: None,
        })
        .collect();
    for (i, bid) in inst.bids.iter_mut().enumerate() {
        let g = i / per_group.max(1);
        bid.group = Some(groups[g].label.clone());
        groups[g].members.push(bid.id.clone());
    }
    inst.constraints = Some(ConstraintSet {
        kind: ConstraintKind::Unweighted,
        groups,
    });
    inst.metadata = metadata(
        "interval-selection",
        seed,
        format!("{n_groups} bidders with {per_group} interval bids each, one win per bidder"),
    );
    inst.canonicalize();
    inst
}

fn random_tree(n: usize, rng: &mut StageRng) -> Vec<(usize, usize)> {
    (1..n).map(|i| (rng.index(i), i)).collect()
}

/// Random connected object set of size up to `max_size`, grown from a random
/// start by adding random boundary objects.
fn connected_subset(adj: &[Vec<usize>], max_size: usize, rng: &mut StageRng) -> Vec<usize> {
    let size = 1 + rng.index(max_size.min(adj.len()));
    let mut set = BTreeSet::from([rng.index(adj.len())]);
    while set.len() < size {
        let boundary: Vec<usize> = set
            .iter()
            .flat_map(|&o| adj[o].iter().copied())
            .filter(|o| !set.contains(o))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if boundary.is_empty() {
            break;
        }
        set.insert(boundary[rng.index(boundary.len())]);
    }
    set.into_iter().collect()
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn object_instance(
    meta: Metadata,
    n_objects: usize,
    edges: &[(usize, usize)],
    subsets: Vec<Vec<usize>>,
    weights: (i64, i64),
    seed: u64,
) -> Instance {
    let ow = width(n_objects);
    let objects: Vec<String> = (0..n_objects).map(|o| name("o", o, ow)).collect();
    let bw = width(subsets.len());
    let price = prices(subsets.len(), weights, seed);
    let bids = subsets
        .into_iter()
        .enumerate()
        .map(|(i, set)| Bid {
            id: name("b", i, bw),
            objects: set.into_iter().map(|o| objects[o].clone()).collect(),
            price: price[i],
            group: None,
        })
        .collect();
    let mut inst = Instance::new(meta, bids);
    inst.object_edges = Some(
        edges
            .iter()
            .map(|&(a, b)| (objects[a].clone(), objects[b].clone()))
            .collect(),
    );
    inst.objects = Some(objects);
    inst
}

/// Bids are random connected subtrees (up to 5 objects) of a random tree,
/// so the conflict graph is chordal.
pub fn gen_subtrees(tree_size: usize, n_bids: usize, seed: u64) -> Instance {
    let tree_size = tree_size.max(1);
    let mut rng = StageRng::new(seed, stage::STRUCTURE);
    let edges = random_tree(tree_size, &mut rng);
    let adj = adjacency(tree_size, &edges);
    let subsets = (0..n_bids).map(|_| connected_subset(&adj, 5, &mut rng)).collect();
    let meta = metadata(
        "subtrees",
        seed,
        format!("{n_bids} subtree bids on a random tree of {tree_size} objects"),
    );
    let mut inst = object_instance(meta, tree_size, &edges, subsets, (1, 100), seed);
    inst.ordering = Some(OrderingSpec::Chordal);
    inst.canonicalize();
    inst
}

/// Points of a `dims` grid, each kept with probability `density_permille`
/// / 1000. A point bids on its own cell and on every grid edge at it, so
/// kept points conflict exactly when they are grid neighbours.
pub fn gen_grid(dims: &[usize], density_permille: u64, weights: (i64, i64), seed: u64) -> Instance {
    let total: usize = dims.iter().product();
    let w = width(total);
    let mut rng = StageRng::new(seed, stage::STRUCTURE);
    let coords_of = |mut idx: usize| {
        let mut c = vec![0i64; dims.len()];
        for d in (0..dims.len()).rev() {
            c[d] = (idx % dims[d]) as i64;
            idx /= dims[d];
        }
        c
    };
    let kept: Vec<usize> = (0..total).filter(|_| rng.chance(density_permille, 1000)).collect();
    let price = prices(kept.len(), weights, seed);
    let mut coords = BTreeMap::new();
    let bids = kept
        .iter()
        .zip(price)
        .map(|(&idx, price)| {
            let c = coords_of(idx);
            let mut objects = vec![name("c", idx, w)];
            let mut stride = 1;
            for d in (0..dims.len()).rev() {
                if c[d] > 0 {
                    objects.push(format!("e{}_{}", name("", idx - stride, w), name("", idx, w)));
                }
                if (c[d] as usize) + 1 < dims[d] {
                    objects.push(format!("e{}_{}", name("", idx, w), name("", idx + stride, w)));
                }
                stride *= dims[d];
            }
            let id = name("b", idx, w);
            coords.insert(id.clone(), c);
            Bid {
                id,
                objects,
                price,
                group: None,
            }
        })
        .collect();
    let shape: Vec<String> = dims.iter().map(ToString::to_string).collect();
    let mut inst = Instance::new(
        metadata(
            "grid",
            seed,
            format!(
                "{} grid, density {density_permille}/1000, prices {}..={}",
                shape.join("x"),
                weights.0,
                weights.1
            ),
        ),
        bids,
    );
    inst.ordering = Some(OrderingSpec::Grid { coords });
    inst.canonicalize();
    inst
}

/// A bid of price 1000 followed by `beta` mutually compatible bids of price
/// 1000 − `epsilon_milli`, each sharing one object with the first. Opcost
/// keeps only the first bid, so its ratio is beta·(1000 − ε)/1000.
pub fn gen_tight(beta: usize, epsilon_milli: i64, seed: u64) -> Instance {
    let beta = beta.max(1);
    let w = width(beta + 1);
    let objects: Vec<String> = (1..=beta).map(|i| name("o", i, w)).collect();
    let mut bids = vec![Bid {
        id: name("b", 0, w),
        objects: objects.clone(),
        price: 1000,
        group: None,
    }];
    let mut frontier = BTreeMap::from([(bids[0].id.clone(), objects.clone())]);
    for (i, o) in objects.iter().enumerate() {
        let id = name("b", i + 1, w);
        frontier.insert(id.clone(), vec![o.clone()]);
        bids.push(Bid {
            id,
            objects: vec![o.clone()],
            price: 1000 - epsilon_milli,
            group: None,
        });
    }
    let permutation = bids.iter().map(|b| b.id.clone()).collect();
    let mut inst = Instance::new(
        metadata(
            "tight",
            seed,
            format!("centre 1000 with {beta} successors of {}", 1000 - epsilon_milli),
        ),
        bids,
    );
    inst.ordering = Some(OrderingSpec::Explicit {
        permutation,
        frontier_sets: Some(frontier),
        beta_bound: None,
        beta_method: None,
    });
    inst.canonicalize();
    inst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetParams {
    pub kind: ConstraintKind,
    /// Number of groups before empty ones are dropped.
    pub groups: usize,
    /// Count limits are drawn from `1..=max_k`.
    pub max_k: u64,
    /// Overlapping kind only: each bid joins 1 to `overlap` groups.
    pub overlap: usize,
    /// Weighted kind only: reprice bids into 501..=1000 under budgets of
    /// 1000, making every bid heavy.
    pub all_heavy: bool,
}

impl Default for BudgetParams {
    fn default() -> Self {
        BudgetParams {
            kind: ConstraintKind::Unweighted,
            groups: 3,
            max_k: 2,
            overlap: 2,
            all_heavy: false,
        }
    }
}

/// Adds random constraint groups to `base`. Weighted budgets are drawn
/// between the group's largest price and three times it.
pub fn gen_budget(mut base: Instance, params: BudgetParams, seed: u64) -> Instance {
    let r = params.groups.max(1);
    let gw = width(r);
    let mut rng = StageRng::new(seed, stage::GROUPS);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); r];
    for v in 0..base.bids.len() {
        let first = rng.index(r);
        members[first].push(v);
        if params.kind == ConstraintKind::Overlapping {
            let extra = rng.index(params.overlap.clamp(1, r));
            let mut joined = vec![first];
            while joined.len() <= extra {
                let g = rng.index(r);
                if !joined.contains(&g) {
                    joined.push(g);
                    members[g].push(v);
                }
            }
        }
    }
    let mut limits = StageRng::new(seed, stage::LIMITS);
    if params.kind == ConstraintKind::Weighted && params.all_heavy {
        let mut w = StageRng::new(seed, stage::WEIGHTS);
        for bid in &mut base.bids {
            bid.price = w.range(501, 1000);
        }
    }
    let mut groups = Vec::new();
    for (g, m) in members.into_iter().enumerate() {
        if m.is_empty() {
            continue;
        }
        let label = name("g", g, gw);
        let (k, b) = match params.kind {
            ConstraintKind::Weighted if params.all_heavy => (None, Some(1000)),
            ConstraintKind::Weighted => {
                let top = m.iter().map(|&v| base.bids[v].price).max().unwrap_or(0).max(1) as u64;
                (None, Some(top + limits.below(2 * top + 1)))
            }
            _ => (Some(1 + limits.below(params.max_k.max(1))), None),
        };
        if params.kind != ConstraintKind::Overlapping {
            for &v in &m {
                base.bids[v].group = Some(label.clone());
            }
        }
        groups.push(Group {
            label,
            members: m.iter().map(|&v| base.bids[v].id.clone()).collect(),
            k,
            b,
        });
    }
    base.constraints = Some(ConstraintSet {
        kind: params.kind,
        groups,
    });
    base.metadata = metadata(
        "budget",
        seed,
        format!(
            "{} base ({}) with {} constraints over {r} groups",
            base.metadata.family,
            base.metadata.seed.map_or("-".to_string(), |s| s.to_string()),
            params.kind.as_str()
        ),
    );
    base.canonicalize();
    base
}

/// Random connected object graph (a random tree plus `extra_edges` random
/// chords), connected bids of up to `max_bid_size` objects, and an embedded
/// min-degree tree decomposition.
pub fn gen_treedec(
    n_objects: usize,
    extra_edges: usize,
    n_bids: usize,
    max_bid_size: usize,
    seed: u64,
) -> Instance {
    let n_objects = n_objects.max(1);
    let mut rng = StageRng::new(seed, stage::STRUCTURE);
    let mut edges = random_tree(n_objects, &mut rng);
    let mut present: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    let possible = n_objects * (n_objects - 1) / 2;
    let mut attempts = 0;
    while present.len() < possible.min(n_objects - 1 + extra_edges) && attempts < 20 * extra_edges {
        attempts += 1;
        let (a, b) = (rng.index(n_objects), rng.index(n_objects));
        if a != b && present.insert((a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let adj = adjacency(n_objects, &edges);
    let subsets = (0..n_bids)
        .map(|_| connected_subset(&adj, max_bid_size.max(1), &mut rng))
        .collect();
    let meta = metadata(
        "treedec",
        seed,
        format!("{n_bids} connected bids on {n_objects} objects with {} edges", edges.len()),
    );
    let mut inst = object_instance(meta, n_objects, &edges, subsets, (1, 100), seed);
    let og = inst.object_graph().expect("generated graph is valid").expect("has objects");
    inst.ordering = Some(OrderingSpec::TreeDecomposition {
        tree_decomposition: Some(min_degree_heuristic_decomposition(&og)),
    });
    inst.canonicalize();
    inst
}
