//! Orderings that certify small β.

mod treedec;

pub use treedec::{
    min_degree_heuristic_decomposition, tree_decomposition_ordering,
    validate_tree_decomposition, TdViolation, TreeDecomposition,
};

use crate::error::{Error, Result};
use crate::graph::{Bid, BidGraph, Ordering, Provenance};

/// Perfect elimination ordering via lexicographic BFS.
///
/// The reverse of a Lex-BFS visit order is a PEO exactly when the graph is
/// chordal; the candidate is checked before it is returned, so failure comes
/// with a witness.
pub fn lexbfs_peo(g: &BidGraph) -> Result<Ordering> {
    let mut visit = lexbfs(g);
    visit.reverse();
    let ord = Ordering::new(visit, Provenance::Chordal)?;
    if let Some((v, a, b)) = peo_violation(g, &ord) {
        return Err(Error::NotChordal {
            node: g.id(v).to_string(),
            a: g.id(a).to_string(),
            b: g.id(b).to_string(),
        });
    }
    Ok(ord)
}

/// Lex-BFS visit order by partition refinement, O(|V| + |E|). Starts from
/// node 0 and keeps cells in node order, so the result is deterministic.
fn lexbfs(g: &BidGraph) -> Vec<usize> {
    struct Cell {
        start: usize,
        end: usize,
        split: usize,
        stamp: usize,
    }
    let n = g.len();
    let mut seq: Vec<usize> = (0..n).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut cell_of = vec![0usize; n];
    let mut cells = vec![Cell {
        start: 0,
        end: n,
        split: 0,
        stamp: usize::MAX,
    }];
    let mut touched = Vec::new();

    for i in 0..n {
        let v = seq[i];
        cells[cell_of[v]].start += 1;
        touched.clear();
        for &w in g.neighbors(v) {
            if pos[w] <= i {
                continue;
            }
            let c = cell_of[w];
            if cells[c].stamp != i {
                cells[c].stamp = i;
                cells[c].split = cells[c].start;
                touched.push(c);
            }
            let target = cells[c].split;
            let other = seq[target];
            seq.swap(pos[w], target);
            pos[other] = pos[w];
            pos[w] = target;
            cells[c].split += 1;
        }
        for &c in &touched {
            let (start, split, end) = (cells[c].start, cells[c].split, cells[c].end);
            if split == end {
                continue;
            }
            let nc = cells.len();
            cells.push(Cell {
                start,
                end: split,
                split: start,
                stamp: usize::MAX,
            });
            for &u in &seq[start..split] {
                cell_of[u] = nc;
            }
            cells[c].start = split;
        }
    }
    seq
}

/// Checks that every node's later neighbours form a clique. Returns
/// `(v, a, b)` where `a`, `b` are later neighbours of `v` that are not
/// adjacent. Linear time: only the earliest later neighbour needs checking.
pub fn peo_violation(g: &BidGraph, ord: &Ordering) -> Option<(usize, usize, usize)> {
    let rank = ord.ranks();
    let n = g.len();
    // For each parent p, the (child, later-neighbour) pairs that p must see.
    let mut demands: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for v in 0..n {
        let later = g.neighbors(v).iter().copied().filter(|&u| rank[u] > rank[v]);
        let Some(parent) = later.clone().min_by_key(|&u| rank[u]) else {
            continue;
        };
        demands[parent].extend(later.filter(|&u| u != parent).map(|u| (v, u)));
    }
    let mut mark = vec![usize::MAX; n];
    for (p, demand) in demands.iter().enumerate() {
        if demand.is_empty() {
            continue;
        }
        for &u in g.neighbors(p) {
            mark[u] = p;
        }
        if let Some(&(v, u)) = demand.iter().find(|&&(_, u)| mark[u] != p) {
            return Some((v, p, u));
        }
    }
    None
}

/// Orders nodes by ascending coordinate sum, then lexicographic coordinates.
/// `coords[v]` is the grid point of node `v`.
pub fn grid_ordering(coords: &[Vec<i64>]) -> Result<Ordering> {
    let dim = coords.first().map_or(0, Vec::len);
    if let Some(v) = coords.iter().position(|c| c.len() != dim) {
        return Err(Error::validation(
            format!("coords/{v}"),
            format!("expected {dim} coordinates, found {}", coords[v].len()),
        ));
    }
    let mut perm: Vec<usize> = (0..coords.len()).collect();
    let key = |v: &usize| (coords[*v].iter().sum::<i64>(), &coords[*v]);
    perm.sort_by(|a, b| key(a).cmp(&key(b)));
    if let Some(w) = perm.windows(2).find(|w| coords[w[0]] == coords[w[1]]) {
        return Err(Error::validation(
            format!("coords/{}", w[1]),
            format!("duplicate coordinates {:?}", coords[w[1]]),
        ));
    }
    Ordering::new(perm, Provenance::Grid)
}

/// Dimension `k` if every edge of `g` joins points at L1 distance one, i.e.
/// `g` is a subgraph of the k-dimensional grid and a grid ordering has β ≤ k.
pub fn grid_dimension_bound(g: &BidGraph, coords: &[Vec<i64>]) -> Option<usize> {
    let dim = coords.first().map_or(0, Vec::len);
    g.edges()
        .all(|(u, v)| {
            coords[u]
                .iter()
                .zip(&coords[v])
                .map(|(a, b)| (a - b).abs())
                .sum::<i64>()
                == 1
        })
        .then_some(dim.max(1))
}

/// Strictly decreasing weight, ties by ascending bid id.
pub fn decreasing_weight_ordering(g: &BidGraph) -> Ordering {
    let mut perm: Vec<usize> = (0..g.len()).collect();
    perm.sort_by(|&a, &b| {
        g.weight(b)
            .cmp(&g.weight(a))
            .then_with(|| g.id(a).cmp(g.id(b)))
    });
    Ordering::new(perm, Provenance::DecreasingWeight).expect("sorted indices form a permutation")
}

/// Members of `independent_set` first, then everything else; both parts by
/// ascending id.
pub fn planted_optimal_ordering(g: &BidGraph, independent_set: &[usize]) -> Result<Ordering> {
    if let Some((a, b)) = g.conflicting_pair(independent_set) {
        return Err(Error::validation(
            "independent_set",
            format!("{} and {} conflict", g.id(a), g.id(b)),
        ));
    }
    let mut member = vec![false; g.len()];
    for &v in independent_set {
        member[v] = true;
    }
    let mut perm: Vec<usize> = (0..g.len()).collect();
    perm.sort_by(|&a, &b| {
        member[b]
            .cmp(&member[a])
            .then_with(|| g.id(a).cmp(g.id(b)))
    });
    Ordering::new(perm, Provenance::PlantedOptimal)
}

/// Exhaustive frontier check: for every ordered pair A before B whose object
/// sets meet, B must meet the frontier set of A. Returns the first offending
/// pair of nodes. `bids[v]` is node `v`.
pub fn frontier_violation(bids: &[Bid], ord: &Ordering) -> Option<(usize, usize)> {
    let frontier = ord.frontier_sets()?;
    let perm = ord.permutation();
    let meets = |x: &[String], y: &[String]| x.iter().any(|o| y.contains(o));
    for (i, &a) in perm.iter().enumerate() {
        for &b in &perm[i + 1..] {
            if meets(&bids[a].objects, &bids[b].objects) && !meets(&bids[b].objects, &frontier[a]) {
                return Some((a, b));
            }
        }
    }
    None
}
