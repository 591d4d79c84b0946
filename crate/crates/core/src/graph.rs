//! Bid graphs, object graphs, orientations and the directed local
//! independence number β.
//!
//! A [`BidGraph`] is the undirected conflict graph over bids. An orientation
//! is stored only as a node permutation: every edge points from the node that
//! comes first in the permutation to the one that comes later, so the directed
//! graph is acyclic by construction.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default out-degree cap for [`beta_exact`].
pub const DEFAULT_BETA_CAP: usize = 25;

/// A bid: a non-empty set of objects, a price in minor currency units and an
/// optional bidder/group label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bid {
    pub id: String,
    pub objects: Vec<String>,
    pub price: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl Bid {
    pub fn new(id: impl Into<String>, objects: &[&str], price: i64) -> Self {
        Bid {
            id: id.into(),
            objects: objects.iter().map(|o| o.to_string()).collect(),
            price,
            group: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.objects.is_empty() {
            return Err(Error::validation(
                format!("bid {}", self.id),
                "bid has no objects",
            ));
        }
        if self.price < 0 {
            return Err(Error::validation(
                format!("bid {}", self.id),
                format!("negative price {}", self.price),
            ));
        }
        Ok(())
    }
}

/// Undirected graph over auction objects.
#[derive(Clone, Debug)]
pub struct ObjectGraph {
    objects: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
}

impl ObjectGraph {
    pub fn new<S: AsRef<str>>(objects: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(objects.len());
        for (i, o) in objects.iter().enumerate() {
            if index.insert(o.as_ref().to_string(), i).is_some() {
                return Err(Error::validation(
                    format!("objects/{i}"),
                    format!("duplicate object id {}", o.as_ref()),
                ));
            }
        }
        let mut adj = vec![Vec::new(); objects.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, (a, b)) in edges.iter().enumerate() {
            let (a, b) = (a.as_ref(), b.as_ref());
            let lookup = |o: &str| {
                index.get(o).copied().ok_or_else(|| {
                    Error::validation(
                        format!("object_edges/{i}"),
                        format!("undeclared object {o}"),
                    )
                })
            };
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(Error::validation(
                    format!("object_edges/{i}"),
                    format!("self-loop on {a}"),
                ));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::validation(
                    format!("object_edges/{i}"),
                    format!("duplicate edge {a}-{b}"),
                ));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(ObjectGraph {
            objects: objects.iter().map(|o| o.as_ref().to_string()).collect(),
            index,
            adj,
        })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn index_of(&self, object: &str) -> Option<usize> {
        self.index.get(object).copied()
    }

    pub fn neighbors(&self, o: usize) -> &[usize] {
        &self.adj[o]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Where an ordering came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Chordal,
    TreeDecomposition,
    Grid,
    DecreasingWeight,
    PlantedOptimal,
    Explicit,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Chordal => "chordal",
            Provenance::TreeDecomposition => "tree-decomposition",
            Provenance::Grid => "grid",
            Provenance::DecreasingWeight => "decreasing-weight",
            Provenance::PlantedOptimal => "planted-optimal",
            Provenance::Explicit => "explicit",
        }
    }
}

/// A permutation of bid nodes (position = processing order), optionally
/// carrying per-node frontier sets of object ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ordering {
    perm: Vec<usize>,
    frontier_sets: Option<Vec<Vec<String>>>,
    provenance: Provenance,
}

impl Ordering {
    /// `perm[i]` is the node processed at position `i`.
    pub fn new(perm: Vec<usize>, provenance: Provenance) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for (pos, &v) in perm.iter().enumerate() {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::validation(
                    format!("permutation/{pos}"),
                    format!("node {v} is out of range or repeated"),
                ));
            }
        }
        Ok(Ordering {
            perm,
            frontier_sets: None,
            provenance,
        })
    }

    /// Attaches frontier sets, indexed by node.
    pub fn with_frontier_sets(mut self, sets: Vec<Vec<String>>) -> Result<Self> {
        if sets.len() != self.perm.len() {
            return Err(Error::validation(
                "frontier_sets",
                format!("{} frontier sets for {} nodes", sets.len(), self.perm.len()),
            ));
        }
        self.frontier_sets = Some(sets);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Inverse permutation: `ranks()[v]` is the position of node `v`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.perm.len()];
        for (pos, &v) in self.perm.iter().enumerate() {
            rank[v] = pos;
        }
        rank
    }

    pub fn frontier_sets(&self) -> Option<&[Vec<String>]> {
        self.frontier_sets.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

#[derive(Clone, Debug)]
struct Orientation {
    order: Vec<usize>,
    rank: Vec<usize>,
    provenance: Provenance,
}

/// Undirected conflict graph over bids, with an optional orientation.
#[derive(Clone, Debug)]
pub struct BidGraph {
    ids: Vec<String>,
    weights: Vec<i64>,
    adj: Adjacency,
    index: HashMap<String, usize>,
    orientation: Option<Orientation>,
}

impl BidGraph {
    /// Builds a graph from explicit node data and an edge list over node
    /// indices. Duplicate edges are merged.
    pub fn from_edges(
        ids: Vec<String>,
        weights: Vec<i64>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(Error::validation(
                "bids",
                format!("{} ids but {} weights", ids.len(), weights.len()),
            ));
        }
        let index = index_ids(&ids)?;
        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::validation(
                    "edges",
                    format!("invalid edge {u}-{v} for {n} nodes"),
                ));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(BidGraph {
            ids,
            weights,
            adj: Adjacency::from_lists(adj),
            index,
            orientation: None,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.targets.len() / 2
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn weight(&self, v: usize) -> i64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.adj.get(v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |u| {
            self.adj.get(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    pub fn is_oriented(&self) -> bool {
        self.orientation.is_some()
    }

    /// Processing order, if oriented.
    pub fn order(&self) -> Option<&[usize]> {
        self.orientation.as_ref().map(|o| o.order.as_slice())
    }

    /// Position of every node in the processing order, if oriented.
    pub fn ranks(&self) -> Option<&[usize]> {
        self.orientation.as_ref().map(|o| o.rank.as_slice())
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.orientation.as_ref().map(|o| o.provenance)
    }

    pub(crate) fn oriented(&self) -> Result<(&[usize], &[usize])> {
        self.orientation
            .as_ref()
            .map(|o| (o.order.as_slice(), o.rank.as_slice()))
            .ok_or(Error::MissingOrientation)
    }

    /// δ⁺(v): neighbours later in the orientation.
    pub fn successors(&self, v: usize) -> Result<impl Iterator<Item = usize> + '_> {
        let (_, rank) = self.oriented()?;
        let rv = rank[v];
        Ok(self.adj.get(v).iter().copied().filter(move |&u| rank[u] > rv))
    }

    /// δ⁻(v): neighbours earlier in the orientation.
    pub fn predecessors(&self, v: usize) -> Result<impl Iterator<Item = usize> + '_> {
        let (_, rank) = self.oriented()?;
        let rv = rank[v];
        Ok(self.adj.get(v).iter().copied().filter(move |&u| rank[u] < rv))
    }

    pub fn max_out_degree(&self) -> Result<usize> {
        let (_, rank) = self.oriented()?;
        Ok((0..self.len())
            .map(|v| self.adj.get(v).iter().filter(|&&u| rank[u] > rank[v]).count())
            .max()
            .unwrap_or(0))
    }

    /// Directed edges `(earlier, later)` under the orientation.
    pub fn directed_edges(&self) -> Result<Vec<(usize, usize)>> {
        let (_, rank) = self.oriented()?;
        Ok(self
            .edges()
            .map(|(u, v)| if rank[u] < rank[v] { (u, v) } else { (v, u) })
            .collect())
    }

    /// Attaches `ord` as the orientation.
    pub fn with_orientation(mut self, ord: &Ordering) -> Result<Self> {
        if ord.len() != self.len() {
            return Err(Error::validation(
                "ordering",
                format!(
                    "ordering covers {} nodes but the graph has {}",
                    ord.len(),
                    self.len()
                ),
            ));
        }
        self.orientation = Some(Orientation {
            order: ord.permutation().to_vec(),
            rank: ord.ranks(),
            provenance: ord.provenance(),
        });
        Ok(self)
    }

    pub fn without_orientation(mut self) -> Self {
        self.orientation = None;
        self
    }

    /// Subgraph induced by `keep` (node indices of `self`). Node `i` of the
    /// result is `keep[i]`; an orientation is inherited by relative order.
    pub fn induced_subgraph(&self, keep: &[usize]) -> BidGraph {
        let mut local = vec![usize::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let adj = keep
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adj.get(v)
                    .iter()
                    .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        let ids: Vec<String> = keep.iter().map(|&v| self.ids[v].clone()).collect();
        let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let orientation = self.orientation.as_ref().map(|o| {
            let order: Vec<usize> = o
                .order
                .iter()
                .filter_map(|&v| (local[v] != usize::MAX).then_some(local[v]))
                .collect();
            let mut rank = vec![0; order.len()];
            for (pos, &v) in order.iter().enumerate() {
                rank[v] = pos;
            }
            Orientation {
                order,
                rank,
                provenance: o.provenance,
            }
        });
        BidGraph {
            ids,
            weights: keep.iter().map(|&v| self.weights[v]).collect(),
            adj: Adjacency::from_lists(adj),
            index,
            orientation,
        }
    }

    /// Returns `true` when no two of `nodes` are adjacent.
    pub fn is_independent(&self, nodes: &[usize]) -> bool {
        self.conflicting_pair(nodes).is_none()
    }

    /// First adjacent pair among `nodes`, if any.
    pub fn conflicting_pair(&self, nodes: &[usize]) -> Option<(usize, usize)> {
        let mut member = vec![false; self.len()];
        for &v in nodes {
            member[v] = true;
        }
        nodes.iter().find_map(|&u| {
            self.adj
                .get(u)
                .iter()
                .find(|&&v| member[v] && v != u)
                .map(|&v| (u.min(v), u.max(v)))
        })
    }

    pub fn total_weight(&self, nodes: &[usize]) -> i64 {
        nodes.iter().map(|&v| self.weights[v]).sum()
    }
}

/// Sorted neighbour lists packed into one array.
#[derive(Clone, Debug)]
struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    fn from_lists(lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for list in lists {
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Adjacency { offsets, targets }
    }

    fn get(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

fn index_ids(ids: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::validation(
                format!("bids/{i}/id"),
                format!("duplicate bid id {id}"),
            ));
        }
    }
    Ok(index)
}

/// Builds the intersection graph of `bids`: two bids conflict iff they share
/// an object. Node `i` is `bids[i]`.
pub fn build_bid_graph(bids: &[Bid]) -> Result<BidGraph> {
    for b in bids {
        b.check()?;
    }
    let ids: Vec<String> = bids.iter().map(|b| b.id.clone()).collect();
    let index = index_ids(&ids)?;

    let mut holders: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, b) in bids.iter().enumerate() {
        for o in &b.objects {
            let list = holders.entry(o.as_str()).or_default();
            if list.last() != Some(&i) {
                list.push(i);
            }
        }
    }
    let mut stamp = vec![usize::MAX; bids.len()];
    let mut adj = vec![Vec::new(); bids.len()];
    for (u, b) in bids.iter().enumerate() {
        stamp[u] = u;
        for o in &b.objects {
            for &v in &holders[o.as_str()] {
                if stamp[v] != u {
                    stamp[v] = u;
                    adj[u].push(v);
                }
            }
        }
        adj[u].sort_unstable();
    }
    Ok(BidGraph {
        ids,
        weights: bids.iter().map(|b| b.price).collect(),
        adj: Adjacency::from_lists(adj),
        index,
        orientation: None,
    })
}

/// Ids of bids whose object set does not induce a connected subgraph of `og`.
pub fn validate_germane(og: &ObjectGraph, bids: &[Bid]) -> Result<Vec<String>> {
    let mut member = vec![usize::MAX; og.len()];
    let mut visited = vec![usize::MAX; og.len()];
    let mut queue = VecDeque::new();
    let mut violations = Vec::new();
    for (i, bid) in bids.iter().enumerate() {
        let mut start = None;
        let mut size = 0;
        for (j, o) in bid.objects.iter().enumerate() {
            let idx = og.index_of(o).ok_or_else(|| {
                Error::validation(
                    format!("bids/{i}/objects/{j}"),
                    format!("bid {} references undeclared object {o}", bid.id),
                )
            })?;
            if member[idx] != i {
                member[idx] = i;
                size += 1;
            }
            start.get_or_insert(idx);
        }
        let Some(start) = start else {
            violations.push(bid.id.clone());
            continue;
        };
        visited[start] = i;
        queue.clear();
        queue.push_back(start);
        let mut reached = 1;
        while let Some(o) = queue.pop_front() {
            for &p in og.neighbors(o) {
                if member[p] == i && visited[p] != i {
                    visited[p] = i;
                    reached += 1;
                    queue.push_back(p);
                }
            }
        }
        if reached != size {
            violations.push(bid.id.clone());
        }
    }
    Ok(violations)
}

/// Returns a copy of `g` oriented by `ord`.
pub fn orient(g: &BidGraph, ord: &Ordering) -> Result<BidGraph> {
    g.clone().with_orientation(ord)
}

/// How a β figure was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMethod {
    ExactBruteforce,
    FrontierBound,
    CompositionBound,
    /// Later neighbourhoods verified to be cliques, so β = 1.
    PerfectElimination,
    /// Edges verified to join grid points at L1 distance 1; β ≤ dimension.
    GridDimension,
}

impl BetaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BetaMethod::ExactBruteforce => "exact-bruteforce",
            BetaMethod::FrontierBound => "frontier-bound",
            BetaMethod::CompositionBound => "composition-bound",
            BetaMethod::PerfectElimination => "perfect-elimination",
            BetaMethod::GridDimension => "grid-dimension",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaReport {
    pub beta_graph: usize,
    pub per_node: Vec<usize>,
    pub method: BetaMethod,
}

/// β(v) = max(1, α(δ⁺(v))) for every node, by exhaustive search over each
/// successor set. Refuses if some out-degree exceeds `cap` (at most 63).
pub fn beta_exact(g: &BidGraph, cap: usize) -> Result<BetaReport> {
    let (_, rank) = g.oriented()?;
    let cap = cap.min(63);
    let mut per_node = Vec::with_capacity(g.len());
    let mut succ = Vec::new();
    for v in 0..g.len() {
        succ.clear();
        succ.extend(g.neighbors(v).iter().copied().filter(|&u| rank[u] > rank[v]));
        if succ.len() > cap {
            return Err(Error::capacity(
                format!("out-degree of node {}", g.id(v)),
                succ.len(),
                cap,
            ));
        }
        let masks: Vec<u64> = succ
            .iter()
            .map(|&a| {
                succ.iter()
                    .enumerate()
                    .filter(|&(_, &b)| g.has_edge(a, b))
                    .fold(0u64, |m, (j, _)| m | (1 << j))
            })
            .collect();
        let all = if succ.is_empty() {
            0
        } else {
            u64::MAX >> (64 - succ.len())
        };
        per_node.push(max_independent(&masks, all).max(1));
    }
    Ok(BetaReport {
        beta_graph: per_node.iter().copied().max().unwrap_or(1),
        per_node,
        method: BetaMethod::ExactBruteforce,
    })
}

/// Size of a maximum independent set within `cand`, branching on the
/// candidate of highest degree.
fn max_independent(adj: &[u64], cand: u64) -> usize {
    if cand == 0 {
        return 0;
    }
    let mut best_v = 0;
    let mut best_deg = 0;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (adj[v] & cand).count_ones();
        if d >= best_deg {
            best_deg = d;
            best_v = v;
        }
    }
    if best_deg == 0 {
        return cand.count_ones() as usize;
    }
    let bit = 1u64 << best_v;
    let with = 1 + max_independent(adj, cand & !bit & !adj[best_v]);
    let without = max_independent(adj, cand & !bit);
    with.max(without)
}

/// Largest frontier-set size; by the frontier argument this bounds β of the
/// oriented intersection graph whenever the frontier property holds.
pub fn beta_bound_frontier(ord: &Ordering) -> Result<usize> {
    let sets = ord.frontier_sets().ok_or_else(|| {
        Error::Unsupported(format!(
            "{} ordering carries no frontier sets",
            ord.provenance().as_str()
        ))
    })?;
    Ok(sets.iter().map(Vec::len).max().unwrap_or(0).max(1))
}

/// β of a union of graphs on the same orientation is at most the sum of the
/// parts' β values.
pub fn beta_bound_union(bounds: &[usize]) -> usize {
    bounds.iter().sum()
}
