//! Opportunity-cost and local-ratio solvers, the greedy baseline and an
//! exact branch-and-bound oracle.

use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{BetaMethod, BidGraph, Ordering, Provenance};

/// Default node cap for [`exact_mwis`].
pub const DEFAULT_EXACT_CAP: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Opcost,
    Lropcost,
    Greedy,
    Exact,
    UnweightedOpcost,
    OverlappingOpcost,
    WeightedOpcost,
    LightOpcost,
    ExactFeasible,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Opcost => "opcost",
            Algorithm::Lropcost => "lropcost",
            Algorithm::Greedy => "greedy",
            Algorithm::Exact => "exact",
            Algorithm::UnweightedOpcost => "unweighted-opcost",
            Algorithm::OverlappingOpcost => "overlapping-opcost",
            Algorithm::WeightedOpcost => "weighted-opcost",
            Algorithm::LightOpcost => "light-opcost",
            Algorithm::ExactFeasible => "exact-feasible",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Algorithm::Opcost,
            Algorithm::Lropcost,
            Algorithm::Greedy,
            Algorithm::Exact,
            Algorithm::UnweightedOpcost,
            Algorithm::OverlappingOpcost,
            Algorithm::WeightedOpcost,
            Algorithm::LightOpcost,
            Algorithm::ExactFeasible,
        ]
        .into_iter()
        .find(|a| a.as_str() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Number representation used for fractional budget charges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Integer,
    ExactRational,
    /// Exact rationals overflowed and the solve was redone in f64.
    Float,
}

impl Arithmetic {
    pub fn as_str(self) -> &'static str {
        match self {
            Arithmetic::Integer => "integer",
            Arithmetic::ExactRational => "exact-rational",
            Arithmetic::Float => "float",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub algorithm: Algorithm,
    pub ordering: Option<Provenance>,
    pub beta_bound: Option<usize>,
    pub beta_method: Option<BetaMethod>,
    pub claimed_ratio: Option<Ratio<i64>>,
    pub arithmetic: Arithmetic,
}

/// A selected independent set of bids with its revenue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Node indices, ascending.
    pub selected: Vec<usize>,
    pub revenue: i64,
    pub certificate: Certificate,
}

impl Solution {
    pub fn new(g: &BidGraph, mut selected: Vec<usize>, algorithm: Algorithm) -> Self {
        selected.sort_unstable();
        Solution {
            revenue: g.total_weight(&selected),
            selected,
            certificate: Certificate {
                algorithm,
                ordering: g.provenance(),
                beta_bound: None,
                beta_method: None,
                claimed_ratio: None,
                arithmetic: Arithmetic::Integer,
            },
        }
    }

    pub(crate) fn from_flags(g: &BidGraph, flags: &[bool], algorithm: Algorithm) -> Self {
        let selected = flags
            .iter()
            .enumerate()
            .filter_map(|(v, &s)| s.then_some(v))
            .collect();
        Solution::new(g, selected, algorithm)
    }

    /// Records a β bound and the approximation ratio it implies.
    pub fn with_claim(mut self, beta: usize, method: BetaMethod, ratio: i64) -> Self {
        self.certificate.beta_bound = Some(beta);
        self.certificate.beta_method = Some(method);
        self.certificate.claimed_ratio = Some(Ratio::from_integer(ratio));
        self
    }

    pub fn selected_ids<'g>(&self, g: &'g BidGraph) -> Vec<&'g str> {
        let mut ids: Vec<&str> = self.selected.iter().map(|&v| g.id(v)).collect();
        ids.sort_unstable();
        ids
    }
}

/// Node values and selection flags produced by a one-pass solver.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable<V> {
    pub val: Vec<V>,
    pub select: Vec<bool>,
}

impl ValueTable<i64> {
    /// Re-evaluates `val(u) = w(u) - Σ_{v→u} max(0, val(v))` for every node
    /// from the stored values and reports the first node that disagrees.
    pub fn value_equation_violation(&self, g: &BidGraph) -> Result<Option<usize>> {
        let (_, rank) = g.oriented()?;
        Ok((0..g.len()).find(|&u| {
            let charge: i64 = g
                .neighbors(u)
                .iter()
                .filter(|&&v| rank[v] < rank[u])
                .map(|&v| self.val[v].max(0))
                .sum();
            self.val[u] != g.weight(u) - charge
        }))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpcostConfig {
    /// Select nodes of value exactly zero too. Changes only which zero-weight
    /// contributions appear; breaks exact agreement with [`lropcost`].
    pub include_zero_value: bool,
}

/// Opportunity-cost algorithm with the default configuration.
pub fn opcost(g: &BidGraph) -> Result<(Solution, ValueTable<i64>)> {
    opcost_with(g, &OpcostConfig::default())
}

/// Two passes over the orientation: values in processing order, then
/// selection in reverse order. O(|V| + |E|).
pub fn opcost_with(g: &BidGraph, cfg: &OpcostConfig) -> Result<(Solution, ValueTable<i64>)> {
    let (order, rank) = g.oriented()?;
    let n = g.len();
    let mut val = vec![0i64; n];
    for &u in order {
        let ru = rank[u];
        let charge: i64 = g
            .neighbors(u)
            .iter()
            .filter(|&&v| rank[v] < ru)
            .map(|&v| val[v].max(0))
            .sum();
        val[u] = g.weight(u) - charge;
    }
    let mut select = vec![false; n];
    for &u in order.iter().rev() {
        let eligible = if cfg.include_zero_value {
            val[u] >= 0
        } else {
            val[u] > 0
        };
        let ru = rank[u];
        select[u] = eligible
            && !g
                .neighbors(u)
                .iter()
                .any(|&v| rank[v] > ru && select[v]);
    }
    let sol = Solution::from_flags(g, &select, Algorithm::Opcost);
    Ok((sol, ValueTable { val, select }))
}

/// Local-ratio algorithm, unrolled: walk the orientation, drop nodes whose
/// current weight is non-positive, otherwise push the node and subtract its
/// weight from every successor (the w₁ part); then unwind the stack adding
/// each node whose addition keeps the set independent.
pub fn lropcost(g: &BidGraph) -> Result<Solution> {
    let (order, rank) = g.oriented()?;
    let mut current: Vec<i64> = g.weights().to_vec();
    let mut stack = Vec::new();
    for &u in order {
        let w = current[u];
        if w <= 0 {
            continue;
        }
        stack.push(u);
        let ru = rank[u];
        for &v in g.neighbors(u) {
            if rank[v] > ru {
                current[v] -= w;
            }
        }
        current[u] = 0;
    }
    let mut chosen = vec![false; g.len()];
    for &u in stack.iter().rev() {
        if !g.neighbors(u).iter().any(|&v| chosen[v]) {
            chosen[u] = true;
        }
    }
    Ok(Solution::from_flags(g, &chosen, Algorithm::Lropcost))
}

/// Scan in `ord` and keep every positive-weight node that conflicts with
/// nothing kept so far.
pub fn greedy(g: &BidGraph, ord: &Ordering) -> Result<Solution> {
    if ord.len() != g.len() {
        return Err(Error::validation(
            "ordering",
            format!("ordering covers {} nodes but the graph has {}", ord.len(), g.len()),
        ));
    }
    let mut chosen = vec![false; g.len()];
    for &v in ord.permutation() {
        if g.weight(v) > 0 && !g.neighbors(v).iter().any(|&u| chosen[u]) {
            chosen[v] = true;
        }
    }
    let mut sol = Solution::from_flags(g, &chosen, Algorithm::Greedy);
    sol.certificate.ordering = Some(ord.provenance());
    Ok(sol)
}

/// Maximum-weight independent set by branch and bound. Only positive-weight
/// nodes are ever selected; among optimal sets the one whose sorted id list
/// is lexicographically smallest is returned.
pub fn exact_mwis(g: &BidGraph, node_cap: usize) -> Result<Solution> {
    let cap = node_cap.min(64);
    if g.len() > cap {
        return Err(Error::capacity("bid graph size", g.len(), cap));
    }
    // Bit i stands for the i-th node in id order.
    let mut by_id: Vec<usize> = (0..g.len()).collect();
    by_id.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
    let mut local = vec![0usize; g.len()];
    for (i, &v) in by_id.iter().enumerate() {
        local[v] = i;
    }
    let weights: Vec<i64> = by_id.iter().map(|&v| g.weight(v)).collect();
    let adj: Vec<u64> = by_id
        .iter()
        .map(|&v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << local[u]))
        .collect();
    let positive = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .fold(0u64, |m, (i, _)| m | 1 << i);

    let mut search = Search {
        weights: &weights,
        adj: &adj,
        best_weight: 0,
        best_set: 0,
    };
    search.run(positive, 0, 0);
    let selected = (0..g.len())
        .filter(|&i| search.best_set >> i & 1 == 1)
        .map(|i| by_id[i])
        .collect();
    Ok(Solution::new(g, selected, Algorithm::Exact))
}

struct Search<'a> {
    weights: &'a [i64],
    adj: &'a [u64],
    best_weight: i64,
    best_set: u64,
}

impl Search<'_> {
    fn mask_weight(&self, mut mask: u64) -> i64 {
        let mut total = 0;
        while mask != 0 {
            total += self.weights[mask.trailing_zeros() as usize];
            mask &= mask - 1;
        }
        total
    }

    fn offer(&mut self, set: u64, weight: i64) {
        if weight > self.best_weight
            || (weight == self.best_weight && lex_less(set, self.best_set))
        {
            self.best_weight = weight;
            self.best_set = set;
        }
    }

    fn run(&mut self, cand: u64, set: u64, weight: i64) {
        let bound = weight + self.mask_weight(cand);
        // Ties are kept alive: they may still win the lexicographic tie-break.
        if bound < self.best_weight {
            return;
        }
        let mut pick = None;
        let mut pick_deg = 0;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (self.adj[v] & cand).count_ones();
            if d > pick_deg {
                pick_deg = d;
                pick = Some(v);
            }
        }
        let Some(v) = pick else {
            self.offer(set | cand, bound);
            return;
        };
        let bit = 1u64 << v;
        self.run(cand & !bit & !self.adj[v], set | bit, weight + self.weights[v]);
        self.run(cand & !bit, set, weight);
    }
}

/// Lexicographic comparison of the ascending element lists of two bitsets.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff.trailing_zeros();
    let above = if low == 63 { 0 } else { u64::MAX << (low + 1) };
    if a >> low & 1 == 1 {
        // `a` holds the first differing element; `b` is smaller only if it
        // ends there.
        b & above != 0
    } else {
        a & above == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{beta_exact, orient, DEFAULT_BETA_CAP};
    use crate::orderings::decreasing_weight_ordering;
    use proptest::prelude::*;

    fn oriented(weights: &[i64], edges: &[(usize, usize)], order: &[usize]) -> BidGraph {
        let g = BidGraph::from_edges(
            (0..weights.len()).map(|i| format!("v{i:02}")).collect(),
            weights.to_vec(),
            edges.iter().copied(),
        )
        .unwrap();
        orient(&g, &Ordering::new(order.to_vec(), Provenance::Explicit).unwrap()).unwrap()
    }

    fn chain() -> BidGraph {
        oriented(&[3, 4, 2], &[(0, 1), (1, 2)], &[0, 1, 2])
    }

    #[test]
    fn chain_trace() {
        let g = chain();
        let (sol, table) = opcost(&g).unwrap();
        assert_eq!(table.val, vec![3, 1, 1]);
        assert_eq!(sol.selected, vec![0, 2]);
        assert_eq!(sol.revenue, 5);
        assert_eq!(table.value_equation_violation(&g).unwrap(), None);
        let lr = lropcost(&g).unwrap();
        assert_eq!(lr.selected, sol.selected);
        assert_eq!(exact_mwis(&g, DEFAULT_EXACT_CAP).unwrap().revenue, 5);
    }

    #[test]
    fn single_node() {
        let g = oriented(&[5], &[], &[0]);
        assert_eq!(opcost(&g).unwrap().0.revenue, 5);
        assert_eq!(lropcost(&g).unwrap().revenue, 5);
    }

    #[test]
    fn tight_star() {
        let g = oriented(&[1000, 900, 900, 900], &[(0, 1), (0, 2), (0, 3)], &[0, 1, 2, 3]);
        let (sol, table) = opcost(&g).unwrap();
        assert_eq!(table.val, vec![1000, -100, -100, -100]);
        assert_eq!(sol.selected, vec![0]);
        let best = exact_mwis(&g, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(best.revenue, 2700);
        let beta = beta_exact(&g, DEFAULT_BETA_CAP).unwrap().beta_graph as i64;
        assert_eq!(beta, 3);
        assert!(sol.revenue * beta >= best.revenue);
    }

    #[test]
    fn non_positive_weights_give_nothing() {
        let g = oriented(&[0, -3, 0], &[(0, 1)], &[0, 1, 2]);
        assert!(lropcost(&g).unwrap().selected.is_empty());
        assert!(opcost(&g).unwrap().0.selected.is_empty());
        let (with_zero, _) = opcost_with(&g, &OpcostConfig { include_zero_value: true }).unwrap();
        assert_eq!(with_zero.selected, vec![0, 2]);
        assert_eq!(with_zero.revenue, 0);
    }

    #[test]
    fn missing_orientation() {
        let g = BidGraph::from_edges(vec!["a".into()], vec![1], []).unwrap();
        assert!(matches!(opcost(&g), Err(Error::MissingOrientation)));
        assert!(matches!(lropcost(&g), Err(Error::MissingOrientation)));
    }

    #[test]
    fn greedy_by_weight() {
        let g = chain().without_orientation();
        let sol = greedy(&g, &decreasing_weight_ordering(&g)).unwrap();
        assert_eq!(sol.selected, vec![1]);
        assert_eq!(sol.revenue, 4);
        let free = BidGraph::from_edges(vec!["a".into(), "b".into()], vec![1, 2], []).unwrap();
        let sol = greedy(&free, &Ordering::new(vec![0, 1], Provenance::Explicit).unwrap()).unwrap();
        assert_eq!(sol.selected, vec![0, 1]);
    }

    #[test]
    fn exact_cases() {
        let clique = BidGraph::from_edges(
            vec!["a".into(), "b".into(), "c".into()],
            vec![2, 7, 5],
            [(0, 1), (0, 2), (1, 2)],
        )
        .unwrap();
        let s = exact_mwis(&clique, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!((s.selected.clone(), s.revenue), (vec![1], 7));
        let empty = BidGraph::from_edges(vec![], vec![], []).unwrap();
        let s = exact_mwis(&empty, DEFAULT_EXACT_CAP).unwrap();
        assert!(s.selected.is_empty());
        assert_eq!(s.revenue, 0);
        let big = BidGraph::from_edges((0..31).map(|i| i.to_string()).collect(), vec![1; 31], []).unwrap();
        assert!(matches!(exact_mwis(&big, 30), Err(Error::Capacity { size: 31, cap: 30, .. })));
    }

    #[test]
    fn exact_tie_break_is_lexicographic() {
        // a-b-c path, all weight 1 except b weight 2: {a,c} and {b} tie at 2.
        let g = BidGraph::from_edges(vec!["a".into(), "b".into(), "c".into()], vec![1, 2, 1], [(0, 1), (1, 2)]).unwrap();
        assert_eq!(exact_mwis(&g, 30).unwrap().selected, vec![0, 2]);
        let g = BidGraph::from_edges(vec!["b".into(), "a".into(), "c".into()], vec![2, 1, 1], [(0, 1), (0, 2)]).unwrap();
        assert_eq!(exact_mwis(&g, 30).unwrap().selected_ids(&g), ["a", "c"]);
    }

    #[test]
    fn lex_order_on_bitsets() {
        assert!(lex_less(0b011, 0b101)); // [0,1] < [0,2]
        assert!(lex_less(0b001, 0b011)); // [0] < [0,1]
        assert!(!lex_less(0b011, 0b001));
        assert!(lex_less(0b001, 0b010)); // [0] < [1]
        assert!(!lex_less(0b101, 0b101));
    }

    fn instance() -> impl Strategy<Value = (Vec<i64>, Vec<(usize, usize)>, Vec<usize>)> {
        (1usize..13).prop_flat_map(|n| {
            (
                prop::collection::vec(-3i64..20, n),
                prop::collection::vec((0..n, 0..n), 0..n * 2),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
    }

    /// Best weight and lexicographically smallest optimal id list by
    /// enumerating every subset of positive-weight nodes.
    fn enumerate_best(g: &BidGraph) -> (i64, Vec<usize>) {
        let n = g.len();
        let mut best = (0i64, Vec::new());
        for mask in 0u32..1 << n {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if set.iter().any(|&v| g.weight(v) <= 0) || !g.is_independent(&set) {
                continue;
            }
            let w = g.total_weight(&set);
            if w > best.0 || (w == best.0 && set < best.1) {
                best = (w, set);
            }
        }
        best
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration((w, e, order) in instance()) {
            let e: Vec<_> = e.into_iter().filter(|(a, b)| a != b).collect();
            let g = oriented(&w, &e, &order);
            let (best, set) = enumerate_best(&g);
            let sol = exact_mwis(&g, DEFAULT_EXACT_CAP).unwrap();
            prop_assert_eq!(sol.revenue, best);
            prop_assert_eq!(sol.selected, set);
        }

        #[test]
        fn opcost_invariants((w, e, order) in instance()) {
            let e: Vec<_> = e.into_iter().filter(|(a, b)| a != b).collect();
            let g = oriented(&w, &e, &order);
            let (sol, table) = opcost(&g).unwrap();
            prop_assert!(g.is_independent(&sol.selected));
            prop_assert_eq!(sol.revenue, g.total_weight(&sol.selected));
            prop_assert_eq!(table.value_equation_violation(&g).unwrap(), None);
            prop_assert_eq!(&lropcost(&g).unwrap().selected, &sol.selected);
            // Any unselected positive-value node conflicts with the solution.
            for v in 0..g.len() {
                if !table.select[v] && table.val[v] > 0 {
                    prop_assert!(g.neighbors(v).iter().any(|&u| table.select[u]));
                }
            }
            let beta = beta_exact(&g, DEFAULT_BETA_CAP).unwrap().beta_graph as i64;
            prop_assert!(sol.revenue * beta >= exact_mwis(&g, DEFAULT_EXACT_CAP).unwrap().revenue);
        }
    }
}
