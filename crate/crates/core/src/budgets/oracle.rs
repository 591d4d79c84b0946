use super::{ConstraintKind, ConstraintSet, GroupTable};
use crate::error::{Error, Result};
use crate::graph::BidGraph;
use crate::solvers::{Algorithm, Solution};

/// Default node cap for [`exact_feasible`].
pub const DEFAULT_FEASIBLE_CAP: usize = 20;

/// Highest-revenue feasible bid set by depth-first search over the
/// positive-weight bids in id order, pruned by the remaining positive weight.
pub fn exact_feasible(g: &BidGraph, cs: &ConstraintSet, cap: usize) -> Result<Solution> {
    if g.len() > cap {
        return Err(Error::capacity("bid graph size", g.len(), cap));
    }
    let table = cs.resolve(g)?;
    let mut nodes: Vec<usize> = (0..g.len()).filter(|&v| g.weight(v) > 0).collect();
    nodes.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
    let mut suffix = vec![0i64; nodes.len() + 1];
    for i in (0..nodes.len()).rev() {
        suffix[i] = suffix[i + 1] + g.weight(nodes[i]);
    }
    let mut dfs = Dfs {
        g,
        table: &table,
        nodes: &nodes,
        suffix: &suffix,
        usage: vec![0; table.len()],
        taken: vec![false; g.len()],
        current: Vec::new(),
        best: (0, Vec::new()),
    };
    dfs.visit(0, 0);
    let mut sol = Solution::new(g, dfs.best.1, Algorithm::ExactFeasible);
    sol.certificate.ordering = None;
    Ok(sol)
}

struct Dfs<'a> {
    g: &'a BidGraph,
    table: &'a GroupTable,
    nodes: &'a [usize],
    suffix: &'a [i64],
    /// Count of chosen bids, or spent budget for weighted groups.
    usage: Vec<i64>,
    taken: Vec<bool>,
    current: Vec<usize>,
    best: (i64, Vec<usize>),
}

impl Dfs<'_> {
    fn cost(&self, v: usize) -> i64 {
        match self.table.kind() {
            ConstraintKind::Weighted => self.g.weight(v),
            _ => 1,
        }
    }

    fn fits(&self, v: usize) -> bool {
        !self.g.neighbors(v).iter().any(|&u| self.taken[u])
            && self
                .table
                .groups_of(v)
                .iter()
                .all(|&gi| self.usage[gi] + self.cost(v) <= self.table.limit(gi) as i64)
    }

    fn visit(&mut self, i: usize, weight: i64) {
        if weight > self.best.0 {
            self.best = (weight, self.current.clone());
        }
        if i == self.nodes.len() || weight + self.suffix[i] <= self.best.0 {
            return;
        }
        let v = self.nodes[i];
        if self.fits(v) {
            let c = self.cost(v);
            for &gi in self.table.groups_of(v) {
                self.usage[gi] += c;
            }
            self.taken[v] = true;
            self.current.push(v);
            self.visit(i + 1, weight + self.g.weight(v));
            self.current.pop();
            self.taken[v] = false;
            for &gi in self.table.groups_of(v) {
                self.usage[gi] -= c;
            }
        }
        self.visit(i + 1, weight);
    }
}
