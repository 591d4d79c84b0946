//! Budget-constrained winner determination.
//!
//! Three constraint shapes are supported: count limits on a partition of the
//! bids (`unweighted`), count limits on possibly overlapping groups
//! (`overlapping`), and monetary limits on a partition (`weighted`). The
//! weighted case splits bids into heavy (more than half the group budget)
//! and light ones and keeps the better of the two solutions.

mod charge;
mod light;
mod local_ratio;
mod oracle;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BidGraph, Ordering};
use crate::solvers::{Algorithm, Arithmetic, Solution, ValueTable};

pub use charge::Rational;
pub use light::{solve_light, solve_light_with, LightMode, LIGHT_MULTIPLIER_FLOOR, LIGHT_ZERO_THRESHOLD};
pub use local_ratio::lropcost_group_slow;
pub use oracle::{exact_feasible, DEFAULT_FEASIBLE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Unweighted,
    Overlapping,
    Weighted,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Unweighted => "unweighted",
            ConstraintKind::Overlapping => "overlapping",
            ConstraintKind::Weighted => "weighted",
        }
    }
}

/// One constraint group. `k` is a count limit (unweighted, overlapping), `b`
/// a budget in minor units (weighted).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub label: String,
    pub members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub kind: ConstraintKind,
    pub groups: Vec<Group>,
}

impl ConstraintSet {
    pub fn canonicalize(&mut self) {
        for g in &mut self.groups {
            g.members.sort();
        }
        self.groups.sort_by(|a, b| a.label.cmp(&b.label));
    }

    /// Keeps only members present in `g`; groups left empty are dropped.
    pub fn restricted_to(&self, g: &BidGraph) -> ConstraintSet {
        ConstraintSet {
            kind: self.kind,
            groups: self
                .groups
                .iter()
                .filter_map(|grp| {
                    let members: Vec<String> = grp
                        .members
                        .iter()
                        .filter(|m| g.index_of(m).is_some())
                        .cloned()
                        .collect();
                    (!members.is_empty()).then(|| Group {
                        members,
                        ..grp.clone()
                    })
                })
                .collect(),
        }
    }

    /// Resolves member ids against `g` and checks the shape required by the
    /// constraint kind.
    pub fn resolve(&self, g: &BidGraph) -> Result<GroupTable> {
        let mut labels = HashSet::new();
        let mut table = GroupTable {
            kind: self.kind,
            labels: Vec::with_capacity(self.groups.len()),
            limits: Vec::with_capacity(self.groups.len()),
            members: Vec::with_capacity(self.groups.len()),
            of_node: vec![Vec::new(); g.len()],
        };
        for (gi, grp) in self.groups.iter().enumerate() {
            let at = format!("constraints/groups/{gi}");
            if !labels.insert(grp.label.as_str()) {
                return Err(Error::validation(at, format!("duplicate group label {}", grp.label)));
            }
            let limit = match (self.kind, grp.k, grp.b) {
                (ConstraintKind::Weighted, _, Some(b)) => b,
                (ConstraintKind::Weighted, _, None) => {
                    return Err(Error::validation(at, "weighted group needs a budget b"))
                }
                (_, Some(k), _) => k,
                (_, None, _) => return Err(Error::validation(at, "group needs a count limit k")),
            };
            if limit == 0 {
                return Err(Error::validation(at, "group limit must be at least 1"));
            }
            let mut members = Vec::with_capacity(grp.members.len());
            for (j, m) in grp.members.iter().enumerate() {
                let v = g.index_of(m).ok_or_else(|| {
                    Error::validation(format!("{at}/members/{j}"), format!("unknown bid {m}"))
                })?;
                if table.of_node[v].last() == Some(&gi) {
                    return Err(Error::validation(
                        format!("{at}/members/{j}"),
                        format!("bid {m} listed twice"),
                    ));
                }
                table.of_node[v].push(gi);
                members.push(v);
            }
            table.labels.push(grp.label.clone());
            table.limits.push(limit);
            table.members.push(members);
        }
        if self.kind != ConstraintKind::Overlapping {
            for v in 0..g.len() {
                match table.of_node[v].len() {
                    1 => {}
                    0 => {
                        return Err(Error::validation(
                            "constraints/groups",
                            format!("bid {} is in no group", g.id(v)),
                        ))
                    }
                    _ => {
                        return Err(Error::validation(
                            "constraints/groups",
                            format!("bid {} is in more than one group", g.id(v)),
                        ))
                    }
                }
            }
        }
        Ok(table)
    }
}

/// Constraint groups resolved to node indices.
#[derive(Clone, Debug)]
pub struct GroupTable {
    kind: ConstraintKind,
    labels: Vec<String>,
    limits: Vec<u64>,
    members: Vec<Vec<usize>>,
    of_node: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, gi: usize) -> &str {
        &self.labels[gi]
    }

    pub fn limit(&self, gi: usize) -> u64 {
        self.limits[gi]
    }

    pub fn members(&self, gi: usize) -> &[usize] {
        &self.members[gi]
    }

    /// Groups containing node `v`.
    pub fn groups_of(&self, v: usize) -> &[usize] {
        &self.of_node[v]
    }

    /// t: the largest number of groups any single bid belongs to.
    pub fn overlap(&self) -> usize {
        self.of_node.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityViolation {
    Conflict(String, String),
    CountExceeded { group: String, count: u64, limit: u64 },
    BudgetExceeded { group: String, total: i64, limit: u64, excess: i64 },
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibilityViolation::Conflict(a, b) => write!(f, "bids {a} and {b} conflict"),
            FeasibilityViolation::CountExceeded { group, count, limit } => {
                write!(f, "group {group} wins {count} bids, limit {limit}")
            }
            FeasibilityViolation::BudgetExceeded { group, total, limit, excess } => {
                write!(f, "group {group} spends {total}, budget {limit}, over by {excess}")
            }
        }
    }
}

/// Checks independence and every group limit for a set of selected nodes.
pub fn feasibility_violations(
    selected: &[usize],
    g: &BidGraph,
    cs: Option<&ConstraintSet>,
) -> Result<Vec<FeasibilityViolation>> {
    let mut out = Vec::new();
    let mut member = vec![false; g.len()];
    for &v in selected {
        member[v] = true;
    }
    for (u, v) in g.edges() {
        if member[u] && member[v] {
            let (a, b) = (g.id(u).min(g.id(v)), g.id(u).max(g.id(v)));
            out.push(FeasibilityViolation::Conflict(a.to_string(), b.to_string()));
        }
    }
    let Some(cs) = cs else {
        return Ok(out);
    };
    let table = cs.resolve(g)?;
    for gi in 0..table.len() {
        let chosen = table.members(gi).iter().filter(|&&v| member[v]);
        let group = table.label(gi).to_string();
        let limit = table.limit(gi);
        if table.kind() == ConstraintKind::Weighted {
            let total: i64 = chosen.map(|&v| g.weight(v)).sum();
            if total > limit as i64 {
                out.push(FeasibilityViolation::BudgetExceeded {
                    group,
                    total,
                    limit,
                    excess: total - limit as i64,
                });
            }
        } else {
            let count = chosen.count() as u64;
            if count > limit {
                out.push(FeasibilityViolation::CountExceeded { group, count, limit });
            }
        }
    }
    Ok(out)
}

/// Feasibility of `sol`: the selected bids are independent in `g` and satisfy
/// every group limit in `cs`. Returns the verdict together with all
/// violations found.
pub fn check_feasible(
    sol: &Solution,
    g: &BidGraph,
    cs: Option<&ConstraintSet>,
) -> Result<(bool, Vec<FeasibilityViolation>)> {
    let v = feasibility_violations(&sol.selected, g, cs)?;
    Ok((v.is_empty(), v))
}

/// Values from a one-pass unweighted solve, in whichever arithmetic was used.
#[derive(Clone, Debug, PartialEq)]
pub enum BudgetValues {
    Exact(ValueTable<Rational>),
    Float(ValueTable<f64>),
}

impl BudgetValues {
    pub fn select(&self) -> &[bool] {
        match self {
            BudgetValues::Exact(t) => &t.select,
            BudgetValues::Float(t) => &t.select,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            BudgetValues::Exact(t) => t.val.iter().map(charge::to_f64).collect(),
            BudgetValues::Float(t) => t.val.clone(),
        }
    }
}

fn require_kind(cs: &ConstraintSet, allowed: &[ConstraintKind], solver: &str) -> Result<()> {
    if allowed.contains(&cs.kind) {
        Ok(())
    } else {
        Err(Error::validation(
            "constraints/kind",
            format!("{solver} cannot handle {} constraints", cs.kind.as_str()),
        ))
    }
}

/// Count-limited groups that partition the bids. Every earlier positive-value
/// group mate that is not a predecessor charges `1/k` of its value; the
/// reverse pass keeps independence and per-group counts.
pub fn solve_unweighted(g: &BidGraph, cs: &ConstraintSet) -> Result<(Solution, BudgetValues)> {
    require_kind(cs, &[ConstraintKind::Unweighted], "solve_unweighted")?;
    let table = cs.resolve(g)?;
    let (mut sol, values) = charge::solve_groups(g, &table)?;
    sol.certificate.algorithm = Algorithm::UnweightedOpcost;
    Ok((sol, values))
}

/// Count-limited groups that may overlap; a bid in several groups is charged
/// by each of them. Also accepts a partition.
pub fn solve_overlapping(g: &BidGraph, cs: &ConstraintSet) -> Result<Solution> {
    require_kind(
        cs,
        &[ConstraintKind::Overlapping, ConstraintKind::Unweighted],
        "solve_overlapping",
    )?;
    let table = cs.resolve(g)?;
    let (mut sol, _) = charge::solve_groups(g, &table)?;
    sol.certificate.algorithm = Algorithm::OverlappingOpcost;
    Ok(sol)
}

/// Both halves of a weighted solve.
#[derive(Clone, Debug)]
pub struct WeightedParts {
    /// Best heavy-bid solution, in node indices of the full graph.
    pub heavy: Solution,
    pub light: Solution,
    pub heavy_nodes: Vec<usize>,
    pub light_nodes: Vec<usize>,
}

impl WeightedParts {
    /// The higher-revenue side; heavy wins ties.
    pub fn best(&self) -> &Solution {
        if self.light.revenue > self.heavy.revenue {
            &self.light
        } else {
            &self.heavy
        }
    }
}

/// Budget-limited partition: heavy bids (b/2 < w ≤ b) become a 1-of-n
/// problem, light bids go through [`solve_light`]; the better revenue wins.
pub fn solve_weighted(g: &BidGraph, cs: &ConstraintSet) -> Result<Solution> {
    let parts = solve_weighted_parts(g, cs)?;
    let mut sol = parts.best().clone();
    sol.certificate.algorithm = Algorithm::WeightedOpcost;
    sol.certificate.ordering = g.provenance();
    Ok(sol)
}

pub fn solve_weighted_parts(g: &BidGraph, cs: &ConstraintSet) -> Result<WeightedParts> {
    require_kind(cs, &[ConstraintKind::Weighted], "solve_weighted")?;
    let table = cs.resolve(g)?;
    // A bid priced above its whole budget can never win and joins neither side.
    let budget = |v: usize| table.limit(table.groups_of(v)[0]) as i128;
    let (heavy_nodes, light_nodes): (Vec<usize>, Vec<usize>) = (0..g.len())
        .filter(|&v| g.weight(v) as i128 <= budget(v))
        .partition(|&v| 2 * g.weight(v) as i128 > budget(v));

    let heavy_graph = g.induced_subgraph(&heavy_nodes);
    let mut heavy_cs = cs.restricted_to(&heavy_graph);
    heavy_cs.kind = ConstraintKind::Unweighted;
    for grp in &mut heavy_cs.groups {
        grp.k = Some(1);
        grp.b = None;
    }
    let (heavy_sol, _) = solve_unweighted(&heavy_graph, &heavy_cs)?;

    let light_graph = g.induced_subgraph(&light_nodes);
    let light_cs = cs.restricted_to(&light_graph);
    let light_sol = solve_light(&light_graph, &light_cs)?;

    let lift = |sol: Solution, nodes: &[usize]| {
        let selected = sol.selected.iter().map(|&v| nodes[v]).collect();
        let mut lifted = Solution::new(g, selected, sol.certificate.algorithm);
        lifted.certificate.arithmetic = sol.certificate.arithmetic;
        lifted
    };
    Ok(WeightedParts {
        heavy: lift(heavy_sol, &heavy_nodes),
        light: lift(light_sol, &light_nodes),
        heavy_nodes,
        light_nodes,
    })
}

/// `g` plus a clique on every constraint group, keeping the orientation.
/// Turns 1-of-n groups into plain conflicts.
pub fn group_clique_graph(g: &BidGraph, cs: &ConstraintSet) -> Result<BidGraph> {
    let table = cs.resolve(g)?;
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    for gi in 0..table.len() {
        let m = table.members(gi);
        for (i, &a) in m.iter().enumerate() {
            edges.extend(m[i + 1..].iter().map(|&b| (a, b)));
        }
    }
    let union = BidGraph::from_edges(g.ids().to_vec(), g.weights().to_vec(), edges)?;
    match (g.order(), g.provenance()) {
        (Some(order), Some(p)) => union.with_orientation(&Ordering::new(order.to_vec(), p)?),
        _ => Ok(union),
    }
}

pub(crate) fn arithmetic_of(values: &BudgetValues) -> Arithmetic {
    match values {
        BudgetValues::Exact(_) => Arithmetic::ExactRational,
        BudgetValues::Float(_) => Arithmetic::Float,
    }
}
