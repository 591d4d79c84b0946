//! Light-bid pass for weighted budgets.
//!
//! Walking the orientation, a node u reached with current weight c > 0
//! subtracts c from every successor and scales every later group mate that is
//! not a successor by (1 − 2c/b). Selection then runs backwards, keeping
//! independence and Σ original weight ≤ b per group.
//!
//! The lazy mode stores each node's weight as ŵ(v)·M_g with a per-group
//! multiplier M_g, so a group-wide scale is one multiplication. The direct
//! mode updates every affected node explicitly and is kept as a slow
//! reference.

use super::{require_kind, ConstraintKind, ConstraintSet, GroupTable};
use crate::error::{Error, Result};
use crate::graph::BidGraph;
use crate::solvers::{Algorithm, Arithmetic, Solution};

/// A node counts as positive only above this fraction of its group budget.
pub const LIGHT_ZERO_THRESHOLD: f64 = 1e-9;

/// Group multipliers below this are folded back into the stored weights.
pub const LIGHT_MULTIPLIER_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LightMode {
    #[default]
    Lazy,
    Direct,
}

/// Light pass in lazy mode.
pub fn solve_light(g: &BidGraph, cs: &ConstraintSet) -> Result<Solution> {
    solve_light_with(g, cs, LightMode::Lazy).map(|(sol, _)| sol)
}

/// Light pass; also returns each node's current weight at the moment the
/// forward pass reached it.
pub fn solve_light_with(
    g: &BidGraph,
    cs: &ConstraintSet,
    mode: LightMode,
) -> Result<(Solution, Vec<f64>)> {
    require_kind(cs, &[ConstraintKind::Weighted], "solve_light")?;
    let table = cs.resolve(g)?;
    let group: Vec<usize> = (0..g.len()).map(|v| table.groups_of(v)[0]).collect();
    if let Some(v) = (0..g.len()).find(|&v| 2 * g.weight(v) as i128 > table.limit(group[v]) as i128) {
        return Err(Error::validation(
            format!("bids/{}", g.id(v)),
            format!(
                "bid {} is heavy: weight {} exceeds half of budget {}",
                g.id(v),
                g.weight(v),
                table.limit(group[v])
            ),
        ));
    }
    let values = match mode {
        LightMode::Lazy => lazy_values(g, &table, &group)?,
        LightMode::Direct => direct_values(g, &table, &group)?,
    };
    let selected = select(g, &table, &group, &values)?;
    let mut sol = Solution::from_flags(g, &selected, Algorithm::LightOpcost);
    sol.certificate.arithmetic = Arithmetic::Float;
    Ok((sol, values))
}

fn threshold(table: &GroupTable, gi: usize) -> f64 {
    LIGHT_ZERO_THRESHOLD * table.limit(gi) as f64
}

fn scale_factor(current: f64, budget: u64) -> f64 {
    (1.0 - 2.0 * current / budget as f64).max(0.0)
}

fn lazy_values(g: &BidGraph, table: &GroupTable, group: &[usize]) -> Result<Vec<f64>> {
    let (order, rank) = g.oriented()?;
    let mut multiplier = vec![1.0f64; table.len()];
    let mut stored: Vec<f64> = g.weights().iter().map(|&w| w as f64).collect();
    let mut values = vec![0.0; g.len()];
    let mut same_group: Vec<(usize, f64)> = Vec::new();

    for &u in order {
        let gu = group[u];
        let current = stored[u] * multiplier[gu];
        values[u] = current;
        if current <= threshold(table, gu) {
            continue;
        }
        same_group.clear();
        for &v in g.neighbors(u) {
            if rank[v] < rank[u] {
                continue;
            }
            let gv = group[v];
            if gv == gu {
                // Successor and group mate: additive charge only, applied
                // after the group scale below.
                same_group.push((v, stored[v] * multiplier[gv] - current));
            } else {
                stored[v] -= current / multiplier[gv];
            }
        }
        let scaled = multiplier[gu] * scale_factor(current, table.limit(gu));
        if scaled < LIGHT_MULTIPLIER_FLOOR {
            for &v in table.members(gu) {
                stored[v] *= scaled;
            }
            multiplier[gu] = 1.0;
        } else {
            multiplier[gu] = scaled;
        }
        for &(v, target) in &same_group {
            stored[v] = target / multiplier[gu];
        }
    }
    Ok(values)
}

fn direct_values(g: &BidGraph, table: &GroupTable, group: &[usize]) -> Result<Vec<f64>> {
    let (order, rank) = g.oriented()?;
    let mut current: Vec<f64> = g.weights().iter().map(|&w| w as f64).collect();
    let mut values = vec![0.0; g.len()];
    for &u in order {
        let gu = group[u];
        let c = current[u];
        values[u] = c;
        if c <= threshold(table, gu) {
            continue;
        }
        let factor = scale_factor(c, table.limit(gu));
        for &v in table.members(gu) {
            if rank[v] > rank[u] && !g.has_edge(u, v) {
                current[v] *= factor;
            }
        }
        for &v in g.neighbors(u) {
            if rank[v] > rank[u] {
                current[v] -= c;
            }
        }
        current[u] = 0.0;
    }
    Ok(values)
}

fn select(g: &BidGraph, table: &GroupTable, group: &[usize], values: &[f64]) -> Result<Vec<bool>> {
    let (order, rank) = g.oriented()?;
    let mut chosen = vec![false; g.len()];
    let mut spent = vec![0i64; table.len()];
    for &u in order.iter().rev() {
        let gu = group[u];
        if values[u] <= threshold(table, gu) {
            continue;
        }
        let blocked = g.neighbors(u).iter().any(|&v| rank[v] > rank[u] && chosen[v]);
        if blocked || spent[gu] + g.weight(u) > table.limit(gu) as i64 {
            continue;
        }
        chosen[u] = true;
        spent[gu] += g.weight(u);
    }
    Ok(chosen)
}
