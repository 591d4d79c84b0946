use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{ConstraintKind, ConstraintSet};
use crate::error::{Error, Result};
use crate::graph::BidGraph;
use crate::solvers::{Algorithm, Arithmetic, Solution};

/// Local-ratio form of the count-limited solvers, kept as a slow O(|V|²·t)
/// reference with arbitrary-precision weights.
///
/// Each step takes the earliest node u of positive current weight w and
/// splits off w₁: w on u and its successors, w·Σ 1/k_S on every other node
/// sharing a group S with u. Unwinding adds u whenever the set stays
/// feasible.
pub fn lropcost_group_slow(g: &BidGraph, cs: &ConstraintSet) -> Result<Solution> {
    if cs.kind == ConstraintKind::Weighted {
        return Err(Error::Unsupported(
            "weighted budgets use the light/heavy split".into(),
        ));
    }
    let table = cs.resolve(g)?;
    let (order, rank) = g.oriented()?;
    let mut current: Vec<BigRational> = g
        .weights()
        .iter()
        .map(|&w| BigRational::from_integer(BigInt::from(w)))
        .collect();
    let mut stack = Vec::new();
    for (pos, &u) in order.iter().enumerate() {
        if !current[u].is_positive() {
            continue;
        }
        let w = std::mem::replace(&mut current[u], BigRational::zero());
        for &v in &order[pos + 1..] {
            if g.has_edge(u, v) {
                current[v] -= &w;
                continue;
            }
            let share: BigRational = table
                .groups_of(u)
                .iter()
                .filter(|gi| table.groups_of(v).contains(gi))
                .map(|&gi| BigRational::new(BigInt::from(1), BigInt::from(table.limit(gi))))
                .sum();
            if !share.is_zero() {
                current[v] -= &w * share;
            }
        }
        stack.push(u);
    }
    debug_assert!(stack.windows(2).all(|w| rank[w[0]] < rank[w[1]]));

    let mut chosen = vec![false; g.len()];
    let mut count = vec![0u64; table.len()];
    for &u in stack.iter().rev() {
        let independent = !g.neighbors(u).iter().any(|&v| chosen[v]);
        let fits = table
            .groups_of(u)
            .iter()
            .all(|&gi| count[gi] < table.limit(gi));
        if independent && fits {
            chosen[u] = true;
            for &gi in table.groups_of(u) {
                count[gi] += 1;
            }
        }
    }
    let mut sol = Solution::from_flags(g, &chosen, Algorithm::Lropcost);
    sol.certificate.arithmetic = Arithmetic::ExactRational;
    Ok(sol)
}
