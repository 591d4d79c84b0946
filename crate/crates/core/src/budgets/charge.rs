//! One-pass solver for count-limited groups, generic over the number type
//! used for the fractional `1/k` charges.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedSub, Signed, ToPrimitive, Zero};

use super::{arithmetic_of, BudgetValues, GroupTable};
use crate::error::Result;
use crate::graph::BidGraph;
use crate::solvers::{Algorithm, Solution, ValueTable};

/// Exact value type for count-limited charges.
pub type Rational = Ratio<i128>;

pub(crate) fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Arithmetic needed by the charge recurrence. Operations return `None` on
/// overflow.
pub(crate) trait Charge: Copy + PartialEq + std::fmt::Debug {
    fn from_int(w: i64) -> Self;
    fn zero() -> Self;
    fn add(self, other: Self) -> Option<Self>;
    fn sub(self, other: Self) -> Option<Self>;
    fn div_int(self, k: u64) -> Option<Self>;
    fn is_positive(self) -> bool;
}

impl Charge for Rational {
    fn from_int(w: i64) -> Self {
        Ratio::from_integer(w as i128)
    }
    fn zero() -> Self {
        <Ratio<i128> as Zero>::zero()
    }
    fn add(self, other: Self) -> Option<Self> {
        self.checked_add(&other)
    }
    fn sub(self, other: Self) -> Option<Self> {
        self.checked_sub(&other)
    }
    fn div_int(self, k: u64) -> Option<Self> {
        self.checked_div(&Ratio::from_integer(k as i128))
    }
    fn is_positive(self) -> bool {
        Signed::is_positive(&self)
    }
}

impl Charge for f64 {
    fn from_int(w: i64) -> Self {
        w as f64
    }
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Option<Self> {
        Some(self + other)
    }
    fn sub(self, other: Self) -> Option<Self> {
        Some(self - other)
    }
    fn div_int(self, k: u64) -> Option<Self> {
        Some(self / k as f64)
    }
    fn is_positive(self) -> bool {
        self > 0.0
    }
}

/// Runs the recurrence in exact rationals, falling back to f64 when a
/// numerator or denominator overflows `i128`.
pub(crate) fn solve_groups(g: &BidGraph, table: &GroupTable) -> Result<(Solution, BudgetValues)> {
    let values = match group_values::<Rational>(g, table)? {
        Some(val) => {
            let select = group_select(g, table, &val)?;
            BudgetValues::Exact(ValueTable { val, select })
        }
        None => {
            let val = group_values::<f64>(g, table)?.expect("f64 never overflows");
            let select = group_select(g, table, &val)?;
            BudgetValues::Float(ValueTable { val, select })
        }
    };
    let mut sol = Solution::from_flags(g, values.select(), Algorithm::UnweightedOpcost);
    sol.certificate.arithmetic = arithmetic_of(&values);
    Ok((sol, values))
}

/// Forward pass. For node u:
///
/// val(u) = w(u) − Σ_{v→u} max(0, val(v))
///          − Σ_{groups S ∋ u} (1/k_S) · Σ_{v ∈ S, v before u, v not → u} max(0, val(v))
///
/// Each group keeps a running sum Δ_S of positive values, so the group term
/// costs O(1) per group after subtracting the predecessors' share.
pub(super) fn group_values<V: Charge>(g: &BidGraph, table: &GroupTable) -> Result<Option<Vec<V>>> {
    let (order, rank) = g.oriented()?;
    let mut val = vec![V::zero(); g.len()];
    let mut delta = vec![V::zero(); table.len()];
    let mut shared: Vec<V> = Vec::new();
    for &u in order {
        let groups = table.groups_of(u);
        shared.clear();
        shared.resize(groups.len(), V::zero());
        let mut charge = V::zero();
        for &v in g.neighbors(u) {
            if rank[v] > rank[u] || !val[v].is_positive() {
                continue;
            }
            let Some(c) = charge.add(val[v]) else {
                return Ok(None);
            };
            charge = c;
            let of_v = table.groups_of(v);
            for (slot, gi) in shared.iter_mut().zip(groups) {
                if of_v.contains(gi) {
                    let Some(s) = slot.add(val[v]) else {
                        return Ok(None);
                    };
                    *slot = s;
                }
            }
        }
        for (&gi, &pred_part) in groups.iter().zip(&shared) {
            let term = delta[gi]
                .sub(pred_part)
                .and_then(|rest| rest.div_int(table.limit(gi)));
            match term.and_then(|t| charge.add(t)) {
                Some(c) => charge = c,
                None => return Ok(None),
            }
        }
        let Some(value) = V::from_int(g.weight(u)).sub(charge) else {
            return Ok(None);
        };
        val[u] = value;
        if value.is_positive() {
            for &gi in groups {
                match delta[gi].add(value) {
                    Some(d) => delta[gi] = d,
                    None => return Ok(None),
                }
            }
        }
    }
    Ok(Some(val))
}

/// Reverse pass: keep positive-value nodes that conflict with no selected
/// successor and fit every group's count limit.
fn group_select<V: Charge>(g: &BidGraph, table: &GroupTable, val: &[V]) -> Result<Vec<bool>> {
    let (order, rank) = g.oriented()?;
    let mut select = vec![false; g.len()];
    let mut count = vec![0u64; table.len()];
    for &u in order.iter().rev() {
        if !val[u].is_positive() {
            continue;
        }
        let blocked = g
            .neighbors(u)
            .iter()
            .any(|&v| rank[v] > rank[u] && select[v]);
        let groups = table.groups_of(u);
        if blocked || groups.iter().any(|&gi| count[gi] >= table.limit(gi)) {
            continue;
        }
        select[u] = true;
        for &gi in groups {
            count[gi] += 1;
        }
    }
    Ok(select)
}
