mod common;

use auctol::budgets::{exact_feasible, ConstraintKind};
use auctol::graph::{beta_exact, DEFAULT_BETA_CAP};
use auctol::instances::{
    gen_budget, gen_grid, gen_interval, gen_subtrees, gen_treedec, BudgetParams, Instance,
    OrderingSpec,
};
use auctol::orderings::{validate_tree_decomposition, TreeDecomposition};
use auctol::solvers::exact_mwis;
use common::{brute_beta, brute_optimum, frontier_failure, td_problems};
use proptest::prelude::*;

fn family(which: u8, n: usize, seed: u64) -> Instance {
    match which % 4 {
        0 => gen_interval(n, (1, 50), seed),
        1 => gen_subtrees(n.div_ceil(2) + 1, n, seed),
        2 => gen_grid(&[3, 3], 600, (1, 50), seed),
        _ => gen_treedec(8, 3, n, 3, seed),
    }
}

fn order_ids(inst: &Instance) -> Vec<String> {
    let prep = inst.prepare().unwrap();
    prep.ordering
        .permutation()
        .iter()
        .map(|&v| prep.graph.id(v).to_string())
        .collect()
}

fn embedded_td(inst: &Instance) -> TreeDecomposition {
    match &inst.ordering {
        Some(OrderingSpec::TreeDecomposition { tree_decomposition: Some(td) }) => td.clone(),
        other => panic!("no embedded decomposition: {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn exact_mwis_matches_enumeration(which in 0u8..4, n in 1usize..16, seed in any::<u64>()) {
        let inst = family(which, n, seed);
        let g = inst.prepare().unwrap().graph;
        let best = exact_mwis(&g, 30).unwrap();
        prop_assert_eq!(best.revenue, brute_optimum(&inst.bids, None));
    }

    #[test]
    fn beta_exact_matches_enumeration(which in 0u8..4, n in 1usize..16, seed in any::<u64>()) {
        let inst = family(which, n, seed);
        let g = inst.prepare().unwrap().graph;
        let b = beta_exact(&g, DEFAULT_BETA_CAP).unwrap();
        prop_assert_eq!(b.beta_graph, brute_beta(&inst.bids, &order_ids(&inst)));
    }

    #[test]
    fn exact_feasible_matches_enumeration(kind in 0u8..3, n in 1usize..12, seed in any::<u64>()) {
        let kind = [ConstraintKind::Unweighted, ConstraintKind::Overlapping, ConstraintKind::Weighted][kind as usize];
        let params = BudgetParams { kind, groups: 3, max_k: 2, overlap: 3, all_heavy: false };
        let inst = gen_budget(gen_interval(n, (1, 50), seed), params, seed);
        let g = inst.prepare().unwrap().graph;
        let cs = inst.constraints.as_ref().unwrap();
        let best = exact_feasible(&g, cs, 20).unwrap();
        prop_assert_eq!(best.revenue, brute_optimum(&inst.bids, Some(cs)));
    }

    #[test]
    fn generated_decompositions_are_valid(objects in 1usize..14, extra in 0usize..6, n in 1usize..12, seed in any::<u64>()) {
        let inst = gen_treedec(objects, extra, n, 4, seed);
        let td = embedded_td(&inst);
        let objs = inst.objects.clone().unwrap();
        let edges = inst.object_edges.clone().unwrap_or_default();
        prop_assert_eq!(td_problems(&objs, &edges, &td), Vec::<String>::new());
        let order = order_ids(&inst);
        let prep = inst.prepare().unwrap();
        let frontier = prep.ordering.frontier_sets().unwrap();
        let by_id = (0..prep.graph.len())
            .map(|v| (prep.graph.id(v).to_string(), frontier[v].clone()))
            .collect();
        prop_assert_eq!(frontier_failure(&inst.bids, &order, &by_id), None);
        prop_assert!(brute_beta(&inst.bids, &order) <= td.max_bag_size());
    }
}

#[test]
fn naive_checker_agrees_on_broken_decompositions() {
    let inst = gen_treedec(10, 4, 8, 3, 7);
    let td = embedded_td(&inst);
    let objs = inst.objects.clone().unwrap();
    let edges = inst.object_edges.clone().unwrap();
    let og = inst.object_graph().unwrap().unwrap();
    assert!(validate_tree_decomposition(&og, &td).is_empty());

    let mut dropped = td.clone();
    let (node, bag) = dropped.bags.iter_mut().max_by_key(|(_, b)| b.len()).unwrap();
    let lost = bag.pop().unwrap();
    let node = node.clone();
    let naive = td_problems(&objs, &edges, &dropped);
    let lib = validate_tree_decomposition(&og, &dropped);
    assert_eq!(naive.is_empty(), lib.is_empty(), "removed {lost} from {node}: {naive:?} vs {lib:?}");

    if !td.tree_edges.is_empty() {
        let mut cut = td.clone();
        cut.tree_edges.pop();
        assert!(!td_problems(&objs, &edges, &cut).is_empty());
        assert!(!validate_tree_decomposition(&og, &cut).is_empty());
    }
}
