//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Instance counts, size limits, tolerances and time budgets are
//! pinned in the constants below.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use auctol::bench::{run_bench, BenchFamily};
use auctol::budgets::{
    check_feasible, solve_light_with, solve_overlapping, solve_unweighted, solve_weighted,
    ConstraintKind, ConstraintSet, LightMode,
};
use auctol::graph::{beta_bound_frontier, beta_exact, BidGraph, DEFAULT_BETA_CAP};
use auctol::instances::{
    gen_budget, gen_grid, gen_interval, gen_interval_selection, gen_subtrees, gen_tight,
    gen_treedec, BudgetParams, Instance, OrderingSpec,
};
use auctol::solvers::{exact_mwis, greedy, lropcost, opcost, Solution};
use common::{brute_beta, brute_optimum, frontier_failure, is_feasible, td_problems};
use num_rational::Ratio;

const EQUIVALENCE_INSTANCES: u64 = 1000;
const EQUIVALENCE_MAX_N: usize = 50;
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(10);

const RATIO_INSTANCES: u64 = 500;
const RATIO_MAX_N: usize = 20;
const RATIO_BUDGET: Duration = Duration::from_secs(60);

const TIGHT_BETAS: [usize; 3] = [2, 3, 5];
const TIGHT_EPSILONS: [i64; 2] = [1, 100];

const CHORDAL_INSTANCES: u64 = 200;
const CHORDAL_MAX_N: usize = 20;

const ORDERING_INSTANCES: u64 = 200;
const ORDERING_MAX_N: usize = 20;

const BUDGET_INSTANCES: u64 = 200;
const BUDGET_MAX_N: usize = 14;
const BUDGET_MAX_OVERLAP: usize = 3;
const BUDGET_TIME: Duration = Duration::from_secs(120);

const BENCH_SIZES: [usize; 3] = [10_000, 100_000, 1_000_000];
const BENCH_REPEATS: usize = 7;
const BENCH_SLACK: f64 = 3.0;
const BENCH_BUDGET: Duration = Duration::from_secs(120);

const FRONTIER_INSTANCES: u64 = 100;
const FRONTIER_MAX_N: usize = 12;

const LIGHT_INSTANCES: u64 = 200;
const LIGHT_MAX_N: usize = 40;
const LIGHT_TOLERANCE: f64 = 1e-9;
const LIGHT_BUDGET: Duration = Duration::from_secs(10);

/// SplitMix64 step, used only to spread instance parameters.
fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parameter in `lo..=hi` for instance `i`, draw `k`.
fn pick(i: u64, k: u64, lo: usize, hi: usize) -> usize {
    lo + (mix(i.wrapping_mul(31).wrapping_add(k)) % (hi - lo + 1) as u64) as usize
}

/// One of six unconstrained families with at most `max_n` bids.
fn mixed(i: u64, max_n: usize) -> Instance {
    let n = pick(i, 1, 1, max_n);
    let seed = mix(i);
    match i % 6 {
        0 => gen_interval(n, (1, 1000), seed),
        1 => gen_subtrees(pick(i, 2, 1, n.max(2)), n, seed),
        2 => {
            let dims: &[usize] = if max_n >= 40 { &[4, 4] } else if max_n >= 20 { &[3, 3] } else { &[2, 3] };
            gen_grid(dims, pick(i, 3, 300, 1000) as u64, (1, 1000), seed)
        }
        3 => gen_treedec(pick(i, 4, 2, 14), pick(i, 5, 0, 6), n, pick(i, 6, 1, 4), seed),
        4 => {
            let per = pick(i, 7, 1, 4);
            gen_interval_selection((n / per).max(1), per, seed)
        }
        _ => gen_tight(pick(i, 8, 1, 5.min(max_n - 1).max(1)), pick(i, 9, 0, 999) as i64, seed),
    }
}

struct Feasibility {
    checked: usize,
    failures: Vec<String>,
}

impl Feasibility {
    fn record(&mut self, tag: &str, inst: &Instance, cs: Option<&ConstraintSet>, g: &BidGraph, sol: &Solution) {
        self.checked += 1;
        let lib = check_feasible(sol, g, cs).map(|(ok, _)| ok).unwrap_or(false);
        let ids = sol.selected_ids(g);
        let oracle = is_feasible(&inst.bids, cs, &ids);
        if !(lib && oracle) && self.failures.len() < 5 {
            self.failures.push(format!("{tag} {}: library {lib}, oracle {oracle}", sol.certificate.algorithm));
        }
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn equivalence(feas: &mut Feasibility) -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for i in 0..EQUIVALENCE_INSTANCES {
        let inst = mixed(i, EQUIVALENCE_MAX_N);
        let g = inst.prepare().unwrap().graph;
        let (a, _) = opcost(&g).unwrap();
        let b = lropcost(&g).unwrap();
        feas.record("equivalence", &inst, None, &g, &a);
        feas.record("equivalence", &inst, None, &g, &b);
        if a.selected != b.selected {
            mismatches.push(i);
        }
    }
    let t = start.elapsed();
    outcome(
        mismatches.is_empty() && within(t, EQUIVALENCE_BUDGET),
        format!(
            "{EQUIVALENCE_INSTANCES} instances n<={EQUIVALENCE_MAX_N}, {} mismatched sets (tolerance 0), {:.2}s (limit {}s)",
            mismatches.len(),
            t.as_secs_f64(),
            EQUIVALENCE_BUDGET.as_secs()
        ),
    )
}

fn order_of(inst: &Instance) -> Vec<String> {
    let prep = inst.prepare().unwrap();
    prep.ordering.permutation().iter().map(|&v| prep.graph.id(v).to_string()).collect()
}

fn beta_ratio(feas: &mut Feasibility) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut beta_disagree = 0;
    let mut worst = Ratio::from_integer(1i64);
    for i in 0..RATIO_INSTANCES {
        let inst = mixed(10_000 + i, RATIO_MAX_N);
        let g = inst.prepare().unwrap().graph;
        let (sol, _) = opcost(&g).unwrap();
        feas.record("beta-ratio", &inst, None, &g, &sol);
        let beta = beta_exact(&g, DEFAULT_BETA_CAP).unwrap().beta_graph;
        if beta != brute_beta(&inst.bids, &order_of(&inst)) {
            beta_disagree += 1;
        }
        let opt = brute_optimum(&inst.bids, None);
        if (sol.revenue as i128) * (beta as i128) < opt as i128 {
            bad.push(i);
        }
        if sol.revenue > 0 {
            worst = worst.max(Ratio::new(opt, sol.revenue));
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && beta_disagree == 0 && within(t, RATIO_BUDGET),
        format!(
            "{RATIO_INSTANCES} instances n<={RATIO_MAX_N}, {} with revenue*beta < optimum, {beta_disagree} beta disagreements with enumeration, worst optimum/revenue {worst}, {:.2}s (limit {}s)",
            bad.len(),
            t.as_secs_f64(),
            RATIO_BUDGET.as_secs()
        ),
    )
}

fn tightness(feas: &mut Feasibility) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for beta in TIGHT_BETAS {
        for eps in TIGHT_EPSILONS {
            let inst = gen_tight(beta, eps, 0);
            let g = inst.prepare().unwrap().graph;
            let (sol, _) = opcost(&g).unwrap();
            feas.record("tightness", &inst, None, &g, &sol);
            let opt = brute_optimum(&inst.bids, None);
            let observed = Ratio::new(opt, sol.revenue);
            let expected = Ratio::new(beta as i64 * (1000 - eps), 1000);
            ok &= observed == expected;
            lines.push(format!("b{beta}/e{eps}: {observed}"));
        }
    }
    outcome(ok, format!("observed ratio equals beta*(1000-eps)/1000 exactly; {}", lines.join(", ")))
}

fn chordal_optimality(feas: &mut Feasibility) -> Outcome {
    let mut bad = 0;
    for i in 0..CHORDAL_INSTANCES {
        let n = pick(i, 11, 1, CHORDAL_MAX_N);
        let inst = if i % 2 == 0 {
            gen_interval(n, (1, 1000), mix(20_000 + i))
        } else {
            gen_subtrees(pick(i, 12, 1, n.max(2)), n, mix(20_000 + i))
        };
        let prep = inst.prepare_with(&OrderingSpec::Chordal).unwrap();
        let (sol, _) = opcost(&prep.graph).unwrap();
        feas.record("chordal", &inst, None, &prep.graph, &sol);
        if sol.revenue != brute_optimum(&inst.bids, None) {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("{CHORDAL_INSTANCES} interval/subtree instances n<={CHORDAL_MAX_N} with Lex-BFS order, {bad} below optimum (tolerance 0)"),
    )
}

/// Prices made pairwise distinct while keeping their order.
fn distinct_prices(mut inst: Instance) -> Instance {
    for (j, b) in inst.bids.iter_mut().enumerate() {
        b.price = b.price * 1000 + j as i64;
    }
    inst
}

fn ordering_theorems(feas: &mut Feasibility) -> Outcome {
    let mut planted_bad = 0;
    let mut greedy_bad = 0;
    for i in 0..ORDERING_INSTANCES {
        let inst = mixed(30_000 + i, ORDERING_MAX_N);
        let g = inst.graph().unwrap();
        let best = exact_mwis(&g, ORDERING_MAX_N).unwrap();
        let spec = OrderingSpec::PlantedOptimal {
            independent_set: best.selected_ids(&g).into_iter().map(String::from).collect(),
        };
        let prep = inst.prepare_with(&spec).unwrap();
        let (sol, _) = opcost(&prep.graph).unwrap();
        feas.record("planted", &inst, None, &prep.graph, &sol);
        if sol.revenue != brute_optimum(&inst.bids, None) {
            planted_bad += 1;
        }

        let inst = distinct_prices(mixed(40_000 + i, ORDERING_MAX_N));
        let prep = inst.prepare_with(&OrderingSpec::DecreasingWeight).unwrap();
        let (sol, _) = opcost(&prep.graph).unwrap();
        let gr = greedy(&prep.graph, &prep.ordering).unwrap();
        feas.record("decreasing-weight", &inst, None, &prep.graph, &sol);
        feas.record("decreasing-weight", &inst, None, &prep.graph, &gr);
        if sol.selected != gr.selected {
            greedy_bad += 1;
        }
    }
    outcome(
        planted_bad == 0 && greedy_bad == 0,
        format!(
            "planted optimum: {ORDERING_INSTANCES} instances n<={ORDERING_MAX_N}, {planted_bad} below optimum; decreasing weight: {ORDERING_INSTANCES} instances with distinct prices, {greedy_bad} differ from greedy (tolerance 0)"
        ),
    )
}

fn budget_base(i: u64) -> Instance {
    let n = pick(i, 21, 1, BUDGET_MAX_N);
    let seed = mix(50_000 + i);
    match i % 4 {
        0 => gen_interval(n, (1, 1000), seed),
        1 => gen_subtrees(pick(i, 22, 1, n.max(2)), n, seed),
        2 => gen_grid(&[2, 3], pick(i, 23, 300, 1000) as u64, (1, 1000), seed),
        _ => gen_treedec(pick(i, 24, 2, 10), pick(i, 25, 0, 4), n, pick(i, 26, 1, 3), seed),
    }
}

fn max_membership(cs: &ConstraintSet) -> usize {
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for g in &cs.groups {
        for m in &g.members {
            *count.entry(m.as_str()).or_default() += 1;
        }
    }
    count.values().copied().max().unwrap_or(1)
}

fn budget_ratios(feas: &mut Feasibility) -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (kind, salt) in [
        (ConstraintKind::Unweighted, 0u64),
        (ConstraintKind::Overlapping, 1_000),
        (ConstraintKind::Weighted, 2_000),
    ] {
        let mut bad = 0;
        let mut worst = Ratio::from_integer(1i64);
        let mut worst_t = 0;
        for i in 0..BUDGET_INSTANCES {
            let j = salt + i;
            let params = BudgetParams {
                kind,
                groups: pick(j, 27, 1, 5),
                max_k: pick(j, 28, 1, 3) as u64,
                overlap: BUDGET_MAX_OVERLAP,
                all_heavy: kind == ConstraintKind::Weighted && i % 5 == 0,
            };
            let inst = gen_budget(budget_base(j), params, mix(j));
            let g = inst.prepare().unwrap().graph;
            let cs = inst.constraints.as_ref().unwrap();
            let sol = match kind {
                ConstraintKind::Unweighted => solve_unweighted(&g, cs).unwrap().0,
                ConstraintKind::Overlapping => solve_overlapping(&g, cs).unwrap(),
                ConstraintKind::Weighted => solve_weighted(&g, cs).unwrap(),
            };
            feas.record(kind.as_str(), &inst, Some(cs), &g, &sol);
            let beta = brute_beta(&inst.bids, &order_of(&inst)) as i64;
            let t = max_membership(cs);
            worst_t = worst_t.max(t);
            let claim = match kind {
                ConstraintKind::Unweighted => beta + 1,
                ConstraintKind::Overlapping => beta + t as i64,
                ConstraintKind::Weighted => 2 * beta + 3,
            };
            let opt = brute_optimum(&inst.bids, Some(cs));
            if opt > claim * sol.revenue {
                bad += 1;
            }
            if sol.revenue > 0 {
                worst = worst.max(Ratio::new(opt, sol.revenue));
            }
        }
        ok &= bad == 0 && worst_t <= BUDGET_MAX_OVERLAP;
        parts.push(format!("{}: {bad} violations, worst {worst}, t<={worst_t}", kind.as_str()));
    }
    let t = start.elapsed();
    ok &= within(t, BUDGET_TIME);
    outcome(
        ok,
        format!(
            "{BUDGET_INSTANCES} instances per kind, n<={BUDGET_MAX_N}, bounds beta+1 / beta+t / 2beta+3; {}; {:.2}s (limit {}s)",
            parts.join("; "),
            t.as_secs_f64(),
            BUDGET_TIME.as_secs()
        ),
    )
}

fn linear_time() -> Outcome {
    let start = Instant::now();
    let summary = run_bench(BenchFamily::Interval, &BENCH_SIZES, 0, BENCH_REPEATS).unwrap();
    let t = start.elapsed();
    let ratios: Vec<String> = summary
        .verdicts
        .iter()
        .map(|v| format!("{} {:.2}", v.algorithm, v.ratio))
        .collect();
    let ok = summary.verdicts.iter().all(|v| v.ratio <= BENCH_SLACK);
    outcome(
        ok && within(t, BENCH_BUDGET),
        format!(
            "interval family, |V|+|E| targets {BENCH_SIZES:?}, per-element cost ratio largest/smallest <= {BENCH_SLACK}: {}; {:.1}s (limit {}s)",
            ratios.join(", "),
            t.as_secs_f64(),
            BENCH_BUDGET.as_secs()
        ),
    )
}

fn frontier_soundness() -> Outcome {
    let mut problems = Vec::new();
    for i in 0..FRONTIER_INSTANCES {
        let n = pick(i, 31, 1, FRONTIER_MAX_N);
        let inst = gen_treedec(pick(i, 32, 1, 14), pick(i, 33, 0, 6), n, pick(i, 34, 1, 4), mix(60_000 + i));
        let td = match &inst.ordering {
            Some(OrderingSpec::TreeDecomposition { tree_decomposition: Some(td) }) => td.clone(),
            _ => unreachable!("generator embeds a decomposition"),
        };
        let objects = inst.objects.clone().unwrap();
        let edges = inst.object_edges.clone().unwrap_or_default();
        let td_bad = td_problems(&objects, &edges, &td);
        let prep = inst.prepare().unwrap();
        let order = order_of(&inst);
        let frontier = prep.ordering.frontier_sets().unwrap();
        let by_id = (0..prep.graph.len())
            .map(|v| (prep.graph.id(v).to_string(), frontier[v].clone()))
            .collect();
        let beta = beta_exact(&prep.graph, DEFAULT_BETA_CAP).unwrap().beta_graph;
        let brute = brute_beta(&inst.bids, &order);
        let bound = beta_bound_frontier(&prep.ordering).unwrap();
        if !td_bad.is_empty()
            || frontier_failure(&inst.bids, &order, &by_id).is_some()
            || beta != brute
            || beta > td.max_bag_size()
            || bound > td.max_bag_size()
            || beta > bound
        {
            problems.push(i);
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{FRONTIER_INSTANCES} tree-decomposition instances n<={FRONTIER_MAX_N}: beta <= frontier bound <= max bag, frontier property checked on every intersecting ordered pair; {} failing",
            problems.len()
        ),
    )
}

/// A weighted instance in which every bid is light: each budget is raised
/// to at least twice the largest member price.
fn all_light(i: u64) -> Instance {
    let n = pick(i, 41, 1, LIGHT_MAX_N);
    let base = match i % 3 {
        0 => gen_interval(n, (1, 1000), mix(70_000 + i)),
        1 => gen_subtrees(pick(i, 42, 1, n.max(2)), n, mix(70_000 + i)),
        _ => gen_treedec(pick(i, 43, 2, 16), pick(i, 44, 0, 6), n, 3, mix(70_000 + i)),
    };
    let params = BudgetParams {
        kind: ConstraintKind::Weighted,
        groups: pick(i, 45, 1, 6),
        ..BudgetParams::default()
    };
    let mut inst = gen_budget(base, params, mix(i));
    let price: BTreeMap<String, i64> = inst.bids.iter().map(|b| (b.id.clone(), b.price)).collect();
    for g in &mut inst.constraints.as_mut().unwrap().groups {
        let top = g.members.iter().map(|m| price[m]).max().unwrap_or(0) as u64;
        let extra = pick(i, 46, 0, 2000) as u64;
        g.b = Some(g.b.unwrap().max(2 * top) + extra);
    }
    inst
}

fn light_consistency(feas: &mut Feasibility) -> Outcome {
    let start = Instant::now();
    let mut set_diffs = 0;
    let mut worst: f64 = 0.0;
    for i in 0..LIGHT_INSTANCES {
        let inst = all_light(i);
        let g = inst.prepare().unwrap().graph;
        let cs = inst.constraints.as_ref().unwrap();
        let (a, va) = solve_light_with(&g, cs, LightMode::Lazy).unwrap();
        let (b, vb) = solve_light_with(&g, cs, LightMode::Direct).unwrap();
        feas.record("light-lazy", &inst, Some(cs), &g, &a);
        feas.record("light-direct", &inst, Some(cs), &g, &b);
        if a.selected != b.selected {
            set_diffs += 1;
        }
        for (x, y) in va.iter().zip(&vb) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        }
    }
    let t = start.elapsed();
    outcome(
        set_diffs == 0 && worst <= LIGHT_TOLERANCE && within(t, LIGHT_BUDGET),
        format!(
            "{LIGHT_INSTANCES} all-light weighted instances n<={LIGHT_MAX_N}: {set_diffs} differing sets, max relative value error {worst:.2e} (limit {LIGHT_TOLERANCE:e}, denominator floored at one price unit), {:.2}s (limit {}s)",
            t.as_secs_f64(),
            LIGHT_BUDGET.as_secs()
        ),
    )
}

fn main() -> ExitCode {
    let mut feas = Feasibility {
        checked: 0,
        failures: Vec::new(),
    };
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "equivalence", equivalence(&mut feas)),
        (2, "beta ratio", beta_ratio(&mut feas)),
        (3, "tightness", tightness(&mut feas)),
        (4, "chordal optimality", chordal_optimality(&mut feas)),
        (5, "ordering theorems", ordering_theorems(&mut feas)),
        (6, "budget ratios", budget_ratios(&mut feas)),
    ];
    let light = light_consistency(&mut feas);
    results.push((
        7,
        "feasibility",
        outcome(
            feas.failures.is_empty(),
            format!(
                "{} solver outputs checked by the library and an independent oracle, {} infeasible (tolerance 0){}",
                feas.checked,
                feas.failures.len(),
                if feas.failures.is_empty() { String::new() } else { format!(": {}", feas.failures.join("; ")) }
            ),
        ),
    ));
    results.push((8, "linear time", linear_time()));
    results.push((9, "frontier soundness", frontier_soundness()));
    results.push((10, "light-pass consistency", light));

    let mut all = true;
    for (n, name, o) in &results {
        all &= o.passed;
        println!("{} {n} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
