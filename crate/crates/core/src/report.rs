//! Verification runs: every applicable solver on an instance, checked
//! against the exact oracles, β and the approximation claims.

use std::time::Instant;

use num_rational::Ratio;
use serde::Serialize;

use crate::budgets::{
    check_feasible, exact_feasible, lropcost_group_slow, solve_light_with, solve_overlapping,
    solve_unweighted, solve_weighted_parts, ConstraintKind, ConstraintSet, LightMode,
};
use crate::error::{Error, Result};
use crate::graph::{beta_exact, BetaMethod, BidGraph, DEFAULT_BETA_CAP};
use crate::instances::{Instance, OrderingSpec, Prepared, SolutionRecord};
use crate::solvers::{exact_mwis, greedy, lropcost, opcost, Solution};

/// Default instance size up to which the exact oracles run.
pub const DEFAULT_ORACLE_CAP: usize = 20;

/// Instance size up to which the quadratic local-ratio cross-check runs.
pub const SLOW_CHECK_CAP: usize = 2000;

/// Approximation ratio the theory promises for β and the constraint kind.
pub fn claimed_ratio(beta: usize, constraints: Option<(ConstraintKind, usize)>) -> i64 {
    let b = beta as i64;
    match constraints {
        None => b,
        Some((ConstraintKind::Unweighted, _)) => b + 1,
        Some((ConstraintKind::Overlapping, t)) => b + t as i64,
        Some((ConstraintKind::Weighted, _)) => 2 * b + 3,
    }
}

/// `optimum / revenue`, or `None` when the revenue is zero but the optimum
/// is not.
pub fn observed_ratio(optimum: i64, revenue: i64) -> Option<Ratio<i64>> {
    match (optimum, revenue) {
        (0, _) => Some(Ratio::from_integer(1)),
        (_, 0) => None,
        (o, r) => Some(Ratio::new(o, r)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgoRun {
    pub algorithm: String,
    pub revenue: i64,
    pub selected: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_us: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub bids: usize,
    pub conflicts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_method: Option<BetaMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_exact: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed_ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_revenue: Option<i64>,
    pub runs: Vec<AlgoRun>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunReport {
    fn empty(name: &str, inst: &Instance) -> Self {
        RunReport {
            instance: name.to_string(),
            family: inst.metadata.family.clone(),
            seed: inst.metadata.seed,
            bids: inst.bids.len(),
            conflicts: 0,
            constraints: inst.constraints.as_ref().map(|c| c.kind),
            overlap: None,
            beta_bound: None,
            beta_method: None,
            beta_exact: None,
            claimed_ratio: None,
            observed_ratio: None,
            oracle_revenue: None,
            runs: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    /// Report for a file that could not be loaded.
    pub fn failed_load(name: &str, err: &Error) -> Self {
        let mut r = RunReport::empty(name, &Instance::new(Default::default(), Vec::new()));
        r.family.clear();
        r.fail("load", err);
        r
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check::new(name, passed, detail));
    }

    fn fail(&mut self, name: &str, err: &Error) {
        self.check(name, false, err.to_string());
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub oracle_cap: usize,
    pub timings: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            oracle_cap: DEFAULT_ORACLE_CAP,
            timings: false,
        }
    }
}

struct Runner<'a> {
    report: &'a mut RunReport,
    g: &'a BidGraph,
    cs: Option<&'a ConstraintSet>,
    timings: bool,
}

impl Runner<'_> {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>, sol: impl Fn(&T) -> &Solution) -> Option<T> {
        let start = Instant::now();
        let out = f();
        let wall = start.elapsed();
        match out {
            Ok(value) => {
                let s = sol(&value);
                self.report.runs.push(AlgoRun {
                    algorithm: name.to_string(),
                    revenue: s.revenue,
                    selected: s.selected.len(),
                    wall_us: self.timings.then_some(wall.as_micros() as u64),
                });
                let verdict = check_feasible(s, self.g, self.cs);
                match verdict {
                    Ok((ok, violations)) => {
                        let detail: Vec<String> = violations.iter().map(ToString::to_string).collect();
                        self.report.check(format!("feasible:{name}"), ok, detail.join("; "));
                    }
                    Err(e) => self.report.fail(&format!("feasible:{name}"), &e),
                }
                Some(value)
            }
            Err(e) => {
                self.report.fail(name, &e);
                None
            }
        }
    }
}

/// Runs every applicable solver on `inst` and checks the results. Errors
/// become failed checks rather than aborting the report.
pub fn verify_instance(name: &str, inst: &Instance, opts: &VerifyOptions) -> RunReport {
    let mut report = RunReport::empty(name, inst);
    let prep = match inst.prepare() {
        Ok(p) => p,
        Err(e) => {
            report.fail("prepare", &e);
            return report;
        }
    };
    let g = &prep.graph;
    report.conflicts = g.edge_count();
    if let Some(cert) = prep.beta {
        report.beta_bound = Some(cert.bound);
        report.beta_method = Some(cert.method);
    }
    match beta_exact(g, DEFAULT_BETA_CAP) {
        Ok(b) => {
            report.beta_exact = Some(b.beta_graph);
            if let Some(bound) = report.beta_bound {
                report.check(
                    "beta-certificate",
                    b.beta_graph <= bound,
                    format!("exact {} vs certified {bound}", b.beta_graph),
                );
            }
        }
        Err(Error::Capacity { .. }) => {}
        Err(e) => report.fail("beta-exact", &e),
    }
    let beta = report.beta_exact.or(report.beta_bound);

    let mut runner = Runner {
        report: &mut report,
        g,
        cs: None,
        timings: opts.timings,
    };
    let plain = runner.run("opcost", || opcost(g), |(s, _)| s);
    let lr = runner.run("lropcost", || lropcost(g), |s| s);
    let greedy_sol = runner.run("greedy", || greedy(g, &prep.ordering), |s| s);
    if let Some((sol, table)) = &plain {
        match table.value_equation_violation(g) {
            Ok(bad) => report.check(
                "value-equation",
                bad.is_none(),
                bad.map(|v| format!("node {}", g.id(v))).unwrap_or_default(),
            ),
            Err(e) => report.fail("value-equation", &e),
        }
        if let Some(lr) = &lr {
            report.check(
                "opcost-equals-lropcost",
                sol.selected == lr.selected,
                String::new(),
            );
        }
    }

    match &inst.constraints {
        None => unconstrained_checks(&mut report, inst, &prep, beta, opts, plain.map(|p| p.0), greedy_sol),
        Some(cs) => constrained_checks(&mut report, &prep, cs, beta, opts),
    }
    report
}

fn ratio_check(report: &mut RunReport, optimum: i64, revenue: i64, claim: Option<i64>) {
    report.oracle_revenue = Some(optimum);
    let observed = observed_ratio(optimum, revenue);
    report.observed_ratio = Some(observed.map_or("inf".to_string(), |r| r.to_string()));
    if let Some(c) = claim {
        report.claimed_ratio = Some(c.to_string());
        report.check(
            "ratio",
            optimum <= c * revenue,
            format!("optimum {optimum}, revenue {revenue}, claimed ratio {c}"),
        );
    }
}

fn unconstrained_checks(
    report: &mut RunReport,
    inst: &Instance,
    prep: &Prepared,
    beta: Option<usize>,
    opts: &VerifyOptions,
    sol: Option<Solution>,
    greedy_sol: Option<Solution>,
) {
    let g = &prep.graph;
    let Some(sol) = sol else { return };
    let claim = beta.map(|b| claimed_ratio(b, None));
    if let Some(c) = claim {
        report.claimed_ratio = Some(c.to_string());
    }
    if let (OrderingSpec::DecreasingWeight, Some(gs)) = (inst.ordering.as_ref().expect("prepared"), &greedy_sol) {
        let mut w = g.weights().to_vec();
        w.sort_unstable();
        if w.windows(2).all(|p| p[0] != p[1]) {
            report.check("decreasing-weight-is-greedy", gs.selected == sol.selected, String::new());
        }
    }
    if g.len() > opts.oracle_cap {
        return;
    }
    let best = match exact_mwis(g, opts.oracle_cap) {
        Ok(b) => b,
        Err(e) => return report.fail("exact", &e),
    };
    ratio_check(report, best.revenue, sol.revenue, claim);
    if beta == Some(1) {
        report.check("beta-one-optimal", sol.revenue == best.revenue, String::new());
    }
    if let Some(OrderingSpec::PlantedOptimal { independent_set }) = &inst.ordering {
        let planted: i64 = independent_set
            .iter()
            .filter_map(|id| g.index_of(id))
            .map(|v| g.weight(v))
            .sum();
        if planted == best.revenue {
            report.check("planted-optimal", sol.revenue == best.revenue, String::new());
        }
    }
}

fn constrained_checks(
    report: &mut RunReport,
    prep: &Prepared,
    cs: &ConstraintSet,
    beta: Option<usize>,
    opts: &VerifyOptions,
) {
    let g = &prep.graph;
    let t = match cs.resolve(g) {
        Ok(table) => table.overlap(),
        Err(e) => return report.fail("constraints", &e),
    };
    report.overlap = Some(t);
    let claim = beta.map(|b| claimed_ratio(b, Some((cs.kind, t))));
    if let Some(c) = claim {
        report.claimed_ratio = Some(c.to_string());
    }
    let mut runner = Runner {
        report,
        g,
        cs: Some(cs),
        timings: opts.timings,
    };
    let sol = match cs.kind {
        ConstraintKind::Unweighted => runner.run("unweighted-opcost", || solve_unweighted(g, cs), |(s, _)| s).map(|p| p.0),
        ConstraintKind::Overlapping => runner.run("overlapping-opcost", || solve_overlapping(g, cs), |s| s),
        ConstraintKind::Weighted => runner
            .run("weighted-opcost", || solve_weighted_parts(g, cs), |p| p.best())
            .map(|p| {
                weighted_checks(runner.report, g, cs, &p);
                p.best().clone()
            }),
    };
    let slow = match (&sol, cs.kind) {
        (Some(_), ConstraintKind::Unweighted | ConstraintKind::Overlapping) if g.len() <= SLOW_CHECK_CAP => {
            runner.run("local-ratio-slow", || lropcost_group_slow(g, cs), |s| s)
        }
        _ => None,
    };
    if let (Some(sol), Some(slow)) = (&sol, &slow) {
        report.check("one-pass-equals-local-ratio", sol.selected == slow.selected, String::new());
    }
    let Some(sol) = sol else { return };
    if g.len() > opts.oracle_cap {
        return;
    }
    match exact_feasible(g, cs, opts.oracle_cap) {
        Ok(best) => ratio_check(report, best.revenue, sol.revenue, claim),
        Err(e) => report.fail("exact-feasible", &e),
    }
}

fn weighted_checks(report: &mut RunReport, g: &BidGraph, cs: &ConstraintSet, parts: &crate::budgets::WeightedParts) {
    let table = match cs.resolve(g) {
        Ok(t) => t,
        Err(e) => return report.fail("constraints", &e),
    };
    let mut per_group = vec![0; table.len()];
    for &v in &parts.heavy.selected {
        per_group[table.groups_of(v)[0]] += 1;
    }
    report.check("heavy-exclusive", per_group.iter().all(|&c| c <= 1), String::new());

    let light = g.induced_subgraph(&parts.light_nodes);
    let light_cs = cs.restricted_to(&light);
    match (
        solve_light_with(&light, &light_cs, LightMode::Lazy),
        solve_light_with(&light, &light_cs, LightMode::Direct),
    ) {
        (Ok((a, va)), Ok((b, vb))) => {
            let worst = va
                .iter()
                .zip(&vb)
                .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
                .fold(0.0, f64::max);
            report.check(
                "light-modes-agree",
                a.selected == b.selected && worst <= 1e-9,
                format!("max relative difference {worst:e}"),
            );
        }
        (Err(e), _) | (_, Err(e)) => report.fail("light-modes-agree", &e),
    }
}

/// Checks a stored solution against its instance: ids resolve, revenue
/// adds up, the set is feasible and, when the oracle runs, the recorded
/// ratio claim holds.
pub fn verify_solution(inst: &Instance, rec: &SolutionRecord, opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let prep = match inst.prepare() {
        Ok(p) => p,
        Err(e) => return vec![Check::new("solution-prepare", false, e.to_string())],
    };
    let g = &prep.graph;
    let sol = match rec.to_solution(g) {
        Ok(s) => s,
        Err(e) => return vec![Check::new("solution-record", false, e.to_string())],
    };
    match check_feasible(&sol, g, inst.constraints.as_ref()) {
        Ok((ok, v)) => {
            let detail: Vec<String> = v.iter().map(ToString::to_string).collect();
            checks.push(Check::new("solution-feasible", ok, detail.join("; ")));
        }
        Err(e) => checks.push(Check::new("solution-feasible", false, e.to_string())),
    }
    if let Some(claim) = sol.certificate.claimed_ratio {
        if g.len() <= opts.oracle_cap {
            let best = match &inst.constraints {
                None => exact_mwis(g, opts.oracle_cap),
                Some(cs) => exact_feasible(g, cs, opts.oracle_cap),
            };
            match best {
                Ok(best) => {
                    let ok = Ratio::from_integer(best.revenue) <= claim * Ratio::from_integer(sol.revenue);
                    checks.push(Check::new(
                        "solution-ratio",
                        ok,
                        format!("optimum {}, revenue {}, claimed {claim}", best.revenue, sol.revenue),
                    ));
                }
                Err(e) => checks.push(Check::new("solution-ratio", false, e.to_string())),
            }
        }
    }
    checks
}

/// Adds solution-file checks to a report.
pub fn attach_solution_checks(report: &mut RunReport, checks: Vec<Check>) {
    for c in checks {
        report.passed &= c.passed;
        report.checks.push(c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_budget, gen_interval, gen_tight, BudgetParams};

    #[test]
    fn claims() {
        assert_eq!(claimed_ratio(2, None), 2);
        assert_eq!(claimed_ratio(2, Some((ConstraintKind::Unweighted, 1))), 3);
        assert_eq!(claimed_ratio(2, Some((ConstraintKind::Overlapping, 3))), 5);
        assert_eq!(claimed_ratio(2, Some((ConstraintKind::Weighted, 1))), 7);
        assert_eq!(observed_ratio(2700, 1000), Some(Ratio::new(27, 10)));
        assert_eq!(observed_ratio(0, 0), Some(Ratio::from_integer(1)));
        assert_eq!(observed_ratio(3, 0), None);
    }

    #[test]
    fn tight_report() {
        let r = verify_instance("tight", &gen_tight(3, 100, 0), &VerifyOptions::default());
        assert!(r.passed, "{r:?}");
        assert_eq!(r.observed_ratio.as_deref(), Some("27/10"));
        assert_eq!(r.claimed_ratio.as_deref(), Some("3"));
        assert_eq!(r.beta_exact, Some(3));
        assert!(r.runs.iter().all(|a| a.wall_us.is_none()));
    }

    #[test]
    fn chordal_reports_are_exact() {
        for seed in 0..10 {
            let r = verify_instance("i", &gen_interval(15, (1, 50), seed), &VerifyOptions::default());
            assert!(r.passed, "{r:?}");
            assert_eq!(r.observed_ratio.as_deref(), Some("1"));
        }
    }

    #[test]
    fn budget_reports() {
        for kind in [ConstraintKind::Unweighted, ConstraintKind::Overlapping, ConstraintKind::Weighted] {
            let params = BudgetParams {
                kind,
                ..BudgetParams::default()
            };
            let inst = gen_budget(gen_interval(12, (1, 50), 4), params, 4);
            let r = verify_instance("b", &inst, &VerifyOptions::default());
            assert!(r.passed, "{r:?}");
            assert!(r.oracle_revenue.is_some());
        }
    }

    #[test]
    fn corrupted_solution_is_caught() {
        let inst = gen_tight(2, 1, 0);
        let prep = inst.prepare().unwrap();
        let (sol, _) = opcost(&prep.graph).unwrap();
        let sol = sol.with_claim(2, BetaMethod::FrontierBound, 2);
        let mut rec = SolutionRecord::new(&sol, &prep.graph, &inst.metadata);
        let good = verify_solution(&inst, &rec, &VerifyOptions::default());
        assert!(good.iter().all(|c| c.passed), "{good:?}");

        rec.selected = vec!["b0".into(), "b1".into()];
        rec.revenue = 1999;
        let bad = verify_solution(&inst, &rec, &VerifyOptions::default());
        assert!(bad.iter().any(|c| !c.passed && c.name == "solution-feasible"));
    }
}
