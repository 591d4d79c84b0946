//! Per-element timing of the one-pass solvers across instance sizes.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::budgets::{solve_overlapping, solve_unweighted, ConstraintKind, ConstraintSet};
use crate::error::{Error, Result};
use crate::graph::BidGraph;
use crate::instances::{gen_budget, gen_grid, gen_interval, gen_subtrees, BudgetParams, Instance};
use crate::solvers::{lropcost, opcost};

/// Largest allowed ratio between per-element cost at the biggest and the
/// smallest size.
pub const LINEARITY_SLACK: f64 = 3.0;

/// Each timing sample repeats the solver until at least this much time has
/// passed and reports the mean.
const SAMPLE_FLOOR: Duration = Duration::from_millis(20);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchFamily {
    Interval,
    Subtrees,
    Grid,
}

impl BenchFamily {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "interval" => Some(BenchFamily::Interval),
            "subtrees" => Some(BenchFamily::Subtrees),
            "grid" => Some(BenchFamily::Grid),
            _ => None,
        }
    }

    fn generate(self, n: usize, seed: u64) -> Instance {
        match self {
            BenchFamily::Interval => gen_interval(n, (1, 1000), seed),
            BenchFamily::Subtrees => gen_subtrees(n.div_ceil(2).max(1), n, seed),
            BenchFamily::Grid => {
                let side = (n as f64).sqrt().ceil().max(1.0) as usize;
                gen_grid(&[side, side], 1000, (1, 1000), seed)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub target: usize,
    pub bids: usize,
    pub conflicts: usize,
    pub elements: usize,
    pub ns_per_call: f64,
    pub ns_per_element: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchVerdict {
    pub algorithm: String,
    pub smallest: f64,
    pub largest: f64,
    pub ratio: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub verdicts: Vec<BenchVerdict>,
    pub passed: bool,
}

struct Workload {
    graph: BidGraph,
    unweighted: ConstraintSet,
    overlapping: ConstraintSet,
}

/// Generates an instance with |V| + |E| close to `target`: one probe at a
/// guessed size, then a rescaled run.
fn workload(family: BenchFamily, target: usize, seed: u64) -> Result<Workload> {
    let elements = |inst: &Instance| -> Result<usize> {
        let g = inst.graph()?;
        Ok(g.len() + g.edge_count())
    };
    let guess = (target / 3).max(1);
    let probe = elements(&family.generate(guess, seed))?.max(1);
    let n = ((guess as f64) * target as f64 / probe as f64).round().max(1.0) as usize;
    let inst = family.generate(n, seed);
    let groups = (n / 8).max(1);
    let with = |kind| {
        let params = BudgetParams {
            kind,
            groups,
            max_k: 3,
            overlap: 2,
            all_heavy: false,
        };
        gen_budget(inst.clone(), params, seed).constraints.expect("generated")
    };
    Ok(Workload {
        graph: inst.prepare()?.graph,
        unweighted: with(ConstraintKind::Unweighted),
        overlapping: with(ConstraintKind::Overlapping),
    })
}

fn time(mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let start = Instant::now();
    let mut calls = 0u32;
    while calls == 0 || start.elapsed() < SAMPLE_FLOOR {
        f()?;
        calls += 1;
    }
    Ok(start.elapsed().as_nanos() as f64 / calls as f64)
}

pub const BENCH_ALGORITHMS: [&str; 4] = ["opcost", "lropcost", "unweighted-opcost", "overlapping-opcost"];

/// Times every algorithm at every size and compares per-element cost
/// between the extreme sizes. Sizes are measured in `repeats` interleaved
/// rounds and the fastest sample of each is kept, so a noisy stretch on a
/// shared machine hits all sizes alike.
pub fn run_bench(family: BenchFamily, sizes: &[usize], seed: u64, repeats: usize) -> Result<BenchSummary> {
    if sizes.is_empty() {
        return Err(Error::validation("sizes", "no sizes given"));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    let loads = sizes
        .iter()
        .map(|&t| workload(family, t, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut best = vec![[f64::INFINITY; BENCH_ALGORITHMS.len()]; sizes.len()];
    for _ in 0..repeats.max(1) {
        for (w, slot) in loads.iter().zip(best.iter_mut()) {
            let g = &w.graph;
            for (a, name) in BENCH_ALGORITHMS.iter().enumerate() {
                let ns = match *name {
                    "opcost" => time(|| opcost(g).map(drop))?,
                    "lropcost" => time(|| lropcost(g).map(drop))?,
                    "unweighted-opcost" => time(|| solve_unweighted(g, &w.unweighted).map(drop))?,
                    _ => time(|| solve_overlapping(g, &w.overlapping).map(drop))?,
                };
                slot[a] = slot[a].min(ns);
            }
        }
    }
    let mut rows = Vec::new();
    for ((&target, w), times) in sizes.iter().zip(&loads).zip(&best) {
        let g = &w.graph;
        let elements = g.len() + g.edge_count();
        for (name, &ns) in BENCH_ALGORITHMS.iter().zip(times) {
            rows.push(BenchRow {
                algorithm: name.to_string(),
                target,
                bids: g.len(),
                conflicts: g.edge_count(),
                elements,
                ns_per_call: ns,
                ns_per_element: ns / elements.max(1) as f64,
            });
        }
    }
    let verdicts: Vec<BenchVerdict> = BENCH_ALGORITHMS
        .iter()
        .map(|&name| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.algorithm == name).collect();
            let smallest = mine.first().expect("one row per size").ns_per_element;
            let largest = mine.last().expect("one row per size").ns_per_element;
            let ratio = largest / smallest;
            BenchVerdict {
                algorithm: name.to_string(),
                smallest,
                largest,
                ratio,
                passed: ratio <= LINEARITY_SLACK,
            }
        })
        .collect();
    Ok(BenchSummary {
        passed: verdicts.iter().all(|v| v.passed),
        rows,
        verdicts,
    })
}
