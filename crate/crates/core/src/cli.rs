//! Command line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use crate::bench::{run_bench, BenchFamily};
use crate::budgets::{
    exact_feasible, lropcost_group_slow, solve_overlapping, solve_unweighted, solve_weighted,
    ConstraintKind, DEFAULT_FEASIBLE_CAP,
};
use crate::error::{Error, Result};
use crate::graph::{beta_exact, BetaMethod, DEFAULT_BETA_CAP};
use crate::instances::{
    gen_budget, gen_grid, gen_interval, gen_interval_selection, gen_subtrees, gen_tight,
    gen_treedec, load_instance, load_solution, save_instance, BudgetParams, Instance,
    OrderingSpec, SolutionRecord,
};
use crate::report::{attach_solution_checks, claimed_ratio, verify_instance, verify_solution, RunReport, VerifyOptions};
use crate::solvers::{exact_mwis, greedy, lropcost, opcost, Solution, DEFAULT_EXACT_CAP};

#[derive(Debug, Parser)]
#[command(name = "auctol", version, about = "Winner determination for combinatorial auctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and write the solution record.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Opcost)]
        algo: Algo,
        #[arg(long, value_enum, default_value_t = ConstraintMode::Auto)]
        constraints: ConstraintMode,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Largest instance the exact solvers accept.
        #[arg(long)]
        exact_cap: Option<usize>,
    },
    /// Compute an ordering and write the instance with it embedded.
    Order {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: OrderMethod,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        exact_cap: usize,
    },
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Run every applicable solver and check the results.
    Verify {
        /// An instance file or a directory of them.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = crate::report::DEFAULT_ORACLE_CAP)]
        oracle_cap: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Include wall-clock times, which makes the output nondeterministic.
        #[arg(long)]
        timings: bool,
    },
    /// Time the one-pass solvers at several sizes.
    Bench {
        #[arg(long, default_value = "interval")]
        family: String,
        /// Comma-separated targets for |V| + |E|.
        #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 100_000, 1_000_000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Opcost,
    Lropcost,
    Greedy,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstraintMode {
    Auto,
    Ignore,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderMethod {
    Chordal,
    TreeDecomposition,
    DecreasingWeight,
    PlantedOptimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Interval,
    IntervalSelection,
    Subtrees,
    Grid,
    Tight,
    Budget,
    Treedec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Unweighted,
    Overlapping,
    Weighted,
}

impl From<Kind> for ConstraintKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Unweighted => ConstraintKind::Unweighted,
            Kind::Overlapping => ConstraintKind::Overlapping,
            Kind::Weighted => ConstraintKind::Weighted,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Number of bids (interval, subtrees, treedec, and the budget base).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Bid price range as `lo,hi`.
    #[arg(long, value_delimiter = ',', default_values_t = [1i64, 100])]
    pub weights: Vec<i64>,
    /// interval-selection: bidder groups.
    #[arg(long, default_value_t = 3)]
    pub groups: usize,
    /// interval-selection: intervals per group.
    #[arg(long, default_value_t = 3)]
    pub per_group: usize,
    /// subtrees: objects in the tree; treedec: objects in the graph.
    #[arg(long, default_value_t = 12)]
    pub objects: usize,
    /// grid: side lengths, e.g. `4,4`.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 4])]
    pub dims: Vec<usize>,
    /// grid: per-mille chance that a cell or edge carries a bid.
    #[arg(long, default_value_t = 700)]
    pub density: u64,
    /// tight: number of successor bids.
    #[arg(long, default_value_t = 2)]
    pub beta: usize,
    /// tight: price gap in thousandths.
    #[arg(long, default_value_t = 1)]
    pub epsilon: i64,
    /// budget: constraint kind.
    #[arg(long, value_enum, default_value_t = Kind::Unweighted)]
    pub kind: Kind,
    /// budget: largest count limit.
    #[arg(long, default_value_t = 2)]
    pub max_k: u64,
    /// budget: most groups a bid joins (overlapping).
    #[arg(long, default_value_t = 2)]
    pub overlap: usize,
    /// budget: make every bid heavy (weighted).
    #[arg(long)]
    pub all_heavy: bool,
    /// treedec: chords added to the random tree.
    #[arg(long, default_value_t = 3)]
    pub extra_edges: usize,
    /// treedec: largest bid.
    #[arg(long, default_value_t = 3)]
    pub max_bid_size: usize,
}

/// Runs the CLI on `args` (program name first). Errors are reported on
/// stderr and turned into exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NotChordal { node, a, b } = &e {
                eprintln!("witness: {{\"node\": \"{node}\", \"a\": \"{a}\", \"b\": \"{b}\"}}");
            }
            e.exit_code()
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve {
            input,
            algo,
            constraints,
            output,
            exact_cap,
        } => {
            let inst = load_instance(&input)?;
            let rec = solve(&inst, algo, constraints, exact_cap)?;
            emit(output.as_deref(), &rec.to_json())?;
            Ok(0)
        }
        Command::Order {
            input,
            method,
            output,
            exact_cap,
        } => {
            let inst = load_instance(&input)?;
            let out = order(&inst, method, exact_cap)?;
            match output {
                Some(p) => save_instance(&out, p)?,
                None => emit(None, &out.to_json())?,
            }
            Ok(0)
        }
        Command::Gen(args) => {
            let inst = generate(&args)?;
            match &args.output {
                Some(p) => save_instance(&inst, p)?,
                None => emit(None, &inst.to_json())?,
            }
            Ok(0)
        }
        Command::Verify {
            input,
            oracle_cap,
            threads,
            timings,
        } => {
            let opts = VerifyOptions { oracle_cap, timings };
            let reports = verify_path(&input, &opts, threads)?;
            let mut out = String::new();
            for r in &reports {
                out.push_str(&r.to_json_line());
                out.push('\n');
            }
            emit(None, &out)?;
            Ok(if reports.iter().all(|r| r.passed) { 0 } else { 5 })
        }
        Command::Bench {
            family,
            sizes,
            seed,
            repeats,
        } => {
            let fam = BenchFamily::parse(&family).ok_or_else(|| {
                Error::validation("--family", format!("unknown bench family {family}"))
            })?;
            let summary = run_bench(fam, &sizes, seed, repeats)?;
            let mut out = String::new();
            for row in &summary.rows {
                out.push_str(&serde_json::to_string(row).expect("row serializes"));
                out.push('\n');
            }
            for v in &summary.verdicts {
                out.push_str(&serde_json::to_string(v).expect("verdict serializes"));
                out.push('\n');
            }
            emit(None, &out)?;
            Ok(if summary.passed { 0 } else { 5 })
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Solves `inst` with the chosen algorithm and attaches the β bound and
/// ratio claim the solve is entitled to.
pub fn solve(
    inst: &Instance,
    algo: Algo,
    mode: ConstraintMode,
    exact_cap: Option<usize>,
) -> Result<SolutionRecord> {
    let prep = inst.prepare()?;
    let g = &prep.graph;
    let cs = match mode {
        ConstraintMode::Auto => inst.constraints.as_ref(),
        ConstraintMode::Ignore => None,
    };
    let beta = match prep.beta {
        Some(b) => Some((b.bound, b.method)),
        None => match beta_exact(g, DEFAULT_BETA_CAP) {
            Ok(r) => Some((r.beta_graph, BetaMethod::ExactBruteforce)),
            Err(Error::Capacity { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    let constraint_claim = match cs {
        Some(cs) => Some((cs.kind, cs.resolve(g)?.overlap())),
        None => None,
    };
    let claim = |sol: Solution| match beta {
        Some((b, method)) => {
            let ratio = claimed_ratio(b, constraint_claim);
            sol.with_claim(b, method, ratio)
        }
        None => sol,
    };
    let sol = match (algo, cs) {
        (Algo::Opcost, None) => claim(opcost(g)?.0),
        (Algo::Lropcost, None) => claim(lropcost(g)?),
        (Algo::Greedy, None) => greedy(g, &prep.ordering)?,
        (Algo::Exact, None) => {
            exact_mwis(g, exact_cap.unwrap_or(DEFAULT_EXACT_CAP))?.exact_claim()
        }
        (Algo::Opcost, Some(cs)) => claim(match cs.kind {
            ConstraintKind::Unweighted => solve_unweighted(g, cs)?.0,
            ConstraintKind::Overlapping => solve_overlapping(g, cs)?,
            ConstraintKind::Weighted => solve_weighted(g, cs)?,
        }),
        (Algo::Lropcost, Some(cs)) => claim(lropcost_group_slow(g, cs)?),
        (Algo::Greedy, Some(_)) => {
            return Err(Error::validation(
                "--algo",
                "greedy ignores constraints; pass --constraints ignore",
            ))
        }
        (Algo::Exact, Some(cs)) => {
            exact_feasible(g, cs, exact_cap.unwrap_or(DEFAULT_FEASIBLE_CAP))?.exact_claim()
        }
    };
    Ok(SolutionRecord::new(&sol, g, &inst.metadata))
}

trait ExactClaim {
    fn exact_claim(self) -> Self;
}

impl ExactClaim for Solution {
    fn exact_claim(mut self) -> Self {
        self.certificate.claimed_ratio = Some(Ratio::from_integer(1));
        self
    }
}

/// Copy of `inst` carrying the explicit form of the requested ordering.
pub fn order(inst: &Instance, method: OrderMethod, exact_cap: usize) -> Result<Instance> {
    let spec = match method {
        OrderMethod::Chordal => OrderingSpec::Chordal,
        OrderMethod::TreeDecomposition => OrderingSpec::TreeDecomposition {
            tree_decomposition: None,
        },
        OrderMethod::DecreasingWeight => OrderingSpec::DecreasingWeight,
        OrderMethod::PlantedOptimal => {
            let g = inst.graph()?;
            let best = exact_mwis(&g, exact_cap)?;
            OrderingSpec::PlantedOptimal {
                independent_set: best.selected_ids(&g).into_iter().map(String::from).collect(),
            }
        }
    };
    let prep = inst.prepare_with(&spec)?;
    Ok(inst.with_explicit_ordering(&prep))
}

pub fn generate(a: &GenArgs) -> Result<Instance> {
    let weights = match a.weights[..] {
        [lo, hi] if 0 < lo && lo <= hi => (lo, hi),
        _ => return Err(Error::validation("--weights", "expected lo,hi with 0 < lo <= hi")),
    };
    Ok(match a.family {
        Family::Interval => gen_interval(a.n, weights, a.seed),
        Family::IntervalSelection => gen_interval_selection(a.groups, a.per_group, a.seed),
        Family::Subtrees => gen_subtrees(a.objects, a.n, a.seed),
        Family::Grid => {
            if a.dims.is_empty() || a.dims.contains(&0) {
                return Err(Error::validation("--dims", "side lengths must be positive"));
            }
            gen_grid(&a.dims, a.density.min(1000), weights, a.seed)
        }
        Family::Tight => {
            if a.beta == 0 || !(0..1000).contains(&a.epsilon) {
                return Err(Error::validation(
                    "--beta",
                    "need beta >= 1 and 0 <= epsilon < 1000",
                ));
            }
            gen_tight(a.beta, a.epsilon, a.seed)
        }
        Family::Budget => {
            let base = gen_interval(a.n, weights, a.seed);
            let params = BudgetParams {
                kind: a.kind.into(),
                groups: a.groups,
                max_k: a.max_k.max(1),
                overlap: a.overlap.max(1),
                all_heavy: a.all_heavy,
            };
            gen_budget(base, params, a.seed)
        }
        Family::Treedec => gen_treedec(a.objects, a.extra_edges, a.n, a.max_bid_size.max(1), a.seed),
    })
}

/// Instance files under `input` (the file itself, or `*.json` files in the
/// directory that are not solution companions), sorted by name.
fn instance_files(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let entries = std::fs::read_dir(input).map_err(|e| Error::io(input, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(input, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if path.is_file() && name.ends_with(".json") && !name.ends_with(".solution.json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn companion(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    path.with_file_name(format!("{stem}.solution.json"))
}

fn verify_file(path: &Path, opts: &VerifyOptions) -> RunReport {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("?")
        .to_string();
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err(e) => return RunReport::failed_load(&name, &e),
    };
    let mut report = verify_instance(&name, &inst, opts);
    let sol_path = companion(path);
    if sol_path.is_file() {
        let checks = match load_solution(&sol_path) {
            Ok(rec) => verify_solution(&inst, &rec, opts),
            Err(e) => vec![crate::report::Check::new("solution-load", false, e.to_string())],
        };
        attach_solution_checks(&mut report, checks);
    }
    report
}

/// Verifies every instance under `input` on up to `threads` threads.
/// Reports come back in file-name order whatever the thread count.
pub fn verify_path(input: &Path, opts: &VerifyOptions, threads: usize) -> Result<Vec<RunReport>> {
    let files = instance_files(input)?;
    let threads = threads.clamp(1, files.len().max(1));
    let mut slots: Vec<Option<RunReport>> = vec![None; files.len()];
    let chunk = files.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        for (paths, out) in files.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            s.spawn(move || {
                for (p, slot) in paths.iter().zip(out.iter_mut()) {
                    *slot = Some(verify_file(p, opts));
                }
            });
        }
    });
    Ok(slots.into_iter().map(|r| r.expect("every slot filled")).collect())
}
