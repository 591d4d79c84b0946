//! Instance files, solution records and generators.
//!
//! Files are JSON tagged `"format": "auctol/1"`. They are written in a
//! canonical form (sorted keys, sorted id lists, two-space indentation,
//! trailing newline), so saving a loaded canonical file reproduces it byte
//! for byte.

mod generators;
mod rng;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::budgets::ConstraintSet;
use crate::error::{Error, Result};
use crate::graph::{
    beta_bound_frontier, build_bid_graph, validate_germane, BetaMethod, Bid, BidGraph,
    ObjectGraph, Ordering, Provenance,
};
use crate::orderings::{
    decreasing_weight_ordering, frontier_violation, peo_violation, grid_dimension_bound, grid_ordering,
    lexbfs_peo, min_degree_heuristic_decomposition, planted_optimal_ordering,
    tree_decomposition_ordering, TreeDecomposition,
};
use crate::solvers::{Algorithm, Arithmetic, Certificate, Solution};

pub use generators::{
    gen_budget, gen_grid, gen_interval, gen_interval_selection, gen_subtrees, gen_tight,
    gen_treedec, BudgetParams,
};
pub use rng::StageRng;

pub const FORMAT: &str = "auctol/1";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub family: String,
    #[serde(default)]
    pub description: String,
}

/// How to orient the bid graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum OrderingSpec {
    /// Perfect elimination ordering found by Lex-BFS.
    Chordal,
    /// Frontier ordering from a tree decomposition of the object graph; the
    /// min-degree heuristic is used when none is embedded.
    TreeDecomposition {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree_decomposition: Option<TreeDecomposition>,
    },
    /// Grid point of every bid, keyed by bid id.
    Grid { coords: BTreeMap<String, Vec<i64>> },
    DecreasingWeight,
    /// Bid ids in processing order, optionally with frontier sets keyed by
    /// bid id and a β claim that is re-checked on load: a
    /// `perfect-elimination` claim by the clique test, a `frontier-bound`
    /// claim against the frontier sets.
    Explicit {
        permutation: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frontier_sets: Option<BTreeMap<String, Vec<String>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_bound: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_method: Option<BetaMethod>,
    },
    PlantedOptimal { independent_set: Vec<String> },
}

impl OrderingSpec {
    pub fn method(&self) -> &'static str {
        self.provenance().as_str()
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            OrderingSpec::Chordal => Provenance::Chordal,
            OrderingSpec::TreeDecomposition { .. } => Provenance::TreeDecomposition,
            OrderingSpec::Grid { .. } => Provenance::Grid,
            OrderingSpec::DecreasingWeight => Provenance::DecreasingWeight,
            OrderingSpec::Explicit { .. } => Provenance::Explicit,
            OrderingSpec::PlantedOptimal { .. } => Provenance::PlantedOptimal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub format: String,
    #[serde(default)]
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objects: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_edges: Option<Vec<(String, String)>>,
    pub bids: Vec<Bid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<OrderingSpec>,
}

/// A β upper bound and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BetaCertificate {
    pub bound: usize,
    pub method: BetaMethod,
}

/// An instance turned into an oriented bid graph.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub graph: BidGraph,
    pub ordering: Ordering,
    /// Present when the ordering certifies a β bound by construction.
    pub beta: Option<BetaCertificate>,
}

/// Prefixes relative locators with `/` so they read as JSON pointers.
fn pointer(e: Error) -> Error {
    match e {
        Error::Validation { path, message } if !path.starts_with('/') => Error::Validation {
            path: format!("/{path}"),
            message,
        },
        other => other,
    }
}

impl Instance {
    pub fn new(metadata: Metadata, bids: Vec<Bid>) -> Self {
        Instance {
            format: FORMAT.to_string(),
            metadata,
            objects: None,
            object_edges: None,
            bids,
            constraints: None,
            ordering: None,
        }
    }

    /// Sorts every list whose order carries no meaning.
    pub fn canonicalize(&mut self) {
        if let Some(objects) = &mut self.objects {
            objects.sort();
        }
        if let Some(edges) = &mut self.object_edges {
            for (a, b) in edges.iter_mut() {
                if a > b {
                    std::mem::swap(a, b);
                }
            }
            edges.sort();
        }
        for bid in &mut self.bids {
            bid.objects.sort();
            bid.objects.dedup();
        }
        self.bids.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(cs) = &mut self.constraints {
            cs.canonicalize();
        }
        match &mut self.ordering {
            Some(OrderingSpec::TreeDecomposition {
                tree_decomposition: Some(td),
            }) => td.canonicalize(),
            Some(OrderingSpec::Explicit {
                frontier_sets: Some(sets),
                ..
            }) => {
                for set in sets.values_mut() {
                    set.sort();
                    set.dedup();
                }
            }
            Some(OrderingSpec::PlantedOptimal { independent_set }) => independent_set.sort(),
            _ => {}
        }
    }

    /// Canonical JSON text.
    pub fn to_json(&self) -> String {
        let mut copy = self.clone();
        copy.canonicalize();
        canonical_json(&copy)
    }

    /// Parses, canonicalizes and validates.
    pub fn from_json(text: &str) -> Result<Instance> {
        let mut inst: Instance = parse_json(text)?;
        inst.canonicalize();
        inst.validate()?;
        Ok(inst)
    }

    pub fn object_graph(&self) -> Result<Option<ObjectGraph>> {
        match (&self.objects, &self.object_edges) {
            (None, None) => Ok(None),
            (objects, edges) => {
                let objects = objects.as_deref().unwrap_or(&[]);
                let edges = edges.as_deref().unwrap_or(&[]);
                let edges: Vec<(&str, &str)> =
                    edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                let objects: Vec<&str> = objects.iter().map(String::as_str).collect();
                ObjectGraph::new(&objects, &edges).map(Some).map_err(pointer)
            }
        }
    }

    /// Unoriented conflict graph; node `i` is `bids[i]`.
    pub fn graph(&self) -> Result<BidGraph> {
        build_bid_graph(&self.bids).map_err(pointer)
    }

    /// Checks ids, prices, object references, bid connectivity, constraint
    /// shape and the ordering parameters. Error paths are JSON pointers.
    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT {
            return Err(Error::validation(
                "/format",
                format!("expected {FORMAT}, found {}", self.format),
            ));
        }
        let mut ids = HashSet::new();
        for (i, bid) in self.bids.iter().enumerate() {
            if !ids.insert(bid.id.as_str()) {
                return Err(Error::validation(
                    format!("/bids/{i}/id"),
                    format!("duplicate bid id {}", bid.id),
                ));
            }
            if bid.objects.is_empty() {
                return Err(Error::validation(
                    format!("/bids/{i}/objects"),
                    format!("bid {} has no objects", bid.id),
                ));
            }
            if bid.price < 0 {
                return Err(Error::validation(
                    format!("/bids/{i}/price"),
                    format!("bid {} has negative price {}", bid.id, bid.price),
                ));
            }
        }
        if let Some(og) = self.object_graph()? {
            let loose = validate_germane(&og, &self.bids).map_err(pointer)?;
            if let Some(id) = loose.first() {
                let i = self.bids.iter().position(|b| &b.id == id).expect("known id");
                return Err(Error::validation(
                    format!("/bids/{i}/objects"),
                    format!("objects of bid {id} are not connected in the object graph"),
                ));
            }
        }
        let g = self.graph()?;
        if let Some(cs) = &self.constraints {
            cs.resolve(&g).map_err(pointer)?;
        }
        if let Some(spec) = &self.ordering {
            self.check_spec_ids(spec, &g)?;
        }
        Ok(())
    }

    fn check_spec_ids(&self, spec: &OrderingSpec, g: &BidGraph) -> Result<()> {
        let lookup = |at: String, id: &str| {
            g.index_of(id)
                .ok_or_else(|| Error::validation(at, format!("unknown bid {id}")))
        };
        match spec {
            OrderingSpec::Grid { coords } => {
                for id in coords.keys() {
                    lookup(format!("/ordering/coords/{id}"), id)?;
                }
                if let Some(id) = g.ids().iter().find(|id| !coords.contains_key(*id)) {
                    return Err(Error::validation(
                        "/ordering/coords",
                        format!("bid {id} has no coordinates"),
                    ));
                }
            }
            OrderingSpec::Explicit {
                permutation,
                frontier_sets,
                ..
            } => {
                let mut seen = vec![false; g.len()];
                for (i, id) in permutation.iter().enumerate() {
                    let v = lookup(format!("/ordering/permutation/{i}"), id)?;
                    if std::mem::replace(&mut seen[v], true) {
                        return Err(Error::validation(
                            format!("/ordering/permutation/{i}"),
                            format!("bid {id} repeated"),
                        ));
                    }
                }
                if permutation.len() != g.len() {
                    return Err(Error::validation(
                        "/ordering/permutation",
                        format!("{} of {} bids listed", permutation.len(), g.len()),
                    ));
                }
                if let Some(sets) = frontier_sets {
                    for id in sets.keys() {
                        lookup(format!("/ordering/frontier_sets/{id}"), id)?;
                    }
                }
            }
            OrderingSpec::PlantedOptimal { independent_set } => {
                for (i, id) in independent_set.iter().enumerate() {
                    lookup(format!("/ordering/independent_set/{i}"), id)?;
                }
            }
            OrderingSpec::TreeDecomposition { .. } => {
                if self.objects.is_none() {
                    return Err(Error::validation(
                        "/ordering",
                        "tree-decomposition ordering needs an object graph",
                    ));
                }
            }
            OrderingSpec::Chordal | OrderingSpec::DecreasingWeight => {}
        }
        Ok(())
    }

    /// Builds the bid graph and orients it as the ordering spec says.
    pub fn prepare(&self) -> Result<Prepared> {
        let spec = self.ordering.as_ref().ok_or_else(|| {
            Error::validation("/ordering", "instance declares no ordering")
        })?;
        self.prepare_with(spec)
    }

    pub fn prepare_with(&self, spec: &OrderingSpec) -> Result<Prepared> {
        let g = self.graph()?;
        self.check_spec_ids(spec, &g)?;
        let (ordering, beta) = match spec {
            OrderingSpec::Chordal => (
                lexbfs_peo(&g)?,
                Some(BetaCertificate {
                    bound: 1,
                    method: BetaMethod::PerfectElimination,
                }),
            ),
            OrderingSpec::TreeDecomposition { tree_decomposition } => {
                let og = self.object_graph()?.expect("checked above");
                let heuristic;
                let td = match tree_decomposition {
                    Some(td) => td,
                    None => {
                        heuristic = min_degree_heuristic_decomposition(&og);
                        &heuristic
                    }
                };
                let ord = tree_decomposition_ordering(&og, td, &self.bids).map_err(pointer)?;
                let bound = beta_bound_frontier(&ord)?;
                (
                    ord,
                    Some(BetaCertificate {
                        bound,
                        method: BetaMethod::FrontierBound,
                    }),
                )
            }
            OrderingSpec::Grid { coords } => {
                let points: Vec<Vec<i64>> = g.ids().iter().map(|id| coords[id].clone()).collect();
                let ord = grid_ordering(&points).map_err(|e| match e {
                    Error::Validation { message, .. } => {
                        Error::validation("/ordering/coords", message)
                    }
                    other => other,
                })?;
                let beta = grid_dimension_bound(&g, &points).map(|bound| BetaCertificate {
                    bound,
                    method: BetaMethod::GridDimension,
                });
                (ord, beta)
            }
            OrderingSpec::DecreasingWeight => (decreasing_weight_ordering(&g), None),
            OrderingSpec::Explicit {
                permutation,
                frontier_sets,
                beta_bound,
                beta_method,
            } => {
                let perm = permutation
                    .iter()
                    .map(|id| g.index_of(id).expect("checked above"))
                    .collect();
                let mut ord = Ordering::new(perm, Provenance::Explicit).map_err(pointer)?;
                if let Some(sets) = frontier_sets {
                    let per_node = g
                        .ids()
                        .iter()
                        .map(|id| sets.get(id).cloned().unwrap_or_default())
                        .collect();
                    ord = ord.with_frontier_sets(per_node)?;
                    if let Some((a, b)) = frontier_violation(&self.bids, &ord) {
                        return Err(Error::validation(
                            "/ordering/frontier_sets",
                            format!(
                                "bid {} meets earlier bid {} but misses its frontier set",
                                g.id(b),
                                g.id(a)
                            ),
                        ));
                    }
                }
                let beta = explicit_claim(&g, &ord, *beta_bound, *beta_method)?;
                (ord, beta)
            }
            OrderingSpec::PlantedOptimal { independent_set } => {
                let set: Vec<usize> = independent_set
                    .iter()
                    .map(|id| g.index_of(id).expect("checked above"))
                    .collect();
                (planted_optimal_ordering(&g, &set).map_err(|e| match e {
                    Error::Validation { message, .. } => {
                        Error::validation("/ordering/independent_set", message)
                    }
                    other => other,
                })?, None)
            }
        };
        let graph = g.with_orientation(&ordering)?;
        Ok(Prepared {
            graph,
            ordering,
            beta,
        })
    }

    /// Copy of this instance whose ordering is the explicit form of `prep`,
    /// frontier sets included.
    pub fn with_explicit_ordering(&self, prep: &Prepared) -> Instance {
        let g = &prep.graph;
        let permutation = prep
            .ordering
            .permutation()
            .iter()
            .map(|&v| g.id(v).to_string())
            .collect();
        let frontier_sets = prep.ordering.frontier_sets().map(|sets| {
            sets.iter()
                .enumerate()
                .map(|(v, s)| (g.id(v).to_string(), s.clone()))
                .collect()
        });
        let checkable = prep.beta.filter(|b| {
            matches!(b.method, BetaMethod::PerfectElimination | BetaMethod::FrontierBound)
        });
        let mut out = self.clone();
        out.ordering = Some(OrderingSpec::Explicit {
            permutation,
            frontier_sets,
            beta_bound: checkable.map(|b| b.bound),
            beta_method: checkable.map(|b| b.method),
        });
        out.canonicalize();
        out
    }
}

/// Certificate for an explicit ordering: the stated claim after checking
/// it, or the frontier bound when only frontier sets are given.
fn explicit_claim(
    g: &BidGraph,
    ord: &Ordering,
    bound: Option<usize>,
    method: Option<BetaMethod>,
) -> Result<Option<BetaCertificate>> {
    let refuse = |msg: String| Err(Error::validation("/ordering/beta_bound", msg));
    match (bound, method) {
        (None, None) => Ok(ord
            .frontier_sets()
            .map(|_| BetaCertificate {
                bound: beta_bound_frontier(ord).expect("frontier sets present"),
                method: BetaMethod::FrontierBound,
            })),
        (Some(bound), Some(BetaMethod::PerfectElimination)) => {
            if let Some((v, a, b)) = peo_violation(g, ord) {
                return refuse(format!(
                    "later neighbours {} and {} of {} are not adjacent",
                    g.id(a),
                    g.id(b),
                    g.id(v)
                ));
            }
            Ok(Some(BetaCertificate {
                bound: bound.max(1),
                method: BetaMethod::PerfectElimination,
            }))
        }
        (Some(bound), Some(BetaMethod::FrontierBound)) => {
            if ord.frontier_sets().is_none() {
                return refuse("frontier-bound claim without frontier sets".into());
            }
            let computed = beta_bound_frontier(ord)?;
            if bound < computed {
                return refuse(format!("claimed {bound} but frontier sets give {computed}"));
            }
            Ok(Some(BetaCertificate {
                bound,
                method: BetaMethod::FrontierBound,
            }))
        }
        (Some(_), Some(other)) => refuse(format!(
            "{} claims cannot be checked from an explicit ordering",
            other.as_str()
        )),
        _ => refuse("beta_bound and beta_method go together".into()),
    }
}

fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered, so going through a Value sorts
    // every object's keys.
    let tree = serde_json::to_value(value).expect("plain data serializes");
    let mut text = serde_json::to_string_pretty(&tree).expect("value serializes");
    text.push('\n');
    text
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = String::new();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => path.push_str(&format!("/{index}")),
                Segment::Map { key } => path.push_str(&format!("/{key}")),
                Segment::Enum { variant } => path.push_str(&format!("/{variant}")),
                Segment::Unknown => path.push_str("/?"),
            }
        }
        if path.is_empty() {
            path.push('/');
        }
        Error::validation(path, e.into_inner().to_string())
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    Instance::from_json(&read(path.as_ref())?)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &inst.to_json())
}

/// On-disk form of a [`Solution`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    pub format: String,
    pub instance: Metadata,
    pub selected: Vec<String>,
    pub revenue: i64,
    pub certificate: CertificateRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_method: Option<BetaMethod>,
    /// `"p"` or `"p/q"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_ratio: Option<String>,
    pub arithmetic: String,
}

impl SolutionRecord {
    pub fn new(sol: &Solution, g: &BidGraph, instance: &Metadata) -> Self {
        let c = &sol.certificate;
        SolutionRecord {
            format: FORMAT.to_string(),
            instance: instance.clone(),
            selected: sol.selected_ids(g).into_iter().map(String::from).collect(),
            revenue: sol.revenue,
            certificate: CertificateRecord {
                algorithm: c.algorithm.as_str().to_string(),
                ordering: c.ordering,
                beta_bound: c.beta_bound,
                beta_method: c.beta_method,
                claimed_ratio: c.claimed_ratio.map(|r| r.to_string()),
                arithmetic: c.arithmetic.as_str().to_string(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut copy = self.clone();
        copy.selected.sort();
        canonical_json(&copy)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: SolutionRecord = parse_json(text)?;
        if rec.format != FORMAT {
            return Err(Error::validation(
                "/format",
                format!("expected {FORMAT}, found {}", rec.format),
            ));
        }
        Ok(rec)
    }

    /// Resolves ids against `g`. The stored revenue must match the selected
    /// bids' prices.
    pub fn to_solution(&self, g: &BidGraph) -> Result<Solution> {
        let mut selected = Vec::with_capacity(self.selected.len());
        for (i, id) in self.selected.iter().enumerate() {
            let v = g.index_of(id).ok_or_else(|| {
                Error::validation(format!("/selected/{i}"), format!("unknown bid {id}"))
            })?;
            selected.push(v);
        }
        let c = &self.certificate;
        let algorithm = Algorithm::parse(&c.algorithm).ok_or_else(|| {
            Error::validation("/certificate/algorithm", format!("unknown algorithm {}", c.algorithm))
        })?;
        let arithmetic = [Arithmetic::Integer, Arithmetic::ExactRational, Arithmetic::Float]
            .into_iter()
            .find(|a| a.as_str() == c.arithmetic)
            .ok_or_else(|| {
                Error::validation("/certificate/arithmetic", format!("unknown arithmetic {}", c.arithmetic))
            })?;
        let claimed_ratio = c
            .claimed_ratio
            .as_deref()
            .map(|s| {
                s.parse::<Ratio<i64>>().map_err(|_| {
                    Error::validation("/certificate/claimed_ratio", format!("bad ratio {s}"))
                })
            })
            .transpose()?;
        let mut sol = Solution::new(g, selected, algorithm);
        if sol.revenue != self.revenue {
            return Err(Error::Violation(format!(
                "recorded revenue {} but selected bids sum to {}",
                self.revenue, sol.revenue
            )));
        }
        sol.certificate = Certificate {
            algorithm,
            ordering: c.ordering,
            beta_bound: c.beta_bound,
            beta_method: c.beta_method,
            claimed_ratio,
            arithmetic,
        };
        Ok(sol)
    }
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SolutionRecord> {
    SolutionRecord::from_json(&read(path.as_ref())?)
}

pub fn save_solution(rec: &SolutionRecord, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &rec.to_json())
}
