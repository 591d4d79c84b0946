//! Winner determination for combinatorial auctions.
//!
//! Bids conflict when they share an object. Given an orientation of the
//! conflict graph, the opportunity-cost algorithm ([`solvers::opcost`]) and
//! its local-ratio twin ([`solvers::lropcost`]) pick an independent set whose
//! revenue is within a factor β of the optimum, where β is the largest
//! independent set among any bid and its successors. [`orderings`] builds
//! orientations with small β, [`budgets`] adds per-bidder limits and
//! [`instances`] handles files and generators.

pub mod bench;
pub mod budgets;
pub mod cli;
pub mod error;
pub mod graph;
pub mod instances;
pub mod orderings;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
