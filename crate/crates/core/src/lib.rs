//! Statistical analysis of directed, weighted legislative interaction
//! networks.
//!
//! The crate is organised as a pipeline of independent stages that all share
//! the immutable [`graph::Graph`]:
//!
//! * [`graph`] loads and validates the edge list and node attributes and
//!   provides connectivity primitives.
//! * [`topology`] computes centralities, density-type statistics, triads,
//!   maximal cliques and assortativity.
//! * [`ergm`] specifies, simulates and estimates exponential random graph
//!   models (exact dyad likelihood, pseudolikelihood and Monte-Carlo MLE).
//! * [`sbm`] fits directed Bernoulli stochastic block models by variational
//!   EM and selects the number of blocks by ICL.
//! * [`partition`] scores agreement between two node partitions.
//! * [`pipeline`] binds the stages into the batch runner used by the CLI.

pub mod ergm;
pub mod graph;
pub mod partition;
pub mod pipeline;
pub mod sbm;
pub mod topology;

mod numeric;

pub use graph::{AttributeTable, BinaryAdjacency, Graph};
pub use partition::Partition;
