//! k-out random subgraphs of the n-dimensional hypercube.
//!
//! Every vertex of the n-cube independently picks k distinct incident edges
//! uniformly at random; the sampled graph is the union of all picks with
//! orientation forgotten. This crate provides:
//!
//! * [`hypercube`] — exact combinatorics of the cube itself: bitmask
//!   adjacency, parity classes, subcubes, boundary edge counts and the
//!   edge-isoperimetric lower bound.
//! * [`sampler`] — reproducible generation of k-out samples, the 1-out
//!   functional map, parity-staged extensions and the three-phase staged
//!   build, all driven by derived splittable streams.
//! * [`structure`] — connected components, the functional digraph's
//!   cycle/tail census, trajectory views and a connected-set counting oracle.
//! * [`walk`] — the biased comparison walk on {0,..,n}: Monte Carlo
//!   simulation and an exact dynamic program over the chain.
//! * [`connectivity`] — connectivity and vertex-connectivity checks, degree
//!   census, cut censuses, active-set computation, and subcube component
//!   detection with a planted-instance generator.
//! * [`experiments`] — a seeded Monte Carlo trial runner with deterministic
//!   parallelism, summary statistics and machine-readable output.

pub mod connectivity;
mod error;
pub mod experiments;
pub mod hypercube;
pub mod sampler;
pub mod structure;
pub mod walk;

pub use error::{Error, Result};
