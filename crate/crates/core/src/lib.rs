//! Budget-constrained discrete transport network design.
//!
//! The crate is `no_std` and only needs an allocator. It contains the pure
//! numerical side of the problem:
//!
//! - [`network`] and [`geo`]: the road graph, candidate edges, demand matrices.
//! - [`centrality`]: edge betweenness (Brandes, hop or distance weighted).
//! - [`assignment`]: user-equilibrium traffic assignment with Frank-Wolfe.
//! - [`design`]: the upper-level objective and the counted, memoized evaluator.
//! - [`solvers`]: greedy, GA, tabu, annealing, binary PSO, ACO and the
//!   greedy-seeded hybrids.
//! - [`stats`]: stability score, n-fold ratios, Mann-Whitney U, correlations.
//!
//! File formats, the command line and parallel batch execution live in the
//! `tndp` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assignment;
pub mod centrality;
pub mod design;
pub mod error;
pub mod geo;
pub mod network;
pub mod solvers;
pub mod stats;

pub use assignment::{AssignmentConfig, AssignmentResult};
pub use centrality::{BetweennessScores, Weighting};
pub use design::{
    DesignConfig, DesignProblem, DesignVector, EvalObserver, Evaluator, EvaluatorState, Lambda, ObjectiveValue,
};
pub use solvers::{solve, SolverConfig, SolverKind, SolverResult};

pub use error::{AssignmentError, DesignError, NetworkError, StatsError};
pub use network::{CandidateSet, Edge, EdgeKey, Node, OdMatrix, RoadNetwork};
