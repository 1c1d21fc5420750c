//! Preflow-based stable flow solvers.
//!
//! Both solvers share [`SolverState`]: the current preflow plus the active
//! out-edge and critical in-edge of every internal vertex, the set of edges
//! closed for further increase, and event counters. The basic solver runs
//! balancing and pushing phases in FIFO order; the fast solver groups the
//! same elementary moves into big iterations over a constant auxiliary graph.

mod basic;
mod fast;
mod state;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::flow::FlowAssignment;
use crate::network::{EdgeId, Network, VertexId};

pub use basic::{run_basic, run_basic_with};
pub use fast::{cancel_cycle, run_fast, run_fast_with, BigIterationOutcome, FastSolver, ProperWalk, WalkStep};
pub use state::{GammaGraph, GammaSide, SolverState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("iteration guard exceeded after {updates} flow updates (guard {guard})")]
    IterationGuardExceeded { updates: u64, guard: u64 },
    #[error("vertex {0} has positive excess but no positive in-edge")]
    NoPositiveInEdge(VertexId),
    #[error("edge {0} is a middle edge that is neither active nor critical, or both")]
    PartitionViolation(EdgeId),
    #[error("proper cycle admits no positive shift")]
    DegenerateCycle,
    #[error("walk is not a proper cycle: {0}")]
    NotAProperCycle(String),
    #[error("invariant {rule} violated: {detail}")]
    Invariant { rule: &'static str, detail: String },
}

/// Which part of an algorithm performed an elementary update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Initial,
    Balance,
    Push,
    Cycle,
    Tree,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Initial => "initial",
            Phase::Balance => "balance",
            Phase::Push => "push",
            Phase::Cycle => "cycle",
            Phase::Tree => "tree",
        })
    }
}

/// One elementary flow update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub edge: EdgeId,
    pub delta: i64,
    pub phase: Phase,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+} {}", self.edge, self.delta, self.phase)
    }
}

/// Counters reported by `--stats`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub big_iterations: u64,
    pub updates_total: u64,
    pub updates_max_per_big_iteration: u64,
    pub s_events: u64,
    pub f_events: u64,
    pub m_events: u64,
    #[serde(skip)]
    pub fallback_steps: u64,
    #[serde(skip)]
    pub cycles_cancelled: u64,
    #[serde(skip)]
    pub trees_drained: u64,
}

/// Per-edge event counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeEvents {
    pub saturations: u32,
    pub freeings: u32,
    pub gamma_additions: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Record every elementary update.
    pub trace: bool,
}

/// Which preflow solver to run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Basic,
    #[default]
    Fast,
}

impl SolverKind {
    pub fn run(self, net: &Network, options: &SolveOptions) -> Result<Solution, SolverError> {
        match self {
            SolverKind::Basic => run_basic_with(net, options),
            SolverKind::Fast => run_fast_with(net, options),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub flow: FlowAssignment,
    pub stats: RunStats,
    pub edge_events: Vec<EdgeEvents>,
    /// Elementary updates of each big iteration (fast solver only).
    pub big_iteration_updates: Vec<u64>,
    /// Empty unless tracing was requested.
    pub trace: Vec<TraceStep>,
}
