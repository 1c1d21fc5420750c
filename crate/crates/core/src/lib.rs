//! Stable flows in networks where every vertex ranks its incoming and
//! outgoing edges.
//!
//! The crate provides the network model, a stability verifier, two preflow
//! solvers, reductions for quasiflows with bounded excess, lattice operations
//! on stable flows and a brute-force oracle for tiny instances.

pub mod flow;
pub mod io;
pub mod lattice;
pub mod network;
pub mod oracle;
pub mod quasi;
pub mod solver;
pub mod stability;

pub use flow::{classify, value_of, FlowAssignment, FlowClass};
pub use io::{format_flow, format_instance, parse_flow, parse_instance, Instance, ParseError};
pub use network::{
    build_network, random_instance, Edge, EdgeId, GeneratorParams, Network, NetworkError, NetworkSpec, Side, VertexId,
    VertexKind,
};
pub use quasi::{BoundsSpec, QuasiMode};
pub use solver::{run_basic, run_fast, RunStats, Solution, SolveOptions, SolverError, SolverKind, SolverState};
pub use stability::{find_witness, is_stable, StabilityMode, StabilityWitness};
