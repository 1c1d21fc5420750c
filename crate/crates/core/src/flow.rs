//! Edge assignments, excesses and their classification into preflows and
//! flows.

use std::fmt;
use std::str::FromStr;

use crate::network::{EdgeId, Network, VertexId};

/// Per-edge integer values together with an excess table kept in sync on
/// every update.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowAssignment {
    values: Vec<i64>,
    excess: Vec<i64>,
}

impl FlowAssignment {
    pub fn zero(net: &Network) -> Self {
        FlowAssignment {
            values: vec![0; net.n_edges()],
            excess: vec![0; net.n_vertices()],
        }
    }

    /// # Panics
    /// If `values` does not have one entry per edge.
    pub fn from_values(net: &Network, values: Vec<i64>) -> Self {
        assert_eq!(values.len(), net.n_edges(), "assignment must cover every edge");
        let excess = compute_excesses(net, &values);
        FlowAssignment { values, excess }
    }

    pub fn value(&self, e: EdgeId) -> i64 {
        self.values[e]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }

    pub fn excess(&self, v: VertexId) -> i64 {
        self.excess[v]
    }

    pub fn excesses(&self) -> &[i64] {
        &self.excess
    }

    /// Adds `delta` to edge `e`, adjusting the two endpoint excesses.
    pub fn add(&mut self, net: &Network, e: EdgeId, delta: i64) {
        self.values[e] += delta;
        self.excess[net.head(e)] += delta;
        self.excess[net.tail(e)] -= delta;
    }

    pub fn set(&mut self, net: &Network, e: EdgeId, value: i64) {
        let delta = value - self.values[e];
        self.add(net, e, delta);
    }

    /// Whether the cached excess table equals a from-scratch recomputation.
    pub fn excess_consistent(&self, net: &Network) -> bool {
        compute_excesses(net, &self.values) == self.excess
    }

    pub fn is_saturated(&self, net: &Network, e: EdgeId) -> bool {
        self.values[e] == net.capacity(e)
    }

    pub fn is_free(&self, e: EdgeId) -> bool {
        self.values[e] == 0
    }

    /// Strictly between zero and capacity.
    pub fn is_middle(&self, net: &Network, e: EdgeId) -> bool {
        self.values[e] > 0 && self.values[e] < net.capacity(e)
    }

    pub fn residual(&self, net: &Network, e: EdgeId) -> i64 {
        net.capacity(e) - self.values[e]
    }
}

/// Inflow minus outflow at every vertex.
pub fn compute_excesses(net: &Network, values: &[i64]) -> Vec<i64> {
    let mut excess = vec![0; net.n_vertices()];
    for (e, &x) in values.iter().enumerate() {
        excess[net.head(e)] += x;
        excess[net.tail(e)] -= x;
    }
    excess
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowClass {
    Infeasible,
    FeasibleOnly,
    Preflow,
    Flow,
}

impl fmt::Display for FlowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowClass::Infeasible => "Infeasible",
            FlowClass::FeasibleOnly => "FeasibleOnly",
            FlowClass::Preflow => "Preflow",
            FlowClass::Flow => "Flow",
        })
    }
}

impl FromStr for FlowClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Infeasible" => Ok(FlowClass::Infeasible),
            "FeasibleOnly" => Ok(FlowClass::FeasibleOnly),
            "Preflow" => Ok(FlowClass::Preflow),
            "Flow" => Ok(FlowClass::Flow),
            other => Err(format!("unknown flow class `{other}`")),
        }
    }
}

pub fn is_feasible(net: &Network, f: &FlowAssignment) -> bool {
    f.values
        .iter()
        .enumerate()
        .all(|(e, &x)| 0 <= x && x <= net.capacity(e))
}

pub fn classify(net: &Network, f: &FlowAssignment) -> FlowClass {
    if !is_feasible(net, f) {
        return FlowClass::Infeasible;
    }
    let non_sources = (0..net.n_vertices()).filter(|&v| !net.is_source(v));
    if non_sources.clone().any(|v| f.excess(v) < 0) {
        return FlowClass::FeasibleOnly;
    }
    if net.internal_vertices().all(|v| f.excess(v) == 0) {
        FlowClass::Flow
    } else {
        FlowClass::Preflow
    }
}

/// Total excess collected by the sinks.
pub fn value_of(net: &Network, f: &FlowAssignment) -> i64 {
    net.sinks().iter().map(|&t| f.excess(t)).sum()
}
