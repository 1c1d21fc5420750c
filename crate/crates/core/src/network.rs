//! Networks with sources, sinks, integer capacities and per-vertex
//! preference orders on incoming and outgoing edges.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Largest admissible edge capacity. Sums over all edges of a network with
/// fewer than 2^31 edges stay well inside `i64`.
pub const MAX_CAPACITY: i64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub capacity: i64,
}

impl Edge {
    pub fn new(tail: VertexId, head: VertexId, capacity: i64) -> Self {
        Edge { tail, head, capacity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Source,
    Sink,
    Internal,
}

/// Which side of a vertex a preference list orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    In,
    Out,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::In => f.write_str("in"),
            Side::Out => f.write_str("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(VertexId),
    #[error("edge {0} is out of range")]
    EdgeOutOfRange(EdgeId),
    #[error("vertex {0} is listed twice as a terminal")]
    DuplicateTerminal(VertexId),
    #[error("vertex {0} is both a source and a sink")]
    TerminalOverlap(VertexId),
    #[error("edge {edge} enters source {vertex}")]
    EdgeIntoSource { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} leaves sink {vertex}")]
    EdgeOutOfSink { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} is a loop at vertex {vertex}")]
    SelfLoop { edge: EdgeId, vertex: VertexId },
    #[error("edges {first} and {second} are parallel")]
    DuplicateEdge { first: EdgeId, second: EdgeId },
    #[error("edge {edge} has capacity {capacity}, expected a value in [0, 2^31]")]
    CapacityOutOfRange { edge: EdgeId, capacity: i64 },
    #[error("{side} preference list of vertex {vertex} is not a permutation of its incident edges")]
    BadPreferencePermutation { vertex: VertexId, side: Side },
    #[error("terminal {vertex} carries an {side} preference list")]
    PreferenceListOnTerminal { vertex: VertexId, side: Side },
    #[error("internal vertex {vertex} has no {side} preference list")]
    MissingPreference { vertex: VertexId, side: Side },
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParameters(String),
}

/// Raw, unvalidated description of a network. [`NetworkSpec::build`] turns it
/// into a [`Network`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetworkSpec {
    pub n_vertices: usize,
    pub sources: Vec<VertexId>,
    pub sinks: Vec<VertexId>,
    pub edges: Vec<Edge>,
    /// Most preferred edge first.
    pub in_pref: BTreeMap<VertexId, Vec<EdgeId>>,
    pub out_pref: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl NetworkSpec {
    pub fn new(n_vertices: usize) -> Self {
        NetworkSpec {
            n_vertices,
            ..Default::default()
        }
    }

    pub fn source(mut self, v: VertexId) -> Self {
        self.sources.push(v);
        self
    }

    pub fn sink(mut self, v: VertexId) -> Self {
        self.sinks.push(v);
        self
    }

    pub fn edge(mut self, tail: VertexId, head: VertexId, capacity: i64) -> Self {
        self.edges.push(Edge::new(tail, head, capacity));
        self
    }

    pub fn in_pref(mut self, v: VertexId, order: impl Into<Vec<EdgeId>>) -> Self {
        self.in_pref.insert(v, order.into());
        self
    }

    pub fn out_pref(mut self, v: VertexId, order: impl Into<Vec<EdgeId>>) -> Self {
        self.out_pref.insert(v, order.into());
        self
    }

    /// Fills every missing preference list of a non-terminal vertex with its
    /// incident edges in id order. Lists that are already present are kept.
    pub fn with_default_preferences(mut self) -> Self {
        let mut is_terminal = vec![false; self.n_vertices];
        for &v in self.sources.iter().chain(&self.sinks) {
            if v < self.n_vertices {
                is_terminal[v] = true;
            }
        }
        let mut ins: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        let mut outs: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for (id, e) in self.edges.iter().enumerate() {
            outs.entry(e.tail).or_default().push(id);
            ins.entry(e.head).or_default().push(id);
        }
        for v in (0..self.n_vertices).filter(|&v| !is_terminal[v]) {
            if let Some(list) = ins.remove(&v) {
                self.in_pref.entry(v).or_insert(list);
            }
            if let Some(list) = outs.remove(&v) {
                self.out_pref.entry(v).or_insert(list);
            }
        }
        self
    }

    pub fn build(self) -> Result<Network, NetworkError> {
        build_network(self)
    }
}

/// Validated, immutable network.
///
/// Every vertex has an ordered in-list and out-list. For internal vertices
/// these are the preference orders (most preferred first); for terminals they
/// hold the incident edges in id order and carry no meaning beyond adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    kinds: Vec<VertexKind>,
    edges: Vec<Edge>,
    sources: Vec<VertexId>,
    sinks: Vec<VertexId>,
    in_list: Vec<Vec<EdgeId>>,
    out_list: Vec<Vec<EdgeId>>,
    in_rank: Vec<usize>,
    out_rank: Vec<usize>,
}

/// Validates a raw description against every network invariant.
pub fn build_network(spec: NetworkSpec) -> Result<Network, NetworkError> {
    let n = spec.n_vertices;
    let mut kinds = vec![VertexKind::Internal; n];
    for (list, kind) in [(&spec.sources, VertexKind::Source), (&spec.sinks, VertexKind::Sink)] {
        for &v in list {
            if v >= n {
                return Err(NetworkError::VertexOutOfRange(v));
            }
            match kinds[v] {
                VertexKind::Internal => kinds[v] = kind,
                k if k == kind => return Err(NetworkError::DuplicateTerminal(v)),
                _ => return Err(NetworkError::TerminalOverlap(v)),
            }
        }
    }

    let mut natural_in = vec![Vec::new(); n];
    let mut natural_out = vec![Vec::new(); n];
    let mut seen: BTreeMap<(VertexId, VertexId), EdgeId> = BTreeMap::new();
    for (id, e) in spec.edges.iter().enumerate() {
        if e.tail >= n {
            return Err(NetworkError::VertexOutOfRange(e.tail));
        }
        if e.head >= n {
            return Err(NetworkError::VertexOutOfRange(e.head));
        }
        if e.tail == e.head {
            return Err(NetworkError::SelfLoop {
                edge: id,
                vertex: e.tail,
            });
        }
        if !(0..=MAX_CAPACITY).contains(&e.capacity) {
            return Err(NetworkError::CapacityOutOfRange {
                edge: id,
                capacity: e.capacity,
            });
        }
        if kinds[e.head] == VertexKind::Source {
            return Err(NetworkError::EdgeIntoSource {
                edge: id,
                vertex: e.head,
            });
        }
        if kinds[e.tail] == VertexKind::Sink {
            return Err(NetworkError::EdgeOutOfSink {
                edge: id,
                vertex: e.tail,
            });
        }
        if let Some(&first) = seen.get(&(e.tail, e.head)) {
            return Err(NetworkError::DuplicateEdge { first, second: id });
        }
        seen.insert((e.tail, e.head), id);
        natural_out[e.tail].push(id);
        natural_in[e.head].push(id);
    }

    let in_list = resolve_orders(&spec.in_pref, natural_in, &kinds, Side::In, spec.edges.len())?;
    let out_list = resolve_orders(&spec.out_pref, natural_out, &kinds, Side::Out, spec.edges.len())?;

    let mut in_rank = vec![0; spec.edges.len()];
    let mut out_rank = vec![0; spec.edges.len()];
    for list in &in_list {
        for (rank, &e) in list.iter().enumerate() {
            in_rank[e] = rank;
        }
    }
    for list in &out_list {
        for (rank, &e) in list.iter().enumerate() {
            out_rank[e] = rank;
        }
    }

    let mut sources = spec.sources;
    let mut sinks = spec.sinks;
    sources.sort_unstable();
    sinks.sort_unstable();
    Ok(Network {
        kinds,
        edges: spec.edges,
        sources,
        sinks,
        in_list,
        out_list,
        in_rank,
        out_rank,
    })
}

fn resolve_orders(
    given: &BTreeMap<VertexId, Vec<EdgeId>>,
    natural: Vec<Vec<EdgeId>>,
    kinds: &[VertexKind],
    side: Side,
    m: usize,
) -> Result<Vec<Vec<EdgeId>>, NetworkError> {
    for &v in given.keys() {
        if v >= kinds.len() {
            return Err(NetworkError::VertexOutOfRange(v));
        }
        if kinds[v] != VertexKind::Internal {
            return Err(NetworkError::PreferenceListOnTerminal { vertex: v, side });
        }
    }
    let mut out = Vec::with_capacity(natural.len());
    for (v, incident) in natural.into_iter().enumerate() {
        if kinds[v] != VertexKind::Internal {
            out.push(incident);
            continue;
        }
        match given.get(&v) {
            None if incident.is_empty() => out.push(incident),
            None => return Err(NetworkError::MissingPreference { vertex: v, side }),
            Some(order) => {
                if let Some(&bad) = order.iter().find(|&&e| e >= m) {
                    return Err(NetworkError::EdgeOutOfRange(bad));
                }
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != incident {
                    return Err(NetworkError::BadPreferencePermutation { vertex: v, side });
                }
                out.push(order.clone());
            }
        }
    }
    Ok(out)
}

impl Network {
    pub fn n_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn tail(&self, e: EdgeId) -> VertexId {
        self.edges[e].tail
    }

    pub fn head(&self, e: EdgeId) -> VertexId {
        self.edges[e].head
    }

    pub fn capacity(&self, e: EdgeId) -> i64 {
        self.edges[e].capacity
    }

    pub fn total_capacity(&self) -> i64 {
        self.edges.iter().map(|e| e.capacity).sum()
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v]
    }

    pub fn is_source(&self, v: VertexId) -> bool {
        self.kinds[v] == VertexKind::Source
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.kinds[v] == VertexKind::Sink
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.kinds[v] != VertexKind::Internal
    }

    pub fn is_internal(&self, v: VertexId) -> bool {
        self.kinds[v] == VertexKind::Internal
    }

    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    pub fn sinks(&self) -> &[VertexId] {
        &self.sinks
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n_vertices()).filter(move |&v| self.is_internal(v))
    }

    /// Incoming edges of `v`, most preferred first for internal vertices.
    pub fn in_pref(&self, v: VertexId) -> &[EdgeId] {
        &self.in_list[v]
    }

    /// Outgoing edges of `v`, most preferred first for internal vertices.
    pub fn out_pref(&self, v: VertexId) -> &[EdgeId] {
        &self.out_list[v]
    }

    /// Position of `e` in the in-list of its head.
    pub fn in_rank(&self, e: EdgeId) -> usize {
        self.in_rank[e]
    }

    /// Position of `e` in the out-list of its tail.
    pub fn out_rank(&self, e: EdgeId) -> usize {
        self.out_rank[e]
    }

    /// Edges of `in_pref(head(e))` strictly less preferred than `e`.
    pub fn later_in(&self, e: EdgeId) -> &[EdgeId] {
        &self.in_list[self.head(e)][self.in_rank[e] + 1..]
    }

    /// Edges of `out_pref(tail(e))` strictly less preferred than `e`.
    pub fn later_out(&self, e: EdgeId) -> &[EdgeId] {
        &self.out_list[self.tail(e)][self.out_rank[e] + 1..]
    }

    pub fn find_edge(&self, tail: VertexId, head: VertexId) -> Option<EdgeId> {
        self.out_list.get(tail)?.iter().copied().find(|&e| self.head(e) == head)
    }

    /// Raw description that rebuilds an identical network.
    pub fn to_spec(&self) -> NetworkSpec {
        let mut spec = NetworkSpec::new(self.n_vertices());
        spec.sources = self.sources.clone();
        spec.sinks = self.sinks.clone();
        spec.edges = self.edges.clone();
        for v in self.internal_vertices() {
            if !self.in_list[v].is_empty() {
                spec.in_pref.insert(v, self.in_list[v].clone());
            }
            if !self.out_list[v].is_empty() {
                spec.out_pref.insert(v, self.out_list[v].clone());
            }
        }
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocationEdge {
    pub left: usize,
    pub right: usize,
    pub capacity: i64,
}

/// Bipartite stable allocation instance. Left vertices are numbered
/// `0..n_left`, right vertices `n_left..n_left + n_right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationInstance {
    pub n_left: usize,
    pub n_right: usize,
    pub edges: Vec<AllocationEdge>,
    /// One quota per vertex, left vertices first.
    pub quota: Vec<i64>,
    /// Per vertex, indices into `edges` incident to it, most preferred first.
    pub preference: Vec<Vec<usize>>,
}

/// Where the pieces of an allocation instance landed in the reduced network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationNetwork {
    pub network: Network,
    pub source: VertexId,
    pub sink: VertexId,
    /// Edge `i` of the instance is edge `i` of the network.
    pub quota_edge: Vec<EdgeId>,
}

/// Turns a stable allocation instance into a stable flow network: a source
/// feeding every left vertex up to its quota, a sink drained by every right
/// vertex up to its quota, original edges oriented left to right.
pub fn from_allocation(inst: &AllocationInstance) -> Result<AllocationNetwork, NetworkError> {
    let n = inst.n_left + inst.n_right;
    if inst.quota.len() != n {
        return Err(NetworkError::VertexOutOfRange(inst.quota.len().min(n)));
    }
    let source = n;
    let sink = n + 1;
    let mut spec = NetworkSpec::new(n + 2).source(source).sink(sink);
    for e in &inst.edges {
        if e.left >= inst.n_left {
            return Err(NetworkError::VertexOutOfRange(e.left));
        }
        if e.right < inst.n_left || e.right >= n {
            return Err(NetworkError::VertexOutOfRange(e.right));
        }
        spec = spec.edge(e.left, e.right, e.capacity);
    }
    let mut quota_edge = Vec::with_capacity(n);
    for v in 0..n {
        quota_edge.push(spec.edges.len());
        spec = if v < inst.n_left {
            spec.edge(source, v, inst.quota[v])
        } else {
            spec.edge(v, sink, inst.quota[v])
        };
    }
    for (v, &quota) in quota_edge.iter().enumerate() {
        let own = inst.preference.get(v).cloned().unwrap_or_default();
        let (own_side, quota_side) = if v < inst.n_left {
            (&mut spec.out_pref, &mut spec.in_pref)
        } else {
            (&mut spec.in_pref, &mut spec.out_pref)
        };
        if !own.is_empty() {
            own_side.insert(v, own);
        }
        quota_side.insert(v, vec![quota]);
    }
    Ok(AllocationNetwork {
        network: spec.build()?,
        source,
        sink,
        quota_edge,
    })
}

/// Parameters of the seeded random network generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub n: usize,
    pub m: usize,
    pub cap_max: i64,
    pub sources: usize,
    pub sinks: usize,
}

impl GeneratorParams {
    /// Number of vertex pairs that may carry an edge.
    pub fn max_edges(&self) -> usize {
        let (n, s, t) = (self.n, self.sources, self.sinks);
        if s + t > n {
            return 0;
        }
        (n - t) * (n - s) - (n - s - t)
    }
}

/// Deterministic random network: terminals, edge set, capacities in
/// `[0, cap_max]` and preference permutations are all drawn from a ChaCha8
/// stream seeded with `seed`.
pub fn random_instance(params: &GeneratorParams, seed: u64) -> Result<Network, NetworkError> {
    let GeneratorParams {
        n,
        m,
        cap_max,
        sources,
        sinks,
    } = *params;
    if sources == 0 || sinks == 0 {
        return Err(NetworkError::InfeasibleParameters(
            "at least one source and one sink are required".into(),
        ));
    }
    if sources + sinks > n {
        return Err(NetworkError::InfeasibleParameters(format!(
            "{sources} sources and {sinks} sinks do not fit into {n} vertices"
        )));
    }
    if !(0..=MAX_CAPACITY).contains(&cap_max) {
        return Err(NetworkError::InfeasibleParameters(format!(
            "cap_max {cap_max} outside [0, 2^31]"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<VertexId> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut kinds = vec![VertexKind::Internal; n];
    for &v in &order[..sources] {
        kinds[v] = VertexKind::Source;
    }
    for &v in &order[sources..sources + sinks] {
        kinds[v] = VertexKind::Sink;
    }

    let pairs: Vec<(VertexId, VertexId)> = (0..n)
        .filter(|&u| kinds[u] != VertexKind::Sink)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && kinds[v] != VertexKind::Source)
        .collect();
    if m > pairs.len() {
        return Err(NetworkError::InfeasibleParameters(format!(
            "{m} edges requested but only {} legal vertex pairs exist",
            pairs.len()
        )));
    }

    let mut spec = NetworkSpec::new(n);
    spec.sources = (0..n).filter(|&v| kinds[v] == VertexKind::Source).collect();
    spec.sinks = (0..n).filter(|&v| kinds[v] == VertexKind::Sink).collect();
    for i in index::sample(&mut rng, pairs.len(), m).into_iter() {
        let (u, v) = pairs[i];
        let cap = rng.gen_range(0..=cap_max);
        spec.edges.push(Edge::new(u, v, cap));
    }

    let mut ins = vec![Vec::new(); n];
    let mut outs = vec![Vec::new(); n];
    for (id, e) in spec.edges.iter().enumerate() {
        outs[e.tail].push(id);
        ins[e.head].push(id);
    }
    for v in 0..n {
        if kinds[v] != VertexKind::Internal {
            continue;
        }
        if !ins[v].is_empty() {
            let mut list = std::mem::take(&mut ins[v]);
            list.shuffle(&mut rng);
            spec.in_pref.insert(v, list);
        }
        if !outs[v].is_empty() {
            let mut list = std::mem::take(&mut outs[v]);
            list.shuffle(&mut rng);
            spec.out_pref.insert(v, list);
        }
    }
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn shortcut_spec() -> NetworkSpec {
        // s=0 u=1 v=2 w=3 t=4; su uv vw uw wt
        NetworkSpec::new(5)
            .source(0)
            .sink(4)
            .edge(0, 1, 5)
            .edge(1, 2, 5)
            .edge(2, 3, 5)
            .edge(1, 3, 5)
            .edge(3, 4, 2)
            .in_pref(1, [0])
            .out_pref(1, [1, 3])
            .in_pref(2, [1])
            .out_pref(2, [2])
            .in_pref(3, [3, 2])
            .out_pref(3, [4])
    }

    #[test]
    fn smallest_network_is_valid() {
        let net = NetworkSpec::new(2).source(0).sink(1).edge(0, 1, 5).build().unwrap();
        assert_eq!(net.n_edges(), 1);
        assert!(net.is_source(0) && net.is_sink(1));
    }

    #[test]
    fn chain_with_singleton_lists() {
        let net = NetworkSpec::new(3)
            .source(0)
            .sink(2)
            .edge(0, 1, 3)
            .edge(1, 2, 7)
            .in_pref(1, [0])
            .out_pref(1, [1])
            .build()
            .unwrap();
        assert_eq!(net.in_pref(1), &[0]);
        assert_eq!(net.out_pref(1), &[1]);
    }

    #[test]
    fn shortcut_ranks() {
        let net = shortcut_spec().build().unwrap();
        assert_eq!(net.out_rank(3), 1);
        assert_eq!(net.in_rank(2), 1);
        assert_eq!(net.later_out(1), &[3]);
        assert_eq!(net.later_in(3), &[2]);
        assert!(net.later_in(2).is_empty());
    }

    #[test]
    fn rejects_edge_out_of_sink() {
        let err = NetworkSpec::new(3)
            .source(0)
            .sink(2)
            .edge(0, 1, 1)
            .edge(2, 1, 1)
            .with_default_preferences()
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::EdgeOutOfSink { edge: 1, vertex: 2 });
    }

    #[test]
    fn rejects_edge_into_source() {
        let err = NetworkSpec::new(3)
            .source(0)
            .sink(2)
            .edge(1, 0, 1)
            .with_default_preferences()
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::EdgeIntoSource { edge: 0, vertex: 0 });
    }

    #[test]
    fn rejects_parallel_edges_and_loops() {
        let err = NetworkSpec::new(3)
            .source(0)
            .sink(2)
            .edge(0, 1, 1)
            .edge(0, 1, 2)
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::DuplicateEdge { first: 0, second: 1 });
        let err = NetworkSpec::new(3).edge(1, 1, 1).build().unwrap_err();
        assert_eq!(err, NetworkError::SelfLoop { edge: 0, vertex: 1 });
    }

    #[test]
    fn rejects_bad_preferences() {
        let err = shortcut_spec().out_pref(1, [1]).build().unwrap_err();
        assert_eq!(
            err,
            NetworkError::BadPreferencePermutation {
                vertex: 1,
                side: Side::Out
            }
        );
        let err = shortcut_spec().in_pref(0, Vec::new()).build().unwrap_err();
        assert_eq!(
            err,
            NetworkError::PreferenceListOnTerminal {
                vertex: 0,
                side: Side::In
            }
        );
        let mut spec = shortcut_spec();
        spec.in_pref.remove(&3);
        assert_eq!(
            spec.build().unwrap_err(),
            NetworkError::MissingPreference {
                vertex: 3,
                side: Side::In
            }
        );
    }

    #[test]
    fn rejects_capacity_and_terminal_errors() {
        let err = NetworkSpec::new(2)
            .source(0)
            .sink(1)
            .edge(0, 1, -1)
            .build()
            .unwrap_err();
        assert!(matches!(err, NetworkError::CapacityOutOfRange { .. }));
        let err = NetworkSpec::new(2).source(0).sink(0).build().unwrap_err();
        assert_eq!(err, NetworkError::TerminalOverlap(0));
        let err = NetworkSpec::new(2).source(0).source(0).build().unwrap_err();
        assert_eq!(err, NetworkError::DuplicateTerminal(0));
        let err = NetworkSpec::new(2).source(3).build().unwrap_err();
        assert_eq!(err, NetworkError::VertexOutOfRange(3));
    }

    #[test]
    fn spec_round_trip() {
        let net = shortcut_spec().build().unwrap();
        assert_eq!(net.to_spec().build().unwrap(), net);
    }

    #[test]
    fn allocation_reduction_structure() {
        let inst = AllocationInstance {
            n_left: 1,
            n_right: 1,
            edges: vec![AllocationEdge {
                left: 0,
                right: 1,
                capacity: 2,
            }],
            quota: vec![1, 3],
            preference: vec![vec![0], vec![0]],
        };
        let red = from_allocation(&inst).unwrap();
        let net = &red.network;
        assert_eq!(net.n_vertices(), 4);
        assert_eq!(net.edge(0), Edge::new(0, 1, 2));
        assert_eq!(net.edge(1), Edge::new(red.source, 0, 1));
        assert_eq!(net.edge(2), Edge::new(1, red.sink, 3));
        assert_eq!(net.in_pref(0), &[1]);
        assert_eq!(net.out_pref(1), &[2]);

        let empty = AllocationInstance {
            edges: Vec::new(),
            preference: vec![Vec::new(), Vec::new()],
            ..inst
        };
        let red = from_allocation(&empty).unwrap();
        assert_eq!(red.network.n_edges(), 2);
        assert_eq!(red.network.edge(0), Edge::new(red.source, 0, 1));
        assert_eq!(red.network.edge(1), Edge::new(1, red.sink, 3));
    }

    #[test]
    fn generator_smallest_shape() {
        let params = GeneratorParams {
            n: 2,
            m: 1,
            cap_max: 5,
            sources: 1,
            sinks: 1,
        };
        let net = random_instance(&params, 42).unwrap();
        assert_eq!(net.n_edges(), 1);
        let e = net.edge(0);
        assert!(net.is_source(e.tail) && net.is_sink(e.head));
        assert!((0..=5).contains(&e.capacity));
        assert_eq!(random_instance(&params, 42).unwrap(), net);
    }

    #[test]
    fn generator_rejects_impossible_requests() {
        let params = GeneratorParams {
            n: 2,
            m: 2,
            cap_max: 5,
            sources: 1,
            sinks: 1,
        };
        assert!(matches!(
            random_instance(&params, 0),
            Err(NetworkError::InfeasibleParameters(_))
        ));
        let params = GeneratorParams {
            n: 2,
            m: 0,
            cap_max: 5,
            sources: 2,
            sinks: 1,
        };
        assert!(random_instance(&params, 0).is_err());
    }
}
