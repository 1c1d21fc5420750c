//! Stability checks for flows, preflows, γ-preflows and (β,γ)-quasiflows.
//!
//! A directed path of unsaturated edges (simple, except that it may close up
//! at its first vertex) is blocking unless it is dominated at its first or
//! last vertex. Domination only looks at the first and last edge of the
//! path, so every unsaturated edge is classified as start-eligible and/or
//! end-eligible, and for each pair of endpoints we search for a connection
//! that avoids both of them.

use std::collections::VecDeque;

use thiserror::Error;

use crate::flow::{classify, FlowAssignment, FlowClass};
use crate::network::{EdgeId, Network, VertexId, VertexKind};

/// Which object is being checked. Bound vectors are indexed by vertex id;
/// entries of terminals are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode<'a> {
    Flow,
    Preflow,
    GammaPreflow { gamma: &'a [i64] },
    Quasiflow { beta: &'a [i64], gamma: &'a [i64] },
}

impl StabilityMode<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityMode::Flow => "flow",
            StabilityMode::Preflow => "preflow",
            StabilityMode::GammaPreflow { .. } => "gamma-preflow",
            StabilityMode::Quasiflow { .. } => "quasiflow",
        }
    }

    /// Positive excess at the first vertex defeats domination there.
    fn excess_breaks_start(&self) -> bool {
        matches!(
            self,
            StabilityMode::GammaPreflow { .. } | StabilityMode::Quasiflow { .. }
        )
    }

    /// Negative excess at the last vertex defeats domination there.
    fn deficit_breaks_end(&self) -> bool {
        matches!(self, StabilityMode::Quasiflow { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error("assignment does not fit {mode} mode: {reason}")]
    ModeMismatch { mode: &'static str, reason: String },
    #[error("assignment is not a preflow (class {0})")]
    NotAPreflow(FlowClass),
}

/// A directed path of unsaturated edges dominated neither at its start nor
/// at its end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityWitness {
    pub edges: Vec<EdgeId>,
}

impl StabilityWitness {
    pub fn start(&self, net: &Network) -> VertexId {
        net.tail(self.edges[0])
    }

    pub fn end(&self, net: &Network) -> VertexId {
        net.head(*self.edges.last().expect("witness has at least one edge"))
    }

    /// Vertex sequence `v_0, ..., v_k`.
    pub fn vertices(&self, net: &Network) -> Vec<VertexId> {
        let mut out = vec![self.start(net)];
        out.extend(self.edges.iter().map(|&e| net.head(e)));
        out
    }
}

fn check_mode(net: &Network, f: &FlowAssignment, mode: &StabilityMode) -> Result<(), StabilityError> {
    let class = classify(net, f);
    let mismatch = |reason: String| StabilityError::ModeMismatch {
        mode: mode.name(),
        reason,
    };
    match mode {
        StabilityMode::Flow if class != FlowClass::Flow => Err(mismatch(format!("class is {class}"))),
        StabilityMode::Preflow if class < FlowClass::Preflow => Err(mismatch(format!("class is {class}"))),
        StabilityMode::GammaPreflow { gamma } => {
            if class < FlowClass::Preflow {
                return Err(mismatch(format!("class is {class}")));
            }
            check_bounds(net, f, None, gamma).map_err(mismatch)
        }
        StabilityMode::Quasiflow { beta, gamma } => {
            if class == FlowClass::Infeasible {
                return Err(mismatch(format!("class is {class}")));
            }
            check_bounds(net, f, Some(beta), gamma).map_err(mismatch)
        }
        _ => Ok(()),
    }
}

fn check_bounds(net: &Network, f: &FlowAssignment, beta: Option<&[i64]>, gamma: &[i64]) -> Result<(), String> {
    if gamma.len() != net.n_vertices() || beta.is_some_and(|b| b.len() != net.n_vertices()) {
        return Err("bound vectors must have one entry per vertex".into());
    }
    for v in net.internal_vertices() {
        let lower = beta.map_or(0, |b| -b[v]);
        let ex = f.excess(v);
        if ex < lower || ex > gamma[v] {
            return Err(format!("excess {ex} at vertex {v} outside [{lower}, {}]", gamma[v]));
        }
    }
    Ok(())
}

/// Rank of the least preferred positive edge on each side of every vertex,
/// or `None` if all edges on that side are free.
struct LastPositive {
    out_rank: Vec<Option<usize>>,
    in_rank: Vec<Option<usize>>,
}

impl LastPositive {
    fn new(net: &Network, f: &FlowAssignment) -> Self {
        let scan = |list: &[EdgeId]| list.iter().rposition(|&e| f.value(e) > 0);
        LastPositive {
            out_rank: (0..net.n_vertices()).map(|v| scan(net.out_pref(v))).collect(),
            in_rank: (0..net.n_vertices()).map(|v| scan(net.in_pref(v))).collect(),
        }
    }
}

struct Eligibility<'a> {
    net: &'a Network,
    f: &'a FlowAssignment,
    mode: StabilityMode<'a>,
    last: LastPositive,
}

impl Eligibility<'_> {
    fn start(&self, e: EdgeId) -> bool {
        let u = self.net.tail(e);
        match self.net.kind(u) {
            VertexKind::Source => true,
            VertexKind::Sink => false,
            VertexKind::Internal => {
                self.last.out_rank[u].is_some_and(|r| r > self.net.out_rank(e))
                    || (self.mode.excess_breaks_start() && self.f.excess(u) > 0)
            }
        }
    }

    fn end(&self, e: EdgeId) -> bool {
        let v = self.net.head(e);
        match self.net.kind(v) {
            VertexKind::Sink => true,
            VertexKind::Source => false,
            VertexKind::Internal => {
                self.last.in_rank[v].is_some_and(|r| r > self.net.in_rank(e))
                    || (self.mode.deficit_breaks_end() && self.f.excess(v) < 0)
            }
        }
    }
}

/// Returns a shortest blocking path, or `None` if `f` is stable in `mode`.
pub fn find_witness(
    net: &Network,
    f: &FlowAssignment,
    mode: StabilityMode,
) -> Result<Option<StabilityWitness>, StabilityError> {
    check_mode(net, f, &mode)?;
    Ok(find_witness_unchecked(net, f, mode))
}

/// Like [`find_witness`] but applies the path conditions of `mode` to any
/// assignment, without checking its class or excess bounds.
pub fn find_witness_unchecked(net: &Network, f: &FlowAssignment, mode: StabilityMode) -> Option<StabilityWitness> {
    let elig = Eligibility {
        net,
        f,
        mode,
        last: LastPositive::new(net, f),
    };
    let unsaturated = |e: EdgeId| f.value(e) < net.capacity(e);
    if !walk_exists(net, &elig, &unsaturated) {
        return None;
    }

    let n = net.n_vertices();
    let mut starts_at: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    let mut ends_at: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    for e in (0..net.n_edges()).filter(|&e| unsaturated(e)) {
        if elig.start(e) {
            starts_at[net.tail(e)].push(e);
        }
        if elig.end(e) {
            ends_at[net.head(e)].push(e);
        }
    }
    for e in starts_at.iter().flatten() {
        if elig.end(*e) {
            return Some(StabilityWitness { edges: vec![*e] });
        }
    }

    const NONE: usize = usize::MAX;
    let mut best: Option<Vec<EdgeId>> = None;
    let mut parent = vec![NONE; n];
    let mut ends_here = vec![NONE; n];
    let mut queue = VecDeque::new();
    for a in (0..n).filter(|&a| !starts_at[a].is_empty()) {
        for b in (0..n).filter(|&b| !ends_at[b].is_empty()) {
            // Vertices strictly inside the path avoid both endpoints; a = b
            // is the closed case.
            let blocked = |v: VertexId| v == a || v == b;
            for &e in &ends_at[b] {
                ends_here[net.tail(e)] = e;
            }
            parent.fill(NONE);
            queue.clear();
            for &e in &starts_at[a] {
                let w = net.head(e);
                if !blocked(w) && parent[w] == NONE {
                    parent[w] = e;
                    queue.push_back(w);
                }
            }
            let mut found = None;
            while let Some(x) = queue.pop_front() {
                if ends_here[x] != NONE {
                    found = Some(x);
                    break;
                }
                for &e in net.out_pref(x) {
                    let w = net.head(e);
                    if unsaturated(e) && !blocked(w) && parent[w] == NONE {
                        parent[w] = e;
                        queue.push_back(w);
                    }
                }
            }
            if let Some(x) = found {
                let mut edges = vec![ends_here[x]];
                let mut e = parent[x];
                loop {
                    edges.push(e);
                    if net.tail(e) == a {
                        break;
                    }
                    e = parent[net.tail(e)];
                }
                edges.reverse();
                if best.as_ref().is_none_or(|b| edges.len() < b.len()) {
                    best = Some(edges);
                }
            }
            for &e in &ends_at[b] {
                ends_here[net.tail(e)] = NONE;
            }
        }
    }
    best.map(|edges| StabilityWitness { edges })
}

/// Cheap necessary condition: some start-eligible edge reaches some
/// end-eligible edge through unsaturated edges, repeated vertices allowed.
fn walk_exists(net: &Network, elig: &Eligibility, unsaturated: &dyn Fn(EdgeId) -> bool) -> bool {
    let m = net.n_edges();
    let mut visited = vec![false; m];
    let mut expanded = vec![false; net.n_vertices()];
    let mut stack: Vec<EdgeId> = (0..m).filter(|&e| unsaturated(e) && elig.start(e)).collect();
    for &e in &stack {
        visited[e] = true;
    }
    while let Some(e) = stack.pop() {
        if elig.end(e) {
            return true;
        }
        let v = net.head(e);
        if std::mem::replace(&mut expanded[v], true) {
            continue;
        }
        for &next in net.out_pref(v) {
            if unsaturated(next) && !visited[next] {
                visited[next] = true;
                stack.push(next);
            }
        }
    }
    false
}

pub fn is_stable(net: &Network, f: &FlowAssignment, mode: StabilityMode) -> Result<bool, StabilityError> {
    find_witness(net, f, mode).map(|w| w.is_none())
}

/// True iff no unsaturated directed path leads from a source, or from an
/// internal vertex with positive excess, to a sink.
pub fn is_fully_blocking(net: &Network, f: &FlowAssignment) -> Result<bool, StabilityError> {
    let class = classify(net, f);
    if class < FlowClass::Preflow {
        return Err(StabilityError::NotAPreflow(class));
    }
    let mut seen = vec![false; net.n_vertices()];
    let mut stack: Vec<VertexId> = net
        .sources()
        .iter()
        .copied()
        .chain(net.internal_vertices().filter(|&v| f.excess(v) > 0))
        .collect();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &e in net.out_pref(v) {
            let w = net.head(e);
            if f.value(e) < net.capacity(e) && !seen[w] {
                if net.is_sink(w) {
                    return Ok(false);
                }
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    Ok(true)
}
