use std::collections::VecDeque;

use crate::flow::FlowAssignment;
use crate::network::{EdgeId, Network, VertexId};

use super::{EdgeEvents, Phase, RunStats, Solution, SolveOptions, SolverError, TraceStep};

/// Membership of an edge in the auxiliary graph Γ: middle edges plus free
/// active edges, split into active (`Plus`) and critical (`Minus`) members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GammaSide {
    Out,
    Plus,
    Minus,
}

/// Snapshot of Γ as two sorted edge lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GammaGraph {
    pub plus: Vec<EdgeId>,
    pub minus: Vec<EdgeId>,
}

impl GammaGraph {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    pub fn len(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn side(&self, e: EdgeId) -> GammaSide {
        if self.plus.binary_search(&e).is_ok() {
            GammaSide::Plus
        } else if self.minus.binary_search(&e).is_ok() {
            GammaSide::Minus
        } else {
            GammaSide::Out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tracked {
    No,
    Excess,
    New,
}

/// Preflow plus the bookkeeping both solvers maintain.
#[derive(Debug, Clone)]
pub struct SolverState<'n> {
    pub(crate) net: &'n Network,
    pub(crate) flow: FlowAssignment,
    pub(crate) active: Vec<Option<EdgeId>>,
    pub(crate) critical: Vec<Option<EdgeId>>,
    pub(crate) closed: Vec<bool>,
    pub(crate) balanced: Vec<bool>,
    pub(crate) excess_queue: VecDeque<VertexId>,
    pub(crate) new_queue: VecDeque<VertexId>,
    pub(crate) tracked: Vec<Tracked>,
    /// Internal vertices whose excess grew since the buffer was last drained.
    pub(crate) gained: Vec<VertexId>,
    pub(crate) stats: RunStats,
    pub(crate) edge_events: Vec<EdgeEvents>,
    pub(crate) phase: Phase,
    gamma_side: Vec<GammaSide>,
    dirty: Vec<EdgeId>,
    is_dirty: Vec<bool>,
    /// Reject a broken Γ partition instead of ignoring it.
    strict_gamma: bool,
    trace: Option<Vec<TraceStep>>,
    guard: u64,
}

impl<'n> SolverState<'n> {
    /// Zero preflow; every internal vertex points at its most preferred
    /// out-edge of positive capacity.
    pub fn new(net: &'n Network) -> Self {
        Self::with_options(net, &SolveOptions::default())
    }

    pub fn with_options(net: &'n Network, options: &SolveOptions) -> Self {
        let n = net.n_vertices();
        let m = net.n_edges();
        let mut state = SolverState {
            net,
            flow: FlowAssignment::zero(net),
            active: vec![None; n],
            critical: vec![None; n],
            closed: vec![false; m],
            balanced: vec![false; n],
            excess_queue: VecDeque::new(),
            new_queue: VecDeque::new(),
            tracked: vec![Tracked::No; n],
            gained: Vec::new(),
            stats: RunStats::default(),
            edge_events: vec![EdgeEvents::default(); m],
            phase: Phase::Initial,
            gamma_side: vec![GammaSide::Out; m],
            dirty: Vec::new(),
            is_dirty: vec![false; m],
            strict_gamma: true,
            trace: options.trace.then(Vec::new),
            guard: 4 * net.total_capacity() as u64,
        };
        for v in net.internal_vertices() {
            let first = net.out_pref(v).iter().copied().find(|&e| net.capacity(e) > 0);
            state.set_active(v, first);
        }
        state
            .refresh_gamma()
            .expect("zero preflow has a consistent auxiliary graph");
        state
    }

    /// Saturates every source edge and pushes until no vertex is waiting.
    /// The result is a stable, fully blocking preflow whose excess vertices
    /// all sit in the excess queue with no active edge.
    pub fn initial_iteration(net: &'n Network) -> Result<Self, SolverError> {
        Self::initial_iteration_with(net, &SolveOptions::default())
    }

    pub fn initial_iteration_with(net: &'n Network, options: &SolveOptions) -> Result<Self, SolverError> {
        let mut state = Self::with_options(net, options);
        state.saturate_sources();
        state.enqueue_gained();
        state.refresh_gamma()?;
        state.push()?;
        Ok(state)
    }

    /// Rebuilds solver bookkeeping around an existing preflow.
    ///
    /// An unsaturated edge is closed if it leaves a source or if its tail
    /// sends flow on a less preferred edge. Active edges are the leftmost
    /// unclosed unsaturated out-edges; the critical edge of a vertex is its
    /// last positive in-edge when that edge is closed. Excess vertices with an
    /// active edge wait in the push queue, the rest in the excess queue.
    pub fn reconstruct(net: &'n Network, f: &FlowAssignment) -> Result<Self, SolverError> {
        let mut state = Self::new(net);
        state.strict_gamma = false;
        state.flow = f.clone();
        for e in 0..net.n_edges() {
            if f.value(e) >= net.capacity(e) {
                continue;
            }
            let u = net.tail(e);
            state.closed[e] =
                net.is_source(u) || (net.is_internal(u) && net.later_out(e).iter().any(|&x| f.value(x) > 0));
        }
        for v in net.internal_vertices() {
            let active = net
                .out_pref(v)
                .iter()
                .copied()
                .find(|&e| !state.closed[e] && f.value(e) < net.capacity(e));
            state.set_active(v, active);
            let critical = net
                .in_pref(v)
                .iter()
                .rev()
                .copied()
                .find(|&e| f.value(e) > 0)
                .filter(|&e| state.closed[e]);
            state.set_critical(v, critical);
            if f.excess(v) > 0 {
                if state.active[v].is_some() {
                    state.tracked[v] = Tracked::New;
                    state.new_queue.push_back(v);
                } else {
                    state.tracked[v] = Tracked::Excess;
                    state.excess_queue.push_back(v);
                }
            }
        }
        state.refresh_gamma()?;
        state.check_invariants(false)?;
        Ok(state)
    }

    pub fn network(&self) -> &'n Network {
        self.net
    }

    pub fn flow(&self) -> &FlowAssignment {
        &self.flow
    }

    pub fn active(&self, v: VertexId) -> Option<EdgeId> {
        self.active[v]
    }

    pub fn critical(&self, v: VertexId) -> Option<EdgeId> {
        self.critical[v]
    }

    pub fn is_closed(&self, e: EdgeId) -> bool {
        self.closed[e]
    }

    pub fn excess_queue(&self) -> Vec<VertexId> {
        self.excess_queue.iter().copied().collect()
    }

    pub fn new_queue(&self) -> Vec<VertexId> {
        self.new_queue.iter().copied().collect()
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn edge_events(&self) -> &[EdgeEvents] {
        &self.edge_events
    }

    pub fn trace(&self) -> &[TraceStep] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn gamma_side(&self, e: EdgeId) -> GammaSide {
        self.gamma_side[e]
    }

    /// Whether any internal vertex still carries positive excess.
    pub fn has_excess(&self) -> bool {
        self.net.internal_vertices().any(|v| self.flow.excess(v) > 0)
    }

    pub fn into_solution(self) -> Solution {
        Solution {
            flow: self.flow,
            stats: self.stats,
            edge_events: self.edge_events,
            big_iteration_updates: Vec::new(),
            trace: self.trace.unwrap_or_default(),
        }
    }

    /// Pops the next vertex of the excess queue that still has excess.
    pub fn next_excess(&mut self) -> Option<VertexId> {
        while let Some(v) = self.excess_queue.pop_front() {
            self.tracked[v] = Tracked::No;
            if self.flow.excess(v) > 0 {
                return Some(v);
            }
        }
        None
    }

    /// Balancing phase at `v`: cancel its excess on the least preferred
    /// positive in-edges, make the leftmost decreased edge critical and close
    /// it together with every later in-edge.
    pub fn balance(&mut self, v: VertexId) -> Result<(), SolverError> {
        if self.tracked[v] == Tracked::Excess {
            self.excess_queue.retain(|&x| x != v);
        }
        self.tracked[v] = Tracked::No;
        self.phase = Phase::Balance;
        self.balance_at(v)?;
        self.enqueue_gained();
        self.refresh_gamma()?;
        self.check_guard()
    }

    /// Pushing phase: drain the push queue, moving each vertex's excess onto
    /// its unclosed out-edges from the active edge rightward.
    pub fn push(&mut self) -> Result<(), SolverError> {
        self.phase = Phase::Push;
        while let Some(u) = self.new_queue.pop_front() {
            self.tracked[u] = Tracked::No;
            if self.flow.excess(u) <= 0 {
                continue;
            }
            if self.active[u].is_some() {
                self.push_at(u);
                self.enqueue_gained();
            }
            if self.flow.excess(u) > 0 {
                self.tracked[u] = Tracked::Excess;
                self.excess_queue.push_back(u);
            }
            self.refresh_gamma()?;
            self.check_guard()?;
        }
        Ok(())
    }

    /// One iteration of the basic algorithm. Returns `false` once no
    /// internal vertex has excess.
    pub fn step(&mut self) -> Result<bool, SolverError> {
        match self.next_excess() {
            Some(v) => {
                self.balance(v)?;
                self.push()?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Recomputes Γ from scratch.
    pub fn build_gamma(&self) -> Result<GammaGraph, SolverError> {
        let mut g = GammaGraph::default();
        for e in 0..self.net.n_edges() {
            match self.compute_side(e)? {
                GammaSide::Plus => g.plus.push(e),
                GammaSide::Minus => g.minus.push(e),
                GammaSide::Out => {}
            }
        }
        Ok(g)
    }

    /// Checks the structural invariants of the preflow method. With
    /// `after_push` the push queue must be empty and every excess vertex must
    /// wait in the excess queue without an active edge.
    pub fn check_invariants(&self, after_push: bool) -> Result<(), SolverError> {
        let net = self.net;
        let f = &self.flow;
        let fail = |rule: &'static str, detail: String| Err(SolverError::Invariant { rule, detail });
        if !f.excess_consistent(net) {
            return fail("excess", "cached excess table is stale".into());
        }
        for &s in net.sources() {
            for &e in net.out_pref(s) {
                if f.value(e) < net.capacity(e) && !self.closed[e] {
                    return fail("source edges", format!("unsaturated source edge {e} is open"));
                }
            }
        }
        for u in net.internal_vertices() {
            let outs = net.out_pref(u);
            let blocked = |e: EdgeId| self.closed[e] || f.is_saturated(net, e);
            match self.active[u] {
                Some(a) => {
                    if net.tail(a) != u || blocked(a) {
                        return fail("active edge", format!("active edge {a} of {u} is saturated or closed"));
                    }
                    let r = net.out_rank(a);
                    if let Some(&e) = outs[..r].iter().find(|&&e| !blocked(e)) {
                        return fail("active edge", format!("edge {e} before active edge of {u} is open"));
                    }
                    if let Some(&e) = outs[r + 1..].iter().find(|&&e| !f.is_free(e)) {
                        return fail("active edge", format!("edge {e} after active edge of {u} carries flow"));
                    }
                }
                None => {
                    if let Some(&e) = outs.iter().find(|&&e| !blocked(e)) {
                        return fail("open edges", format!("vertex {u} has no active edge but {e} is open"));
                    }
                }
            }
            if self.balanced[u] {
                if self.active[u].is_some() {
                    return fail("critical edge", format!("balanced vertex {u} kept an active edge"));
                }
                let Some(c) = self.critical[u] else {
                    return fail("critical edge", format!("balanced vertex {u} has no critical edge"));
                };
                if f.is_saturated(net, c) {
                    return fail("critical edge", format!("critical edge {c} is saturated"));
                }
                if let Some(&e) = net.later_in(c).iter().find(|&&e| !f.is_free(e)) {
                    return fail(
                        "critical edge",
                        format!("edge {e} after critical edge of {u} carries flow"),
                    );
                }
                if let Some(&e) = net.in_pref(u)[net.in_rank(c)..].iter().find(|&&e| !self.closed[e]) {
                    return fail(
                        "critical edge",
                        format!("edge {e} at or after critical edge of {u} is open"),
                    );
                }
            }
            if after_push && f.excess(u) > 0 && (self.tracked[u] != Tracked::Excess || self.active[u].is_some()) {
                return fail(
                    "excess queue",
                    format!("excess vertex {u} is not parked in the excess queue"),
                );
            }
        }
        if after_push && !self.new_queue.is_empty() {
            return fail("excess queue", "push queue is not empty".into());
        }
        let mut count = vec![0u8; net.n_vertices()];
        for &v in self.excess_queue.iter().chain(&self.new_queue) {
            count[v] += 1;
            if count[v] > 1 {
                return fail("queues", format!("vertex {v} is queued twice"));
            }
        }
        for e in 0..net.n_edges() {
            self.compute_side(e)?;
        }
        Ok(())
    }

    pub(crate) fn saturate_sources(&mut self) {
        let net = self.net;
        self.phase = Phase::Initial;
        for &s in net.sources() {
            for &e in net.out_pref(s) {
                let room = self.flow.residual(net, e);
                if room > 0 {
                    self.shift(e, room);
                }
            }
        }
    }

    /// Elementary update of one edge with event accounting.
    pub(crate) fn shift(&mut self, e: EdgeId, delta: i64) {
        debug_assert_ne!(delta, 0);
        let net = self.net;
        self.flow.add(net, e, delta);
        let after = self.flow.value(e);
        self.stats.updates_total += 1;
        if delta > 0 && after == net.capacity(e) {
            self.stats.s_events += 1;
            self.edge_events[e].saturations += 1;
        }
        if delta < 0 && after == 0 {
            self.stats.f_events += 1;
            self.edge_events[e].freeings += 1;
        }
        if let Some(trace) = &mut self.trace {
            trace.push(TraceStep {
                edge: e,
                delta,
                phase: self.phase,
            });
        }
        self.mark_dirty(e);
        let gainer = if delta > 0 { net.head(e) } else { net.tail(e) };
        if net.is_internal(gainer) {
            self.gained.push(gainer);
        }
    }

    /// Moves the excess of `u` onto its unclosed out-edges, starting at the
    /// active edge, then re-normalizes the active pointer.
    pub(crate) fn push_at(&mut self, u: VertexId) {
        let net = self.net;
        let Some(start) = self.active[u] else {
            return;
        };
        let from = net.out_rank(start);
        for &e in &net.out_pref(u)[from..] {
            let ex = self.flow.excess(u);
            if ex <= 0 {
                break;
            }
            if self.closed[e] {
                continue;
            }
            let room = self.flow.residual(net, e);
            if room > 0 {
                self.shift(e, room.min(ex));
            }
        }
        self.normalize_active(u, from);
    }

    pub(crate) fn balance_at(&mut self, v: VertexId) -> Result<(), SolverError> {
        let net = self.net;
        let list = net.in_pref(v);
        let mut delta = self.flow.excess(v);
        if delta <= 0 {
            return Ok(());
        }
        let mut upper = list.len();
        let mut leftmost = upper;
        while delta > 0 {
            let idx = list[..upper]
                .iter()
                .rposition(|&e| self.flow.value(e) > 0)
                .ok_or(SolverError::NoPositiveInEdge(v))?;
            let e = list[idx];
            let amount = delta.min(self.flow.value(e));
            self.shift(e, -amount);
            delta -= amount;
            leftmost = idx;
            upper = idx;
        }
        self.set_critical(v, Some(list[leftmost]));
        self.balanced[v] = true;
        for &e in &list[leftmost..] {
            if self.closed[e] {
                continue;
            }
            self.closed[e] = true;
            self.mark_dirty(e);
            let u = net.tail(e);
            if self.active[u] == Some(e) {
                self.normalize_active(u, net.out_rank(e) + 1);
            }
        }
        Ok(())
    }

    /// Active edge of `u` becomes the first open unsaturated out-edge at
    /// position `from` or later.
    pub(crate) fn normalize_active(&mut self, u: VertexId, from: usize) {
        let net = self.net;
        let next = net.out_pref(u)[from.min(net.out_pref(u).len())..]
            .iter()
            .copied()
            .find(|&e| !self.closed[e] && self.flow.residual(net, e) > 0);
        self.set_active(u, next);
    }

    pub(crate) fn set_active(&mut self, u: VertexId, e: Option<EdgeId>) {
        let old = std::mem::replace(&mut self.active[u], e);
        if old != e {
            old.into_iter().chain(e).for_each(|x| self.mark_dirty(x));
        }
    }

    pub(crate) fn set_critical(&mut self, v: VertexId, e: Option<EdgeId>) {
        let old = std::mem::replace(&mut self.critical[v], e);
        if old != e {
            old.into_iter().chain(e).for_each(|x| self.mark_dirty(x));
        }
    }

    fn mark_dirty(&mut self, e: EdgeId) {
        if !self.is_dirty[e] {
            self.is_dirty[e] = true;
            self.dirty.push(e);
        }
    }

    pub(crate) fn enqueue_gained(&mut self) {
        for w in std::mem::take(&mut self.gained) {
            if self.tracked[w] == Tracked::No && self.flow.excess(w) > 0 {
                self.tracked[w] = Tracked::New;
                self.new_queue.push_back(w);
            }
        }
    }

    fn compute_side(&self, e: EdgeId) -> Result<GammaSide, SolverError> {
        let x = self.flow.value(e);
        let c = self.net.capacity(e);
        let is_active = self.active[self.net.tail(e)] == Some(e);
        let is_critical = self.critical[self.net.head(e)] == Some(e);
        if is_active && is_critical {
            return Err(SolverError::PartitionViolation(e));
        }
        if is_active && x < c {
            return Ok(GammaSide::Plus);
        }
        if x > 0 && x < c {
            return if is_critical {
                Ok(GammaSide::Minus)
            } else {
                Err(SolverError::PartitionViolation(e))
            };
        }
        Ok(GammaSide::Out)
    }

    /// Re-evaluates Γ membership of every edge touched since the last call,
    /// counting membership changes as M-events.
    pub(crate) fn refresh_gamma(&mut self) -> Result<(), SolverError> {
        let mut dirty = std::mem::take(&mut self.dirty);
        let mut result = Ok(());
        for &e in &dirty {
            self.is_dirty[e] = false;
            let side = match self.compute_side(e) {
                Ok(side) => side,
                Err(err) if self.strict_gamma => {
                    result = Err(err);
                    continue;
                }
                Err(_) => GammaSide::Out,
            };
            let old = self.gamma_side[e];
            if side != old {
                self.stats.m_events += 1;
                if old == GammaSide::Out {
                    self.edge_events[e].gamma_additions += 1;
                }
                self.gamma_side[e] = side;
            }
        }
        dirty.clear();
        self.dirty = dirty;
        result
    }

    pub(crate) fn check_guard(&self) -> Result<(), SolverError> {
        if self.stats.updates_total > self.guard {
            Err(SolverError::IterationGuardExceeded {
                updates: self.stats.updates_total,
                guard: self.guard,
            })
        } else {
            Ok(())
        }
    }
}
