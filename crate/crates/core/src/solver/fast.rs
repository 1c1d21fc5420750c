//! Big-iteration solver.
//!
//! Excess is routed along the current active and critical pointers as long as
//! every move leaves the auxiliary graph Γ untouched. A big iteration ends with
//! a cancelled cycle, a non-simple move (a saturation, freeing or Γ change)
//! or once all collected excess has been drained out of the walk forest.

use std::collections::VecDeque;

use crate::network::{EdgeId, Network, VertexId};

use super::{Phase, Solution, SolveOptions, SolverError, SolverState};

/// One step of a walk in Γ: a forward active edge or a backward critical edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkStep {
    pub edge: EdgeId,
    pub forward: bool,
    pub to: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperWalk {
    pub start: VertexId,
    pub steps: Vec<WalkStep>,
}

impl ProperWalk {
    pub fn end(&self) -> VertexId {
        self.steps.last().map_or(self.start, |s| s.to)
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        let mut out = vec![self.start];
        out.extend(self.steps.iter().map(|s| s.to));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BigIterationOutcome {
    CycleCancelled,
    TreesDrained,
    /// A saturation, freeing or change of Γ happened.
    EventSFM,
    Solved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WalkEnd {
    Grafted,
    Cycle,
    Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DrainEnd {
    Drained,
    Event,
}

#[derive(Debug, Clone)]
struct Tree {
    vertices: Vec<VertexId>,
}

/// Shifts flow around a proper cycle of Γ by the largest amount that keeps
/// the preflow feasible: forward edges gain, backward edges lose. Active
/// edges that become saturated hand their role to the next open edge.
/// Returns the shift.
pub fn cancel_cycle(state: &mut SolverState<'_>, cycle: &ProperWalk) -> Result<i64, SolverError> {
    let net = state.net;
    if cycle.steps.len() < 2 || cycle.end() != cycle.start {
        return Err(SolverError::NotAProperCycle("walk does not close".into()));
    }
    let mut seen_vertex = vec![false; net.n_vertices()];
    let mut seen_edge = vec![false; net.n_edges()];
    let mut at = cycle.start;
    let mut delta = i64::MAX;
    for step in &cycle.steps {
        if std::mem::replace(&mut seen_vertex[at], true) {
            return Err(SolverError::NotAProperCycle(format!("vertex {at} repeats")));
        }
        if std::mem::replace(&mut seen_edge[step.edge], true) {
            return Err(SolverError::NotAProperCycle(format!("edge {} repeats", step.edge)));
        }
        let e = step.edge;
        let ok = if step.forward {
            net.tail(e) == at && net.head(e) == step.to && state.active[at] == Some(e)
        } else {
            net.head(e) == at && net.tail(e) == step.to && state.critical[at] == Some(e)
        };
        if !ok {
            return Err(SolverError::NotAProperCycle(format!(
                "edge {e} is not the {} edge of vertex {at}",
                if step.forward { "active" } else { "critical" }
            )));
        }
        let room = if step.forward {
            state.flow.residual(net, e)
        } else {
            state.flow.value(e)
        };
        delta = delta.min(room);
        at = step.to;
    }
    if delta <= 0 {
        return Err(SolverError::DegenerateCycle);
    }
    state.phase = Phase::Cycle;
    for step in &cycle.steps {
        state.shift(step.edge, if step.forward { delta } else { -delta });
    }
    state.gained.clear();
    for step in cycle.steps.iter().filter(|s| s.forward) {
        if state.flow.residual(net, step.edge) == 0 {
            let u = net.tail(step.edge);
            state.normalize_active(u, net.out_rank(step.edge) + 1);
        }
    }
    state.refresh_gamma()?;
    Ok(delta)
}

/// Fast solver driven one big iteration at a time.
#[derive(Debug, Clone)]
pub struct FastSolver<'n> {
    state: SolverState<'n>,
    pending: VecDeque<VertexId>,
    in_pending: Vec<bool>,
    walk_id: u64,
    walk_mark: Vec<u64>,
    walk_pos: Vec<usize>,
    generation: u64,
    tree_mark: Vec<u64>,
    tree_index: Vec<usize>,
    parent: Vec<Option<WalkStep>>,
    depth: Vec<usize>,
    trees: Vec<Tree>,
    big_iteration_updates: Vec<u64>,
}

impl<'n> FastSolver<'n> {
    pub fn new(net: &'n Network) -> Self {
        Self::with_options(net, &SolveOptions::default())
    }

    /// Saturates the source edges; every vertex that received flow waits for
    /// the first big iteration.
    pub fn with_options(net: &'n Network, options: &SolveOptions) -> Self {
        let mut state = SolverState::with_options(net, options);
        state.saturate_sources();
        state
            .refresh_gamma()
            .expect("saturating source edges keeps the auxiliary graph consistent");
        Self::from_state(state)
    }

    /// Continues from an arbitrary solver state; every internal vertex with
    /// positive excess is scheduled.
    pub fn from_state(mut state: SolverState<'n>) -> Self {
        let net = state.net;
        let n = net.n_vertices();
        state.gained.clear();
        state.excess_queue.clear();
        state.new_queue.clear();
        state.tracked.fill(super::state::Tracked::No);
        let mut solver = FastSolver {
            state,
            pending: VecDeque::new(),
            in_pending: vec![false; n],
            walk_id: 0,
            walk_mark: vec![0; n],
            walk_pos: vec![0; n],
            generation: 0,
            tree_mark: vec![0; n],
            tree_index: vec![0; n],
            parent: vec![None; n],
            depth: vec![0; n],
            trees: Vec::new(),
            big_iteration_updates: Vec::new(),
        };
        for v in net.internal_vertices() {
            if solver.state.flow.excess(v) > 0 {
                solver.add_pending(v);
            }
        }
        solver
    }

    pub fn state(&self) -> &SolverState<'n> {
        &self.state
    }

    pub fn pending(&self) -> Vec<VertexId> {
        self.pending.iter().copied().collect()
    }

    pub fn into_solution(self) -> Solution {
        let updates = self.big_iteration_updates;
        let mut solution = self.state.into_solution();
        solution.big_iteration_updates = updates;
        solution
    }

    fn add_pending(&mut self, v: VertexId) {
        if !std::mem::replace(&mut self.in_pending[v], true) {
            self.pending.push_back(v);
        }
    }

    fn pop_pending(&mut self) -> Option<VertexId> {
        let v = self.pending.pop_front()?;
        self.in_pending[v] = false;
        Some(v)
    }

    fn absorb_gained(&mut self) {
        for w in std::mem::take(&mut self.state.gained) {
            if self.state.flow.excess(w) > 0 {
                self.add_pending(w);
            }
        }
    }

    fn in_tree(&self, v: VertexId) -> bool {
        self.tree_mark[v] == self.generation
    }

    /// Runs one big iteration, or reports `Solved` if no excess is left.
    pub fn advance_big_iteration(&mut self) -> Result<BigIterationOutcome, SolverError> {
        while let Some(&v) = self.pending.front() {
            if self.state.flow.excess(v) > 0 {
                break;
            }
            self.pop_pending();
        }
        if self.pending.is_empty() {
            debug_assert!(!self.state.has_excess());
            return Ok(BigIterationOutcome::Solved);
        }
        self.generation += 1;
        self.trees.clear();
        let before = self.state.stats.updates_total;
        let outcome = self.big_iteration()?;
        let used = self.state.stats.updates_total - before;
        let stats = &mut self.state.stats;
        stats.big_iterations += 1;
        stats.updates_max_per_big_iteration = stats.updates_max_per_big_iteration.max(used);
        self.big_iteration_updates.push(used);
        self.state.check_guard()?;
        Ok(outcome)
    }

    fn big_iteration(&mut self) -> Result<BigIterationOutcome, SolverError> {
        while let Some(v) = self.pop_pending() {
            if self.state.flow.excess(v) <= 0 || self.in_tree(v) {
                continue;
            }
            match self.walk(v)? {
                WalkEnd::Grafted => {}
                WalkEnd::Cycle => {
                    self.requeue_forest();
                    return Ok(BigIterationOutcome::CycleCancelled);
                }
                WalkEnd::Event => {
                    self.requeue_forest();
                    return Ok(BigIterationOutcome::EventSFM);
                }
            }
        }
        match self.drain_trees()? {
            DrainEnd::Drained => Ok(BigIterationOutcome::TreesDrained),
            DrainEnd::Event => {
                self.requeue_forest();
                Ok(BigIterationOutcome::EventSFM)
            }
        }
    }

    /// The move at `x` that carries `amount` without saturating, freeing or
    /// touching Γ, if there is one.
    fn simple_step(&self, x: VertexId, amount: i64) -> Option<WalkStep> {
        let net = self.state.net;
        let f = &self.state.flow;
        if let Some(e) = self.state.active[x] {
            (f.residual(net, e) > amount).then(|| WalkStep {
                edge: e,
                forward: true,
                to: net.head(e),
            })
        } else {
            let e = self.state.critical[x]?;
            (f.value(e) > amount).then(|| WalkStep {
                edge: e,
                forward: false,
                to: net.tail(e),
            })
        }
    }

    fn apply_simple(&mut self, step: WalkStep, amount: i64, phase: Phase) -> Result<(), SolverError> {
        self.state.phase = phase;
        self.state.shift(step.edge, if step.forward { amount } else { -amount });
        self.state.gained.clear();
        let m_before = self.state.stats.m_events;
        self.state.refresh_gamma()?;
        debug_assert_eq!(m_before, self.state.stats.m_events, "simple step changed Γ");
        Ok(())
    }

    /// A regular push or balancing step of the basic algorithm at `x`.
    fn basic_step_at(&mut self, x: VertexId) -> Result<(), SolverError> {
        if self.state.active[x].is_some() {
            self.state.phase = Phase::Push;
            self.state.push_at(x);
        } else {
            self.state.phase = Phase::Balance;
            self.state.balance_at(x)?;
        }
        self.state.refresh_gamma()?;
        self.absorb_gained();
        if self.state.flow.excess(x) > 0 {
            self.add_pending(x);
        }
        Ok(())
    }

    fn walk(&mut self, v0: VertexId) -> Result<WalkEnd, SolverError> {
        let net = self.state.net;
        self.walk_id += 1;
        let id = self.walk_id;
        let mut vertices = vec![v0];
        let mut steps: Vec<WalkStep> = Vec::new();
        self.walk_mark[v0] = id;
        self.walk_pos[v0] = 0;
        let mut x = v0;
        loop {
            let amount = self.state.flow.excess(x);
            debug_assert!(amount > 0);
            let Some(step) = self.simple_step(x, amount) else {
                if steps.is_empty() && self.state.active[x].is_none() && self.state.critical[x].is_none() {
                    self.state.stats.fallback_steps += 1;
                }
                self.basic_step_at(x)?;
                return Ok(WalkEnd::Event);
            };
            let phase = if step.forward { Phase::Push } else { Phase::Balance };
            self.apply_simple(step, amount, phase)?;
            let y = step.to;
            if net.is_terminal(y) || self.in_tree(y) {
                steps.push(step);
                self.graft(&vertices, &steps);
                if net.is_internal(y) {
                    self.add_pending(y);
                }
                return Ok(WalkEnd::Grafted);
            }
            if self.walk_mark[y] == id {
                let mut cycle_steps = steps[self.walk_pos[y]..].to_vec();
                cycle_steps.push(step);
                let cycle = ProperWalk {
                    start: y,
                    steps: cycle_steps,
                };
                cancel_cycle(&mut self.state, &cycle)?;
                self.state.stats.cycles_cancelled += 1;
                self.add_pending(y);
                return Ok(WalkEnd::Cycle);
            }
            self.walk_mark[y] = id;
            self.walk_pos[y] = vertices.len();
            vertices.push(y);
            steps.push(step);
            x = y;
        }
    }

    /// Hangs a finished walk below its last vertex, creating a new tree if
    /// that vertex is a terminal outside the forest.
    fn graft(&mut self, vertices: &[VertexId], steps: &[WalkStep]) {
        let y = steps.last().expect("graft needs a step").to;
        let t = if self.in_tree(y) {
            self.tree_index[y]
        } else {
            self.tree_mark[y] = self.generation;
            self.tree_index[y] = self.trees.len();
            self.parent[y] = None;
            self.depth[y] = 0;
            self.trees.push(Tree { vertices: vec![y] });
            self.trees.len() - 1
        };
        for (&v, &s) in vertices.iter().zip(steps).rev() {
            self.parent[v] = Some(s);
            self.depth[v] = self.depth[s.to] + 1;
            self.tree_mark[v] = self.generation;
            self.tree_index[v] = t;
            self.trees[t].vertices.push(v);
        }
    }

    fn requeue_forest(&mut self) {
        let net = self.state.net;
        for t in 0..self.trees.len() {
            for i in 0..self.trees[t].vertices.len() {
                let v = self.trees[t].vertices[i];
                if net.is_internal(v) && self.state.flow.excess(v) > 0 {
                    self.add_pending(v);
                }
            }
        }
        self.generation += 1;
    }

    /// Moves the collected excess of every tree to its root, deepest
    /// vertices first.
    fn drain_trees(&mut self) -> Result<DrainEnd, SolverError> {
        let net = self.state.net;
        self.state.phase = Phase::Tree;
        for t in 0..self.trees.len() {
            let verts = &self.trees[t].vertices;
            let max_depth = verts.iter().map(|&v| self.depth[v]).max().unwrap_or(0);
            let mut buckets = vec![Vec::new(); max_depth + 1];
            for &v in verts {
                buckets[self.depth[v]].push(v);
            }
            for bucket in buckets.iter().skip(1).rev() {
                for &x in bucket {
                    let amount = self.state.flow.excess(x);
                    if amount <= 0 {
                        continue;
                    }
                    let step = self.parent[x].expect("non-root tree vertex has a parent");
                    let simple = if step.forward {
                        debug_assert_eq!(self.state.active[x], Some(step.edge));
                        self.state.flow.residual(net, step.edge) > amount
                    } else {
                        debug_assert_eq!(self.state.critical[x], Some(step.edge));
                        self.state.flow.value(step.edge) > amount
                    };
                    if !simple {
                        self.basic_step_at(x)?;
                        return Ok(DrainEnd::Event);
                    }
                    self.apply_simple(step, amount, Phase::Tree)?;
                }
            }
        }
        self.state.stats.trees_drained += self.trees.len() as u64;
        self.trees.clear();
        Ok(DrainEnd::Drained)
    }
}

/// Runs the fast solver to completion.
pub fn run_fast(net: &Network) -> Result<Solution, SolverError> {
    run_fast_with(net, &SolveOptions::default())
}

pub fn run_fast_with(net: &Network, options: &SolveOptions) -> Result<Solution, SolverError> {
    let mut solver = FastSolver::with_options(net, options);
    while solver.advance_big_iteration()? != BigIterationOutcome::Solved {}
    Ok(solver.into_solution())
}
