//! Brute force over every integral assignment of a tiny network, with
//! stability decided straight from the path definition by enumerating every
//! unsaturated path. Used as ground truth
//! for the solvers, the verifier and the lattice operations.

use thiserror::Error;

use crate::flow::{classify, FlowAssignment, FlowClass};
use crate::lattice::{join_meet, respects_order, terminal_agreement, LatticeError};
use crate::network::{EdgeId, Network, VertexKind};
use crate::solver::{run_basic, run_fast, SolverError};
use crate::stability::{find_witness_unchecked, StabilityMode};

/// Largest number of candidate assignments the oracle will enumerate (3^10).
pub const MAX_ASSIGNMENTS: u128 = 59_049;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {0} candidate assignments, the oracle handles at most 59049")]
    InstanceTooLarge(u128),
}

/// Product of `c(e) + 1` over all edges, saturating.
pub fn assignment_count(net: &Network) -> u128 {
    net.edges()
        .iter()
        .fold(1u128, |acc, e| acc.saturating_mul(e.capacity as u128 + 1))
}

/// Calls `visit` on every assignment with `0 <= f(e) <= c(e)`, in
/// lexicographic order of the value vector.
pub fn for_each_assignment(net: &Network, mut visit: impl FnMut(&FlowAssignment)) -> Result<u64, OracleError> {
    let count = assignment_count(net);
    if count > MAX_ASSIGNMENTS {
        return Err(OracleError::InstanceTooLarge(count));
    }
    let m = net.n_edges();
    let mut f = FlowAssignment::zero(net);
    let mut visited = 0;
    loop {
        visit(&f);
        visited += 1;
        let Some(e) = (0..m).rev().find(|&e| f.value(e) < net.capacity(e)) else {
            return Ok(visited);
        };
        f.add(net, e, 1);
        for later in e + 1..m {
            f.set(net, later, 0);
        }
    }
}

/// Whether the excesses of `f` fit `mode`: zero internal excess for flows,
/// nonnegative for preflows, within the bounds for the other two.
pub fn within_bounds(net: &Network, f: &FlowAssignment, mode: &StabilityMode) -> bool {
    if net.sinks().iter().any(|&t| f.excess(t) < 0) {
        return false;
    }
    net.internal_vertices().all(|v| {
        let x = f.excess(v);
        match mode {
            StabilityMode::Flow => x == 0,
            StabilityMode::Preflow => x >= 0,
            StabilityMode::GammaPreflow { gamma } => 0 <= x && x <= gamma[v],
            StabilityMode::Quasiflow { beta, gamma } => -beta[v] <= x && x <= gamma[v],
        }
    })
}

/// Enumerates unsaturated paths (simple, or closing up at their first
/// vertex) and returns one dominated neither at its first nor at its last
/// vertex.
pub fn blocking_walk_by_definition(net: &Network, f: &FlowAssignment, mode: &StabilityMode) -> Option<Vec<EdgeId>> {
    let strong_start = matches!(
        mode,
        StabilityMode::GammaPreflow { .. } | StabilityMode::Quasiflow { .. }
    );
    let strong_end = matches!(mode, StabilityMode::Quasiflow { .. });
    let unsaturated = |e: EdgeId| f.value(e) < net.capacity(e);
    let dominated_at_start = |e: EdgeId| {
        let u = net.tail(e);
        net.kind(u) == VertexKind::Internal
            && net.later_out(e).iter().all(|&x| f.value(x) == 0)
            && !(strong_start && f.excess(u) > 0)
    };
    let dominated_at_end = |e: EdgeId| {
        let v = net.head(e);
        net.kind(v) == VertexKind::Internal
            && net.later_in(e).iter().all(|&x| f.value(x) == 0)
            && !(strong_end && f.excess(v) < 0)
    };

    struct Search<'a> {
        net: &'a Network,
        start: usize,
        on_path: Vec<bool>,
        path: Vec<EdgeId>,
    }

    fn extend(s: &mut Search, unsaturated: &dyn Fn(EdgeId) -> bool, end_ok: &dyn Fn(EdgeId) -> bool) -> bool {
        let last = *s.path.last().expect("path is nonempty");
        if !end_ok(last) {
            return true;
        }
        let v = s.net.head(last);
        if v == s.start {
            return false;
        }
        for &e in s.net.out_pref(v) {
            let w = s.net.head(e);
            if !unsaturated(e) || (s.on_path[w] && w != s.start) {
                continue;
            }
            s.on_path[w] = true;
            s.path.push(e);
            if extend(s, unsaturated, end_ok) {
                return true;
            }
            s.path.pop();
            s.on_path[w] = w == s.start;
        }
        false
    }

    for e in (0..net.n_edges()).filter(|&e| unsaturated(e) && !dominated_at_start(e)) {
        let start = net.tail(e);
        let mut s = Search {
            net,
            start,
            on_path: vec![false; net.n_vertices()],
            path: vec![e],
        };
        s.on_path[start] = true;
        s.on_path[net.head(e)] = true;
        if extend(&mut s, &unsaturated, &dominated_at_end) {
            return Some(s.path);
        }
    }
    None
}

pub fn is_stable_by_definition(net: &Network, f: &FlowAssignment, mode: &StabilityMode) -> bool {
    blocking_walk_by_definition(net, f, mode).is_none()
}

/// Every stable assignment of a tiny instance, in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StableSet {
    pub flows: Vec<FlowAssignment>,
}

impl StableSet {
    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn contains(&self, f: &FlowAssignment) -> bool {
        self.flows.binary_search_by(|x| x.values().cmp(f.values())).is_ok()
    }
}

/// All assignments within the excess bounds of `mode` that pass the
/// definition-level stability check.
pub fn enumerate_stable(net: &Network, mode: &StabilityMode) -> Result<StableSet, OracleError> {
    let mut flows = Vec::new();
    for_each_assignment(net, |f| {
        if within_bounds(net, f, mode) && is_stable_by_definition(net, f, mode) {
            flows.push(f.clone());
        }
    })?;
    Ok(StableSet { flows })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub assignments: u64,
    pub stable_flows: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossCheckError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no stable flow exists")]
    EmptyStableSet,
    #[error("{solver} solver failed: {error}")]
    Solver { solver: &'static str, error: SolverError },
    #[error("{solver} solver returned {values:?}, which is not a stable flow")]
    SolverOutsideStableSet { solver: &'static str, values: Vec<i64> },
    #[error("verifier says stable={verifier} but definition says stable={definition} in {mode} mode for {values:?}")]
    VerifierDisagrees {
        mode: &'static str,
        values: Vec<i64>,
        verifier: bool,
        definition: bool,
    },
    #[error("stable flows {first:?} and {second:?} differ on a terminal edge")]
    TerminalDisagreement { first: Vec<i64>, second: Vec<i64> },
    #[error("lattice operations on {first:?} and {second:?}: {detail}")]
    Lattice {
        first: Vec<i64>,
        second: Vec<i64>,
        detail: String,
    },
}

/// Runs every oracle-backed check on one instance: both solvers land in the
/// stable set, the verifier agrees with the definition on every assignment,
/// stable flows agree on terminal edges, and join/meet behave as lattice
/// operations.
pub fn cross_check(net: &Network) -> Result<CrossCheckReport, CrossCheckError> {
    let zero = vec![0; net.n_vertices()];
    let modes = [
        StabilityMode::Flow,
        StabilityMode::GammaPreflow { gamma: &zero },
        StabilityMode::Quasiflow {
            beta: &zero,
            gamma: &zero,
        },
    ];
    let mut flows = Vec::new();
    let mut disagreement = None;
    let assignments = for_each_assignment(net, |f| {
        if disagreement.is_some() {
            return;
        }
        let mut stable_flow = false;
        for mode in &modes {
            let verifier = find_witness_unchecked(net, f, *mode).is_none();
            let definition = is_stable_by_definition(net, f, mode);
            if verifier != definition {
                disagreement = Some(CrossCheckError::VerifierDisagrees {
                    mode: mode.name(),
                    values: f.values().to_vec(),
                    verifier,
                    definition,
                });
                return;
            }
            stable_flow |= definition && matches!(mode, StabilityMode::Flow);
        }
        if stable_flow && classify(net, f) == FlowClass::Flow {
            flows.push(f.clone());
        }
    })?;
    if let Some(err) = disagreement {
        return Err(err);
    }
    let set = StableSet { flows };
    if set.is_empty() {
        return Err(CrossCheckError::EmptyStableSet);
    }
    for (solver, run) in [("basic", run_basic as fn(&Network) -> _), ("fast", run_fast)] {
        let sol = run(net).map_err(|error| CrossCheckError::Solver { solver, error })?;
        if !set.contains(&sol.flow) {
            return Err(CrossCheckError::SolverOutsideStableSet {
                solver,
                values: sol.flow.into_values(),
            });
        }
    }

    let mut pairs = 0;
    for (i, f) in set.flows.iter().enumerate() {
        for g in &set.flows[i..] {
            pairs += 1;
            if !terminal_agreement(net, f, g) {
                return Err(CrossCheckError::TerminalDisagreement {
                    first: f.values().to_vec(),
                    second: g.values().to_vec(),
                });
            }
            check_pair(net, &set, f, g).map_err(|detail| CrossCheckError::Lattice {
                first: f.values().to_vec(),
                second: g.values().to_vec(),
                detail,
            })?;
        }
    }
    Ok(CrossCheckReport {
        assignments,
        stable_flows: set.len(),
        pairs,
    })
}

fn check_pair(net: &Network, set: &StableSet, f: &FlowAssignment, g: &FlowAssignment) -> Result<(), String> {
    let text = |e: LatticeError| e.to_string();
    let (h, l) = join_meet(net, f, g).map_err(text)?;
    let (h2, l2) = join_meet(net, g, f).map_err(text)?;
    if h != h2 || l != l2 {
        return Err("join or meet is not commutative".into());
    }
    if !set.contains(&h) || !set.contains(&l) {
        return Err("join or meet is not a stable flow".into());
    }
    if f == g && (h != *f || l != *f) {
        return Err("join or meet is not idempotent".into());
    }
    let (absorb_join, _) = join_meet(net, f, &l).map_err(text)?;
    let (_, absorb_meet) = join_meet(net, f, &h).map_err(text)?;
    if absorb_join != *f || absorb_meet != *f {
        return Err("absorption fails".into());
    }
    for x in [f, g] {
        if !respects_order(net, &h, x, true) || !respects_order(net, &l, x, false) {
            return Err("vertex-wise domination order is violated".into());
        }
    }
    Ok(())
}
