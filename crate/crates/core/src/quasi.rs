//! γ-preflows and (β,γ)-quasiflows via network transformations.
//!
//! A γ-preflow lets every internal vertex keep up to γ(v) units of excess; a
//! (β,γ)-quasiflow additionally lets it emit up to β(v) units more than it
//! receives. Both problems reduce to plain stable flows: the surplus is routed
//! to a fresh sink t★ over a least preferred edge, and the deficit is drawn
//! from a fresh source s★ after splitting the vertex in two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flow::FlowAssignment;
use crate::network::{EdgeId, Network, NetworkError, NetworkSpec, VertexId, MAX_CAPACITY};
use crate::solver::{Solution, SolveOptions, SolverError, SolverKind};
use crate::stability::StabilityMode;

/// Excess bounds indexed by vertex id. Terminal entries must be zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsSpec {
    pub gamma: Vec<i64>,
    pub beta: Vec<i64>,
}

impl BoundsSpec {
    pub fn zero(n_vertices: usize) -> Self {
        BoundsSpec {
            gamma: vec![0; n_vertices],
            beta: vec![0; n_vertices],
        }
    }

    /// Seeded bounds drawn uniformly from `0..=max` on internal vertices.
    pub fn random(net: &Network, max: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = BoundsSpec::zero(net.n_vertices());
        for v in net.internal_vertices() {
            b.gamma[v] = rng.gen_range(0..=max);
            b.beta[v] = rng.gen_range(0..=max);
        }
        b
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().chain(&self.beta).all(|&x| x == 0)
    }

    pub fn validate(&self, net: &Network) -> Result<(), QuasiError> {
        let n = net.n_vertices();
        if self.gamma.len() != n || self.beta.len() != n {
            return Err(QuasiError::BoundsLength {
                expected: n,
                gamma: self.gamma.len(),
                beta: self.beta.len(),
            });
        }
        for v in 0..n {
            for (name, value) in [("gamma", self.gamma[v]), ("beta", self.beta[v])] {
                if !(0..=MAX_CAPACITY).contains(&value) {
                    return Err(QuasiError::BoundOutOfRange { vertex: v, name, value });
                }
                if value != 0 && net.is_terminal(v) {
                    return Err(QuasiError::BoundOnTerminal { vertex: v, name });
                }
            }
        }
        Ok(())
    }

    pub fn gamma_mode(&self) -> StabilityMode<'_> {
        StabilityMode::GammaPreflow { gamma: &self.gamma }
    }

    pub fn quasi_mode(&self) -> StabilityMode<'_> {
        StabilityMode::Quasiflow {
            beta: &self.beta,
            gamma: &self.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuasiError {
    #[error("bound vectors must have {expected} entries (gamma has {gamma}, beta has {beta})")]
    BoundsLength { expected: usize, gamma: usize, beta: usize },
    #[error("{name} bound {value} of vertex {vertex} is outside [0, 2^31]")]
    BoundOutOfRange {
        vertex: VertexId,
        name: &'static str,
        value: i64,
    },
    #[error("{name} bound given for terminal {vertex}")]
    BoundOnTerminal { vertex: VertexId, name: &'static str },
    #[error("split edge of vertex {0} would exceed the capacity limit")]
    CapacityOverflow(VertexId),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Reduced network plus where every piece of the original ended up.
///
/// Original edge `e` keeps id `e` in the reduced network; original vertex `v`
/// keeps id `v` (for split vertices this is the in-half v′).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMapping {
    pub network: Network,
    pub original_vertices: usize,
    pub original_edges: usize,
    pub extra_sink: VertexId,
    pub extra_source: Option<VertexId>,
    /// Out-half v″ of each split vertex.
    pub out_half: Vec<Option<VertexId>>,
    /// Edge v′v″ of each split vertex.
    pub split_edge: Vec<Option<EdgeId>>,
    /// Edge into t★, present when γ(v) > 0.
    pub gamma_edge: Vec<Option<EdgeId>>,
    /// Edge out of s★, present when β(v) > 0.
    pub beta_edge: Vec<Option<EdgeId>>,
}

impl ReductionMapping {
    /// Restricts a reduced assignment to the original edges.
    pub fn pull_back(&self, original: &Network, reduced: &FlowAssignment) -> FlowAssignment {
        FlowAssignment::from_values(original, reduced.values()[..self.original_edges].to_vec())
    }

    /// Flows on the γ and β edges of `v`.
    pub fn aux_flows(&self, reduced: &FlowAssignment, v: VertexId) -> (i64, i64) {
        let on = |e: Option<EdgeId>| e.map_or(0, |e| reduced.value(e));
        (on(self.gamma_edge[v]), on(self.beta_edge[v]))
    }

    pub fn is_aux_edge(&self, e: EdgeId) -> bool {
        e >= self.original_edges
    }
}

fn base_mapping(
    net: &Network,
    network: Network,
    extra_sink: VertexId,
    extra_source: Option<VertexId>,
) -> ReductionMapping {
    let n = net.n_vertices();
    ReductionMapping {
        network,
        original_vertices: n,
        original_edges: net.n_edges(),
        extra_sink,
        extra_source,
        out_half: vec![None; n],
        split_edge: vec![None; n],
        gamma_edge: vec![None; n],
        beta_edge: vec![None; n],
    }
}

/// Adds a fresh sink t★ and, for every internal v with γ(v) > 0, a least
/// preferred edge v→t★ of capacity γ(v).
pub fn reduce_gamma(net: &Network, gamma: &[i64]) -> Result<ReductionMapping, QuasiError> {
    let mut bounds = BoundsSpec::zero(net.n_vertices());
    bounds.gamma = gamma.to_vec();
    bounds.validate(net)?;
    let n = net.n_vertices();
    let t_star = n;
    let mut spec = net.to_spec();
    spec.n_vertices = n + 1;
    spec.sinks.push(t_star);
    let mut gamma_edge = vec![None; n];
    for v in net.internal_vertices().filter(|&v| gamma[v] > 0) {
        let e = spec.edges.len();
        spec = spec.edge(v, t_star, gamma[v]);
        spec.out_pref.entry(v).or_default().push(e);
        gamma_edge[v] = Some(e);
    }
    let mut mapping = base_mapping(net, spec.build()?, t_star, None);
    mapping.gamma_edge = gamma_edge;
    Ok(mapping)
}

/// Splits every internal v into v′ (keeping the in-edges) and v″ (taking the
/// out-edges) joined by an edge of non-binding capacity. Surplus leaves v′
/// for t★ and deficit enters v″ from s★, both over edges ranked after v′v″.
pub fn reduce_beta_gamma(net: &Network, bounds: &BoundsSpec) -> Result<ReductionMapping, QuasiError> {
    bounds.validate(net)?;
    let n = net.n_vertices();
    let t_star = n;
    let s_star = n + 1;
    let internal: Vec<VertexId> = net.internal_vertices().collect();
    let mut out_half = vec![None; n];
    for (k, &v) in internal.iter().enumerate() {
        out_half[v] = Some(n + 2 + k);
    }
    let tail_of = |u: VertexId| out_half[u].unwrap_or(u);

    let mut spec = NetworkSpec::new(n + 2 + internal.len());
    spec.sources = net.sources().to_vec();
    spec.sources.push(s_star);
    spec.sinks = net.sinks().to_vec();
    spec.sinks.push(t_star);
    for edge in net.edges() {
        spec = spec.edge(tail_of(edge.tail), edge.head, edge.capacity);
    }
    let mut split_edge = vec![None; n];
    let mut gamma_edge = vec![None; n];
    let mut beta_edge = vec![None; n];
    for &v in &internal {
        let v2 = out_half[v].expect("internal vertices are split");
        let inflow: i64 = net.in_pref(v).iter().map(|&e| net.capacity(e)).sum();
        let cap = inflow + bounds.beta[v] + 1;
        if cap > MAX_CAPACITY {
            return Err(QuasiError::CapacityOverflow(v));
        }
        let split = spec.edges.len();
        spec = spec.edge(v, v2, cap);
        split_edge[v] = Some(split);
        let mut v1_out = vec![split];
        let mut v2_in = vec![split];
        if bounds.gamma[v] > 0 {
            let e = spec.edges.len();
            spec = spec.edge(v, t_star, bounds.gamma[v]);
            v1_out.push(e);
            gamma_edge[v] = Some(e);
        }
        if bounds.beta[v] > 0 {
            let e = spec.edges.len();
            spec = spec.edge(s_star, v2, bounds.beta[v]);
            v2_in.push(e);
            beta_edge[v] = Some(e);
        }
        if !net.in_pref(v).is_empty() {
            spec = spec.in_pref(v, net.in_pref(v));
        }
        spec = spec.out_pref(v, v1_out).in_pref(v2, v2_in);
        if !net.out_pref(v).is_empty() {
            spec = spec.out_pref(v2, net.out_pref(v));
        }
    }
    let mut mapping = base_mapping(net, spec.build()?, t_star, Some(s_star));
    mapping.out_half = out_half;
    mapping.split_edge = split_edge;
    mapping.gamma_edge = gamma_edge;
    mapping.beta_edge = beta_edge;
    Ok(mapping)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuasiMode {
    GammaPreflow,
    BetaGammaQuasiflow,
}

/// A pulled-back solution together with the reduced run it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiSolution {
    pub flow: FlowAssignment,
    pub mapping: ReductionMapping,
    pub reduced: Solution,
}

/// Solves the reduced problem and pulls the result back. In
/// [`QuasiMode::GammaPreflow`] the β bounds are ignored.
pub fn solve_quasiflow(
    net: &Network,
    bounds: &BoundsSpec,
    mode: QuasiMode,
    solver: SolverKind,
    options: &SolveOptions,
) -> Result<QuasiSolution, QuasiError> {
    let mapping = match mode {
        QuasiMode::GammaPreflow => reduce_gamma(net, &bounds.gamma)?,
        QuasiMode::BetaGammaQuasiflow => reduce_beta_gamma(net, bounds)?,
    };
    let reduced = solver.run(&mapping.network, options)?;
    let flow = mapping.pull_back(net, &reduced.flow);
    Ok(QuasiSolution { flow, mapping, reduced })
}
