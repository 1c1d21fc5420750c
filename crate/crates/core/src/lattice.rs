//! Structure of the set of stable flows: completing stable preflows,
//! terminal agreement, the difference of two stable flows and the lattice
//! operations built from it.

use thiserror::Error;

use crate::flow::{classify, FlowAssignment, FlowClass};
use crate::network::{EdgeId, Network, Side, VertexId};
use crate::solver::{run_basic, SolverError, SolverState};
use crate::stability::{find_witness, StabilityError, StabilityMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("difference is not a circulation: {0}")]
    NotACirculation(String),
    #[error("component {component} has both left and right special pairs")]
    MixedOrientation { component: usize },
    #[error("{which} is not stable: blocking path {edges:?}")]
    UnstableResult { which: &'static str, edges: Vec<EdgeId> },
    #[error("input is not a stable preflow: {0}")]
    NotAStablePreflow(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// Whether `f` and `g` coincide on every edge touching a source or sink.
pub fn terminal_agreement(net: &Network, f: &FlowAssignment, g: &FlowAssignment) -> bool {
    (0..net.n_edges())
        .filter(|&e| net.is_terminal(net.tail(e)) || net.is_terminal(net.head(e)))
        .all(|e| f.value(e) == g.value(e))
}

/// Edge of a difference cycle. Edges of A are traversed along their
/// direction, edges of B against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleStep {
    pub edge: EdgeId,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffCycle {
    pub start: VertexId,
    pub steps: Vec<CycleStep>,
    pub weight: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentType {
    A,
    B,
    L,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

/// `f - g` split into the edges where `f` is larger (A) and where `g` is
/// larger (B), decomposed into weighted cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffDecomposition {
    pub a: Vec<EdgeId>,
    pub b: Vec<EdgeId>,
    /// `|f(e) - g(e)|` for every edge.
    pub omega: Vec<i64>,
    pub cycles: Vec<DiffCycle>,
    pub components: Vec<Component>,
    /// Component index of every edge in A ∪ B.
    pub component_of: Vec<Option<usize>>,
}

impl DiffDecomposition {
    pub fn is_empty(&self) -> bool {
        self.a.is_empty() && self.b.is_empty()
    }
}

/// Decomposes the difference of two flows. Both must agree on terminal
/// edges and have zero internal excess, otherwise the reoriented difference
/// is not a circulation.
pub fn decompose_difference(
    net: &Network,
    f: &FlowAssignment,
    g: &FlowAssignment,
) -> Result<DiffDecomposition, LatticeError> {
    let m = net.n_edges();
    let n = net.n_vertices();
    if let Some(e) =
        (0..m).find(|&e| f.value(e) != g.value(e) && (net.is_terminal(net.tail(e)) || net.is_terminal(net.head(e))))
    {
        return Err(LatticeError::NotACirculation(format!(
            "flows differ on terminal edge {e}"
        )));
    }
    let omega: Vec<i64> = (0..m).map(|e| (f.value(e) - g.value(e)).abs()).collect();
    let a: Vec<EdgeId> = (0..m).filter(|&e| f.value(e) > g.value(e)).collect();
    let b: Vec<EdgeId> = (0..m).filter(|&e| g.value(e) > f.value(e)).collect();
    let oriented = |e: EdgeId| {
        if f.value(e) > g.value(e) {
            (net.tail(e), net.head(e))
        } else {
            (net.head(e), net.tail(e))
        }
    };

    let mut balance = vec![0i64; n];
    let mut leaving: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    for &e in a.iter().chain(&b) {
        let (x, y) = oriented(e);
        balance[x] -= omega[e];
        balance[y] += omega[e];
        leaving[x].push(e);
    }
    if let Some(v) = (0..n).find(|&v| balance[v] != 0) {
        return Err(LatticeError::NotACirculation(format!(
            "imbalance {} at vertex {v}",
            balance[v]
        )));
    }
    for list in &mut leaving {
        list.sort_unstable();
    }

    let mut rest = omega.clone();
    let mut cycles = Vec::new();
    let mut pos = vec![usize::MAX; n];
    for start in 0..n {
        while let Some(&first) = leaving[start].iter().find(|&&e| rest[e] > 0) {
            let mut path_vertices = vec![start];
            let mut path_edges = vec![first];
            pos[start] = 0;
            let mut at = oriented(first).1;
            while pos[at] == usize::MAX {
                pos[at] = path_vertices.len();
                path_vertices.push(at);
                let next = leaving[at]
                    .iter()
                    .copied()
                    .find(|&e| rest[e] > 0)
                    .ok_or_else(|| LatticeError::NotACirculation(format!("walk stuck at vertex {at}")))?;
                path_edges.push(next);
                at = oriented(next).1;
            }
            let from = pos[at];
            for &v in &path_vertices {
                pos[v] = usize::MAX;
            }
            let edges = &path_edges[from..];
            let weight = edges.iter().map(|&e| rest[e]).min().expect("cycle has edges");
            for &e in edges {
                rest[e] -= weight;
            }
            cycles.push(DiffCycle {
                start: at,
                steps: edges
                    .iter()
                    .map(|&e| CycleStep {
                        edge: e,
                        forward: f.value(e) > g.value(e),
                    })
                    .collect(),
                weight,
            });
        }
    }

    let mut dsu: Vec<usize> = (0..n).collect();
    fn find(dsu: &mut [usize], mut x: usize) -> usize {
        while dsu[x] != x {
            dsu[x] = dsu[dsu[x]];
            x = dsu[x];
        }
        x
    }
    for &e in a.iter().chain(&b) {
        let (x, y) = (find(&mut dsu, net.tail(e)), find(&mut dsu, net.head(e)));
        dsu[x] = y;
    }
    let mut index_of_root = vec![usize::MAX; n];
    let mut components: Vec<Component> = Vec::new();
    let mut component_of = vec![None; m];
    for e in 0..m {
        if omega[e] == 0 {
            continue;
        }
        let root = find(&mut dsu, net.tail(e));
        if index_of_root[root] == usize::MAX {
            index_of_root[root] = components.len();
            components.push(Component {
                vertices: Vec::new(),
                edges: Vec::new(),
            });
        }
        let k = index_of_root[root];
        components[k].edges.push(e);
        component_of[e] = Some(k);
    }
    for v in 0..n {
        let root = find(&mut dsu, v);
        if index_of_root[root] != usize::MAX {
            components[index_of_root[root]].vertices.push(v);
        }
    }

    Ok(DiffDecomposition {
        a,
        b,
        omega,
        cycles,
        components,
        component_of,
    })
}

/// Orientation of a special pair: the A edge and the B edge on the same side
/// of `v`, listed in cycle order. Left means the first edge is preferred.
fn pair_is_left(net: &Network, side: Side, a_edge: EdgeId, b_edge: EdgeId) -> bool {
    match side {
        Side::In => net.in_rank(a_edge) < net.in_rank(b_edge),
        Side::Out => net.out_rank(b_edge) < net.out_rank(a_edge),
    }
}

/// Types every component of the difference. Rich components are typed by
/// the special pairs found on the decomposition cycles and, since any two
/// same-side A/B edges at a vertex lie on a common proper closed walk, at
/// every vertex touching both sets.
pub fn classify_components(net: &Network, dec: &DiffDecomposition) -> Result<Vec<ComponentType>, LatticeError> {
    let k = dec.components.len();
    let mut has_a = vec![false; k];
    let mut has_b = vec![false; k];
    for &e in &dec.a {
        has_a[dec.component_of[e].expect("difference edge has a component")] = true;
    }
    for &e in &dec.b {
        has_b[dec.component_of[e].expect("difference edge has a component")] = true;
    }
    let mut left = vec![false; k];
    let mut right = vec![false; k];
    let mut record = |comp: usize, is_left: bool| {
        if is_left {
            left[comp] = true;
        } else {
            right[comp] = true;
        }
    };

    let in_a = |e: EdgeId| dec.a.binary_search(&e).is_ok();
    for cycle in &dec.cycles {
        let len = cycle.steps.len();
        for i in 0..len {
            let e = cycle.steps[i];
            let e2 = cycle.steps[(i + 1) % len];
            if e.forward == e2.forward {
                continue;
            }
            // Entering along A and leaving against B: both are in-edges.
            let comp = dec.component_of[e.edge].expect("cycle edge has a component");
            let is_left = if e.forward {
                pair_is_left(net, Side::In, e.edge, e2.edge)
            } else {
                pair_is_left(net, Side::Out, e2.edge, e.edge)
            };
            record(comp, is_left);
        }
    }
    for v in net.internal_vertices() {
        for side in [Side::In, Side::Out] {
            let list = match side {
                Side::In => net.in_pref(v),
                Side::Out => net.out_pref(v),
            };
            let touched: Vec<EdgeId> = list.iter().copied().filter(|&e| dec.omega[e] > 0).collect();
            for &x in touched.iter().filter(|&&e| in_a(e)) {
                for &y in touched.iter().filter(|&&e| !in_a(e)) {
                    let comp = dec.component_of[x].expect("difference edge has a component");
                    record(comp, pair_is_left(net, side, x, y));
                }
            }
        }
    }

    (0..k)
        .map(|c| match (has_a[c], has_b[c]) {
            (true, false) => Ok(ComponentType::A),
            (false, true) => Ok(ComponentType::B),
            _ => match (left[c], right[c]) {
                (true, true) => Err(LatticeError::MixedOrientation { component: c }),
                (true, false) => Ok(ComponentType::L),
                (false, true) => Ok(ComponentType::R),
                (false, false) => Err(LatticeError::NotACirculation(format!(
                    "rich component {c} has no special vertex"
                ))),
            },
        })
        .collect()
}

/// Join and meet of two stable flows: `h` takes `f` on components of type A
/// and R and `g` on types B and L; `l` takes the opposite choice.
///
/// Both results are checked. Two vertex-disjoint components without special
/// vertices can combine into a flow with a blocking path, which is reported
/// as [`LatticeError::UnstableResult`].
pub fn join_meet(
    net: &Network,
    f: &FlowAssignment,
    g: &FlowAssignment,
) -> Result<(FlowAssignment, FlowAssignment), LatticeError> {
    let dec = decompose_difference(net, f, g)?;
    let types = classify_components(net, &dec)?;
    let mut h = f.values().to_vec();
    let mut l = f.values().to_vec();
    for (comp, ty) in dec.components.iter().zip(&types) {
        let h_takes_f = matches!(ty, ComponentType::A | ComponentType::R);
        for &e in &comp.edges {
            if h_takes_f {
                l[e] = g.value(e);
            } else {
                h[e] = g.value(e);
            }
        }
    }
    let (h, l) = (FlowAssignment::from_values(net, h), FlowAssignment::from_values(net, l));
    for (which, x) in [("join", &h), ("meet", &l)] {
        if let Some(w) = find_witness(net, x, StabilityMode::Flow)? {
            return Err(LatticeError::UnstableResult { which, edges: w.edges });
        }
    }
    Ok((h, l))
}

pub fn join(net: &Network, f: &FlowAssignment, g: &FlowAssignment) -> Result<FlowAssignment, LatticeError> {
    join_meet(net, f, g).map(|(h, _)| h)
}

pub fn meet(net: &Network, f: &FlowAssignment, g: &FlowAssignment) -> Result<FlowAssignment, LatticeError> {
    join_meet(net, f, g).map(|(_, l)| l)
}

/// `a` dominates `b` on an ordered edge list if they agree, or if some pivot
/// edge has `a > b` while `a >= b` on all earlier edges and `a <= b` on all
/// later ones.
pub fn dominates(order: &[EdgeId], a: &FlowAssignment, b: &FlowAssignment) -> bool {
    let diff: Vec<i64> = order.iter().map(|&e| a.value(e) - b.value(e)).collect();
    if diff.iter().all(|&d| d == 0) {
        return true;
    }
    (0..diff.len()).any(|i| diff[i] > 0 && diff[..i].iter().all(|&d| d >= 0) && diff[i + 1..].iter().all(|&d| d <= 0))
}

/// Checks the vertex-wise order between a join `h` (or meet) and the two
/// flows it was built from: `h` must dominate both on every out-list and be
/// dominated on every in-list; for a meet the roles flip.
pub fn respects_order(net: &Network, h: &FlowAssignment, f: &FlowAssignment, is_join: bool) -> bool {
    let through = |x: &FlowAssignment, v: VertexId| net.in_pref(v).iter().map(|&e| x.value(e)).sum::<i64>();
    net.internal_vertices()
        .filter(|&v| through(h, v) == through(f, v))
        .all(|v| {
            let (hi_out, lo_out) = if is_join { (h, f) } else { (f, h) };
            dominates(net.out_pref(v), hi_out, lo_out) && dominates(net.in_pref(v), lo_out, hi_out)
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompletionMethod {
    /// Solver state rebuilt around the preflow, then basic iterations.
    Reconstructed,
    /// Reconstruction failed or led to an unstable result; solved afresh.
    FromScratch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub flow: FlowAssignment,
    pub method: CompletionMethod,
    /// Why the reconstructed run was abandoned, if it was.
    pub fallback_reason: Option<String>,
}

/// Extends a stable preflow to a stable flow that carries at least as much
/// on every edge into a sink.
pub fn complete_preflow(net: &Network, f: &FlowAssignment) -> Result<Completion, LatticeError> {
    let class = classify(net, f);
    if class < FlowClass::Preflow {
        return Err(LatticeError::NotAStablePreflow(format!("class is {class}")));
    }
    if let Some(w) = find_witness(net, f, StabilityMode::Preflow)? {
        return Err(LatticeError::NotAStablePreflow(format!("blocking walk {:?}", w.edges)));
    }
    let attempt = || -> Result<FlowAssignment, String> {
        let mut state = SolverState::reconstruct(net, f).map_err(|e| e.to_string())?;
        state.push().map_err(|e| e.to_string())?;
        while state.step().map_err(|e| e.to_string())? {}
        let out = state.into_solution().flow;
        match find_witness(net, &out, StabilityMode::Flow) {
            Ok(None) => Ok(out),
            Ok(Some(w)) => Err(format!("result has blocking walk {:?}", w.edges)),
            Err(e) => Err(e.to_string()),
        }
    };
    match attempt() {
        Ok(flow) => Ok(Completion {
            flow,
            method: CompletionMethod::Reconstructed,
            fallback_reason: None,
        }),
        Err(reason) => Ok(Completion {
            flow: run_basic(net)?.flow,
            method: CompletionMethod::FromScratch,
            fallback_reason: Some(reason),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkSpec;
    use crate::stability::is_stable;

    fn two_cycle() -> Network {
        NetworkSpec::new(4)
            .source(0)
            .sink(1)
            .edge(0, 1, 1)
            .edge(2, 3, 1)
            .edge(3, 2, 1)
            .with_default_preferences()
            .build()
            .unwrap()
    }

    fn shortcut() -> Network {
        NetworkSpec::new(5)
            .source(0)
            .sink(4)
            .edge(0, 1, 5)
            .edge(1, 2, 5)
            .edge(2, 3, 5)
            .edge(1, 3, 5)
            .edge(3, 4, 2)
            .out_pref(1, vec![1, 3])
            .in_pref(3, vec![3, 2])
            .with_default_preferences()
            .build()
            .unwrap()
    }

    #[test]
    fn two_cycle_pair_is_one_type_a_cycle() {
        let net = two_cycle();
        let f = FlowAssignment::from_values(&net, vec![1, 1, 1]);
        let g = FlowAssignment::from_values(&net, vec![1, 0, 0]);
        assert!(terminal_agreement(&net, &f, &g));
        let dec = decompose_difference(&net, &f, &g).unwrap();
        assert_eq!(dec.a, vec![1, 2]);
        assert_eq!(dec.cycles.len(), 1);
        assert_eq!(dec.cycles[0].weight, 1);
        assert_eq!(classify_components(&net, &dec).unwrap(), vec![ComponentType::A]);
        let swapped = decompose_difference(&net, &g, &f).unwrap();
        assert_eq!(classify_components(&net, &swapped).unwrap(), vec![ComponentType::B]);
        let (h, l) = join_meet(&net, &f, &g).unwrap();
        assert_eq!(h, f);
        assert_eq!(l, g);
        assert_eq!(join(&net, &g, &f).unwrap(), f);
    }

    #[test]
    fn equal_flows_have_empty_difference() {
        let net = two_cycle();
        let f = FlowAssignment::from_values(&net, vec![1, 0, 0]);
        let dec = decompose_difference(&net, &f, &f).unwrap();
        assert!(dec.is_empty());
        assert!(dec.cycles.is_empty());
        assert_eq!(join_meet(&net, &f, &f).unwrap(), (f.clone(), f));
    }

    #[test]
    fn terminal_disagreement_is_not_a_circulation() {
        let net = two_cycle();
        let f = FlowAssignment::from_values(&net, vec![1, 0, 0]);
        let g = FlowAssignment::from_values(&net, vec![0, 0, 0]);
        assert!(!terminal_agreement(&net, &f, &g));
        assert!(matches!(
            decompose_difference(&net, &f, &g),
            Err(LatticeError::NotACirculation(_))
        ));
    }

    #[test]
    fn dominance_order() {
        let net = two_cycle();
        let x = FlowAssignment::from_values(&net, vec![1, 0, 1]);
        let y = FlowAssignment::from_values(&net, vec![0, 1, 1]);
        assert!(dominates(&[0, 1], &x, &y));
        assert!(!dominates(&[0, 1], &y, &x));
        assert!(dominates(&[0, 1, 2], &x, &x));
        let z = FlowAssignment::from_values(&net, vec![1, 1, 0]);
        // Differences (+1, +1, -1) wrt y on [0, 1, 2] is fine; (0, 0, -1) is not.
        assert!(dominates(
            &[0, 1, 2],
            &z,
            &FlowAssignment::from_values(&net, vec![0, 0, 1])
        ));
        assert!(!dominates(
            &[0, 1, 2],
            &FlowAssignment::from_values(&net, vec![0, 0, 1]),
            &x
        ));
    }

    #[test]
    fn completes_initial_preflow_of_shortcut() {
        let net = shortcut();
        let pre = SolverState::initial_iteration(&net).unwrap().flow().clone();
        let done = complete_preflow(&net, &pre).unwrap();
        assert_eq!(done.flow.values(), &[2, 0, 0, 2, 2]);
        assert!(done.flow.value(4) >= pre.value(4));
        assert!(is_stable(&net, &done.flow, StabilityMode::Flow).unwrap());
    }

    #[test]
    fn stable_flow_completes_to_itself() {
        let net = shortcut();
        let f = FlowAssignment::from_values(&net, vec![2, 0, 0, 2, 2]);
        let done = complete_preflow(&net, &f).unwrap();
        assert_eq!(done.flow, f);
        assert_eq!(done.method, CompletionMethod::Reconstructed);
    }

    #[test]
    fn unstable_input_is_rejected() {
        let net = shortcut();
        let f = FlowAssignment::from_values(&net, vec![2, 2, 2, 0, 2]);
        assert!(matches!(
            complete_preflow(&net, &f),
            Err(LatticeError::NotAStablePreflow(_))
        ));
    }
}
