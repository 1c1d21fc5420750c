//! Acceptance suite. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stableflow_core::flow::{classify, FlowAssignment, FlowClass};
use stableflow_core::lattice::{
    classify_components, complete_preflow, decompose_difference, join_meet, terminal_agreement, CompletionMethod,
    ComponentType, LatticeError,
};
use stableflow_core::network::{random_instance, GeneratorParams, Network, NetworkSpec};
use stableflow_core::oracle::{enumerate_stable, for_each_assignment, is_stable_by_definition, StableSet};
use stableflow_core::quasi::{solve_quasiflow, BoundsSpec, QuasiMode};
use stableflow_core::solver::SolverState;
use stableflow_core::solver::{run_basic, run_basic_with, run_fast, run_fast_with, Solution, SolveOptions, SolverKind};
use stableflow_core::stability::{find_witness, find_witness_unchecked, StabilityMode};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random instance with `n <= max_n`, at most `max_m` edges, capacities up to
/// `cap_max` and up to `max_terminals` sources and sinks.
fn instance(seed: u64, max_n: usize, max_m: usize, cap_max: i64, max_terminals: usize) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let sources = rng.gen_range(1..=max_terminals);
    let sinks = rng.gen_range(1..=max_terminals);
    let n = rng.gen_range((sources + sinks + 1).max(3)..=max_n);
    let mut p = GeneratorParams {
        n,
        m: 0,
        cap_max,
        sources,
        sinks,
    };
    p.m = rng.gen_range(1..=max_m.min(p.max_edges()));
    random_instance(&p, seed).expect("generator parameters are feasible")
}

fn main_sweep() -> Vec<Network> {
    (0..500).map(|seed| instance(seed, 30, 120, 10, 3)).collect()
}

fn tiny_sweep() -> Vec<(Network, StableSet)> {
    let mut out = Vec::new();
    let mut seed = 10_000;
    while out.len() < 200 {
        let net = instance(seed, 6, 10, 2, 2);
        seed += 1;
        if let Ok(set) = enumerate_stable(&net, &StabilityMode::Flow) {
            out.push((net, set));
        }
    }
    out
}

/// Tiny instances that have at least two stable flows.
fn multi_sweep() -> Vec<(Network, StableSet)> {
    (20_000..24_000)
        .map(|seed| instance(seed, 7, 10, 2, 2))
        .filter_map(|net| {
            let set = enumerate_stable(&net, &StabilityMode::Flow).ok()?;
            (set.flows.len() >= 2).then_some((net, set))
        })
        .collect()
}

fn check_flow(net: &Network, sol: &Solution, name: &str, seed: usize) -> Result<(), String> {
    ensure(classify(net, &sol.flow) == FlowClass::Flow, || {
        format!("{name} output on instance {seed} is not a flow")
    })?;
    let witness = find_witness(net, &sol.flow, StabilityMode::Flow).map_err(|e| e.to_string())?;
    ensure(witness.is_none(), || {
        format!("{name} output on instance {seed} has blocking path {witness:?}")
    })
}

fn criterion_1(sweep: &[Network]) -> Outcome {
    let start = Instant::now();
    for (i, net) in sweep.iter().enumerate() {
        let basic = run_basic(net).map_err(|e| format!("basic on instance {i}: {e}"))?;
        let fast = run_fast(net).map_err(|e| format!("fast on instance {i}: {e}"))?;
        check_flow(net, &basic, "basic", i)?;
        check_flow(net, &fast, "fast", i)?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("sweep took {secs:.1}s"))?;
    Ok(format!(
        "{} instances, both solvers stable flows, {secs:.2}s",
        sweep.len()
    ))
}

fn criterion_2(tiny: &[(Network, StableSet)]) -> Outcome {
    let mut assignments = 0u64;
    for (i, (net, set)) in tiny.iter().enumerate() {
        ensure(!set.is_empty(), || format!("instance {i} has no stable flow"))?;
        for (name, sol) in [("basic", run_basic(net)), ("fast", run_fast(net))] {
            let sol = sol.map_err(|e| format!("{name} on tiny instance {i}: {e}"))?;
            ensure(set.contains(&sol.flow), || {
                format!(
                    "{name} output {:?} on tiny instance {i} is not in the stable set",
                    sol.flow.values()
                )
            })?;
        }
        let zero = vec![0; net.n_vertices()];
        let modes = [
            StabilityMode::Flow,
            StabilityMode::GammaPreflow { gamma: &zero },
            StabilityMode::Quasiflow {
                beta: &zero,
                gamma: &zero,
            },
        ];
        let mut mismatch = None;
        assignments += for_each_assignment(net, |f| {
            for mode in &modes {
                let verifier = find_witness_unchecked(net, f, *mode).is_none();
                if mismatch.is_none() && verifier != is_stable_by_definition(net, f, mode) {
                    mismatch = Some(format!(
                        "{} mode, instance {i}, assignment {:?}",
                        mode.name(),
                        f.values()
                    ));
                }
            }
        })
        .map_err(|e| e.to_string())?;
        if let Some(m) = mismatch {
            return Err(format!("verifier disagrees with definition: {m}"));
        }
    }
    Ok(format!(
        "{} tiny instances, solver outputs in oracle sets, verifier exact on {assignments} assignments x 3 modes",
        tiny.len()
    ))
}

fn replay(net: &Network, sol: &Solution) -> Result<(), String> {
    let mut f = FlowAssignment::zero(net);
    for (k, step) in sol.trace.iter().enumerate() {
        if step.delta == 0 {
            return Err(format!("step {k} has zero delta"));
        }
        f.add(net, step.edge, step.delta);
        let x = f.value(step.edge);
        if x < 0 || x > net.capacity(step.edge) {
            return Err(format!("step {k} leaves edge {} at {x}", step.edge));
        }
    }
    ensure(f == sol.flow, || "replayed trace does not reproduce the output".into())?;
    ensure(sol.trace.len() as u64 == sol.stats.updates_total, || {
        "trace length differs from update count".into()
    })
}

fn criterion_3(sweep: &[Network]) -> Outcome {
    let options = SolveOptions { trace: true };
    let mut steps = 0;
    for (i, net) in sweep.iter().take(50).enumerate() {
        for (name, sol) in [
            ("basic", run_basic_with(net, &options)),
            ("fast", run_fast_with(net, &options)),
        ] {
            let sol = sol.map_err(|e| format!("{name} on instance {i}: {e}"))?;
            replay(net, &sol).map_err(|e| format!("{name} on instance {i}: {e}"))?;
            steps += sol.trace.len();
        }
    }
    Ok(format!(
        "50 instances, {steps} integral updates replayed within capacity bounds"
    ))
}

fn criterion_4(sweep: &[Network]) -> Outcome {
    let mut worst = (0, 0, 0);
    for (i, net) in sweep.iter().enumerate() {
        for (name, sol) in [("basic", run_basic(net)), ("fast", run_fast(net))] {
            let sol = sol.map_err(|e| format!("{name} on instance {i}: {e}"))?;
            for (e, ev) in sol.edge_events.iter().enumerate() {
                worst.0 = worst.0.max(ev.saturations);
                worst.1 = worst.1.max(ev.freeings);
                worst.2 = worst.2.max(ev.gamma_additions);
                ensure(
                    ev.saturations <= 1 && ev.freeings <= 1 && ev.gamma_additions <= 2,
                    || format!("{name} on instance {i}, edge {e}: {ev:?}"),
                )?;
            }
        }
    }
    Ok(format!(
        "per-edge maxima: saturations {}, freeings {}, Γ-additions {}",
        worst.0, worst.1, worst.2
    ))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for n in [20usize, 40, 80] {
        let m = 4 * n;
        let (mut worst_big, mut worst_total, mut fallback, mut bigs) = (0u64, 0u64, 0u64, 0u64);
        for seed in 0..30 {
            let p = GeneratorParams {
                n,
                m,
                cap_max: 10,
                sources: 1 + seed as usize % 3,
                sinks: 1 + seed as usize % 2,
            };
            let net = random_instance(&p, 50_000 + seed).map_err(|e| e.to_string())?;
            let sol = run_fast(&net).map_err(|e| format!("fast on n={n} seed {seed}: {e}"))?;
            check_flow(&net, &sol, "fast", seed as usize)?;
            let per = sol.big_iteration_updates.iter().copied().max().unwrap_or(0);
            ensure(per <= 10 * n as u64, || {
                format!("n={n} seed {seed}: {per} updates in one big iteration")
            })?;
            ensure(sol.stats.updates_total <= 20 * (n * m) as u64, || {
                format!("n={n} seed {seed}: {} updates in total", sol.stats.updates_total)
            })?;
            worst_big = worst_big.max(per);
            worst_total = worst_total.max(sol.stats.updates_total);
            fallback += sol.stats.fallback_steps;
            bigs += sol.stats.big_iterations;
        }
        let frac = fallback as f64 / bigs.max(1) as f64;
        lines.push(format!(
            "n={n}: max/big {worst_big} (≤{}), max total {worst_total} (≤{}), fallback {:.1}%{}",
            10 * n,
            20 * n * m,
            100.0 * frac,
            if frac < 0.2 { "" } else { " (above 20%)" }
        ));
    }
    Ok(lines.join("; "))
}

fn shortcut(cap: i64, sink_cap: i64) -> Network {
    NetworkSpec::new(5)
        .source(0)
        .sink(4)
        .edge(0, 1, cap)
        .edge(1, 2, cap)
        .edge(2, 3, cap)
        .edge(1, 3, cap)
        .edge(3, 4, sink_cap)
        .out_pref(1, vec![1, 3])
        .in_pref(3, vec![3, 2])
        .with_default_preferences()
        .build()
        .unwrap()
}

fn criterion_6() -> Outcome {
    let net = shortcut(5, 2);
    let sol = run_basic(&net).map_err(|e| e.to_string())?;
    ensure(sol.flow.values() == [2, 0, 0, 2, 2], || {
        format!("basic gave {:?}", sol.flow.values())
    })?;
    let cycling = shortcut(100, 99);
    let basic = run_basic(&cycling).map_err(|e| e.to_string())?;
    let fast = run_fast(&cycling).map_err(|e| e.to_string())?;
    check_flow(&cycling, &fast, "fast", 0)?;
    let bound = 10 * cycling.n_vertices() as u64;
    ensure(fast.stats.updates_total <= bound, || {
        format!("fast used {} updates on the cycling fixture", fast.stats.updates_total)
    })?;
    Ok(format!(
        "shortcut network: basic gives (2,0,0,2,2), value 2; cycling fixture: fast {} updates (≤{bound}) vs basic {}",
        fast.stats.updates_total, basic.stats.updates_total
    ))
}

fn criterion_7(sweep: &[Network]) -> Outcome {
    let opts = SolveOptions::default();
    for (i, net) in sweep.iter().take(200).enumerate() {
        let b = BoundsSpec::random(net, 3, 70_000 + i as u64);
        let gamma = solve_quasiflow(net, &b, QuasiMode::GammaPreflow, SolverKind::Fast, &opts)
            .map_err(|e| format!("gamma on instance {i}: {e}"))?;
        for v in net.internal_vertices() {
            let x = gamma.flow.excess(v);
            ensure((0..=b.gamma[v]).contains(&x), || {
                format!("instance {i}: γ-excess {x} at {v}")
            })?;
        }
        ensure(
            find_witness(net, &gamma.flow, b.gamma_mode())
                .map_err(|e| e.to_string())?
                .is_none(),
            || format!("γ-preflow on instance {i} is unstable"),
        )?;

        let quasi = solve_quasiflow(net, &b, QuasiMode::BetaGammaQuasiflow, SolverKind::Fast, &opts)
            .map_err(|e| format!("quasi on instance {i}: {e}"))?;
        let map = &quasi.mapping;
        for v in net.internal_vertices() {
            let x = quasi.flow.excess(v);
            ensure((-b.beta[v]..=b.gamma[v]).contains(&x), || {
                format!("instance {i}: quasi excess {x} at {v}")
            })?;
            let (to_sink, from_source) = map.aux_flows(&quasi.reduced.flow, v);
            ensure(to_sink == 0 || from_source == 0, || {
                format!("instance {i}: both auxiliary edges of {v} carry flow")
            })?;
            ensure(x == to_sink - from_source, || {
                format!("instance {i}: excess of {v} not mirrored")
            })?;
            let split = map.split_edge[v].expect("internal vertices are split");
            ensure(quasi.reduced.flow.value(split) < map.network.capacity(split), || {
                format!("instance {i}: split edge of {v} saturated")
            })?;
        }
        ensure(
            find_witness(net, &quasi.flow, b.quasi_mode())
                .map_err(|e| e.to_string())?
                .is_none(),
            || format!("quasiflow on instance {i} is unstable"),
        )?;
    }
    Ok("200 instances with γ,β ≤ 3: bounds exact, mode verifiers pass, at most one auxiliary edge used".into())
}

fn lattice_laws(net: &Network, set: &StableSet, f: &FlowAssignment, g: &FlowAssignment) -> Result<(), String> {
    ensure(terminal_agreement(net, f, g), || "terminal disagreement".into())?;
    let (h, l) = join_meet(net, f, g).map_err(|e| match e {
        LatticeError::MixedOrientation { .. } => "MixedOrientation on a stable pair".to_string(),
        other => other.to_string(),
    })?;
    let (h2, l2) = join_meet(net, g, f).map_err(|e| e.to_string())?;
    ensure(h == h2 && l == l2, || "not commutative".into())?;
    ensure(set.contains(&h) && set.contains(&l), || {
        "join or meet outside the stable set".into()
    })?;
    if f == g {
        ensure(h == *f && l == *f, || "not idempotent".into())?;
    }
    let (absorb, _) = join_meet(net, f, &l).map_err(|e| e.to_string())?;
    let (_, absorb2) = join_meet(net, f, &h).map_err(|e| e.to_string())?;
    ensure(absorb == *f && absorb2 == *f, || "absorption fails".into())
}

fn criterion_8(tiny: &[(Network, StableSet)], multi: &[(Network, StableSet)]) -> Outcome {
    let (mut pairs, mut rich) = (0, 0);
    let mut failures = Vec::new();
    for (i, (net, set)) in tiny.iter().chain(multi).enumerate() {
        for (a, f) in set.flows.iter().enumerate() {
            for g in &set.flows[a..] {
                pairs += 1;
                if let Err(why) = lattice_laws(net, set, f, g) {
                    failures.push(format!("set {i} {:?} vs {:?}: {why}", f.values(), g.values()));
                    continue;
                }
                let dec = decompose_difference(net, f, g).map_err(|e| e.to_string())?;
                let types = classify_components(net, &dec).map_err(|e| e.to_string())?;
                if types.iter().any(|t| matches!(t, ComponentType::L | ComponentType::R)) {
                    rich += 1;
                }
            }
        }
    }
    let sets = tiny.len() + multi.len();
    if let Some(first) = failures.first() {
        return Err(format!(
            "{} of {pairs} pairs over {sets} stable sets violate; first: {first}",
            failures.len()
        ));
    }
    Ok(format!(
        "{sets} stable sets, {pairs} pairs ({rich} with rich components): all laws hold"
    ))
}

fn criterion_9(sweep: &[Network]) -> Outcome {
    let mut reconstructed = 0;
    for (i, net) in sweep.iter().take(100).enumerate() {
        let pre = SolverState::initial_iteration(net)
            .map_err(|e| e.to_string())?
            .flow()
            .clone();
        let done = complete_preflow(net, &pre).map_err(|e| format!("instance {i}: {e}"))?;
        check_flow(
            net,
            &Solution {
                flow: done.flow.clone(),
                stats: Default::default(),
                edge_events: Vec::new(),
                big_iteration_updates: Vec::new(),
                trace: Vec::new(),
            },
            "complete_preflow",
            i,
        )?;
        for &t in net.sinks() {
            for &e in net.in_pref(t).iter().chain(incoming(net, t).iter()) {
                ensure(done.flow.value(e) >= pre.value(e), || {
                    format!("instance {i}: edge {e} into a sink shrank")
                })?;
            }
        }
        if done.method == CompletionMethod::Reconstructed {
            reconstructed += 1;
        }
    }
    Ok(format!(
        "100 initial preflows completed to stable flows, {reconstructed} via reconstructed state"
    ))
}

fn incoming(net: &Network, v: usize) -> Vec<usize> {
    (0..net.n_edges()).filter(|&e| net.head(e) == v).collect()
}

#[test]
fn acceptance_suite() {
    let sweep = main_sweep();
    let tiny = tiny_sweep();
    let multi = multi_sweep();
    let results: Vec<(&str, Outcome)> = vec![
        ("existence and solver correctness", criterion_1(&sweep)),
        ("oracle equivalence", criterion_2(&tiny)),
        ("integrality via trace replay", criterion_3(&sweep)),
        ("per-edge event bounds", criterion_4(&sweep)),
        ("fast solver update counts", criterion_5()),
        ("worked example and cycling fixture", criterion_6()),
        ("quasiflow reductions", criterion_7(&sweep)),
        ("terminal agreement and lattice laws", criterion_8(&tiny, &multi)),
        ("preflow completion", criterion_9(&sweep)),
    ];
    let mut failed = 0;
    for (k, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", k + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
