//! Update-count harness: solves seeded random instances with both solvers
//! and prints one CSV row per run.
//!
//! Usage: `stableflow-bench [seeds-per-size] [n...]`

use stableflow_core::{random_instance, GeneratorParams, Solution, SolveOptions, SolverKind};

const DEFAULT_SIZES: [usize; 5] = [20, 40, 80, 160, 320];

fn row(n: usize, m: usize, seed: u64, solver: &str, sol: &Solution) -> String {
    let s = &sol.stats;
    format!(
        "{n},{m},{seed},{solver},{},{},{},{},{},{},{},{}",
        s.big_iterations,
        s.updates_total,
        s.updates_max_per_big_iteration,
        s.s_events,
        s.f_events,
        s.m_events,
        s.fallback_steps,
        s.cycles_cancelled,
    )
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = match args.first().map(|s| s.parse()) {
        None => 10,
        Some(Ok(k)) => k,
        Some(Err(e)) => {
            eprintln!("bad seed count: {e}");
            std::process::exit(2);
        }
    };
    let sizes: Vec<usize> = if args.len() > 1 {
        match args[1..].iter().map(|s| s.parse()).collect() {
            Ok(v) => v,
            Err(e) => {
                eprintln!("bad size: {e}");
                std::process::exit(2);
            }
        }
    } else {
        DEFAULT_SIZES.to_vec()
    };

    println!("n,m,seed,solver,big_iterations,updates_total,updates_max_per_big_iteration,s_events,f_events,m_events,fallback_steps,cycles_cancelled");
    for n in sizes {
        let mut p = GeneratorParams {
            n,
            m: 4 * n,
            cap_max: 10,
            sources: 2,
            sinks: 2,
        };
        p.m = p.m.min(p.max_edges());
        for seed in 0..seeds {
            let net = match random_instance(&p, seed) {
                Ok(net) => net,
                Err(e) => {
                    eprintln!("n={n} seed {seed}: {e}");
                    std::process::exit(2);
                }
            };
            for (name, kind) in [("basic", SolverKind::Basic), ("fast", SolverKind::Fast)] {
                match kind.run(&net, &SolveOptions::default()) {
                    Ok(sol) => println!("{}", row(n, p.m, seed, name, &sol)),
                    Err(e) => {
                        eprintln!("n={n} seed {seed} {name}: {e}");
                        std::process::exit(1);
                    }
                }
            }
        }
    }
}
