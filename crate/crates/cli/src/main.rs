use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use stableflow_core::io::parse_allocation;
use stableflow_core::lattice::join_meet;
use stableflow_core::network::from_allocation;
use stableflow_core::oracle::{cross_check, enumerate_stable, CrossCheckError};
use stableflow_core::quasi::{reduce_beta_gamma, reduce_gamma, solve_quasiflow};
use stableflow_core::{
    find_witness, format_flow, format_instance, parse_flow, parse_instance, random_instance, BoundsSpec,
    GeneratorParams, Instance, QuasiMode, Solution, SolveOptions, SolverKind, StabilityMode,
};

/// Stable flows in networks with preference orders.
#[derive(Parser)]
#[command(name = "stableflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a stable flow, γ-preflow or (β,γ)-quasiflow.
    Solve(SolveArgs),
    /// Check a flow for stability; exits with 1 when a blocking path exists.
    Verify {
        instance: PathBuf,
        flow: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Flow)]
        mode: Mode,
    },
    /// List every stable flow of a tiny instance by brute force.
    Oracle {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Flow)]
        mode: Mode,
    },
    /// Compare solvers, verifier and lattice operations with the oracle on
    /// generated instances.
    Crosscheck {
        /// Seed range such as `0..200`.
        #[arg(long, value_parser = parse_range)]
        seeds: Range<u64>,
        #[command(flatten)]
        gen: GenParams,
    },
    /// Print a seeded random instance.
    Gen {
        #[command(flatten)]
        gen: GenParams,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add random excess bounds up to this value.
        #[arg(long, default_value_t = 0)]
        bound_max: i64,
    },
    /// Join or meet of two stable flows.
    Lattice {
        #[arg(value_enum)]
        op: LatticeOp,
        instance: PathBuf,
        flow_a: PathBuf,
        flow_b: PathBuf,
    },
    /// Print the plain network an instance reduces to.
    Reduce {
        #[arg(value_enum)]
        kind: Reduction,
        instance: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, conflicts_with = "fast")]
    basic: bool,
    #[arg(long)]
    fast: bool,
    /// Allow bounded excess at internal vertices (γ from the instance).
    #[arg(long, conflicts_with = "quasi")]
    gamma: bool,
    /// Allow bounded excess and deficit (β and γ from the instance).
    #[arg(long)]
    quasi: bool,
    /// Print every elementary update to stderr. Edge ids refer to the
    /// reduced network under --gamma and --quasi.
    #[arg(long)]
    trace: bool,
    /// Print run counters as JSON to stderr.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct GenParams {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    cap_max: i64,
    #[arg(long, default_value_t = 1)]
    sources: usize,
    #[arg(long, default_value_t = 1)]
    sinks: usize,
}

impl GenParams {
    fn params(&self) -> GeneratorParams {
        GeneratorParams {
            n: self.n,
            m: self.m,
            cap_max: self.cap_max,
            sources: self.sources,
            sinks: self.sinks,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Flow,
    Preflow,
    Gamma,
    Quasi,
}

impl Mode {
    fn with<'a>(self, bounds: &'a BoundsSpec) -> StabilityMode<'a> {
        match self {
            Mode::Flow => StabilityMode::Flow,
            Mode::Preflow => StabilityMode::Preflow,
            Mode::Gamma => bounds.gamma_mode(),
            Mode::Quasi => bounds.quasi_mode(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeOp {
    Join,
    Meet,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduction {
    /// Stable allocation instance to a stable flow network.
    Sa,
    Gamma,
    Quasi,
}

fn parse_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected `a..b`")?;
    let a: u64 = a.parse().map_err(|e| format!("{a}: {e}"))?;
    let b: u64 = b.parse().map_err(|e| format!("{b}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok(a..b)
}

/// Reads a file, or stdin for `-`.
fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn report(sol: &Solution, args: &SolveArgs) -> Result<()> {
    let mut err = io::stderr().lock();
    if args.trace {
        for step in &sol.trace {
            writeln!(err, "{step}")?;
        }
    }
    if args.stats {
        writeln!(err, "{}", serde_json::to_string(&sol.stats)?)?;
    }
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<String> {
    let inst = read_instance(&args.instance)?;
    let net = &inst.network;
    let kind = if args.basic {
        SolverKind::Basic
    } else {
        SolverKind::Fast
    };
    let options = SolveOptions { trace: args.trace };
    let quasi = if args.gamma {
        Some(QuasiMode::GammaPreflow)
    } else if args.quasi {
        Some(QuasiMode::BetaGammaQuasiflow)
    } else {
        None
    };
    match quasi {
        None => {
            let sol = kind.run(net, &options)?;
            report(&sol, args)?;
            Ok(format_flow(net, &sol.flow, false))
        }
        Some(mode) => {
            let q = solve_quasiflow(net, &inst.bounds, mode, kind, &options)?;
            report(&q.reduced, args)?;
            Ok(format_flow(net, &q.flow, true))
        }
    }
}

fn run(cli: Cli) -> Result<(String, ExitCode)> {
    let ok = |s: String| Ok((s, ExitCode::SUCCESS));
    match cli.command {
        Command::Solve(args) => ok(solve(&args)?),
        Command::Verify { instance, flow, mode } => {
            let inst = read_instance(&instance)?;
            let f =
                parse_flow(&inst.network, &read_text(&flow)?).with_context(|| format!("parsing {}", flow.display()))?;
            match find_witness(&inst.network, &f, mode.with(&inst.bounds))? {
                None => ok("STABLE\n".into()),
                Some(w) => {
                    let edges: Vec<String> = w.edges.iter().map(|e| e.to_string()).collect();
                    Ok((format!("UNSTABLE {}\n", edges.join(" ")), ExitCode::from(1)))
                }
            }
        }
        Command::Oracle { instance, mode } => {
            let inst = read_instance(&instance)?;
            let set = enumerate_stable(&inst.network, &mode.with(&inst.bounds))?;
            let mut out = format!("stable {}\n", set.len());
            for f in &set.flows {
                let values: Vec<String> = f.values().iter().map(|x| x.to_string()).collect();
                writeln!(out, "flow {}", values.join(" "))?;
            }
            ok(out)
        }
        Command::Crosscheck { seeds, gen } => {
            let params = gen.params();
            let results: Vec<(u64, Result<Option<usize>, String>)> = seeds
                .clone()
                .into_par_iter()
                .map(|seed| {
                    let outcome = random_instance(&params, seed)
                        .map_err(|e| e.to_string())
                        .and_then(|net| match cross_check(&net) {
                            Ok(r) => Ok(Some(r.stable_flows)),
                            Err(CrossCheckError::Oracle(_)) => Ok(None),
                            Err(e) => Err(e.to_string()),
                        });
                    (seed, outcome)
                })
                .collect();
            let mut out = String::new();
            let (mut passed, mut skipped, mut failed) = (0, 0, 0);
            for (seed, outcome) in results {
                match outcome {
                    Ok(Some(_)) => passed += 1,
                    Ok(None) => skipped += 1,
                    Err(e) => {
                        failed += 1;
                        writeln!(out, "seed {seed}: FAIL {e}")?;
                    }
                }
            }
            writeln!(out, "passed {passed} skipped {skipped} failed {failed}")?;
            let code = if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            Ok((out, code))
        }
        Command::Gen { gen, seed, bound_max } => {
            let net = random_instance(&gen.params(), seed)?;
            if bound_max < 0 {
                bail!("--bound-max must be non-negative");
            }
            let bounds = (bound_max > 0).then(|| BoundsSpec::random(&net, bound_max, seed));
            ok(format_instance(&net, bounds.as_ref()))
        }
        Command::Lattice {
            op,
            instance,
            flow_a,
            flow_b,
        } => {
            let inst = read_instance(&instance)?;
            let net = &inst.network;
            let f = parse_flow(net, &read_text(&flow_a)?).with_context(|| format!("parsing {}", flow_a.display()))?;
            let g = parse_flow(net, &read_text(&flow_b)?).with_context(|| format!("parsing {}", flow_b.display()))?;
            for (path, x) in [(&flow_a, &f), (&flow_b, &g)] {
                if let Some(w) = find_witness(net, x, StabilityMode::Flow)? {
                    bail!("{} is not a stable flow: blocking path {:?}", path.display(), w.edges);
                }
            }
            let (h, l) = join_meet(net, &f, &g)?;
            let result = match op {
                LatticeOp::Join => h,
                LatticeOp::Meet => l,
            };
            ok(format_flow(net, &result, false))
        }
        Command::Reduce { kind, instance } => {
            let text = read_text(&instance)?;
            let out = match kind {
                Reduction::Sa => {
                    let alloc = parse_allocation(&text).with_context(|| format!("parsing {}", instance.display()))?;
                    format_instance(&from_allocation(&alloc)?.network, None)
                }
                Reduction::Gamma | Reduction::Quasi => {
                    let inst = parse_instance(&text).with_context(|| format!("parsing {}", instance.display()))?;
                    let mapping = match kind {
                        Reduction::Gamma => reduce_gamma(&inst.network, &inst.bounds.gamma)?,
                        _ => reduce_beta_gamma(&inst.network, &inst.bounds)?,
                    };
                    format_instance(&mapping.network, None)
                }
            };
            ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, code)) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
