use proptest::prelude::*;

use stableflow_core::io::parse_allocation;
use stableflow_core::network::from_allocation;
use stableflow_core::{
    format_flow, format_instance, parse_flow, parse_instance, random_instance, run_fast, BoundsSpec, GeneratorParams,
    ParseError,
};

fn params(n: usize, m: usize, sources: usize, sinks: usize) -> GeneratorParams {
    let mut p = GeneratorParams {
        n,
        m,
        cap_max: 20,
        sources,
        sinks,
    };
    p.m = p.m.min(p.max_edges());
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn instances_round_trip(seed in 0u64..1_000_000, n in 4usize..15, m in 1usize..40, st in 1usize..3) {
        let net = random_instance(&params(n, m, st, st.min(n - st - 1)), seed).unwrap();
        let mut bounds = BoundsSpec::zero(net.n_vertices());
        for v in net.internal_vertices() {
            bounds.gamma[v] = (seed as i64 + v as i64) % 3;
            bounds.beta[v] = v as i64 % 2;
        }
        let text = format_instance(&net, Some(&bounds));
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back.network, &net);
        prop_assert_eq!(back.bounds, bounds);
    }

    #[test]
    fn flows_round_trip(seed in 0u64..1_000_000, n in 3usize..15, m in 1usize..40) {
        let net = random_instance(&params(n, m, 1, 1), seed).unwrap();
        let f = run_fast(&net).unwrap().flow;
        let back = parse_flow(&net, &format_flow(&net, &f, true)).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn errors_carry_line_numbers() {
    let text = "p stableflow 3 2\ns 0\nt 2\ne 0 0 1 4\n\ne 1 1 9 4\n";
    match parse_instance(text) {
        Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 6),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let text = "# tiny\np stableflow 2 1\n\ns 0\nt 1\ne 0 0 1 5\n";
    let inst = parse_instance(text).unwrap();
    assert_eq!(inst.network.n_edges(), 1);
    assert!(inst.bounds.is_zero());
}

#[test]
fn allocation_reduces_to_a_network() {
    let text = "p alloc 2 1 2\nq 0 1\nq 1 1\nq 2 1\ne 0 0 2 1\ne 1 1 2 1\npref 0 0\npref 1 1\npref 2 1 0\n";
    let inst = parse_allocation(text).unwrap();
    let red = from_allocation(&inst).unwrap();
    assert_eq!(red.network.sources().len(), 1);
    assert_eq!(red.network.sinks().len(), 1);
    // the right vertex has quota 1 and prefers left vertex 1
    let f = run_fast(&red.network).unwrap().flow;
    assert_eq!(&f.values()[..2], [0, 1]);
}
