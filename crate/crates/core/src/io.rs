//! Line-oriented text formats for instances, flows and allocation problems.
//!
//! Instance:
//!
//! ```text
//! p stableflow <n> <m>
//! s <v>...            sources
//! t <v>...            sinks
//! e <id> <tail> <head> <cap>
//! in <v> <e>...       in-edges of v, most preferred first
//! out <v> <e>...      out-edges of v, most preferred first
//! g <v> <gamma>       optional excess bounds of internal vertices
//! b <v> <beta>
//! ```
//!
//! Flow: one `f <e> <value>` line per edge; `value`, `class` and `x` lines
//! written by the solver are accepted and ignored. Allocation: `p alloc <n1>
//! <n2> <m>`, `q <v> <quota>`, `e <id> <left> <right> <cap>`, `pref <v> <e>...`.
//! Blank lines and everything after `#` are ignored in all formats.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::flow::{classify, value_of, FlowAssignment};
use crate::network::{AllocationEdge, AllocationInstance, Edge, EdgeId, Network, NetworkError, NetworkSpec, VertexId};
use crate::quasi::{BoundsSpec, QuasiError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `p {0}` header")]
    MissingHeader(&'static str),
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Bounds(#[from] QuasiError),
}

/// A network together with its optional excess bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub network: Network,
    pub bounds: BoundsSpec,
}

struct Line<'a> {
    number: usize,
    words: Vec<&'a str>,
}

impl Line<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.number,
            message: message.into(),
        }
    }

    fn arg<T: FromStr>(&self, i: usize, what: &str) -> Result<T, ParseError> {
        let word = self.words.get(i).ok_or_else(|| self.error(format!("missing {what}")))?;
        word.parse().map_err(|_| self.error(format!("invalid {what} `{word}`")))
    }

    fn args_from<T: FromStr>(&self, i: usize, what: &str) -> Result<Vec<T>, ParseError> {
        (i..self.words.len()).map(|k| self.arg(k, what)).collect()
    }

    fn exact(&self, count: usize) -> Result<(), ParseError> {
        if self.words.len() == count {
            Ok(())
        } else {
            Err(self.error(format!(
                "`{}` takes {} fields, found {}",
                self.words[0],
                count - 1,
                self.words.len() - 1
            )))
        }
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        (!words.is_empty()).then_some(Line { number: i + 1, words })
    })
}

fn vertex(line: &Line, i: usize, n: usize) -> Result<VertexId, ParseError> {
    let v: VertexId = line.arg(i, "vertex")?;
    if v >= n {
        return Err(line.error(format!("vertex {v} out of range (n = {n})")));
    }
    Ok(v)
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut it = lines(text);
    let header = it.next().ok_or(ParseError::MissingHeader("stableflow"))?;
    if header.words.first() != Some(&"p") || header.words.get(1) != Some(&"stableflow") {
        return Err(header.error("expected `p stableflow <n> <m>`"));
    }
    header.exact(4)?;
    let n: usize = header.arg(2, "vertex count")?;
    let m: usize = header.arg(3, "edge count")?;

    let mut spec = NetworkSpec::new(n);
    let mut edges: Vec<Option<Edge>> = vec![None; m];
    let mut gamma = vec![None; n];
    let mut beta = vec![None; n];
    let mut terminal = vec![false; n];
    for line in it {
        match line.words[0] {
            "s" | "t" => {
                for k in 1..line.words.len() {
                    let v = vertex(&line, k, n)?;
                    terminal[v] = true;
                    if line.words[0] == "s" {
                        spec.sources.push(v);
                    } else {
                        spec.sinks.push(v);
                    }
                }
            }
            "e" => {
                line.exact(5)?;
                let id: EdgeId = line.arg(1, "edge id")?;
                if id >= m {
                    return Err(line.error(format!("edge id {id} out of range (m = {m})")));
                }
                if edges[id].is_some() {
                    return Err(line.error(format!("edge {id} defined twice")));
                }
                let tail = vertex(&line, 2, n)?;
                let head = vertex(&line, 3, n)?;
                edges[id] = Some(Edge::new(tail, head, line.arg(4, "capacity")?));
            }
            "in" | "out" => {
                let v = vertex(&line, 1, n)?;
                let list: Vec<EdgeId> = line.args_from(2, "edge id")?;
                let map = if line.words[0] == "in" {
                    &mut spec.in_pref
                } else {
                    &mut spec.out_pref
                };
                if map.insert(v, list).is_some() {
                    return Err(line.error(format!("second `{}` list for vertex {v}", line.words[0])));
                }
            }
            "g" | "b" => {
                line.exact(3)?;
                let v = vertex(&line, 1, n)?;
                let value: i64 = line.arg(2, "bound")?;
                let slot = if line.words[0] == "g" {
                    &mut gamma[v]
                } else {
                    &mut beta[v]
                };
                if slot.replace(value).is_some() {
                    return Err(line.error(format!("second `{}` record for vertex {v}", line.words[0])));
                }
            }
            "p" => return Err(line.error("duplicate header")),
            other => return Err(line.error(format!("unknown record `{other}`"))),
        }
    }
    let found = edges.iter().filter(|e| e.is_some()).count();
    if found != m {
        return Err(ParseError::EdgeCount { expected: m, found });
    }
    spec.edges = edges.into_iter().flatten().collect();
    let network = spec.build()?;
    let bounds = BoundsSpec {
        gamma: gamma.into_iter().map(|x| x.unwrap_or(0)).collect(),
        beta: beta.into_iter().map(|x| x.unwrap_or(0)).collect(),
    };
    // Report bound records on terminals by line.
    for line in lines(text).filter(|l| matches!(l.words[0], "g" | "b")) {
        let v: VertexId = line.arg(1, "vertex")?;
        if network.is_terminal(v) {
            return Err(line.error(format!("`{}` record on terminal {v}", line.words[0])));
        }
    }
    bounds.validate(&network)?;
    Ok(Instance { network, bounds })
}

pub fn format_instance(net: &Network, bounds: Option<&BoundsSpec>) -> String {
    let mut out = String::new();
    let join = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "p stableflow {} {}", net.n_vertices(), net.n_edges()).unwrap();
    writeln!(out, "s {}", join(net.sources())).unwrap();
    writeln!(out, "t {}", join(net.sinks())).unwrap();
    for (id, e) in net.edges().iter().enumerate() {
        writeln!(out, "e {id} {} {} {}", e.tail, e.head, e.capacity).unwrap();
    }
    for v in net.internal_vertices() {
        if !net.in_pref(v).is_empty() {
            writeln!(out, "in {v} {}", join(net.in_pref(v))).unwrap();
        }
        if !net.out_pref(v).is_empty() {
            writeln!(out, "out {v} {}", join(net.out_pref(v))).unwrap();
        }
    }
    if let Some(b) = bounds {
        for v in net.internal_vertices() {
            if b.gamma[v] != 0 {
                writeln!(out, "g {v} {}", b.gamma[v]).unwrap();
            }
            if b.beta[v] != 0 {
                writeln!(out, "b {v} {}", b.beta[v]).unwrap();
            }
        }
    }
    out
}

/// Reads `f <e> <value>` lines; edges without a line carry zero.
pub fn parse_flow(net: &Network, text: &str) -> Result<FlowAssignment, ParseError> {
    let mut values = vec![None; net.n_edges()];
    for line in lines(text) {
        match line.words[0] {
            "f" => {
                line.exact(3)?;
                let e: EdgeId = line.arg(1, "edge id")?;
                if e >= net.n_edges() {
                    return Err(line.error(format!("edge id {e} out of range (m = {})", net.n_edges())));
                }
                if values[e].replace(line.arg::<i64>(2, "flow value")?).is_some() {
                    return Err(line.error(format!("edge {e} listed twice")));
                }
            }
            "value" | "class" | "x" => {}
            other => return Err(line.error(format!("unknown record `{other}`"))),
        }
    }
    Ok(FlowAssignment::from_values(
        net,
        values.into_iter().map(|x| x.unwrap_or(0)).collect(),
    ))
}

/// Flow listing followed by `value` and `class`; with `excess`, one
/// `x <v> <excess>` line per internal vertex.
pub fn format_flow(net: &Network, f: &FlowAssignment, excess: bool) -> String {
    let mut out = String::new();
    for (e, x) in f.values().iter().enumerate() {
        writeln!(out, "f {e} {x}").unwrap();
    }
    writeln!(out, "value {}", value_of(net, f)).unwrap();
    writeln!(out, "class {}", classify(net, f)).unwrap();
    if excess {
        for v in net.internal_vertices() {
            writeln!(out, "x {v} {}", f.excess(v)).unwrap();
        }
    }
    out
}

pub fn parse_allocation(text: &str) -> Result<AllocationInstance, ParseError> {
    let mut it = lines(text);
    let header = it.next().ok_or(ParseError::MissingHeader("alloc"))?;
    if header.words.first() != Some(&"p") || header.words.get(1) != Some(&"alloc") {
        return Err(header.error("expected `p alloc <n1> <n2> <m>`"));
    }
    header.exact(5)?;
    let n_left: usize = header.arg(2, "left vertex count")?;
    let n_right: usize = header.arg(3, "right vertex count")?;
    let m: usize = header.arg(4, "edge count")?;
    let n = n_left + n_right;
    let mut edges: Vec<Option<AllocationEdge>> = vec![None; m];
    let mut quota = vec![0; n];
    let mut preference = vec![Vec::new(); n];
    for line in it {
        match line.words[0] {
            "q" => {
                line.exact(3)?;
                let v = vertex(&line, 1, n)?;
                quota[v] = line.arg(2, "quota")?;
            }
            "e" => {
                line.exact(5)?;
                let id: usize = line.arg(1, "edge id")?;
                if id >= m {
                    return Err(line.error(format!("edge id {id} out of range (m = {m})")));
                }
                let left = vertex(&line, 2, n)?;
                let right = vertex(&line, 3, n)?;
                if left >= n_left || right < n_left {
                    return Err(line.error("edges run from a left vertex to a right vertex"));
                }
                if edges[id]
                    .replace(AllocationEdge {
                        left,
                        right,
                        capacity: line.arg(4, "capacity")?,
                    })
                    .is_some()
                {
                    return Err(line.error(format!("edge {id} defined twice")));
                }
            }
            "pref" => {
                let v = vertex(&line, 1, n)?;
                preference[v] = line.args_from(2, "edge id")?;
            }
            "p" => return Err(line.error("duplicate header")),
            other => return Err(line.error(format!("unknown record `{other}`"))),
        }
    }
    let found = edges.iter().filter(|e| e.is_some()).count();
    if found != m {
        return Err(ParseError::EdgeCount { expected: m, found });
    }
    Ok(AllocationInstance {
        n_left,
        n_right,
        edges: edges.into_iter().flatten().collect(),
        quota,
        preference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Side;

    const SHORTCUT: &str = "\
# three internal vertices
p stableflow 5 5
s 0
t 4
e 0 0 1 5
e 1 1 2 5
e 2 2 3 5
e 3 1 3 5
e 4 3 4 2
in 1 0
out 1 1 3
in 2 1
out 2 2
in 3 3 2
out 3 4
";

    #[test]
    fn parses_and_round_trips_shortcut() {
        let inst = parse_instance(SHORTCUT).unwrap();
        let net = &inst.network;
        assert_eq!(net.n_edges(), 5);
        assert_eq!(net.out_pref(1), &[1, 3]);
        assert_eq!(net.in_pref(3), &[3, 2]);
        assert!(inst.bounds.is_zero());
        let text = format_instance(net, Some(&inst.bounds));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn missing_out_list_names_the_vertex() {
        let text = SHORTCUT.replace("out 2 2\n", "");
        assert_eq!(
            parse_instance(&text),
            Err(ParseError::Network(NetworkError::MissingPreference {
                vertex: 2,
                side: Side::Out
            }))
        );
    }

    #[test]
    fn bound_on_terminal_is_a_line_error() {
        let text = format!("{SHORTCUT}g 4 1\n");
        match parse_instance(&text) {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 16),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = SHORTCUT.replace("e 2 2 3 5", "e 2 2 3 five");
        assert!(matches!(parse_instance(&text), Err(ParseError::Syntax { line: 7, .. })));
        let text = SHORTCUT.replace("e 4 3 4 2\n", "");
        assert_eq!(
            parse_instance(&text),
            Err(ParseError::EdgeCount { expected: 5, found: 4 })
        );
        assert!(matches!(
            parse_instance("p stableflow 2"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        assert_eq!(
            parse_instance("# nothing"),
            Err(ParseError::MissingHeader("stableflow"))
        );
    }

    #[test]
    fn flow_round_trip() {
        let net = parse_instance(SHORTCUT).unwrap().network;
        let f = FlowAssignment::from_values(&net, vec![2, 0, 0, 2, 2]);
        let text = format_flow(&net, &f, true);
        assert!(text.contains("value 2\nclass Flow\n"));
        assert!(text.contains("x 3 0\n"));
        assert_eq!(parse_flow(&net, &text).unwrap(), f);
        assert!(parse_flow(&net, "f 9 1").is_err());
        assert!(parse_flow(&net, "f 0 1\nf 0 2").is_err());
    }

    #[test]
    fn allocation_format() {
        let text = "p alloc 1 1 1\nq 0 1\nq 1 2\ne 0 0 1 3\npref 0 0\npref 1 0\n";
        let inst = parse_allocation(text).unwrap();
        assert_eq!(inst.quota, vec![1, 2]);
        assert_eq!(inst.edges[0].capacity, 3);
        assert!(parse_allocation("p alloc 1 1 1\ne 0 1 0 3\n").is_err());
    }
}
