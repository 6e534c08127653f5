//! Text formats: graphs, flow instances and cut measures as JSON, sample
//! dumps as CSV. Every emitter is canonical, so `emit(parse(emit(x)))` is
//! byte-identical to `emit(x)`.
//!
//! ```text
//! graph:     {"vertices": N, "edges": [[u, v, "p/q"], ...], "s": id, "t": id,
//!             "power": {"template": <graph>, "depth": k},   (optional)
//!             "addresses": ["s", "t", [e1, ..., eL, vertex], ...]}  (optional)
//! instance:  {"graph": <graph>, "capacities": [["p/q"], ...],
//!             "commodities": [[s, t, "p/q"], ...]}
//! measure:   {"n": N, "atoms": [["hex bitset", "weight"], ...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::cuts::{bitset_from_hex, bitset_to_hex, CutError, CutMeasure, VertexSet};
use crate::embed::RecursiveCutSample;
use crate::graph::{power, Edge, GraphError, StGraph, VertexAddress};
use crate::lp::{Commodity, FlowInstance, LpError};
use crate::scalar::{format_q, parse_q, Scalar, Q};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn field_err(field: impl Into<String>, message: impl ToString) -> IoError {
    IoError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

fn rational(field: &str, text: &str) -> Result<Q, IoError> {
    parse_q(text).map_err(|e| field_err(field, e))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: usize,
    edges: Vec<(usize, usize, String)>,
    s: usize,
    t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<Box<RawPower>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    addresses: Option<Vec<RawAddress>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    template: RawGraph,
    depth: usize,
}

#[derive(Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
enum RawAddress {
    Terminal(String),
    Frames(Vec<u32>),
}

fn address_to_raw(a: &VertexAddress) -> RawAddress {
    match a {
        VertexAddress::S => RawAddress::Terminal("s".into()),
        VertexAddress::T => RawAddress::Terminal("t".into()),
        VertexAddress::Inner { path, vertex } => {
            let mut frames = path.clone();
            frames.push(*vertex);
            RawAddress::Frames(frames)
        }
    }
}

/// Frame-list text of an address: `s`, `t` or `e1.e2...:vertex`.
pub fn address_label(a: &VertexAddress) -> String {
    match a {
        VertexAddress::S => "s".into(),
        VertexAddress::T => "t".into(),
        VertexAddress::Inner { path, vertex } => {
            let frames: Vec<String> = path.iter().map(u32::to_string).collect();
            format!("{}:{vertex}", frames.join("."))
        }
    }
}

fn graph_to_raw(g: &StGraph) -> RawGraph {
    let info = g.power_info();
    RawGraph {
        vertices: g.vertex_count(),
        edges: g.edges().iter().map(|e| (e.u, e.v, format_q(&e.len))).collect(),
        s: g.s(),
        t: g.t(),
        power: info.map(|p| {
            Box::new(RawPower {
                template: graph_to_raw(&p.template),
                depth: p.depth,
            })
        }),
        addresses: info.map(|p| p.addresses.as_slice().iter().map(address_to_raw).collect()),
    }
}

fn graph_from_raw(raw: RawGraph, prefix: &str) -> Result<StGraph, IoError> {
    let mut edges = Vec::with_capacity(raw.edges.len());
    for (i, (u, v, len)) in raw.edges.iter().enumerate() {
        edges.push(Edge {
            u: *u,
            v: *v,
            len: rational(&format!("{prefix}edges[{i}][2]"), len)?,
        });
    }
    let plain = StGraph::new(raw.vertices, edges, raw.s, raw.t)?;
    let Some(p) = raw.power else {
        if raw.addresses.is_some() {
            return Err(field_err(format!("{prefix}addresses"), "addresses need a `power` record"));
        }
        return Ok(plain);
    };
    let template = graph_from_raw(p.template, &format!("{prefix}power.template."))?;
    let built = power(&template, p.depth)?;
    if built.vertex_count() != plain.vertex_count()
        || built.edges() != plain.edges()
        || (built.s(), built.t()) != (plain.s(), plain.t())
    {
        return Err(field_err(
            format!("{prefix}power"),
            "graph differs from the power of its template",
        ));
    }
    if let Some(addrs) = raw.addresses {
        let info = built.power_info().expect("power graph");
        let expected: Vec<RawAddress> = info.addresses.as_slice().iter().map(address_to_raw).collect();
        if let Some(i) = (0..addrs.len().max(expected.len())).find(|&i| addrs.get(i) != expected.get(i)) {
            return Err(field_err(format!("{prefix}addresses[{i}]"), "does not match the construction"));
        }
    }
    Ok(built)
}

pub fn emit_graph(g: &StGraph) -> String {
    serde_json::to_string_pretty(&graph_to_raw(g)).expect("graph serialises")
}

pub fn parse_graph(text: &str) -> Result<StGraph, IoError> {
    let raw: RawGraph = serde_json::from_str(text)?;
    graph_from_raw(raw, "")
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawCapacity {
    Wrapped([String; 1]),
    Bare(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    graph: RawGraph,
    capacities: Vec<RawCapacity>,
    commodities: Vec<(usize, usize, String)>,
}

pub fn emit_instance(inst: &FlowInstance) -> String {
    let raw = RawInstance {
        graph: graph_to_raw(inst.graph()),
        capacities: inst
            .capacities()
            .iter()
            .map(|c| RawCapacity::Wrapped([format_q(c)]))
            .collect(),
        commodities: inst
            .commodities()
            .iter()
            .map(|c| (c.source, c.sink, format_q(&c.demand)))
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("instance serialises")
}

pub fn parse_instance(text: &str) -> Result<FlowInstance, IoError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    let graph = graph_from_raw(raw.graph, "graph.")?;
    let capacities = raw
        .capacities
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            RawCapacity::Wrapped([s]) => rational(&format!("capacities[{i}][0]"), s),
            RawCapacity::Bare(s) => rational(&format!("capacities[{i}]"), s),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let commodities = raw
        .commodities
        .iter()
        .enumerate()
        .map(|(i, (s, t, d))| {
            Ok(Commodity {
                source: *s,
                sink: *t,
                demand: rational(&format!("commodities[{i}][2]"), d)?,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(FlowInstance::new(graph, capacities, commodities)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    n: usize,
    atoms: Vec<(String, String)>,
}

/// Weights use the scalar's lossless text form (`p/q` or a round-trip
/// decimal).
pub fn emit_measure<T: Scalar>(mu: &CutMeasure<T>) -> String {
    let raw = RawMeasure {
        n: mu.ground_size(),
        atoms: mu
            .atoms()
            .iter()
            .map(|a| (bitset_to_hex(&a.side), a.weight.to_text()))
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("measure serialises")
}

pub fn parse_measure<T: Scalar>(text: &str) -> Result<CutMeasure<T>, IoError> {
    let raw: RawMeasure = serde_json::from_str(text)?;
    let mut mu = CutMeasure::new(raw.n);
    for (i, (hex, w)) in raw.atoms.iter().enumerate() {
        let side = bitset_from_hex(hex, raw.n).map_err(|e| field_err(format!("atoms[{i}][0]"), e))?;
        let weight = T::from_text(w)
            .ok_or_else(|| field_err(format!("atoms[{i}][1]"), format!("malformed number `{w}`")))?;
        mu.add(&side, weight).map_err(|e| field_err(format!("atoms[{i}]"), e))?;
    }
    Ok(mu)
}

/// One row per vertex: `vertex,address,label`, followed by nothing else.
/// `label` is 1 for vertices on the side of `s`.
pub fn emit_sample_csv(g: &StGraph, sample: &RecursiveCutSample) -> String {
    let mut out = String::from("vertex,address,label\n");
    let book = g.addresses();
    for v in 0..g.vertex_count() {
        let addr = book.map(|b| address_label(b.address(v))).unwrap_or_default();
        out.push_str(&format!("{v},{addr},{}\n", sample.labels.contains(v) as u8));
    }
    out
}

/// Labels as a `0`/`1` string in vertex order.
pub fn bitstring(labels: &VertexSet, n: usize) -> String {
    (0..n).map(|v| if labels.contains(v) { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_k2n;
    use crate::lp::all_pairs_commodities;
    use crate::scalar::{q_frac, q_int};

    #[test]
    fn power_graph_round_trip() {
        let g = power(&make_k2n(3).unwrap(), 2).unwrap();
        let text = emit_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(emit_graph(&back), text);
    }

    #[test]
    fn plain_graph_round_trip() {
        let g = make_k2n(2).unwrap().scaled(&q_frac(3, 2));
        let text = emit_graph(&g);
        assert!(!text.contains("power"));
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn zero_denominator_names_the_field() {
        let text = r#"{"vertices": 2, "edges": [[0, 1, "3/0"]], "s": 0, "t": 1}"#;
        let err = parse_graph(text).unwrap_err();
        match err {
            IoError::Field { field, message } => {
                assert_eq!(field, "edges[0][2]");
                assert!(message.contains("3/0"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_graph("{\n  \"vertices\": 2,\n  \"edges\": [,]\n}").unwrap_err();
        assert!(matches!(err, IoError::Syntax { line: 3, .. }), "{err:?}");
        assert!(matches!(parse_graph(r#"{"vertices": 2}"#), Err(IoError::Syntax { .. })));
    }

    #[test]
    fn tampered_addresses_are_rejected() {
        let g = power(&make_k2n(2).unwrap(), 2).unwrap();
        let text = emit_graph(&g).replacen("\"t\"", "\"s\"", 1);
        // The first `"t"` string is an address entry or the `t` key; either
        // way the document no longer matches the construction.
        assert!(parse_graph(&text).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let g = make_k2n(4).unwrap();
        let inst = FlowInstance::unit_capacities(g, all_pairs_commodities(&[0, 1, 2])).unwrap();
        let inst = inst.scale_demands(&q_frac(2, 3));
        let text = emit_instance(&inst);
        assert!(text.contains("\"2/3\""));
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(emit_instance(&back), text);
    }

    #[test]
    fn instance_accepts_bare_capacities() {
        let text = r#"{"graph": {"vertices": 2, "edges": [[0, 1, "1"]], "s": 0, "t": 1},
            "capacities": ["5/2"], "commodities": [[0, 1, "1"]]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.capacities(), &[q_frac(5, 2)]);
        let bad = text.replace("[[0, 1, \"1\"]]}", "[[0, 1, \"x\"]]}");
        assert!(matches!(parse_instance(&bad), Err(IoError::Field { field, .. }) if field == "commodities[0][2]"));
    }

    #[test]
    fn measure_round_trip_both_modes() {
        let mut mu = CutMeasure::new(4);
        mu.add_vertices([0, 2], q_frac(1, 3)).unwrap();
        mu.add_vertices([3], q_int(2)).unwrap();
        let text = emit_measure(&mu);
        let back: CutMeasure<Q> = parse_measure(&text).unwrap();
        assert_eq!(back, mu);
        assert_eq!(emit_measure(&back), text);

        let f = mu.to_f64();
        let text = emit_measure(&f);
        let back: CutMeasure<f64> = parse_measure(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn measure_field_errors() {
        let err = parse_measure::<Q>(r#"{"n": 3, "atoms": [["9", "1"]]}"#).unwrap_err();
        assert!(matches!(err, IoError::Field { ref field, .. } if field == "atoms[0][0]"), "{err:?}");
        let err = parse_measure::<Q>(r#"{"n": 3, "atoms": [["2", "1/0"]]}"#).unwrap_err();
        assert!(matches!(err, IoError::Field { ref field, .. } if field == "atoms[0][1]"));
    }

    #[test]
    fn sample_dump_is_keyed_by_address() {
        let fam = crate::embed::RecursiveFamily::new(2, 2).unwrap();
        let sample = crate::embed::sample_recursive_cut(&fam, 7);
        let csv = emit_sample_csv(fam.graph(), &sample);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[1], "0,s,1");
        assert_eq!(lines[2], "1,t,0");
        assert!(lines[3].starts_with("2,:2,"));
        assert!(lines[5].starts_with("4,0:2,"));
        assert_eq!(bitstring(&sample.labels, 12).len(), 12);
    }
}
