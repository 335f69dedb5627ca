//! Graph and framing files: JSON and the `tail head [edge_id]` edge list.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag_core::{Dag, DagError, Edge, EdgeId, VertexId};
use crate::framing::{Framing, FramingError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Framing(#[from] FramingError),
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
}

pub fn graph_to_json(g: &Dag) -> String {
    let j = GraphJson { vertices: g.vertices().to_vec(), edges: g.edges().to_vec() };
    serde_json::to_string_pretty(&j).expect("graph serializes")
}

pub fn graph_from_json(s: &str) -> Result<Dag, IoError> {
    let j: GraphJson = serde_json::from_str(s)?;
    Ok(Dag::new(j.vertices, j.edges)?)
}

pub fn graph_to_edge_list(g: &Dag) -> String {
    g.edges().iter().map(|e| format!("{} {} {}\n", e.tail.0, e.head.0, e.id.0)).collect()
}

/// Lines `tail head [edge_id]`; blank lines and `#` comments are skipped.
/// Missing ids take the smallest ids not used explicitly, in line order.
pub fn parse_edge_list(s: &str) -> Result<Dag, IoError> {
    let mut rows: Vec<(u32, u32, Option<u32>)> = Vec::new();
    for (i, raw) in s.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<u32> = line
            .split_whitespace()
            .map(|w| w.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Parse { line: i + 1, msg: e.to_string() })?;
        match nums[..] {
            [a, b] => rows.push((a, b, None)),
            [a, b, id] => rows.push((a, b, Some(id))),
            _ => return Err(IoError::Parse { line: i + 1, msg: "expected `tail head [edge_id]`".into() }),
        }
    }
    let used: BTreeSet<u32> = rows.iter().filter_map(|r| r.2).collect();
    let mut free = (0u32..).filter(|x| !used.contains(x));
    let edges: Vec<Edge> = rows
        .iter()
        .map(|&(a, b, id)| Edge {
            id: EdgeId(id.unwrap_or_else(|| free.next().expect("unbounded"))),
            tail: VertexId(a),
            head: VertexId(b),
        })
        .collect();
    let vertices: BTreeSet<VertexId> = edges.iter().flat_map(|e| [e.tail, e.head]).collect();
    Ok(Dag::new(vertices, edges)?)
}

/// JSON when the text starts with `{`, an edge list otherwise.
pub fn read_graph(s: &str) -> Result<Dag, IoError> {
    if s.trim_start().starts_with('{') {
        graph_from_json(s)
    } else {
        parse_edge_list(s)
    }
}

pub fn framing_to_json(f: &Framing) -> String {
    serde_json::to_string_pretty(f).expect("framing serializes")
}

/// Parses a framing and checks it against `g`.
pub fn framing_from_json(g: &Dag, s: &str) -> Result<Framing, IoError> {
    let f: Framing = serde_json::from_str(s)?;
    f.validate(g)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{car, nine_strand};

    #[test]
    fn json_round_trip() {
        let g = nine_strand();
        let h = graph_from_json(&graph_to_json(&g)).unwrap();
        assert_eq!(h.edges(), g.edges());
        assert_eq!(h.vertices(), g.vertices());
    }

    #[test]
    fn edge_list_round_trip_and_defaults() {
        let g = car(6).unwrap();
        let h = parse_edge_list(&graph_to_edge_list(&g)).unwrap();
        assert_eq!(h.edges(), g.edges());
        let h = parse_edge_list("# graph\n0 1 0\n0 1\n\n1 2 # spine\n").unwrap();
        let ids: Vec<u32> = h.edge_ids().map(|e| e.0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn bad_input() {
        assert!(matches!(parse_edge_list("0 1 2 3"), Err(IoError::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 x"), Err(IoError::Parse { .. })));
        assert!(matches!(parse_edge_list("0 1\n1 0"), Err(IoError::Dag(_))));
        assert!(matches!(read_graph("{\"vertices\": [0]"), Err(IoError::Json(_))));
    }

    #[test]
    fn framing_round_trip() {
        let g = crate::instances::car8_core();
        let f = Framing::length(&g);
        assert_eq!(framing_from_json(&g, &framing_to_json(&f)).unwrap(), f);
        assert!(framing_from_json(&g, "{\"in_order\": {}, \"out_order\": {}}").is_err());
    }
}
