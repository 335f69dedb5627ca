//! Named graph families and random generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dag_core::{complete_contraction, Dag, DagError, Edge, EdgeId, VertexId};

/// Caracol graph on `n >= 3` vertices.
///
/// Edge ids list the long arcs first (source arcs, then sink arcs) and the
/// spine `(i, i+1)` last, so that among parallel edges created by contraction
/// the longer original edge has the smaller id.
pub fn car(n: u32) -> Result<Dag, DagError> {
    assert!(n >= 3, "car(n) needs n >= 3");
    let mut pairs = Vec::new();
    pairs.extend((3..n).map(|j| (1, j)));
    pairs.extend((2..n - 1).map(|i| (i, n)));
    pairs.extend((1..n).map(|i| (i, i + 1)));
    Dag::from_pairs(&pairs)
}

/// `G(k, m)`: vertices `1..=m`, edges `(i, i+1)` and `(i, i+k)`, listed by tail
/// then head.
pub fn gkn(k: u32, m: u32) -> Result<Dag, DagError> {
    assert!(k >= 1 && m >= 2, "gkn needs k >= 1 and m >= 2");
    let mut pairs = Vec::new();
    for i in 1..m {
        pairs.push((i, i + 1));
        if k > 1 && i + k <= m {
            pairs.push((i, i + k));
        }
    }
    if k == 1 {
        // (i, i+1) twice
        pairs = (1..m).flat_map(|i| [(i, i + 1), (i, i + 1)]).collect();
    }
    Dag::from_pairs(&pairs)
}

pub fn single_edge() -> Dag {
    Dag::from_pairs(&[(0, 1)]).expect("single edge")
}

/// The complete contraction of `car(8)` with its two source-to-sink edges
/// removed, vertices renamed `1..=6` in order. Edge ids are those of `car(8)`.
pub fn car8_core() -> Dag {
    let t = complete_contraction(&car(8).expect("car(8)"));
    let h = &t.result;
    let drop: BTreeSet<EdgeId> = h
        .edges()
        .iter()
        .filter(|e| h.is_source(e.tail) && h.is_sink(e.head))
        .map(|e| e.id)
        .collect();
    let core = h.without_edges(&drop).expect("subgraph");
    let rename: BTreeMap<VertexId, VertexId> = core
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, VertexId(i as u32 + 1)))
        .collect();
    core.relabel_vertices(&rename).expect("relabel")
}

/// A full DAG with nine strands in its path/cycle decomposition. Vertex `0` is
/// the source, `10` the vertex named X, `11` the sink.
pub fn nine_strand() -> Dag {
    const S: u32 = 0;
    const X: u32 = 10;
    const T: u32 = 11;
    Dag::from_pairs(&[
        (S, 1),
        (S, 1),
        (S, 2),
        (S, 2),
        (S, 3),
        (S, 3),
        (S, 7),
        (S, 6),
        (S, X),
        (1, 4),
        (1, 7),
        (2, 4),
        (2, 5),
        (3, 5),
        (3, 6),
        (4, T),
        (4, 9),
        (5, 8),
        (5, T),
        (6, X),
        (6, T),
        (7, 8),
        (7, 9),
        (8, T),
        (8, T),
        (9, T),
        (9, T),
        (X, T),
        (X, T),
    ])
    .expect("nine-strand graph")
}

/// Labels of the ample framing drawn on the complete contraction of
/// `G(2,7)`, keyed by the edge ids of `gkn(2, 7)`.
pub fn g27_labels() -> BTreeMap<EdgeId, u8> {
    // (2,3) (3,4) (4,5) (5,6) carry 1; (1,3) (2,4) (3,5) (4,6) (5,7) carry 2
    [(1, 2), (2, 1), (3, 2), (4, 1), (5, 2), (6, 1), (7, 2), (8, 1), (9, 2)]
        .into_iter()
        .map(|(e, l)| (EdgeId(e), l))
        .collect()
}

/// Random full DAG with `inner` inner vertices.
///
/// Each inner vertex draws its two in-edges from earlier free out-stubs or
/// from a source; leftover out-stubs go to sinks. With probability
/// `1/4` an extra source-to-sink edge is added.
pub fn random_full_dag<R: Rng>(rng: &mut R, inner: u32) -> Dag {
    let n_sources = rng.gen_range(1..=2u32);
    let n_sinks = rng.gen_range(1..=2u32);
    let first_inner = n_sources;
    let first_sink = first_inner + inner;
    let mut stubs: Vec<u32> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for k in 0..inner {
        let v = first_inner + k;
        for _ in 0..2 {
            if !stubs.is_empty() && rng.gen_bool(0.7) {
                let i = rng.gen_range(0..stubs.len());
                pairs.push((stubs.swap_remove(i), v));
            } else {
                pairs.push((rng.gen_range(0..n_sources), v));
            }
        }
        stubs.push(v);
        stubs.push(v);
    }
    stubs.shuffle(rng);
    for u in stubs {
        pairs.push((u, first_sink + rng.gen_range(0..n_sinks)));
    }
    if pairs.is_empty() || rng.gen_bool(0.25) {
        pairs.push((rng.gen_range(0..n_sources), first_sink + rng.gen_range(0..n_sinks)));
    }
    let used: BTreeSet<u32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let rename: BTreeMap<u32, u32> =
        used.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let pairs: Vec<(u32, u32)> = pairs.iter().map(|&(a, b)| (rename[&a], rename[&b])).collect();
    Dag::from_pairs(&pairs).expect("generated graph is acyclic")
}

/// Splits vertex `v` into `v -> w` with a new vertex `w`, creating an idle
/// edge. Either `w` takes a nonempty subset of `out(v)` (and `v` keeps the
/// rest), or `w` takes a nonempty subset of `in(v)` and the new edge runs
/// `w -> v`.
pub fn idle_expansion<R: Rng>(rng: &mut R, g: &Dag) -> Dag {
    let next_v = g.vertices().iter().map(|v| v.0).max().unwrap_or(0) + 1;
    let next_e = g.edge_ids().map(|e| e.0).max().map_or(0, |m| m + 1);
    let w = VertexId(next_v);
    let candidates: Vec<(VertexId, bool)> = g
        .vertices()
        .iter()
        .flat_map(|&v| [(v, true), (v, false)])
        .filter(|&(v, split_out)| {
            if split_out {
                g.out_degree(v) > 0
            } else {
                g.in_degree(v) > 0
            }
        })
        .collect();
    let &(v, split_out) = candidates.choose(rng).expect("graph has edges");
    let side = if split_out { g.out_edges(v) } else { g.in_edges(v) };
    let moved: BTreeSet<EdgeId> = loop {
        let pick: BTreeSet<EdgeId> =
            side.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if !pick.is_empty() {
            break pick;
        }
    };
    let mut edges: Vec<Edge> = g
        .edges()
        .iter()
        .map(|e| {
            let mut e = *e;
            if moved.contains(&e.id) {
                if split_out {
                    e.tail = w;
                } else {
                    e.head = w;
                }
            }
            e
        })
        .collect();
    let new_edge = if split_out {
        Edge { id: EdgeId(next_e), tail: v, head: w }
    } else {
        Edge { id: EdgeId(next_e), tail: w, head: v }
    };
    edges.push(new_edge);
    let vertices = g.vertices().iter().copied().chain([w]);
    Dag::new(vertices, edges).expect("expansion stays acyclic")
}

/// Random valid DAG: a random full DAG followed by `expansions` idle
/// expansions.
pub fn random_valid_dag<R: Rng>(rng: &mut R, inner: u32, expansions: u32) -> Dag {
    let mut g = random_full_dag(rng, inner);
    for _ in 0..expansions {
        g = idle_expansion(rng, &g);
    }
    g
}
