//! Framings, path orders, coherence, exceptional routes, ampleness and the
//! enumeration of ample framings.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag_core::{
    complete_contraction, idle_edges, is_full, ContractionTrace, Dag, DagError, EdgeId, Route,
    VertexId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FramingError {
    #[error("inner vertex {0} has no framing order")]
    MissingOrder(VertexId),
    #[error("framing order given for non-inner vertex {0}")]
    NotInner(VertexId),
    #[error("{side} order at vertex {vertex} is not a permutation of its {side} edges")]
    BadOrder { vertex: VertexId, side: &'static str },
    #[error("path does not pass through vertex {0}")]
    NotThroughVertex(VertexId),
    #[error("edge {0} is first on one side and last on the other")]
    InconsistentFraming(EdgeId),
    #[error("graph is not full")]
    NotFull,
    #[error("graph is not valid")]
    NotValid,
    #[error("edge {0} has no label")]
    MissingLabel(EdgeId),
    #[error("lift choice at vertex {0} does not match its edges")]
    BadChoices(VertexId),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Linear orders on `in(v)` and `out(v)` for every inner vertex `v`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Framing {
    pub in_order: BTreeMap<VertexId, Vec<EdgeId>>,
    pub out_order: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl Framing {
    /// Orders every edge set by increasing edge id.
    pub fn by_edge_id(g: &Dag) -> Framing {
        Framing::sorted_by(g, |e| (0, e.0), |e| (0, e.0))
    }

    /// The length framing of the caracol family: in-edges from smaller tails
    /// and out-edges to larger heads come first; ties go to the smaller id.
    pub fn length(g: &Dag) -> Framing {
        Framing::sorted_by(g, |e| (g.tail(e).0 as i64, e.0), |e| (-(g.head(e).0 as i64), e.0))
    }

    fn sorted_by<KI: Ord, KO: Ord>(
        g: &Dag,
        key_in: impl Fn(EdgeId) -> KI,
        key_out: impl Fn(EdgeId) -> KO,
    ) -> Framing {
        let mut f = Framing::default();
        for v in g.inner_vertices() {
            let mut ins = g.in_edges(v).to_vec();
            ins.sort_by_key(|&e| key_in(e));
            let mut outs = g.out_edges(v).to_vec();
            outs.sort_by_key(|&e| key_out(e));
            f.in_order.insert(v, ins);
            f.out_order.insert(v, outs);
        }
        f
    }

    /// Framing whose orders put label-1 edges before label-2 edges.
    pub fn from_labels(g: &Dag, labels: &BTreeMap<EdgeId, u8>) -> Result<Framing, FramingError> {
        for v in g.inner_vertices() {
            for &e in g.in_edges(v).iter().chain(g.out_edges(v)) {
                if !labels.contains_key(&e) {
                    return Err(FramingError::MissingLabel(e));
                }
            }
        }
        Ok(Framing::sorted_by(g, |e| (labels[&e], e.0), |e| (labels[&e], e.0)))
    }

    pub fn validate(&self, g: &Dag) -> Result<(), FramingError> {
        for (orders, side) in [(&self.in_order, "in"), (&self.out_order, "out")] {
            for &v in orders.keys() {
                if !g.has_vertex(v) || !g.is_inner(v) {
                    return Err(FramingError::NotInner(v));
                }
            }
            for v in g.inner_vertices() {
                let order = orders.get(&v).ok_or(FramingError::MissingOrder(v))?;
                let edges = if side == "in" { g.in_edges(v) } else { g.out_edges(v) };
                let a: BTreeSet<EdgeId> = order.iter().copied().collect();
                let b: BTreeSet<EdgeId> = edges.iter().copied().collect();
                if a != b || order.len() != edges.len() {
                    return Err(FramingError::BadOrder { vertex: v, side });
                }
            }
        }
        Ok(())
    }

    /// The framing with every order reversed.
    pub fn reversed(&self) -> Framing {
        let rev = |m: &BTreeMap<VertexId, Vec<EdgeId>>| {
            m.iter()
                .map(|(&v, o)| (v, o.iter().rev().copied().collect()))
                .collect()
        };
        Framing { in_order: rev(&self.in_order), out_order: rev(&self.out_order) }
    }
}

/// A graph together with a validated framing and precomputed edge positions.
pub struct FramedDag<'a> {
    pub g: &'a Dag,
    pub f: &'a Framing,
    in_pos: Vec<Option<u32>>,
    out_pos: Vec<Option<u32>>,
}

impl<'a> FramedDag<'a> {
    pub fn new(g: &'a Dag, f: &'a Framing) -> Result<FramedDag<'a>, FramingError> {
        f.validate(g)?;
        let mut in_pos = vec![None; g.num_edges()];
        let mut out_pos = vec![None; g.num_edges()];
        for (v, order) in &f.in_order {
            debug_assert!(g.is_inner(*v));
            for (i, &e) in order.iter().enumerate() {
                in_pos[g.edge_index(e)] = Some(i as u32);
            }
        }
        for order in f.out_order.values() {
            for (i, &e) in order.iter().enumerate() {
                out_pos[g.edge_index(e)] = Some(i as u32);
            }
        }
        Ok(FramedDag { g, f, in_pos, out_pos })
    }

    /// Position of `e` in the in-order of its head, if the head is inner.
    pub fn in_pos(&self, e: EdgeId) -> Option<usize> {
        self.in_pos[self.g.edge_index(e)].map(|p| p as usize)
    }

    /// Position of `e` in the out-order of its tail, if the tail is inner.
    pub fn out_pos(&self, e: EdgeId) -> Option<usize> {
        self.out_pos[self.g.edge_index(e)].map(|p| p as usize)
    }
}

fn compare_in(fd: &FramedDag, p: &[EdgeId], q: &[EdgeId]) -> Ordering {
    let (mut i, mut j) = (p.len(), q.len());
    while i > 0 && j > 0 && p[i - 1] == q[j - 1] {
        i -= 1;
        j -= 1;
    }
    match (i, j) {
        (0, 0) => Ordering::Equal,
        (0, _) => Ordering::Less,
        (_, 0) => Ordering::Greater,
        _ => {
            let (a, b) = (fd.in_pos(p[i - 1]), fd.in_pos(q[j - 1]));
            a.expect("divergence at inner vertex").cmp(&b.expect("divergence at inner vertex"))
        }
    }
}

fn compare_out(fd: &FramedDag, p: &[EdgeId], q: &[EdgeId]) -> Ordering {
    let n = p.iter().zip(q).take_while(|(a, b)| a == b).count();
    match (n == p.len(), n == q.len()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => {
            let (a, b) = (fd.out_pos(p[n]), fd.out_pos(q[n]));
            a.expect("divergence at inner vertex").cmp(&b.expect("divergence at inner vertex"))
        }
    }
}

/// Compares two paths ending at `v` (in `In(v)`) or starting at `v` (in
/// `Out(v)`) at their first divergence.
pub fn compare_paths_at(
    fd: &FramedDag,
    v: VertexId,
    p: &[EdgeId],
    q: &[EdgeId],
) -> Result<Ordering, FramingError> {
    let g = fd.g;
    let ends = |x: &[EdgeId]| x.last().is_some_and(|&e| g.head(e) == v);
    let starts = |x: &[EdgeId]| x.first().is_some_and(|&e| g.tail(e) == v);
    if ends(p) && ends(q) {
        Ok(compare_in(fd, p, q))
    } else if starts(p) && starts(q) {
        Ok(compare_out(fd, p, q))
    } else {
        Err(FramingError::NotThroughVertex(v))
    }
}

/// Conflict vertices of a pair of routes; empty means coherent.
pub fn conflicts(fd: &FramedDag, r: &Route, s: &Route) -> Vec<VertexId> {
    let g = fd.g;
    let (re, se) = (r.edges(), s.edges());
    let spos: HashMap<VertexId, usize> =
        se.iter().enumerate().map(|(j, &e)| (g.tail(e), j)).collect();
    let mut out = Vec::new();
    for i in 1..re.len() {
        let v = g.tail(re[i]);
        let Some(&j) = spos.get(&v) else { continue };
        if j == 0 {
            continue;
        }
        let ci = compare_in(fd, &re[..i], &se[..j]);
        let co = compare_out(fd, &re[i..], &se[j..]);
        if (ci == Ordering::Less && co == Ordering::Greater)
            || (ci == Ordering::Greater && co == Ordering::Less)
        {
            out.push(v);
        }
    }
    out
}

pub fn routes_coherent(fd: &FramedDag, r: &Route, s: &Route) -> bool {
    conflicts(fd, r, s).is_empty()
}

/// A route is exceptional iff at each inner vertex `v` on it,
/// (`Rv` minimal or `vR` maximal) and (`Rv` maximal or `vR` minimal).
pub fn is_exceptional(fd: &FramedDag, r: &Route) -> bool {
    let g = fd.g;
    let es = r.edges();
    let k = es.len();
    let mut min_in = vec![true; k];
    let mut max_in = vec![true; k];
    let (mut lo, mut hi) = (true, true);
    for i in 1..k {
        let e = es[i - 1];
        let p = fd.in_pos(e).expect("inner vertex");
        lo &= p == 0;
        hi &= p + 1 == g.in_degree(g.head(e));
        min_in[i] = lo;
        max_in[i] = hi;
    }
    let (mut lo, mut hi) = (true, true);
    for i in (1..k).rev() {
        let e = es[i];
        let p = fd.out_pos(e).expect("inner vertex");
        lo &= p == 0;
        hi &= p + 1 == g.out_degree(g.tail(e));
        if !((min_in[i] || hi) && (max_in[i] || lo)) {
            return false;
        }
    }
    true
}

/// Indices of the exceptional routes among `routes`.
pub fn exceptional_routes(fd: &FramedDag, routes: &[Route]) -> Vec<usize> {
    (0..routes.len()).filter(|&i| is_exceptional(fd, &routes[i])).collect()
}

/// Same as `exceptional_routes`, by testing coherence against every route.
pub fn exceptional_routes_by_definition(fd: &FramedDag, routes: &[Route]) -> Vec<usize> {
    (0..routes.len())
        .filter(|&i| routes.iter().all(|s| routes_coherent(fd, &routes[i], s)))
        .collect()
}

/// Non-idle edges that lie on no exceptional route.
pub fn uncovered_edges(fd: &FramedDag, routes: &[Route]) -> Vec<EdgeId> {
    let covered: BTreeSet<EdgeId> = exceptional_routes(fd, routes)
        .into_iter()
        .flat_map(|i| routes[i].edges().iter().copied())
        .collect();
    let idle = idle_edges(fd.g);
    fd.g
        .edge_ids()
        .filter(|e| !idle.contains(e) && !covered.contains(e))
        .collect()
}

pub fn is_ample(fd: &FramedDag, routes: &[Route]) -> bool {
    uncovered_edges(fd, routes).is_empty()
}

/// Edge labels 1/2 of an ample framing on a full DAG. Edges joining a source
/// to a sink carry no label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeLabeling(pub BTreeMap<EdgeId, u8>);

impl EdgeLabeling {
    pub fn get(&self, e: EdgeId) -> Option<u8> {
        self.0.get(&e).copied()
    }

    pub fn label(&self, e: EdgeId) -> u8 {
        self.0[&e]
    }

    /// Labels along a route with at least one inner vertex.
    pub fn weights(&self, r: &Route) -> Vec<u8> {
        r.edges().iter().map(|&e| self.label(e)).collect()
    }

    pub fn swapped(&self) -> EdgeLabeling {
        EdgeLabeling(self.0.iter().map(|(&e, &l)| (e, 3 - l)).collect())
    }
}

pub fn edge_labeling(fd: &FramedDag) -> Result<EdgeLabeling, FramingError> {
    if !is_full(fd.g) {
        return Err(FramingError::NotFull);
    }
    let mut labels = BTreeMap::new();
    for e in fd.g.edge_ids() {
        let l = match (fd.in_pos(e), fd.out_pos(e)) {
            (None, None) => continue,
            (Some(a), Some(b)) if a != b => return Err(FramingError::InconsistentFraming(e)),
            (Some(a), _) | (None, Some(a)) => a as u8 + 1,
        };
        labels.insert(e, l);
    }
    Ok(EdgeLabeling(labels))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ExceptionalSetFailure {
    Uncovered(EdgeId),
    DoublyCovered(EdgeId),
    /// Two routes sharing a full vertex that the 2-colouring forces to agree.
    OddCycle(usize, usize),
}

/// Decides whether `x` is the exceptional set of an ample framing of a full
/// DAG; on success returns one such framing.
pub fn check_exceptional_set(
    g: &Dag,
    x: &[Route],
) -> Result<Result<Framing, Vec<ExceptionalSetFailure>>, FramingError> {
    if !is_full(g) {
        return Err(FramingError::NotFull);
    }
    let mut failures = Vec::new();
    let mut owner: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for (i, r) in x.iter().enumerate() {
        for &e in r.edges() {
            if owner.insert(e, i).is_some() {
                failures.push(ExceptionalSetFailure::DoublyCovered(e));
            }
        }
    }
    for e in g.edge_ids() {
        if !owner.contains_key(&e) {
            failures.push(ExceptionalSetFailure::Uncovered(e));
        }
    }
    failures.dedup();
    let through: Vec<BTreeSet<VertexId>> = x
        .iter()
        .map(|r| r.vertices(g).into_iter().filter(|&v| g.is_inner(v)).collect())
        .collect();
    let adjacent = |a: usize, b: usize| !through[a].is_disjoint(&through[b]);
    let mut colour: Vec<Option<u8>> = vec![None; x.len()];
    for start in 0..x.len() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(1);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in 0..x.len() {
                if b == a || !adjacent(a, b) {
                    continue;
                }
                match colour[b] {
                    None => {
                        colour[b] = Some(3 - colour[a].unwrap());
                        queue.push_back(b);
                    }
                    Some(c) if c == colour[a].unwrap() && a < b => {
                        failures.push(ExceptionalSetFailure::OddCycle(a, b));
                    }
                    _ => {}
                }
            }
        }
    }
    if !failures.is_empty() {
        return Ok(Err(failures));
    }
    let labels: BTreeMap<EdgeId, u8> = owner
        .iter()
        .map(|(&e, &i)| (e, colour[i].unwrap()))
        .collect();
    Ok(Ok(Framing::from_labels(g, &labels)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ComponentKind {
    Cycle,
    Path,
    SourceSink,
}

/// One strand of the decomposition: consecutive edges share a vertex at which
/// they are both incoming or both outgoing; `joints[i]` is the vertex shared
/// by `edges[i]` and `edges[i+1]` (cyclically for cycles).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub edges: Vec<EdgeId>,
    pub joints: Vec<VertexId>,
}

impl Component {
    /// The vertex sequence traced by the strand.
    pub fn vertex_walk(&self, g: &Dag) -> Vec<VertexId> {
        let other = |e: EdgeId, v: VertexId| {
            let edge = g.edge(e);
            if edge.head == v { edge.tail } else { edge.head }
        };
        match self.kind {
            ComponentKind::SourceSink => {
                let e = g.edge(self.edges[0]);
                vec![e.tail, e.head]
            }
            ComponentKind::Cycle => {
                let mut w = vec![*self.joints.last().unwrap()];
                w.extend(&self.joints);
                w
            }
            ComponentKind::Path => {
                let m = self.edges.len();
                if m == 1 {
                    let e = g.edge(self.edges[0]);
                    return vec![e.tail, e.head];
                }
                let mut w = vec![other(self.edges[0], self.joints[0])];
                w.extend(&self.joints);
                w.push(other(self.edges[m - 1], self.joints[m - 2]));
                w
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub components: Vec<Component>,
}

impl Decomposition {
    /// Number of strands through at least one inner vertex.
    pub fn m(&self) -> usize {
        self.components.iter().filter(|c| c.kind != ComponentKind::SourceSink).count()
    }

    /// Labeling alternating along each strand; bit `c` of `bits` chooses
    /// label 2 for the first edge of the `c`-th non-trivial strand.
    pub fn labeling(&self, bits: u64) -> BTreeMap<EdgeId, u8> {
        let mut labels = BTreeMap::new();
        let strands = self.components.iter().filter(|c| c.kind != ComponentKind::SourceSink);
        for (c, comp) in strands.enumerate() {
            let base = ((bits >> c) & 1) as u8;
            for (i, &e) in comp.edges.iter().enumerate() {
                labels.insert(e, 1 + ((base + i as u8) & 1));
            }
        }
        labels
    }
}

struct Strand {
    edges: Vec<EdgeId>,
    joints: Vec<VertexId>,
    closed: bool,
}

impl Strand {
    fn reverse(&mut self) {
        self.edges.reverse();
        self.joints.reverse();
    }

    fn put_last(&mut self, e: EdgeId) {
        if self.edges.last() != Some(&e) {
            self.reverse();
        }
        debug_assert_eq!(self.edges.last(), Some(&e));
    }
}

/// Decomposes a full DAG into alternating paths, even cycles and
/// source-to-sink edges, processing inner vertices along a linear extension
/// and attaching their in-edge pairs to the strands built so far.
pub fn path_cycle_decomposition(g: &Dag) -> Result<Decomposition, FramingError> {
    if !is_full(g) {
        return Err(FramingError::NotFull);
    }
    let partner = |e: EdgeId| -> Option<EdgeId> {
        let u = g.tail(e);
        g.is_inner(u).then(|| *g.out_edges(u).iter().find(|&&f| f != e).expect("full"))
    };
    let mut strands: Vec<Option<Strand>> = Vec::new();
    let mut home: HashMap<EdgeId, usize> = HashMap::new();
    let mut source_sink = Vec::new();
    let rehome = |home: &mut HashMap<EdgeId, usize>, s: &Strand, id: usize| {
        for &e in &s.edges {
            home.insert(e, id);
        }
    };
    for v in g.linear_extension() {
        if !g.is_inner(v) {
            continue;
        }
        let (a, b) = (g.in_edges(v)[0], g.in_edges(v)[1]);
        let (pa, pb) = (partner(a), partner(b));
        if pa == Some(b) {
            let s = Strand { edges: vec![a, b], joints: vec![v, g.tail(a)], closed: true };
            rehome(&mut home, &s, strands.len());
            strands.push(Some(s));
            continue;
        }
        let ca = pa.and_then(|p| home.get(&p).copied());
        let cb = pb.and_then(|p| home.get(&p).copied());
        match (ca, cb) {
            (Some(x), Some(y)) if x == y => {
                let s = strands[x].as_mut().unwrap();
                s.put_last(pa.unwrap());
                s.joints.push(g.tail(a));
                s.edges.push(a);
                s.joints.push(v);
                s.edges.push(b);
                s.joints.push(g.tail(b));
                s.closed = true;
                home.insert(a, x);
                home.insert(b, x);
            }
            (Some(x), Some(y)) => {
                let mut tail_part = strands[y].take().unwrap();
                if tail_part.edges.first() != pb.as_ref() {
                    tail_part.reverse();
                }
                let s = strands[x].as_mut().unwrap();
                s.put_last(pa.unwrap());
                s.joints.push(g.tail(a));
                s.edges.push(a);
                s.joints.push(v);
                s.edges.push(b);
                s.joints.push(g.tail(b));
                s.edges.extend(tail_part.edges);
                s.joints.extend(tail_part.joints);
                let s = strands[x].as_ref().unwrap();
                rehome(&mut home, s, x);
            }
            (Some(x), None) | (None, Some(x)) => {
                let (first, second, p) = if ca.is_some() { (a, b, pa) } else { (b, a, pb) };
                let s = strands[x].as_mut().unwrap();
                s.put_last(p.unwrap());
                s.joints.push(g.tail(first));
                s.edges.push(first);
                s.joints.push(v);
                s.edges.push(second);
                home.insert(a, x);
                home.insert(b, x);
            }
            (None, None) => {
                let s = Strand { edges: vec![a, b], joints: vec![v], closed: false };
                rehome(&mut home, &s, strands.len());
                strands.push(Some(s));
            }
        }
    }
    for t in g.sinks() {
        for &e in g.in_edges(t) {
            if !g.is_inner(g.tail(e)) {
                source_sink.push(e);
                continue;
            }
            let p = partner(e).unwrap();
            match home.get(&p).copied() {
                Some(x) => {
                    let s = strands[x].as_mut().unwrap();
                    s.put_last(p);
                    s.joints.push(g.tail(e));
                    s.edges.push(e);
                    home.insert(e, x);
                }
                None => {
                    let s = Strand { edges: vec![e], joints: vec![], closed: false };
                    rehome(&mut home, &s, strands.len());
                    strands.push(Some(s));
                }
            }
        }
    }
    let mut components: Vec<Component> = strands
        .into_iter()
        .flatten()
        .map(|s| normalise(s))
        .collect();
    components.extend(source_sink.into_iter().map(|e| Component {
        kind: ComponentKind::SourceSink,
        edges: vec![e],
        joints: vec![],
    }));
    components.sort_by_key(|c| *c.edges.iter().min().unwrap());
    Ok(Decomposition { components })
}

fn normalise(mut s: Strand) -> Component {
    if s.closed {
        // a cycle's last joint links its last edge back to the first
        let m = s.edges.len();
        let k = (0..m).min_by_key(|&i| s.edges[i]).unwrap();
        s.edges.rotate_left(k);
        s.joints.rotate_left(k);
        if m > 2 && s.edges[m - 1] < s.edges[1] {
            // travel the other way round, keeping edges[0] first
            s.edges[1..].reverse();
            s.joints.reverse();
        }
        Component { kind: ComponentKind::Cycle, edges: s.edges, joints: s.joints }
    } else {
        if s.edges.first() > s.edges.last() {
            s.reverse();
        }
        Component { kind: ComponentKind::Path, edges: s.edges, joints: s.joints }
    }
}

/// Ample framings of a full DAG, one per alternating labeling of its strands.
pub struct AmpleFramings<'a> {
    g: &'a Dag,
    decomposition: Decomposition,
    next: u64,
    total: u64,
}

/// An enumerated ample framing with its position and the position of the
/// framing obtained by swapping all labels (same triangulation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedFraming {
    pub framing: Framing,
    pub index: u64,
    pub partner: u64,
    /// True when the strand holding the smallest labeled edge starts with 1.
    pub canonical: bool,
}

impl Iterator for AmpleFramings<'_> {
    type Item = TaggedFraming;

    fn next(&mut self) -> Option<TaggedFraming> {
        if self.next >= self.total {
            return None;
        }
        let bits = self.next;
        self.next += 1;
        let labels = self.decomposition.labeling(bits);
        let framing = Framing::from_labels(self.g, &labels).expect("labels cover inner edges");
        Some(TaggedFraming {
            framing,
            index: bits,
            partner: bits ^ (self.total - 1),
            canonical: bits & 1 == 0,
        })
    }
}

pub fn enumerate_ample_framings(g: &Dag) -> Result<AmpleFramings<'_>, FramingError> {
    let decomposition = path_cycle_decomposition(g)?;
    let m = decomposition.m();
    assert!(m < 64, "too many strands to enumerate");
    Ok(AmpleFramings { g, decomposition, next: 0, total: 1u64 << m })
}

/// Contraction data of a valid DAG.
#[derive(Clone, Debug)]
pub struct ValidStructure {
    pub trace: ContractionTrace,
    pub decomposition: Decomposition,
    /// Inner vertices merged into a source of the contraction.
    pub source_side: Vec<VertexId>,
    /// Inner vertices merged into a sink of the contraction.
    pub sink_side: Vec<VertexId>,
}

pub fn valid_structure(g: &Dag) -> Result<ValidStructure, FramingError> {
    let trace = complete_contraction(g);
    if !is_full(&trace.result) {
        return Err(FramingError::NotValid);
    }
    let h = &trace.result;
    let decomposition = path_cycle_decomposition(h)?;
    let inner = g.inner_vertices();
    let source_side = inner.iter().copied().filter(|&x| h.is_source(trace.image(x))).collect();
    let sink_side = inner.iter().copied().filter(|&x| h.is_sink(trace.image(x))).collect();
    Ok(ValidStructure { trace, decomposition, source_side, sink_side })
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// `2^M` times the free orders at vertices merged into sources and sinks.
pub fn count_ample_framings(g: &Dag) -> Result<BigUint, FramingError> {
    let s = valid_structure(g)?;
    let mut n = BigUint::one() << s.decomposition.m();
    for &x in &s.source_side {
        n *= factorial(g.out_degree(x));
    }
    for &x in &s.sink_side {
        n *= factorial(g.in_degree(x));
    }
    Ok(n)
}

/// Free orders for a lift: out-orders at source-side vertices and in-orders
/// at sink-side vertices. Missing entries default to increasing edge id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LiftChoices {
    pub out_orders: BTreeMap<VertexId, Vec<EdgeId>>,
    pub in_orders: BTreeMap<VertexId, Vec<EdgeId>>,
}

/// Extends a framing of the complete contraction to the original graph.
///
/// At a vertex whose image is inner, each in-edge is ranked by the best
/// position, in the contracted in-order, among the contracted in-edges it
/// carries flow from; out-edges symmetrically.
pub fn lift_framing(
    g: &Dag,
    trace: &ContractionTrace,
    f_h: &Framing,
    choices: &LiftChoices,
) -> Result<Framing, FramingError> {
    let h = &trace.result;
    f_h.validate(h)?;
    let contracted = trace.contracted_edges();
    let mut memo_in: HashMap<EdgeId, usize> = HashMap::new();
    let mut memo_out: HashMap<EdgeId, usize> = HashMap::new();
    fn key_in(
        g: &Dag,
        e: EdgeId,
        class_order: &[EdgeId],
        contracted: &BTreeSet<EdgeId>,
        memo: &mut HashMap<EdgeId, usize>,
    ) -> usize {
        if let Some(&k) = memo.get(&e) {
            return k;
        }
        let k = if contracted.contains(&e) {
            g.in_edges(g.tail(e))
                .iter()
                .map(|&f| key_in(g, f, class_order, contracted, memo))
                .min()
                .unwrap_or(usize::MAX)
        } else {
            class_order.iter().position(|&f| f == e).unwrap_or(usize::MAX)
        };
        memo.insert(e, k);
        k
    }
    fn key_out(
        g: &Dag,
        e: EdgeId,
        class_order: &[EdgeId],
        contracted: &BTreeSet<EdgeId>,
        memo: &mut HashMap<EdgeId, usize>,
    ) -> usize {
        if let Some(&k) = memo.get(&e) {
            return k;
        }
        let k = if contracted.contains(&e) {
            g.out_edges(g.head(e))
                .iter()
                .map(|&f| key_out(g, f, class_order, contracted, memo))
                .min()
                .unwrap_or(usize::MAX)
        } else {
            class_order.iter().position(|&f| f == e).unwrap_or(usize::MAX)
        };
        memo.insert(e, k);
        k
    }
    let checked = |v: VertexId, given: Option<&Vec<EdgeId>>, edges: &[EdgeId]| {
        match given {
            None => Ok(edges.iter().copied().sorted().collect::<Vec<_>>()),
            Some(o) => {
                let a: BTreeSet<EdgeId> = o.iter().copied().collect();
                let b: BTreeSet<EdgeId> = edges.iter().copied().collect();
                if a == b && o.len() == edges.len() {
                    Ok(o.clone())
                } else {
                    Err(FramingError::BadChoices(v))
                }
            }
        }
    };
    for &v in choices.out_orders.keys().chain(choices.in_orders.keys()) {
        if !g.has_vertex(v) || !g.is_inner(v) {
            return Err(FramingError::BadChoices(v));
        }
    }
    let mut f = Framing::default();
    for x in g.inner_vertices() {
        let class = trace.image(x);
        let (ins, outs) = if h.is_source(class) {
            (
                checked(x, None, g.in_edges(x))?,
                checked(x, choices.out_orders.get(&x), g.out_edges(x))?,
            )
        } else if h.is_sink(class) {
            (
                checked(x, choices.in_orders.get(&x), g.in_edges(x))?,
                checked(x, None, g.out_edges(x))?,
            )
        } else {
            let in_h = &f_h.in_order[&class];
            let out_h = &f_h.out_order[&class];
            memo_in.clear();
            memo_out.clear();
            let ins = g
                .in_edges(x)
                .iter()
                .copied()
                .sorted_by_key(|&e| (key_in(g, e, in_h, &contracted, &mut memo_in), e))
                .collect();
            let outs = g
                .out_edges(x)
                .iter()
                .copied()
                .sorted_by_key(|&e| (key_out(g, e, out_h, &contracted, &mut memo_out), e))
                .collect();
            (ins, outs)
        };
        f.in_order.insert(x, ins);
        f.out_order.insert(x, outs);
    }
    Ok(f)
}

/// All ample framings of a valid DAG, as lifts of the ample framings of its
/// complete contraction.
pub fn enumerate_valid_ample_framings(g: &Dag) -> Result<Vec<Framing>, FramingError> {
    let s = valid_structure(g)?;
    let h = &s.trace.result;
    let mut slots: Vec<(VertexId, bool, Vec<Vec<EdgeId>>)> = Vec::new();
    for &x in &s.source_side {
        let perms = g.out_edges(x).iter().copied().permutations(g.out_degree(x)).collect();
        slots.push((x, true, perms));
    }
    for &x in &s.sink_side {
        let perms = g.in_edges(x).iter().copied().permutations(g.in_degree(x)).collect();
        slots.push((x, false, perms));
    }
    let mut out = Vec::new();
    for tf in enumerate_ample_framings(h)? {
        let mut idx = vec![0usize; slots.len()];
        loop {
            let mut choices = LiftChoices::default();
            for (k, (x, is_out, perms)) in slots.iter().enumerate() {
                let target = if *is_out { &mut choices.out_orders } else { &mut choices.in_orders };
                target.insert(*x, perms[idx[k]].clone());
            }
            out.push(lift_framing(g, &s.trace, &tf.framing, &choices)?);
            let mut k = 0;
            while k < slots.len() {
                idx[k] += 1;
                if idx[k] < slots[k].2.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == slots.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Every framing of `g`, in a fixed order.
pub fn all_framings(g: &Dag) -> Vec<Framing> {
    let inner = g.inner_vertices();
    let mut slots: Vec<Vec<Vec<EdgeId>>> = Vec::new();
    for &v in &inner {
        slots.push(g.in_edges(v).iter().copied().permutations(g.in_degree(v)).collect());
        slots.push(g.out_edges(v).iter().copied().permutations(g.out_degree(v)).collect());
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; slots.len()];
    loop {
        let mut f = Framing::default();
        for (i, &v) in inner.iter().enumerate() {
            f.in_order.insert(v, slots[2 * i][idx[2 * i]].clone());
            f.out_order.insert(v, slots[2 * i + 1][idx[2 * i + 1]].clone());
        }
        out.push(f);
        let mut k = 0;
        while k < slots.len() {
            idx[k] += 1;
            if idx[k] < slots[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == slots.len() {
            return out;
        }
    }
}

pub fn count_all_framings(g: &Dag) -> BigUint {
    g.inner_vertices()
        .into_iter()
        .map(|v| factorial(g.in_degree(v)) * factorial(g.out_degree(v)))
        .fold(BigUint::one(), |a, b| a * b)
}

/// Closed-form number of ample framings of `G(k, n+1)` (`n + 1` vertices).
/// `n = 2k` follows the second case of the counting argument, giving `2^n`.
/// `None` when `n <= k`, where no formula is stated.
pub fn gkn_ample_count(k: u32, n: u32) -> Option<BigUint> {
    let two = BigUint::from(2u32);
    if k == 0 || n <= k {
        None
    } else if n < 2 * k {
        Some(two.pow(2 * (n - k)))
    } else if n < 3 * k {
        Some(two.pow(n))
    } else {
        Some(two.pow(3 * k - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag_core::{enumerate_routes, DEFAULT_ROUTE_CAP};
    use crate::instances::{car, car8_core, g27_labels, gkn, nine_strand, single_edge};

    // car8_core edges: arcs 1->2 (0), 1->3 (1), 1->4 (2), 1->5 (3), 2->6 (6),
    // 3->6 (7), 4->6 (8), 5->6 (9); spine 1->2 (11), 2->3 (12), 3->4 (13),
    // 4->5 (14), 5->6 (15).
    fn core_route(path: &str, arc_first: bool, arc_last: bool) -> Route {
        let g = car8_core();
        let vs: Vec<u32> = path.chars().map(|c| c.to_digit(10).unwrap()).collect();
        let mut edges = Vec::new();
        for (i, w) in vs.windows(2).enumerate() {
            let cands: Vec<EdgeId> = g
                .out_edges(VertexId(w[0]))
                .iter()
                .copied()
                .filter(|&e| g.head(e) == VertexId(w[1]))
                .sorted()
                .collect();
            let prefer_arc = if i == 0 { arc_first } else { arc_last };
            edges.push(if prefer_arc || cands.len() == 1 { cands[0] } else { cands[1] });
        }
        Route(edges)
    }

    fn r(path: &str) -> Route {
        // spine edges on parallel pairs unless the route has only two edges
        let two = path.len() == 3;
        core_route(path, two, two)
    }

    fn ids(es: &[u32]) -> Vec<EdgeId> {
        es.iter().map(|&e| EdgeId(e)).collect()
    }

    #[test]
    fn path_orders_on_core() {
        let g = car8_core();
        let f = Framing::length(&g);
        let fd = FramedDag::new(&g, &f).unwrap();
        let p = ids(&[13, 8]);
        let q = ids(&[13, 14, 15]);
        assert_eq!(compare_paths_at(&fd, VertexId(3), &p, &q), Ok(Ordering::Less));
        let a = ids(&[2]);
        let b = ids(&[11, 12, 13]);
        assert_eq!(compare_paths_at(&fd, VertexId(4), &a, &b), Ok(Ordering::Less));
        assert_eq!(compare_paths_at(&fd, VertexId(4), &b, &b), Ok(Ordering::Equal));
        assert_eq!(
            compare_paths_at(&fd, VertexId(5), &a, &b),
            Err(FramingError::NotThroughVertex(VertexId(5)))
        );
    }

    #[test]
    fn conflicts_on_core() {
        let g = car8_core();
        let f = Framing::length(&g);
        let fd = FramedDag::new(&g, &f).unwrap();
        assert_eq!(conflicts(&fd, &r("1346"), &r("1236")), vec![VertexId(3)]);
        assert_eq!(conflicts(&fd, &r("13456"), &r("12346")), vec![VertexId(3), VertexId(4)]);
        assert!(routes_coherent(&fd, &r("136"), &r("123456")));
    }

    #[test]
    fn length_framing_on_core_has_five_exceptional_routes() {
        let g = car8_core();
        let f = Framing::length(&g);
        let fd = FramedDag::new(&g, &f).unwrap();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        let ex = exceptional_routes(&fd, &routes);
        assert_eq!(ex, exceptional_routes_by_definition(&fd, &routes));
        let got: BTreeSet<Route> = ex.iter().map(|&i| routes[i].clone()).collect();
        let want: BTreeSet<Route> =
            ["123456", "126", "136", "146", "156"].iter().map(|p| r(p)).collect();
        assert_eq!(got, want);
        assert!(is_ample(&fd, &routes));
        let labels = edge_labeling(&fd).unwrap();
        for e in g.edge_ids() {
            let arc = [0, 1, 2, 3, 6, 7, 8, 9].contains(&e.0);
            assert_eq!(labels.label(e), if arc { 1 } else { 2 });
        }
    }

    #[test]
    fn reversing_orders_swaps_labels() {
        let g = car8_core();
        let f = Framing::length(&g);
        let rf = f.reversed();
        let a = edge_labeling(&FramedDag::new(&g, &f).unwrap()).unwrap();
        let b = edge_labeling(&FramedDag::new(&g, &rf).unwrap()).unwrap();
        assert_eq!(a.swapped(), b);
    }

    #[test]
    fn flipping_one_out_order_breaks_ampleness() {
        let g = car8_core();
        let mut f = Framing::length(&g);
        f.out_order.get_mut(&VertexId(3)).unwrap().reverse();
        let fd = FramedDag::new(&g, &f).unwrap();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        assert!(!is_ample(&fd, &routes));
        assert!(matches!(edge_labeling(&fd), Err(FramingError::InconsistentFraming(_))));
    }

    #[test]
    fn exceptional_set_classification_on_core() {
        let g = car8_core();
        let bad = vec![r("123456"), r("136"), r("146"), core_route("1236", true, false)];
        let fails = check_exceptional_set(&g, &bad).unwrap().unwrap_err();
        assert!(fails.contains(&ExceptionalSetFailure::Uncovered(EdgeId(3))));
        assert!(fails.iter().any(|x| matches!(x, ExceptionalSetFailure::OddCycle(..))));
        let good = vec![r("123456"), r("126"), r("136"), r("146"), r("156")];
        let f = check_exceptional_set(&g, &good).unwrap().unwrap();
        let fd = FramedDag::new(&g, &f).unwrap();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        let got: BTreeSet<Route> =
            exceptional_routes(&fd, &routes).into_iter().map(|i| routes[i].clone()).collect();
        assert_eq!(got, good.into_iter().collect());
    }

    #[test]
    fn single_edge_is_trivial() {
        let g = single_edge();
        let f = Framing::default();
        let fd = FramedDag::new(&g, &f).unwrap();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        assert_eq!(exceptional_routes(&fd, &routes), vec![0]);
        assert!(is_ample(&fd, &routes));
        assert!(check_exceptional_set(&g, &routes).unwrap().is_ok());
        let d = path_cycle_decomposition(&g).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].kind, ComponentKind::SourceSink);
        assert_eq!(d.m(), 0);
        assert_eq!(count_ample_framings(&g).unwrap(), BigUint::one());
    }

    #[test]
    fn g27_framing_has_three_exceptional_routes() {
        let h = complete_contraction(&gkn(2, 7).unwrap()).result;
        let f = Framing::from_labels(&h, &g27_labels()).unwrap();
        let fd = FramedDag::new(&h, &f).unwrap();
        let routes = enumerate_routes(&h, DEFAULT_ROUTE_CAP).unwrap();
        assert_eq!(routes.len(), 13);
        let ex = exceptional_routes(&fd, &routes);
        assert_eq!(ex.len(), 3);
        assert!(is_ample(&fd, &routes));
        let labels = edge_labeling(&fd).unwrap();
        assert_eq!(labels.0, g27_labels());
    }

    fn canonical_walk(w: &[VertexId], cyclic: bool) -> Vec<VertexId> {
        let mut best: Option<Vec<VertexId>> = None;
        let mut consider = |c: Vec<VertexId>| {
            if best.as_ref().map_or(true, |b| c < *b) {
                best = Some(c);
            }
        };
        if cyclic {
            let core = &w[..w.len() - 1];
            let n = core.len();
            for rev in [false, true] {
                let base: Vec<VertexId> =
                    if rev { core.iter().rev().copied().collect() } else { core.to_vec() };
                for k in 0..n {
                    let mut c: Vec<VertexId> = (0..n).map(|i| base[(i + k) % n]).collect();
                    c.push(c[0]);
                    consider(c);
                }
            }
        } else {
            consider(w.to_vec());
            consider(w.iter().rev().copied().collect());
        }
        best.unwrap()
    }

    fn walk(s: &[u32]) -> Vec<VertexId> {
        s.iter().map(|&v| VertexId(v)).collect()
    }

    #[test]
    fn nine_strand_decomposition() {
        let g = nine_strand();
        let d = path_cycle_decomposition(&g).unwrap();
        assert_eq!(d.m(), 9);
        assert_eq!(d.components.len(), 9);
        let got: BTreeSet<Vec<VertexId>> = d
            .components
            .iter()
            .map(|c| canonical_walk(&c.vertex_walk(&g), c.kind == ComponentKind::Cycle))
            .collect();
        let (s, x, t) = (0, 10, 11);
        let want: BTreeSet<Vec<VertexId>> = [
            (vec![s, 1, s], false),
            (vec![s, 2, s], false),
            (vec![s, 3, s], false),
            (vec![s, 7, 1, 4, 2, 5, 3, 6, s], false),
            (vec![t, 5, 8, 7, 9, 4, t], false),
            (vec![s, x, 6, t], false),
            (vec![t, 8, t], false),
            (vec![t, 9, t], false),
            (vec![t, x, t], false),
        ]
        .into_iter()
        .map(|(w, c)| canonical_walk(&walk(&w), c))
        .collect();
        assert_eq!(got, want);
        assert_eq!(count_ample_framings(&g).unwrap(), BigUint::from(512u32));
    }

    #[test]
    fn g310_decomposition_and_count() {
        let g = gkn(3, 10).unwrap();
        let h = complete_contraction(&g).result;
        let d = path_cycle_decomposition(&h).unwrap();
        assert_eq!(d.m(), 4);
        let walks: BTreeSet<Vec<VertexId>> = d
            .components
            .iter()
            .map(|c| canonical_walk(&c.vertex_walk(&h), c.kind == ComponentKind::Cycle))
            .collect();
        // labels 1..10 of the drawing are contraction vertices 1,4,5,6,7,8
        // with 1 the source and 8 the sink
        let want: BTreeSet<Vec<VertexId>> = [
            (vec![1, 4, 1], false),
            (vec![1, 5, 4, 7, 6, 8], false),
            (vec![1, 6, 5, 8], false),
            (vec![8, 7, 8], false),
        ]
        .into_iter()
        .map(|(w, c)| canonical_walk(&walk(&w), c))
        .collect();
        assert_eq!(walks, want);
        assert_eq!(count_ample_framings(&g).unwrap(), BigUint::from(256u32));
    }

    fn brute_force_ample(g: &Dag) -> BTreeSet<Framing> {
        let routes = enumerate_routes(g, DEFAULT_ROUTE_CAP).unwrap();
        all_framings(g)
            .into_iter()
            .filter(|f| is_ample(&FramedDag::new(g, f).unwrap(), &routes))
            .collect()
    }

    #[test]
    fn enumeration_matches_brute_force_on_core() {
        let g = car8_core();
        let listed: BTreeSet<Framing> =
            enumerate_ample_framings(&g).unwrap().map(|t| t.framing).collect();
        assert_eq!(listed.len() as u64, 1 << path_cycle_decomposition(&g).unwrap().m());
        assert_eq!(listed, brute_force_ample(&g));
    }

    #[test]
    fn swap_partner_reverses_labels() {
        let g = car8_core();
        let all: Vec<TaggedFraming> = enumerate_ample_framings(&g).unwrap().collect();
        for t in &all {
            let p = &all[t.partner as usize];
            assert_eq!(p.framing, t.framing.reversed());
            assert_ne!(p.canonical, t.canonical);
        }
    }

    #[test]
    fn lifted_framings_on_small_valid_graphs_match_brute_force() {
        let graphs = [
            gkn(2, 5).unwrap(),
            gkn(2, 6).unwrap(),
            gkn(3, 6).unwrap(),
            Dag::from_pairs(&[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5)]).unwrap(),
        ];
        for g in &graphs {
            let lifted: BTreeSet<Framing> =
                enumerate_valid_ample_framings(g).unwrap().into_iter().collect();
            let brute = brute_force_ample(g);
            assert_eq!(lifted, brute);
            assert_eq!(BigUint::from(brute.len()), count_ample_framings(g).unwrap());
        }
    }

    #[test]
    fn idle_cycle_example_counts_four() {
        // s->a, s->b, a->x, b->x, x->t1, x->t2: a and b merge into s, and the
        // only inner vertex x carries two strands
        let g = Dag::from_pairs(&[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5)]).unwrap();
        let s = valid_structure(&g).unwrap();
        assert_eq!(s.decomposition.m(), 2);
        assert_eq!(s.source_side, vec![VertexId(1), VertexId(2)]);
        assert!(s.sink_side.is_empty());
        assert_eq!(count_ample_framings(&g).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn lift_of_length_framing_on_car8() {
        let g = car(8).unwrap();
        let t = complete_contraction(&g);
        let fh = Framing::length(&t.result);
        let f = lift_framing(&g, &t, &fh, &LiftChoices::default()).unwrap();
        let fd = FramedDag::new(&g, &f).unwrap();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        assert!(is_ample(&fd, &routes));
        let ex = exceptional_routes(&fd, &routes);
        assert_eq!(ex.len(), 7);
        assert_eq!(ex.iter().filter(|&&i| t.project_route(&routes[i]).len() > 1).count(), 5);
        assert_eq!(f, Framing::length(&g));
    }

    #[test]
    fn bad_lift_choices_are_rejected() {
        let g = gkn(2, 6).unwrap();
        let t = complete_contraction(&g);
        let tf = enumerate_ample_framings(&t.result).unwrap().next().unwrap();
        let s = valid_structure(&g).unwrap();
        if let Some(&x) = s.source_side.first() {
            let mut c = LiftChoices::default();
            c.out_orders.insert(x, vec![EdgeId(999)]);
            assert_eq!(
                lift_framing(&g, &t, &tf.framing, &c),
                Err(FramingError::BadChoices(x))
            );
        }
    }

    #[test]
    fn exceptional_count_matches_source_degrees_on_core() {
        let g = car8_core();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        let want: usize = g.sources().iter().map(|&s| g.out_degree(s)).sum();
        for t in enumerate_ample_framings(&g).unwrap() {
            let fd = FramedDag::new(&g, &t.framing).unwrap();
            assert_eq!(exceptional_routes(&fd, &routes).len(), want);
        }
    }
}
