//! Directed acyclic multigraphs, routes and idle-edge contraction.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on the number of enumerated routes.
pub const DEFAULT_ROUTE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("vertex {0} listed twice")]
    DuplicateVertex(VertexId),
    #[error("edge id {0} used twice")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: EdgeId, vertex: VertexId },
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("vertex {0} has no incident edges")]
    IsolatedVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is not idle")]
    NotIdle(EdgeId),
    #[error("route enumeration exceeded the cap of {cap} routes")]
    RouteExplosion { cap: usize },
    #[error("graph has no route")]
    NoRoute,
}

/// An acyclic multigraph with stable vertex and edge identities.
///
/// Edges are stored sorted by id; `edge_index` gives the dense position used
/// by characteristic vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    edge_pos: HashMap<EdgeId, usize>,
    vertex_pos: HashMap<VertexId, usize>,
    ins: Vec<Vec<EdgeId>>,
    outs: Vec<Vec<EdgeId>>,
    topo: Vec<VertexId>,
}

impl Dag {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Dag, DagError> {
        let mut vs: Vec<VertexId> = vertices.into_iter().collect();
        vs.sort();
        for w in vs.windows(2) {
            if w[0] == w[1] {
                return Err(DagError::DuplicateVertex(w[0]));
            }
        }
        let mut es: Vec<Edge> = edges.into_iter().collect();
        es.sort_by_key(|e| e.id);
        for w in es.windows(2) {
            if w[0].id == w[1].id {
                return Err(DagError::DuplicateEdge(w[0].id));
            }
        }
        let vertex_pos: HashMap<VertexId, usize> =
            vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edge_pos: HashMap<EdgeId, usize> =
            es.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
        let mut ins = vec![Vec::new(); vs.len()];
        let mut outs = vec![Vec::new(); vs.len()];
        for e in &es {
            for v in [e.tail, e.head] {
                if !vertex_pos.contains_key(&v) {
                    return Err(DagError::UnknownVertex { edge: e.id, vertex: v });
                }
            }
            if e.tail == e.head {
                return Err(DagError::SelfLoop(e.id));
            }
            outs[vertex_pos[&e.tail]].push(e.id);
            ins[vertex_pos[&e.head]].push(e.id);
        }
        let mut g = Dag {
            vertices: vs,
            edges: es,
            edge_pos,
            vertex_pos,
            ins,
            outs,
            topo: Vec::new(),
        };
        g.topo = g.kahn().ok_or(DagError::Cycle)?;
        Ok(g)
    }

    /// Builds a graph from `(tail, head)` pairs; edge ids follow slice order.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Dag, DagError> {
        let vertices: BTreeSet<VertexId> = pairs
            .iter()
            .flat_map(|&(a, b)| [VertexId(a), VertexId(b)])
            .collect();
        let edges = pairs.iter().enumerate().map(|(i, &(a, b))| Edge {
            id: EdgeId(i as u32),
            tail: VertexId(a),
            head: VertexId(b),
        });
        Dag::new(vertices, edges)
    }

    fn kahn(&self) -> Option<Vec<VertexId>> {
        let mut indeg: Vec<usize> = self.ins.iter().map(Vec::len).collect();
        let mut heap: BinaryHeap<Reverse<VertexId>> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| indeg[*i] == 0)
            .map(|(_, &v)| Reverse(v))
            .collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(Reverse(v)) = heap.pop() {
            order.push(v);
            for e in &self.outs[self.vertex_pos[&v]] {
                let h = self.vertex_pos[&self.edge(*e).head];
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    heap.push(Reverse(self.vertices[h]));
                }
            }
        }
        (order.len() == self.vertices.len()).then_some(order)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertex_pos.contains_key(&v)
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edge_pos.contains_key(&e)
    }

    /// Panics on an unknown id; use `try_edge` for untrusted input.
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[self.edge_pos[&e]]
    }

    pub fn try_edge(&self, e: EdgeId) -> Result<&Edge, DagError> {
        self.edge_pos
            .get(&e)
            .map(|&i| &self.edges[i])
            .ok_or(DagError::UnknownEdge(e))
    }

    pub fn edge_index(&self, e: EdgeId) -> usize {
        self.edge_pos[&e]
    }

    pub fn vertex_index(&self, v: VertexId) -> usize {
        self.vertex_pos[&v]
    }

    pub fn tail(&self, e: EdgeId) -> VertexId {
        self.edge(e).tail
    }

    pub fn head(&self, e: EdgeId) -> VertexId {
        self.edge(e).head
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.ins[self.vertex_pos[&v]]
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.outs[self.vertex_pos[&v]]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_edges(v).len()
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_edges(v).len()
    }

    pub fn is_source(&self, v: VertexId) -> bool {
        self.in_degree(v) == 0 && self.out_degree(v) > 0
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.out_degree(v) == 0 && self.in_degree(v) > 0
    }

    pub fn is_inner(&self, v: VertexId) -> bool {
        self.in_degree(v) > 0 && self.out_degree(v) > 0
    }

    pub fn sources(&self) -> Vec<VertexId> {
        self.vertices.iter().copied().filter(|&v| self.is_source(v)).collect()
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        self.vertices.iter().copied().filter(|&v| self.is_sink(v)).collect()
    }

    pub fn inner_vertices(&self) -> Vec<VertexId> {
        self.vertices.iter().copied().filter(|&v| self.is_inner(v)).collect()
    }

    /// Topological order, ties broken by smallest vertex id.
    pub fn topological_order(&self) -> &[VertexId] {
        &self.topo
    }

    /// Sources first, then inner vertices in topological order, then sinks.
    pub fn linear_extension(&self) -> Vec<VertexId> {
        let mut order = self.sources();
        order.extend(self.topo.iter().copied().filter(|&v| self.is_inner(v)));
        order.extend(self.sinks());
        order
    }

    /// Contracts an idle edge; the merged vertex keeps the smaller id.
    pub fn contract_edge(&self, e: EdgeId) -> Result<(Dag, VertexId, VertexId), DagError> {
        let edge = *self.try_edge(e)?;
        if !is_idle(self, e) {
            return Err(DagError::NotIdle(e));
        }
        let kept = edge.tail.min(edge.head);
        let removed = edge.tail.max(edge.head);
        let rename = |v: VertexId| if v == removed { kept } else { v };
        let vertices = self.vertices.iter().copied().filter(|&v| v != removed);
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|x| x.id != e)
            .map(|x| Edge { id: x.id, tail: rename(x.tail), head: rename(x.head) })
            .collect();
        Ok((Dag::new(vertices, edges)?, kept, removed))
    }

    pub fn without_edges(&self, drop: &BTreeSet<EdgeId>) -> Result<Dag, DagError> {
        let edges: Vec<Edge> =
            self.edges.iter().copied().filter(|e| !drop.contains(&e.id)).collect();
        let used: BTreeSet<VertexId> = edges.iter().flat_map(|e| [e.tail, e.head]).collect();
        Dag::new(used, edges)
    }

    pub fn relabel_vertices(&self, map: &BTreeMap<VertexId, VertexId>) -> Result<Dag, DagError> {
        let f = |v: VertexId| map.get(&v).copied().unwrap_or(v);
        Dag::new(
            self.vertices.iter().map(|&v| f(v)),
            self.edges.iter().map(|e| Edge { id: e.id, tail: f(e.tail), head: f(e.head) }),
        )
    }

    /// Multiset of (in-degree, out-degree) pairs, sorted.
    pub fn degree_profile(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = self
            .vertices
            .iter()
            .map(|&v| (self.in_degree(v), self.out_degree(v)))
            .collect();
        p.sort();
        p
    }
}

/// A maximal source-to-sink path, stored as its edge sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route(pub Vec<EdgeId>);

impl Route {
    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.contains(&e)
    }

    /// Vertex sequence from source to sink.
    pub fn vertices(&self, g: &Dag) -> Vec<VertexId> {
        let mut vs = Vec::with_capacity(self.0.len() + 1);
        if let Some(&first) = self.0.first() {
            vs.push(g.tail(first));
        }
        vs.extend(self.0.iter().map(|&e| g.head(e)));
        vs
    }

    pub fn characteristic_vector(&self, g: &Dag) -> Vec<i64> {
        let mut v = vec![0; g.num_edges()];
        for &e in &self.0 {
            v[g.edge_index(e)] = 1;
        }
        v
    }

    pub fn is_route_of(&self, g: &Dag) -> bool {
        let Some((&first, &last)) = self.0.first().zip(self.0.last()) else {
            return false;
        };
        if !self.0.iter().all(|&e| g.has_edge(e)) {
            return false;
        }
        g.is_source(g.tail(first))
            && g.is_sink(g.head(last))
            && self.0.windows(2).all(|w| g.head(w[0]) == g.tail(w[1]))
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.0.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexClasses {
    pub sources: BTreeSet<VertexId>,
    pub sinks: BTreeSet<VertexId>,
    pub inner: BTreeSet<VertexId>,
}

pub fn classify_vertices(g: &Dag) -> Result<VertexClasses, DagError> {
    let mut c = VertexClasses {
        sources: BTreeSet::new(),
        sinks: BTreeSet::new(),
        inner: BTreeSet::new(),
    };
    for &v in g.vertices() {
        match (g.in_degree(v), g.out_degree(v)) {
            (0, 0) => return Err(DagError::IsolatedVertex(v)),
            (0, _) => c.sources.insert(v),
            (_, 0) => c.sinks.insert(v),
            _ => c.inner.insert(v),
        };
    }
    Ok(c)
}

/// `(dim of the flow space, dim of the unit flow polytope)`.
pub fn flow_dims(g: &Dag) -> Result<(usize, usize), DagError> {
    if g.num_edges() == 0 {
        return Err(DagError::NoRoute);
    }
    let space = g.num_edges() - g.inner_vertices().len();
    Ok((space, space - 1))
}

/// All routes, sorted lexicographically by edge-id sequence.
pub fn enumerate_routes(g: &Dag, cap: usize) -> Result<Vec<Route>, DagError> {
    let mut routes = Vec::new();
    let mut path: Vec<EdgeId> = Vec::new();
    // explicit stack of (vertex, next out-edge slot)
    for s in g.sources() {
        let mut stack: Vec<(VertexId, usize)> = vec![(s, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, slot) = *top;
            let outs = g.out_edges(v);
            if outs.is_empty() {
                if routes.len() == cap {
                    return Err(DagError::RouteExplosion { cap });
                }
                routes.push(Route(path.clone()));
                stack.pop();
                path.pop();
            } else if slot < outs.len() {
                top.1 += 1;
                let e = outs[slot];
                path.push(e);
                stack.push((g.head(e), 0));
            } else {
                stack.pop();
                path.pop();
            }
        }
    }
    routes.sort();
    Ok(routes)
}

pub fn is_idle(g: &Dag, e: EdgeId) -> bool {
    let edge = g.edge(e);
    (g.is_inner(edge.head) && g.in_degree(edge.head) == 1)
        || (g.is_inner(edge.tail) && g.out_degree(edge.tail) == 1)
}

pub fn idle_edges(g: &Dag) -> BTreeSet<EdgeId> {
    g.edge_ids().filter(|&e| is_idle(g, e)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionStep {
    pub edge: EdgeId,
    pub kept: VertexId,
    pub removed: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionTrace {
    pub steps: Vec<ContractionStep>,
    pub result: Dag,
}

impl ContractionTrace {
    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn contracted_edges(&self) -> BTreeSet<EdgeId> {
        self.steps.iter().map(|s| s.edge).collect()
    }

    /// Image of an original vertex in the contracted graph.
    pub fn image(&self, v: VertexId) -> VertexId {
        self.steps
            .iter()
            .fold(v, |cur, s| if cur == s.removed { s.kept } else { cur })
    }

    /// Drops the contracted edges from a route of the original graph.
    pub fn project_route(&self, r: &Route) -> Route {
        let gone = self.contracted_edges();
        Route(r.0.iter().copied().filter(|e| !gone.contains(e)).collect())
    }
}

/// Contracts idle edges, smallest edge id first, until none is left.
pub fn complete_contraction(g: &Dag) -> ContractionTrace {
    complete_contraction_by(g, |_| 0)
}

/// Like `complete_contraction`, with `pick` choosing among the current idle
/// edges (given in increasing id order) by index.
pub fn complete_contraction_by(
    g: &Dag,
    mut pick: impl FnMut(&[EdgeId]) -> usize,
) -> ContractionTrace {
    let mut cur = g.clone();
    let mut steps = Vec::new();
    loop {
        let idle: Vec<EdgeId> = idle_edges(&cur).into_iter().collect();
        if idle.is_empty() {
            break;
        }
        let e = idle[pick(&idle) % idle.len()];
        let (next, kept, removed) = cur.contract_edge(e).expect("idle edge contracts");
        steps.push(ContractionStep { edge: e, kept, removed });
        cur = next;
    }
    ContractionTrace { steps, result: cur }
}

pub fn is_full(g: &Dag) -> bool {
    g.vertices()
        .iter()
        .filter(|&&v| g.is_inner(v))
        .all(|&v| g.in_degree(v) == 2 && g.out_degree(v) == 2)
}

pub fn is_valid(g: &Dag) -> bool {
    is_full(&complete_contraction(g).result)
}

/// Whether the idle edges, taken as undirected edges, contain no cycle.
pub fn idle_edges_form_forest(g: &Dag) -> bool {
    let mut parent: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in idle_edges(g) {
        let a = find(&mut parent, g.vertex_index(g.tail(e)));
        let b = find(&mut parent, g.vertex_index(g.head(e)));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}
