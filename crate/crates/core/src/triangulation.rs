//! DKK triangulations: maximal cliques of pairwise coherent routes, flips,
//! lattice-volume checks and the dual graph.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::dag_core::{enumerate_routes, flow_dims, Dag, DagError, Route};
use crate::framing::{exceptional_routes, routes_coherent, FramedDag, Framing, FramingError};

pub const DEFAULT_CLIQUE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("clique enumeration exceeded the cap of {cap} cliques")]
    CliqueExplosion { cap: usize },
    #[error("route set of size {size} is not a full-dimensional simplex (dimension {dim})")]
    NotSimplex { size: usize, dim: usize },
    #[error("route {route} of clique {clique} has {found} flip partners instead of one")]
    NoFlip { clique: usize, route: usize, found: usize },
    #[error("route {0} is exceptional and cannot be flipped")]
    Exceptional(usize),
    #[error("integer overflow during elimination")]
    Overflow,
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Route indices of a clique, increasing.
pub type Clique = Vec<usize>;

/// A framed DAG with its routes, coherence relation and maximal cliques.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub routes: Vec<Route>,
    pub exceptional: Vec<usize>,
    pub cliques: Vec<Clique>,
    coherent: Vec<FixedBitSet>,
    is_exceptional: FixedBitSet,
}

impl Triangulation {
    pub fn new(
        g: &Dag,
        f: &Framing,
        route_cap: usize,
        clique_cap: usize,
    ) -> Result<Triangulation, TriangulationError> {
        let fd = FramedDag::new(g, f)?;
        let routes = enumerate_routes(g, route_cap)?;
        Triangulation::from_routes(&fd, routes, clique_cap)
    }

    pub fn from_routes(
        fd: &FramedDag,
        routes: Vec<Route>,
        clique_cap: usize,
    ) -> Result<Triangulation, TriangulationError> {
        let n = routes.len();
        let mut coherent = vec![FixedBitSet::with_capacity(n); n];
        for i in 0..n {
            coherent[i].insert(i);
            for j in i + 1..n {
                if routes_coherent(fd, &routes[i], &routes[j]) {
                    coherent[i].insert(j);
                    coherent[j].insert(i);
                }
            }
        }
        let exceptional = exceptional_routes(fd, &routes);
        let mut is_exceptional = FixedBitSet::with_capacity(n);
        for &i in &exceptional {
            is_exceptional.insert(i);
        }
        let mut t = Triangulation { routes, exceptional, cliques: Vec::new(), coherent, is_exceptional };
        t.cliques = t.maximal_cliques(clique_cap)?;
        Ok(t)
    }

    pub fn coherent(&self, i: usize, j: usize) -> bool {
        self.coherent[i].contains(j)
    }

    pub fn is_clique(&self, c: &[usize]) -> bool {
        c.iter().all(|&i| c.iter().all(|&j| self.coherent(i, j)))
    }

    pub fn is_exceptional(&self, i: usize) -> bool {
        self.is_exceptional.contains(i)
    }

    /// Exceptional routes from the coherence relation alone.
    pub fn universally_coherent(&self) -> Vec<usize> {
        let n = self.routes.len();
        (0..n).filter(|&i| self.coherent[i].count_ones(..) == n).collect()
    }

    /// Bron–Kerbosch with pivoting over the non-exceptional routes; every
    /// clique is extended by the exceptional routes.
    fn maximal_cliques(&self, cap: usize) -> Result<Vec<Clique>, TriangulationError> {
        let n = self.routes.len();
        let mut p = FixedBitSet::with_capacity(n);
        p.insert_range(..);
        p.difference_with(&self.is_exceptional);
        let x = FixedBitSet::with_capacity(n);
        let mut r: Vec<usize> = self.exceptional.clone();
        let mut out = Vec::new();
        self.bron_kerbosch(&mut r, p, x, cap, &mut out)?;
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        Ok(out)
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        mut p: FixedBitSet,
        mut x: FixedBitSet,
        cap: usize,
        out: &mut Vec<Clique>,
    ) -> Result<(), TriangulationError> {
        if p.is_clear() && x.is_clear() {
            if out.len() == cap {
                return Err(TriangulationError::CliqueExplosion { cap });
            }
            out.push(r.clone());
            return Ok(());
        }
        let pivot = p
            .union(&x)
            .max_by_key(|&u| self.coherent[u].intersection(&p).count())
            .expect("p or x nonempty");
        let mut candidates = p.clone();
        candidates.difference_with(&self.coherent[pivot]);
        // coherence is reflexive, so the pivot itself must be put back
        candidates.set(pivot, p.contains(pivot));
        for v in candidates.ones() {
            let mut np = p.clone();
            np.intersect_with(&self.coherent[v]);
            np.set(v, false);
            let mut nx = x.clone();
            nx.intersect_with(&self.coherent[v]);
            nx.set(v, false);
            r.push(v);
            self.bron_kerbosch(r, np, nx, cap, out)?;
            r.pop();
            p.set(v, false);
            x.insert(v);
        }
        Ok(())
    }

    /// The unique other maximal clique containing `clique \ {r}`.
    pub fn flip(&self, clique: usize, r: usize) -> Result<(Clique, usize), TriangulationError> {
        if self.is_exceptional(r) {
            return Err(TriangulationError::Exceptional(r));
        }
        let c = &self.cliques[clique];
        assert!(c.contains(&r), "route {r} is not in clique {clique}");
        let mut common = FixedBitSet::with_capacity(self.routes.len());
        common.insert_range(..);
        for &s in c.iter().filter(|&&s| s != r) {
            common.intersect_with(&self.coherent[s]);
        }
        for &s in c {
            common.set(s, false);
        }
        let found: Vec<usize> = common.ones().collect();
        if found.len() != 1 {
            return Err(TriangulationError::NoFlip { clique, route: r, found: found.len() });
        }
        let mut next: Clique = c.iter().copied().filter(|&s| s != r).collect();
        next.push(found[0]);
        next.sort_unstable();
        Ok((next, found[0]))
    }

    pub fn clique_index(&self, c: &[usize]) -> Option<usize> {
        self.cliques.binary_search_by(|x| x.as_slice().cmp(c)).ok()
    }

    /// Dual graph by matching cliques on their codimension-one faces.
    pub fn dual_graph(&self) -> DualGraph {
        let mut faces: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (i, c) in self.cliques.iter().enumerate() {
            for &r in c.iter().filter(|&&r| !self.is_exceptional(r)) {
                let face: Vec<usize> = c.iter().copied().filter(|&s| s != r).collect();
                faces.entry(face).or_default().push((i, r));
            }
        }
        let mut edges = Vec::new();
        for pair in faces.values() {
            for a in 0..pair.len() {
                for b in a + 1..pair.len() {
                    let (x, y) = if pair[a].0 < pair[b].0 { (pair[a], pair[b]) } else { (pair[b], pair[a]) };
                    edges.push(DualEdge { a: x.0, b: y.0, route_a: x.1, route_b: y.1 });
                }
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        DualGraph { nodes: self.cliques.len(), edges }
    }

    /// Dual graph by flipping every non-exceptional route of every clique.
    pub fn dual_graph_by_flips(&self) -> Result<DualGraph, TriangulationError> {
        let mut edges = Vec::new();
        for (i, c) in self.cliques.iter().enumerate() {
            for &r in c.iter().filter(|&&r| !self.is_exceptional(r)) {
                let (next, s) = self.flip(i, r)?;
                let j = self.clique_index(&next).ok_or(TriangulationError::NoFlip {
                    clique: i,
                    route: r,
                    found: 0,
                })?;
                if i < j {
                    edges.push(DualEdge { a: i, b: j, route_a: r, route_b: s });
                }
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        Ok(DualGraph { nodes: self.cliques.len(), edges })
    }
}

/// Two maximal cliques sharing all routes but `route_a` (in `a`) and
/// `route_b` (in `b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DualEdge {
    pub a: usize,
    pub b: usize,
    pub route_a: usize,
    pub route_b: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualGraph {
    pub nodes: usize,
    pub edges: Vec<DualEdge>,
}

impl DualGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes];
        for e in &self.edges {
            d[e.a] += 1;
            d[e.b] += 1;
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.nodes];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph dual {\n");
        for i in 0..self.nodes {
            let _ = writeln!(s, "  c{i};");
        }
        for e in &self.edges {
            let _ = writeln!(s, "  c{} -- c{} [label=\"{}/{}\"];", e.a, e.b, e.route_a, e.route_b);
        }
        s.push_str("}\n");
        s
    }
}

/// Whether the routes of `clique` form a unimodular simplex: their
/// characteristic vectors must be a basis of the integer flows in their span,
/// that is, the gcd of the maximal minors must be 1.
pub fn verify_unimodular(
    g: &Dag,
    routes: &[Route],
    clique: &[usize],
) -> Result<bool, TriangulationError> {
    let (space, dim) = flow_dims(g)?;
    if clique.len() != space {
        return Err(TriangulationError::NotSimplex { size: clique.len(), dim });
    }
    let rows: Vec<Vec<i128>> = clique
        .iter()
        .map(|&i| routes[i].characteristic_vector(g).into_iter().map(i128::from).collect())
        .collect();
    let diag = smith_diagonal(rows)?;
    if diag.len() < clique.len() {
        return Err(TriangulationError::NotSimplex { size: clique.len(), dim });
    }
    Ok(diag.iter().all(|d| d.abs() == 1))
}

/// Nonzero diagonal of a Smith-style diagonalisation (without the
/// divisibility normalisation); the product of its absolute values is the gcd
/// of the maximal minors.
pub fn smith_diagonal(mut m: Vec<Vec<i128>>) -> Result<Vec<i128>, TriangulationError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { return Ok(diag) };
            m.swap(t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            let p = m[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        m[i][j] = m[i][j]
                            .checked_sub(q.checked_mul(m[t][j]).ok_or(TriangulationError::Overflow)?)
                            .ok_or(TriangulationError::Overflow)?;
                    }
                }
                clean &= m[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = m[t][j] / p;
                if q != 0 {
                    for row in m.iter_mut().skip(t) {
                        row[j] = row[j]
                            .checked_sub(q.checked_mul(row[t]).ok_or(TriangulationError::Overflow)?)
                            .ok_or(TriangulationError::Overflow)?;
                    }
                }
                clean &= m[t][j] == 0;
            }
            if clean {
                diag.push(p);
                break;
            }
        }
    }
    Ok(diag)
}
