//! The τ-tilting poset on the maximal cliques: oriented dual edges with
//! brick labels, down-cover statistics, shellings and the kappa map.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dag_core::{Dag, EdgeId, Route, VertexId};
use crate::framing::EdgeLabeling;
use crate::triangulation::Triangulation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("routes {0} and {1} share no component entered and left with opposite labels")]
    NoQualifyingComponent(usize, usize),
    #[error("routes {a} and {b} share {count} qualifying components")]
    MultipleQualifyingComponents { a: usize, b: usize, count: usize },
    #[error("oriented dual graph has a directed cycle")]
    CycleDetected,
    #[error("cover {lower} < {upper} is implied by other covers")]
    NotTransitivelyReduced { lower: usize, upper: usize },
    #[error("order is not a linear extension of the poset")]
    NotLinearExtension,
    #[error("no node has up-bricks equal to the down-bricks of node {0}")]
    NoKappaImage(usize),
    #[error("several nodes have up-bricks equal to the down-bricks of node {0}")]
    AmbiguousKappaImage(usize),
}

/// A common subwalk of two routes: its vertices and the edges between them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Brick {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl fmt::Display for Brick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.vertices[0])?;
        for (e, v) in self.edges.iter().zip(&self.vertices[1..]) {
            write!(f, " {e} v{v}")?;
        }
        Ok(())
    }
}

/// Which of the two routes lies in the upper clique.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Upper {
    First,
    Second,
}

fn route_vertices(g: &Dag, r: &Route) -> Vec<VertexId> {
    r.vertices(g)
}

/// Orients the dual edge exchanging `r1` and `r2`: the route entering the
/// unique qualifying common component on a 2-edge and leaving on a 1-edge is
/// the upper one. Indices are only used in error reports.
pub fn orient_edge(
    g: &Dag,
    labels: &EdgeLabeling,
    (i1, r1): (usize, &Route),
    (i2, r2): (usize, &Route),
) -> Result<(Upper, Brick), PosetError> {
    let v1 = route_vertices(g, r1);
    let v2 = route_vertices(g, r2);
    let (e1, e2) = (r1.edges(), r2.edges());
    let pos2: HashMap<VertexId, usize> = v2.iter().enumerate().map(|(j, &v)| (v, j)).collect();
    // maximal runs (i0..=i1, j0..=j1) of shared vertices joined by shared edges
    let mut comps: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (i, v) in v1.iter().enumerate() {
        let Some(&j) = pos2.get(v) else { continue };
        if let Some(last) = comps.last_mut() {
            if last.1 + 1 == i && last.3 + 1 == j && e1[i - 1] == e2[j - 1] {
                last.1 = i;
                last.3 = j;
                continue;
            }
        }
        comps.push((i, i, j, j));
    }
    let label = |e: EdgeId| labels.get(e).unwrap_or(0);
    let mut found = Vec::new();
    for &(a0, a1, b0, b1) in &comps {
        if a0 == 0 || b0 == 0 || a1 == e1.len() || b1 == e2.len() {
            continue;
        }
        let p1 = (label(e1[a0 - 1]), label(e1[a1]));
        let p2 = (label(e2[b0 - 1]), label(e2[b1]));
        let upper = match (p1, p2) {
            ((2, 1), (1, 2)) => Upper::First,
            ((1, 2), (2, 1)) => Upper::Second,
            _ => continue,
        };
        let brick = Brick { vertices: v1[a0..=a1].to_vec(), edges: e1[a0..a1].to_vec() };
        found.push((upper, brick));
    }
    match found.len() {
        0 => Err(PosetError::NoQualifyingComponent(i1, i2)),
        1 => Ok(found.pop().unwrap()),
        count => Err(PosetError::MultipleQualifyingComponents { a: i1, b: i2, count }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub lower: usize,
    pub upper: usize,
    pub brick: Brick,
}

/// Cliques ordered by oriented dual edges.
#[derive(Clone, Debug, Serialize)]
pub struct TauPoset {
    pub nodes: usize,
    pub covers: Vec<Cover>,
    #[serde(skip)]
    up: Vec<Vec<usize>>,
    #[serde(skip)]
    down: Vec<Vec<usize>>,
    #[serde(skip)]
    topo: Vec<usize>,
}

impl TauPoset {
    pub fn build(g: &Dag, labels: &EdgeLabeling, tri: &Triangulation) -> Result<TauPoset, PosetError> {
        let dual = tri.dual_graph();
        let mut covers = Vec::with_capacity(dual.edges.len());
        for e in &dual.edges {
            let (upper, brick) = orient_edge(
                g,
                labels,
                (e.route_a, &tri.routes[e.route_a]),
                (e.route_b, &tri.routes[e.route_b]),
            )?;
            let (lower, upper) = match upper {
                Upper::First => (e.b, e.a),
                Upper::Second => (e.a, e.b),
            };
            covers.push(Cover { lower, upper, brick });
        }
        TauPoset::from_covers(tri.cliques.len(), covers)
    }

    /// Builds the poset from oriented covers, checking acyclicity and that no
    /// cover is implied by the others.
    pub fn from_covers(nodes: usize, covers: Vec<Cover>) -> Result<TauPoset, PosetError> {
        let mut up = vec![Vec::new(); nodes];
        let mut down = vec![Vec::new(); nodes];
        for (k, c) in covers.iter().enumerate() {
            up[c.lower].push(k);
            down[c.upper].push(k);
        }
        let mut indeg: Vec<usize> = down.iter().map(|d| d.len()).collect();
        let mut ready: Vec<usize> = (0..nodes).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(nodes);
        while let Some(v) = ready.pop() {
            topo.push(v);
            for &k in &up[v] {
                let u = covers[k].upper;
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    ready.push(u);
                }
            }
        }
        if topo.len() != nodes {
            return Err(PosetError::CycleDetected);
        }
        let p = TauPoset { nodes, covers, up, down, topo };
        let reach = p.reachability();
        for c in &p.covers {
            for &k in &p.up[c.lower] {
                let w = p.covers[k].upper;
                if w != c.upper && reach[w].contains(c.upper) {
                    return Err(PosetError::NotTransitivelyReduced { lower: c.lower, upper: c.upper });
                }
            }
        }
        Ok(p)
    }

    /// `reach[v]` holds every node `u` with `v <= u`.
    pub fn reachability(&self) -> Vec<FixedBitSet> {
        let mut reach = vec![FixedBitSet::with_capacity(self.nodes); self.nodes];
        for &v in self.topo.iter().rev() {
            let mut r = FixedBitSet::with_capacity(self.nodes);
            r.insert(v);
            for &k in &self.up[v] {
                r.union_with(&reach[self.covers[k].upper]);
            }
            reach[v] = r;
        }
        reach
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.reachability()[a].contains(b)
    }

    pub fn upper_covers(&self, v: usize) -> impl Iterator<Item = &Cover> {
        self.up[v].iter().map(move |&k| &self.covers[k])
    }

    pub fn lower_covers(&self, v: usize) -> impl Iterator<Item = &Cover> {
        self.down[v].iter().map(move |&k| &self.covers[k])
    }

    pub fn covers_pair(&self, lower: usize, upper: usize) -> bool {
        self.upper_covers(lower).any(|c| c.upper == upper)
    }

    pub fn dcov(&self, v: usize) -> usize {
        self.down[v].len()
    }

    pub fn ucov(&self, v: usize) -> usize {
        self.up[v].len()
    }

    pub fn minima(&self) -> Vec<usize> {
        (0..self.nodes).filter(|&v| self.down[v].is_empty()).collect()
    }

    pub fn maxima(&self) -> Vec<usize> {
        (0..self.nodes).filter(|&v| self.up[v].is_empty()).collect()
    }

    /// Coefficient `i` counts the nodes covering exactly `i` nodes.
    pub fn dcov_polynomial(&self) -> Vec<u64> {
        let top = (0..self.nodes).map(|v| self.dcov(v)).max().unwrap_or(0);
        let mut h = vec![0u64; top + 1];
        for v in 0..self.nodes {
            h[self.dcov(v)] += 1;
        }
        h
    }

    /// Length of the longest chain ending at each node.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0; self.nodes];
        for &v in &self.topo {
            for c in self.upper_covers(v) {
                h[c.upper] = h[c.upper].max(h[v] + 1);
            }
        }
        h
    }

    /// Nodes sorted by height, ties by index.
    pub fn default_linear_extension(&self) -> Vec<usize> {
        let h = self.heights();
        let mut order: Vec<usize> = (0..self.nodes).collect();
        order.sort_by_key(|&v| (h[v], v));
        order
    }

    /// A uniformly chosen minimal element is removed at each step.
    pub fn random_linear_extension<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let mut indeg: Vec<usize> = (0..self.nodes).map(|v| self.dcov(v)).collect();
        let mut ready: Vec<usize> = (0..self.nodes).filter(|&v| indeg[v] == 0).collect();
        let mut out = Vec::with_capacity(self.nodes);
        while !ready.is_empty() {
            let v = ready.swap_remove(rng.gen_range(0..ready.len()));
            out.push(v);
            for c in self.upper_covers(v) {
                indeg[c.upper] -= 1;
                if indeg[c.upper] == 0 {
                    ready.push(c.upper);
                }
            }
        }
        out
    }

    pub fn is_linear_extension(&self, order: &[usize]) -> bool {
        if order.len() != self.nodes {
            return false;
        }
        let mut pos = vec![usize::MAX; self.nodes];
        for (i, &v) in order.iter().enumerate() {
            if v >= self.nodes || pos[v] != usize::MAX {
                return false;
            }
            pos[v] = i;
        }
        self.covers.iter().all(|c| pos[c.lower] < pos[c.upper])
    }

    fn brick_multiset<'a>(&self, it: impl Iterator<Item = &'a Cover>) -> Vec<String> {
        let mut v: Vec<String> = it.map(|c| c.brick.to_string()).collect();
        v.sort();
        v
    }

    pub fn down_bricks(&self, v: usize) -> Vec<String> {
        self.brick_multiset(self.lower_covers(v))
    }

    pub fn up_bricks(&self, v: usize) -> Vec<String> {
        self.brick_multiset(self.upper_covers(v))
    }

    /// The node whose up-bricks are the down-bricks of `v`.
    pub fn kappa(&self, v: usize) -> Result<usize, PosetError> {
        let want = self.down_bricks(v);
        let hits: Vec<usize> = (0..self.nodes).filter(|&u| self.up_bricks(u) == want).collect();
        match hits.len() {
            0 => Err(PosetError::NoKappaImage(v)),
            1 => Ok(hits[0]),
            _ => Err(PosetError::AmbiguousKappaImage(v)),
        }
    }

    pub fn kappa_map(&self) -> Result<Vec<usize>, PosetError> {
        let mut by_up: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
        for u in 0..self.nodes {
            by_up.entry(self.up_bricks(u)).or_default().push(u);
        }
        (0..self.nodes)
            .map(|v| match by_up.get(&self.down_bricks(v)).map(|h| h.as_slice()) {
                None | Some([]) => Err(PosetError::NoKappaImage(v)),
                Some([u]) => Ok(*u),
                Some(_) => Err(PosetError::AmbiguousKappaImage(v)),
            })
            .collect()
    }

    /// Whether distinct nodes always have distinct down-brick multisets and
    /// distinct up-brick multisets.
    pub fn bricks_determine_nodes(&self) -> bool {
        let downs: HashSet<Vec<String>> = (0..self.nodes).map(|v| self.down_bricks(v)).collect();
        let ups: HashSet<Vec<String>> = (0..self.nodes).map(|v| self.up_bricks(v)).collect();
        downs.len() == self.nodes && ups.len() == self.nodes
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph poset {\n  rankdir=BT;\n");
        for v in 0..self.nodes {
            s.push_str(&format!("  c{v};\n"));
        }
        for c in &self.covers {
            s.push_str(&format!("  c{} -> c{} [label=\"{}\"];\n", c.lower, c.upper, c.brick));
        }
        s.push_str("}\n");
        s
    }
}

/// The h-vector of the shelling given by `order`: entry `i` counts the facets
/// whose restriction has `i` vertices. Uses only the facets, not the poset.
pub fn h_from_shelling(cliques: &[Vec<usize>], order: &[usize]) -> Vec<u64> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut h: Vec<u64> = Vec::new();
    for &j in order {
        let c = &cliques[j];
        let faces: Vec<Vec<usize>> = (0..c.len())
            .map(|k| c.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect())
            .collect();
        let r = faces.iter().filter(|f| seen.contains(*f)).count();
        if h.len() <= r {
            h.resize(r + 1, 0);
        }
        h[r] += 1;
        seen.extend(faces);
    }
    h
}

/// Shelling h-vector along a linear extension of `p`.
pub fn h_from_linear_extension(
    p: &TauPoset,
    cliques: &[Vec<usize>],
    order: &[usize],
) -> Result<Vec<u64>, PosetError> {
    if !p.is_linear_extension(order) {
        return Err(PosetError::NotLinearExtension);
    }
    Ok(h_from_shelling(cliques, order))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Shape {
    pub symmetric: bool,
    pub unimodal: bool,
    pub gorenstein: bool,
}

/// Symmetry about the last nonzero entry, unimodality, and the Gorenstein
/// criterion (symmetry).
pub fn check_symmetry_unimodality(h: &[BigUint]) -> Shape {
    let zero = BigUint::default();
    let Some(s) = h.iter().rposition(|x| *x != zero) else {
        return Shape { symmetric: true, unimodal: true, gorenstein: true };
    };
    let core = &h[..=s];
    let symmetric = (0..core.len()).all(|i| core[i] == core[s - i]);
    let peak = core.windows(2).take_while(|w| w[0] <= w[1]).count();
    let unimodal = core[peak..].windows(2).all(|w| w[0] >= w[1]);
    Shape { symmetric, unimodal, gorenstein: symmetric }
}

pub fn to_big(h: &[u64]) -> Vec<BigUint> {
    h.iter().map(|&x| BigUint::from(x)).collect()
}

/// Checks that reversing routes through `edge_map` (an edge bijection that
/// reverses directions and preserves labels) permutes the cliques and turns
/// every cover around. Returns the induced node permutation.
pub fn reversal_anti_automorphism(
    tri: &Triangulation,
    p: &TauPoset,
    edge_map: &BTreeMap<EdgeId, EdgeId>,
) -> Option<Vec<usize>> {
    let index: HashMap<&Route, usize> = tri.routes.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let route_map: Vec<usize> = tri
        .routes
        .iter()
        .map(|r| {
            let img = Route(r.edges().iter().rev().map(|e| edge_map[e]).collect());
            index.get(&img).copied()
        })
        .collect::<Option<_>>()?;
    let node_map: Vec<usize> = tri
        .cliques
        .iter()
        .map(|c| {
            let mut img: Vec<usize> = c.iter().map(|&r| route_map[r]).collect();
            img.sort_unstable();
            tri.clique_index(&img)
        })
        .collect::<Option<_>>()?;
    p.covers
        .iter()
        .all(|c| p.covers_pair(node_map[c.upper], node_map[c.lower]))
        .then_some(node_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag_core::{complete_contraction, DEFAULT_ROUTE_CAP};
    use crate::framing::Framing;
    use crate::instances::{g27_labels, gkn, single_edge};
    use crate::triangulation::DEFAULT_CLIQUE_CAP;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g27() -> (Dag, EdgeLabeling, Triangulation) {
        let h = complete_contraction(&gkn(2, 7).unwrap()).result;
        let l = EdgeLabeling(g27_labels());
        let f = Framing::from_labels(&h, &l.0).unwrap();
        let t = Triangulation::new(&h, &f, DEFAULT_ROUTE_CAP, DEFAULT_CLIQUE_CAP).unwrap();
        (h, l, t)
    }

    fn route(es: &[u32]) -> Route {
        Route(es.iter().map(|&e| EdgeId(e)).collect())
    }

    #[test]
    fn orientation_examples() {
        let (h, l, _) = g27();
        let r1 = route(&[1, 4, 6, 9]);
        let r2 = route(&[2, 4, 7]);
        let (up, brick) = orient_edge(&h, &l, (0, &r1), (1, &r2)).unwrap();
        assert_eq!(up, Upper::First);
        assert_eq!(brick.edges, vec![EdgeId(4)]);
        let (up2, brick2) = orient_edge(&h, &l, (1, &r2), (0, &r1)).unwrap();
        assert_eq!((up2, brick2), (Upper::Second, brick));
        let r1 = route(&[2, 5, 8]);
        let r2 = route(&[2, 4, 6, 9]);
        let (up, brick) = orient_edge(&h, &l, (0, &r1), (1, &r2)).unwrap();
        assert_eq!(up, Upper::First);
        assert_eq!(brick.vertices, vec![VertexId(5)]);
        assert!(brick.edges.is_empty());
    }

    #[test]
    fn g27_poset_statistics() {
        let (h, l, t) = g27();
        let p = TauPoset::build(&h, &l, &t).unwrap();
        assert_eq!(p.nodes, 16);
        assert_eq!(p.covers.len(), 24);
        assert_eq!(p.dcov_polynomial(), vec![1, 7, 7, 1]);
        assert_eq!(p.minima().len(), 1);
        assert_eq!(p.maxima().len(), 1);
        let ext = p.default_linear_extension();
        assert_eq!(h_from_linear_extension(&p, &t.cliques, &ext).unwrap(), vec![1, 7, 7, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let e = p.random_linear_extension(&mut rng);
            assert_eq!(h_from_linear_extension(&p, &t.cliques, &e).unwrap(), vec![1, 7, 7, 1]);
        }
        let mut bad = ext.clone();
        bad.reverse();
        assert_eq!(h_from_linear_extension(&p, &t.cliques, &bad), Err(PosetError::NotLinearExtension));
    }

    #[test]
    fn g27_kappa_is_a_bijection_swapping_cover_counts() {
        let (h, l, t) = g27();
        let p = TauPoset::build(&h, &l, &t).unwrap();
        assert!(p.bricks_determine_nodes());
        let k = p.kappa_map().unwrap();
        let mut seen = k.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..16).collect::<Vec<_>>());
        for v in 0..16 {
            assert_eq!(p.dcov(v), p.ucov(k[v]));
            assert_eq!(p.kappa(v).unwrap(), k[v]);
        }
        assert_eq!(k[p.maxima()[0]], p.minima()[0]);
    }

    #[test]
    fn g27_poset_is_self_dual_under_reversal() {
        let (h, l, t) = g27();
        let p = TauPoset::build(&h, &l, &t).unwrap();
        let m: BTreeMap<EdgeId, EdgeId> = [(1, 9), (2, 8), (3, 7), (4, 6), (5, 5), (6, 4), (7, 3), (8, 2), (9, 1)]
            .into_iter()
            .map(|(a, b)| (EdgeId(a), EdgeId(b)))
            .collect();
        assert!(reversal_anti_automorphism(&t, &p, &m).is_some());
    }

    #[test]
    fn single_clique_poset() {
        let g = single_edge();
        let t = Triangulation::new(&g, &Framing::default(), 10, 10).unwrap();
        let p = TauPoset::build(&g, &EdgeLabeling::default(), &t).unwrap();
        assert_eq!(p.nodes, 1);
        assert_eq!(p.dcov_polynomial(), vec![1]);
        assert_eq!(h_from_shelling(&t.cliques, &[0]), vec![1]);
        assert_eq!(p.kappa_map().unwrap(), vec![0]);
    }

    #[test]
    fn shapes() {
        let s = check_symmetry_unimodality(&to_big(&[1, 7, 7, 1]));
        assert_eq!(s, Shape { symmetric: true, unimodal: true, gorenstein: true });
        let s = check_symmetry_unimodality(&to_big(&[1]));
        assert_eq!(s, Shape { symmetric: true, unimodal: true, gorenstein: true });
        let s = check_symmetry_unimodality(&to_big(&[1, 2, 1, 3]));
        assert_eq!(s, Shape { symmetric: false, unimodal: false, gorenstein: false });
        let s = check_symmetry_unimodality(&to_big(&[1, 3, 1, 0, 0]));
        assert!(s.symmetric && s.unimodal);
    }

    #[test]
    fn cycles_and_implied_covers_are_rejected() {
        let b = Brick { vertices: vec![VertexId(0)], edges: vec![] };
        let c = |lower, upper| Cover { lower, upper, brick: b.clone() };
        assert_eq!(TauPoset::from_covers(2, vec![c(0, 1), c(1, 0)]).unwrap_err(), PosetError::CycleDetected);
        assert!(matches!(
            TauPoset::from_covers(3, vec![c(0, 1), c(1, 2), c(0, 2)]).unwrap_err(),
            PosetError::NotTransitivelyReduced { .. }
        ));
    }
}
