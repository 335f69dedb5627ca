//! The whole pipeline on one framed full DAG, with every cross-check between
//! the combinatorial, algebraic and brute-force sides recorded as a `Check`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dag_core::{enumerate_routes, is_full, Dag, DagError, Route};
use crate::ehrhart_oracle::{self, decimal, OracleError};
use crate::framing::{edge_labeling, is_ample, routes_coherent, EdgeLabeling, FramedDag, Framing, FramingError};
use crate::gentle::{
    blossom, blossom_from_graph, build_quiver, canonical, extend_object, object_to_route, objects_t,
    route_to_object, signed_route, substring_profile, support_tau_tilting, tau_rigid_pair, BlossomQuiver,
    BlossomTie, GentleError, Letter, Object,
};
use crate::poset::{check_symmetry_unimodality, h_from_linear_extension, to_big, Shape, TauPoset};
use crate::triangulation::{verify_unimodular, Triangulation, TriangulationError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("graph is not full; contract it first")]
    NotFull,
    #[error("framing is not ample")]
    NotAmple,
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
}

#[derive(Clone, Debug)]
pub struct Options {
    pub route_cap: usize,
    pub clique_cap: usize,
    pub frontier_cap: usize,
    /// Random linear extensions tried besides the default one.
    pub extensions: usize,
    pub seed: u64,
    pub oracle: bool,
    pub gentle: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            route_cap: crate::dag_core::DEFAULT_ROUTE_CAP,
            clique_cap: crate::triangulation::DEFAULT_CLIQUE_CAP,
            frontier_cap: ehrhart_oracle::DEFAULT_FRONTIER_CAP,
            extensions: 20,
            seed: 0,
            oracle: true,
            gentle: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub vertices: usize,
    pub edges: usize,
    pub inner: usize,
    pub routes: usize,
    pub exceptional: Vec<Route>,
    /// Exceptional routes visiting at least one inner vertex.
    pub exceptional_through_inner: usize,
    pub cliques: usize,
    pub dual_edges: usize,
    pub dcov: Vec<u64>,
    pub dcov_shape: Shape,
    #[serde(serialize_with = "decimal_opt")]
    pub hstar: Option<Vec<BigUint>>,
    pub hstar_shape: Option<Shape>,
    pub checks: Vec<Check>,
}

fn decimal_opt<S: serde::Serializer>(v: &Option<Vec<BigUint>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(h) => decimal(h, s),
        None => s.serialize_none(),
    }
}

impl Analysis {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, holds: bool, detail: impl Into<String>) -> Check {
    Check { name, holds, detail: detail.into() }
}

fn trimmed(h: &[BigUint]) -> Vec<BigUint> {
    let zero = BigUint::default();
    let end = h.iter().rposition(|x| *x != zero).map_or(0, |i| i + 1);
    h[..end].to_vec()
}

pub fn analyze(g: &Dag, f: &Framing, opts: &Options) -> Result<Analysis, AnalysisError> {
    if !is_full(g) {
        return Err(AnalysisError::NotFull);
    }
    let fd = FramedDag::new(g, f)?;
    let routes = enumerate_routes(g, opts.route_cap)?;
    if !is_ample(&fd, &routes) {
        return Err(AnalysisError::NotAmple);
    }
    let labels = edge_labeling(&fd)?;
    let tri = Triangulation::from_routes(&fd, routes.clone(), opts.clique_cap)?;
    let inner = g.inner_vertices().len();
    let mut checks = Vec::new();

    let ss = ehrhart_oracle::special_simplex_check(g, f, opts.route_cap);
    match &ss {
        Ok(r) => {
            let bad: Vec<_> = r.cover_counts.iter().filter(|(_, &c)| c != 1).map(|(e, c)| format!("{e}:{c}")).collect();
            checks.push(check("special-simplex", r.holds, format!("edges not on exactly one exceptional route: {bad:?}")));
            checks.push(check("facets", r.non_facets.is_empty(), format!("x_e = 0 not a facet for {:?}", r.non_facets)));
        }
        Err(e) => checks.push(check("special-simplex", false, e.to_string())),
    }

    let non_unimodular: Vec<usize> = (0..tri.cliques.len())
        .filter(|&i| !matches!(verify_unimodular(g, &tri.routes, &tri.cliques[i]), Ok(true)))
        .collect();
    checks.push(check(
        "unimodular",
        non_unimodular.is_empty(),
        format!("{} cliques, non-unimodular: {non_unimodular:?}", tri.cliques.len()),
    ));

    let dual = tri.dual_graph();
    let degrees = dual.degrees();
    let regular = degrees.iter().all(|&d| d == inner);
    checks.push(check("hasse-regular", regular, format!("degrees {:?}, inner vertices {inner}", degrees.iter().collect::<BTreeSet<_>>())));
    let by_flips = tri.dual_graph_by_flips();
    let same = matches!(&by_flips, Ok(d) if {
        let key = |g: &crate::triangulation::DualGraph| g.edges.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect::<BTreeSet<_>>();
        key(d) == key(&dual)
    });
    checks.push(check("flips", same, "dual graph by face hashing equals dual graph by flips"));

    if opts.gentle {
        checks.extend(gentle_checks(g, &fd, &labels, &tri));
    }

    let mut dcov = Vec::new();
    let mut dcov_shape = check_symmetry_unimodality(&[]);
    match TauPoset::build(g, &labels, &tri) {
        Ok(p) => {
            dcov = p.dcov_polynomial();
            dcov_shape = check_symmetry_unimodality(&to_big(&dcov));
            checks.push(check("poset", true, format!("{} covers, acyclic, transitively reduced", p.covers.len())));
            checks.extend(poset_checks(&p, &tri, &dcov, opts));
        }
        Err(e) => checks.push(check("poset", false, e.to_string())),
    }
    checks.push(check(
        "dcov-palindromic",
        dcov_shape.symmetric && dcov_shape.unimodal,
        format!("dcov {dcov:?}"),
    ));

    let (mut hstar, mut hstar_shape) = (None, None);
    if opts.oracle {
        match ehrhart_oracle::oracle(g, opts.frontier_cap) {
            Ok(r) => {
                let h = trimmed(&r.hstar);
                let shape = check_symmetry_unimodality(&h);
                checks.push(check("differences", r.differences_vanish, format!("order {} differences of the count table", r.dim + 1)));
                checks.push(check(
                    "oracle-hstar",
                    h == to_big(&dcov),
                    format!("oracle h* {:?}, dcov {dcov:?}", h.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
                ));
                let volume: BigUint = h.iter().sum();
                checks.push(check(
                    "volume",
                    volume == BigUint::from(tri.cliques.len()),
                    format!("h*(1) = {volume}, cliques = {}", tri.cliques.len()),
                ));
                checks.push(check("gorenstein", shape.symmetric && shape.unimodal, format!("{shape:?}")));
                hstar = Some(h);
                hstar_shape = Some(shape);
            }
            Err(e @ OracleError::FrontierExplosion { .. }) => checks.push(check("oracle-hstar", false, e.to_string())),
            Err(e) => checks.push(check("oracle-hstar", false, e.to_string())),
        }
    }

    let exceptional: Vec<Route> = tri.exceptional.iter().map(|&i| tri.routes[i].clone()).collect();
    let exceptional_through_inner = exceptional.iter().filter(|r| r.len() > 1).count();
    Ok(Analysis {
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        inner,
        routes: tri.routes.len(),
        exceptional,
        exceptional_through_inner,
        cliques: tri.cliques.len(),
        dual_edges: dual.edges.len(),
        dcov,
        dcov_shape,
        hstar,
        hstar_shape,
        checks,
    })
}

fn poset_checks(p: &TauPoset, tri: &Triangulation, dcov: &[u64], opts: &Options) -> Vec<Check> {
    let mut out = Vec::new();
    match p.kappa_map() {
        Ok(k) => {
            let image: BTreeSet<usize> = k.iter().copied().collect();
            let swaps = (0..p.nodes).all(|v| p.dcov(v) == p.ucov(k[v]));
            out.push(check(
                "kappa",
                image.len() == p.nodes && swaps && p.bricks_determine_nodes(),
                format!("bijective: {}, dcov = ucov after kappa: {swaps}", image.len() == p.nodes),
            ));
        }
        Err(e) => out.push(check("kappa", false, e.to_string())),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut orders = vec![p.default_linear_extension()];
    orders.extend((0..opts.extensions).map(|_| p.random_linear_extension(&mut rng)));
    let mismatches: Vec<String> = orders
        .iter()
        .filter_map(|o| match h_from_linear_extension(p, &tri.cliques, o) {
            Ok(h) if h == dcov => None,
            Ok(h) => Some(format!("{h:?}")),
            Err(e) => Some(e.to_string()),
        })
        .collect();
    out.push(check(
        "shelling",
        mismatches.is_empty(),
        format!("{} linear extensions, mismatches {mismatches:?}", orders.len()),
    ));
    out
}

fn gentle_checks(g: &Dag, fd: &FramedDag, labels: &EdgeLabeling, tri: &Triangulation) -> Vec<Check> {
    match gentle_checks_inner(g, fd, labels, tri) {
        Ok(c) => c,
        Err(e) => vec![check("bijection", false, e.to_string())],
    }
}

fn gentle_checks_inner(
    g: &Dag,
    fd: &FramedDag,
    labels: &EdgeLabeling,
    tri: &Triangulation,
) -> Result<Vec<Check>, GentleError> {
    let routes = &tri.routes;
    let non_ex: Vec<usize> = (0..routes.len()).filter(|&i| !tri.is_exceptional(i)).collect();
    let q = build_quiver(g, labels)?;
    q.check_gentle()?;
    let objs = objects_t(&q)?;
    let mut out = Vec::new();

    let mut images: BTreeSet<Object> = BTreeSet::new();
    let mut inverse_ok = true;
    let mut phi: Vec<Object> = Vec::with_capacity(non_ex.len());
    for &i in &non_ex {
        let o = route_to_object(g, labels, &routes[i])?;
        inverse_ok &= object_to_route(g, labels, &o)? == routes[i];
        images.insert(o.clone());
        phi.push(o);
    }
    let objset: BTreeSet<Object> = objs.iter().cloned().collect();
    out.push(check(
        "bijection",
        objs.len() == non_ex.len() && inverse_ok && images == objset,
        format!("{} objects, {} non-exceptional routes, psi after phi identity: {inverse_ok}", objs.len(), non_ex.len()),
    ));

    let gb = blossom_from_graph(g, labels)?;
    let mut ext_ok = true;
    for (k, &i) in non_ex.iter().enumerate() {
        ext_ok &= extend_object(&gb, &phi[k])? == canonical(signed_route(labels, &routes[i]));
    }
    out.push(check("extension", ext_ok, "extended strings equal signed routes"));

    let blossoms = [gb, blossom(&q, BlossomTie::First)?, blossom(&q, BlossomTie::Second)?];
    let mut mismatches = 0usize;
    for bq in &blossoms {
        let prof = phi
            .iter()
            .map(|o| extend_object(bq, o).map(|w| substring_profile(bq, &w)))
            .collect::<Result<Vec<_>, _>>()?;
        for a in 0..non_ex.len() {
            for b in 0..non_ex.len() {
                if tau_rigid_pair(&prof[a], &prof[b]) != routes_coherent(fd, &routes[non_ex[a]], &routes[non_ex[b]]) {
                    mismatches += 1;
                }
            }
        }
    }
    out.push(check("rigidity", mismatches == 0, format!("{mismatches} mismatched pairs over three blossomings")));

    let sets = support_tau_tilting(&blossoms[1], &objs, tri.cliques.len() + 1)?;
    let as_routes: BTreeSet<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let mut c: Vec<usize> = s
                .iter()
                .map(|&o| object_to_route(g, labels, &objs[o]).map(|r| tri.routes.iter().position(|x| *x == r).unwrap_or(usize::MAX)))
                .collect::<Result<_, _>>()?;
            c.sort_unstable();
            Ok(c)
        })
        .collect::<Result<_, GentleError>>()?;
    let cliques: BTreeSet<Vec<usize>> = tri
        .cliques
        .iter()
        .map(|c| c.iter().copied().filter(|&r| !tri.is_exceptional(r)).collect())
        .collect();
    out.push(check(
        "support-tau-tilting",
        as_routes == cliques,
        format!("{} support tau-tilting sets, {} cliques", as_routes.len(), cliques.len()),
    ));

    let bricks_ok = match TauPoset::build(g, labels, tri) {
        Ok(p) => p.covers.iter().all(|c| {
            let w: Vec<Letter> = c.brick.edges.iter().map(|&e| walk_letter(g, &q, e)).collect();
            c.brick.vertices.iter().all(|v| q.nodes.contains(v)) && (w.is_empty() || q.is_string(&w))
        }),
        Err(_) => false,
    };
    out.push(check("bricks", bricks_ok, "brick labels are strings of the quiver"));
    Ok(out)
}

/// The letter traversing arrow `e` along the direction of edge `e` in `g`.
pub fn walk_letter(g: &Dag, q: &crate::gentle::Quiver, e: crate::dag_core::EdgeId) -> Letter {
    if q.arrow(e).source == g.tail(e) {
        Letter::direct(e)
    } else {
        Letter::inverse(e)
    }
}

/// Blossom quivers used by the rigidity check, exposed for reports.
pub fn blossoms(g: &Dag, labels: &EdgeLabeling) -> Result<Vec<BlossomQuiver>, GentleError> {
    let q = build_quiver(g, labels)?;
    Ok(vec![blossom_from_graph(g, labels)?, blossom(&q, BlossomTie::First)?, blossom(&q, BlossomTie::Second)?])
}
