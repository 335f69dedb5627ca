//! Acceptance run: one PASS/FAIL line per criterion. All comparisons are exact
//! integer equalities; runtime bounds are wall-clock seconds.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use ampleflow::analysis::{analyze, Analysis, Options};
use ampleflow::dag_core::{
    complete_contraction, complete_contraction_by, enumerate_routes, idle_edges, is_full, Dag, EdgeId, Route,
    DEFAULT_ROUTE_CAP,
};
use ampleflow::ehrhart_oracle::special_simplex_check;
use ampleflow::framing::{
    all_framings, check_exceptional_set, count_all_framings, count_ample_framings, edge_labeling,
    enumerate_ample_framings, enumerate_valid_ample_framings, exceptional_routes, gkn_ample_count, is_ample,
    path_cycle_decomposition, FramedDag, Framing,
};
use ampleflow::instances::{car, car8_core, g27_labels, gkn, nine_strand, random_full_dag, random_valid_dag};
use ampleflow::poset::{reversal_anti_automorphism, to_big, TauPoset};
use ampleflow::triangulation::{Triangulation, DEFAULT_CLIQUE_CAP};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;
const RANDOM_FULL: usize = 50;
const RANDOM_VALID: usize = 200;
const BRUTE_FORCE_FRAMINGS: u64 = 1 << 16;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, no: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {no} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn route(es: &[u32]) -> Route {
    Route(es.iter().map(|&e| EdgeId(e)).collect())
}

fn g27() -> (Dag, Framing) {
    let h = complete_contraction(&gkn(2, 7).unwrap()).result;
    let f = Framing::from_labels(&h, &g27_labels()).unwrap();
    (h, f)
}

fn failing(a: &Analysis, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .filter(|n| a.check(n).is_none_or(|c| !c.holds))
        .map(|n| format!("{n}: {}", a.check(n).map_or("missing", |c| c.detail.as_str())))
        .collect()
}

fn criterion1(rep: &mut Report) {
    let t0 = Instant::now();
    let (h, f) = g27();
    let mut errs = Vec::new();
    if (h.num_edges(), h.inner_vertices().len()) != (9, 3) {
        errs.push(format!("contraction has {} edges, {} inner", h.num_edges(), h.inner_vertices().len()));
    }
    let a = analyze(&h, &f, &Options { seed: SEED, ..Options::default() }).unwrap();
    let exc: BTreeSet<Route> = a.exceptional.iter().cloned().collect();
    let drawn: BTreeSet<Route> = [route(&[3, 7]), route(&[2, 4, 6, 8]), route(&[1, 5, 9])].into();
    if (a.routes, a.cliques) != (13, 16) || exc != drawn {
        errs.push(format!("routes {}, exceptional {:?}, cliques {}", a.routes, exc, a.cliques));
    }
    if a.dcov != vec![1, 7, 7, 1] || a.hstar != Some(to_big(&[1, 7, 7, 1])) {
        errs.push(format!("dcov {:?}, h* {:?}", a.dcov, a.hstar));
    }
    let shape = a.hstar_shape.unwrap();
    if !(shape.gorenstein && shape.unimodal) {
        errs.push(format!("{shape:?}"));
    }
    errs.extend(failing(&a, &["hasse-regular", "unimodular", "poset", "oracle-hstar"]));
    let tri = Triangulation::new(&h, &f, DEFAULT_ROUTE_CAP, DEFAULT_CLIQUE_CAP).unwrap();
    let p = TauPoset::build(&h, &edge_labeling(&FramedDag::new(&h, &f).unwrap()).unwrap(), &tri).unwrap();
    let reversal: BTreeMap<EdgeId, EdgeId> =
        (1..=9).map(|e| (EdgeId(e), EdgeId(10 - e))).collect();
    if reversal_anti_automorphism(&tri, &p, &reversal).is_none() {
        errs.push("reversal is not an anti-automorphism".into());
    }
    let secs = t0.elapsed().as_secs_f64();
    let ok = errs.is_empty() && secs < 5.0;
    rep.line(
        1,
        "G(2,7) end-to-end",
        ok,
        format!(
            "9 edges/3 inner, 13 routes, 3 exceptional, 16 cliques, dcov=h*=(1,7,7,1), 3-regular, self-dual; {secs:.2}s < 5s; errors {errs:?}"
        ),
    );
}

fn criterion2(rep: &mut Report) {
    let t0 = Instant::now();
    let mut errs = Vec::new();
    let h = complete_contraction(&car(8).unwrap()).result;
    // drop source-to-sink edges, rename vertices 1..=6 in order
    let rename: BTreeMap<_, u32> = h.vertices().iter().enumerate().map(|(i, &v)| (v, i as u32 + 1)).collect();
    let mut pairs: Vec<(u32, u32)> = h
        .edges()
        .iter()
        .filter(|e| !(h.is_source(e.tail) && h.is_sink(e.head)))
        .map(|e| (rename[&e.tail], rename[&e.head]))
        .collect();
    pairs.sort_unstable();
    let drawn = vec![
        (1, 2), (1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 6), (3, 4), (3, 6), (4, 5), (4, 6), (5, 6), (5, 6),
    ];
    let st_edges = h.edges().iter().filter(|e| h.is_source(e.tail) && h.is_sink(e.head)).count();
    if h.num_vertices() != 6 || pairs != drawn {
        errs.push(format!("contraction minus source-sink edges: {pairs:?}"));
    }
    let core = car8_core();
    let core_a = analyze(&core, &Framing::length(&core), &Options { seed: SEED, oracle: false, ..Options::default() }).unwrap();
    if core_a.exceptional.len() != 5 {
        errs.push(format!("drawn graph has {} exceptional routes", core_a.exceptional.len()));
    }
    // the 9-route clique: exceptional routes plus each arc i->i+1 continued along the spine
    let tri = Triangulation::new(&core, &Framing::length(&core), DEFAULT_ROUTE_CAP, DEFAULT_CLIQUE_CAP).unwrap();
    let mut want: Vec<usize> = tri.exceptional.clone();
    for es in [&[0, 12, 13, 14, 15][..], &[1, 13, 14, 15], &[2, 14, 15], &[3, 15]] {
        want.push(tri.routes.iter().position(|r| *r == route(es)).unwrap());
    }
    want.sort_unstable();
    if !tri.cliques.contains(&want) {
        errs.push("9-route clique missing".into());
    }
    let a = analyze(&h, &Framing::length(&h), &Options { seed: SEED, ..Options::default() }).unwrap();
    if a.exceptional_through_inner != 5 || a.exceptional.len() != 5 + st_edges {
        errs.push(format!("contraction: {} exceptional, {} through inner vertices", a.exceptional.len(), a.exceptional_through_inner));
    }
    let shape = a.hstar_shape.unwrap();
    if !(shape.symmetric && shape.unimodal) {
        errs.push(format!("{shape:?}"));
    }
    errs.extend(failing(&a, &["volume", "oracle-hstar", "special-simplex"]));
    let secs = t0.elapsed().as_secs_f64();
    rep.line(
        2,
        "car(8)",
        errs.is_empty() && secs < 60.0,
        format!(
            "contraction = drawn graph (6 vertices, 2 parallel pairs) plus {st_edges} source-sink edges; length framing ample, 5 exceptional routes on the drawn graph ({} on the contraction, {} through inner vertices); 9-route clique present; h*={:?} palindromic+unimodal, h*(1)={} cliques; {secs:.2}s < 60s; errors {errs:?}",
            a.exceptional.len(),
            a.exceptional_through_inner,
            a.hstar.as_ref().map(|h| h.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
            a.cliques
        ),
    );
}

/// Ample framings of `g` by the enumerator, each re-checked with `is_ample`.
fn rechecked_count(g: &Dag) -> Result<usize, String> {
    let routes = enumerate_routes(g, DEFAULT_ROUTE_CAP).map_err(|e| e.to_string())?;
    let fs = enumerate_valid_ample_framings(g).map_err(|e| e.to_string())?;
    let distinct: BTreeSet<&Framing> = fs.iter().collect();
    for f in &fs {
        if !is_ample(&FramedDag::new(g, f).map_err(|e| e.to_string())?, &routes) {
            return Err("enumerated framing not ample".into());
        }
    }
    if distinct.len() != fs.len() {
        return Err("duplicate framings".into());
    }
    Ok(fs.len())
}

fn brute_force_count(g: &Dag) -> Option<usize> {
    if count_all_framings(g) > BigUint::from(BRUTE_FORCE_FRAMINGS) {
        return None;
    }
    let routes = enumerate_routes(g, DEFAULT_ROUTE_CAP).ok()?;
    Some(all_framings(g).iter().filter(|f| is_ample(&FramedDag::new(g, f).unwrap(), &routes)).count())
}

fn criterion3(rep: &mut Report) {
    let t0 = Instant::now();
    let mut errs = Vec::new();
    let g310 = gkn(3, 10).unwrap();
    let c310 = count_ample_framings(&g310).unwrap();
    let r310 = rechecked_count(&g310);
    if c310 != BigUint::from(256u32) || r310 != Ok(256) {
        errs.push(format!("G(3,10): {c310} / {r310:?}"));
    }
    let ns = nine_strand();
    let m = path_cycle_decomposition(&ns).unwrap().m();
    let c9 = count_ample_framings(&ns).unwrap();
    let e9: Vec<_> = enumerate_ample_framings(&ns).unwrap().collect();
    let routes = enumerate_routes(&ns, DEFAULT_ROUTE_CAP).unwrap();
    let all_ample = e9.iter().all(|t| is_ample(&FramedDag::new(&ns, &t.framing).unwrap(), &routes));
    if c9 != BigUint::from(512u32) || e9.len() != 512 || !all_ample || m != 9 {
        errs.push(format!("nine-strand: M={m}, {c9}, {} enumerated", e9.len()));
    }
    let mut table = Vec::new();
    let mut boundary = Vec::new();
    for k in 2..=3u32 {
        for n in k + 1..=3 * k + 2 {
            let g = gkn(k, n + 1).unwrap();
            let counted = count_ample_framings(&g).unwrap();
            let enumerated = rechecked_count(&g);
            let brute = brute_force_count(&g);
            let predicted = gkn_ample_count(k, n).unwrap();
            let ok = enumerated.as_ref().is_ok_and(|&c| BigUint::from(c) == counted)
                && brute.is_none_or(|b| BigUint::from(b) == counted)
                && counted == predicted;
            if !ok {
                errs.push(format!("k={k} n={n}: counted {counted}, enumerated {enumerated:?}, brute {brute:?}, predicted {predicted}"));
            }
            if n == 2 * k {
                boundary.push(format!("k={k} n={n}: {counted} = 2^{n}: {}", counted == BigUint::from(2u32).pow(n)));
            }
            table.push(format!("({k},{n})={counted}{}", if brute.is_some() { "b" } else { "" }));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    rep.line(
        3,
        "framing counts",
        errs.is_empty() && secs < 120.0,
        format!(
            "G(3,10)=256, nine-strand=512 (M=9), table [{}] (b = also brute-forced over all framings), boundary [{}]; {secs:.2}s < 120s; errors {errs:?}",
            table.join(" "),
            boundary.join("; ")
        ),
    );
}

struct Instance {
    name: String,
    g: Dag,
    framing: Framing,
}

fn corpus() -> Vec<Instance> {
    let (h, f) = g27();
    let c8 = complete_contraction(&car(8).unwrap()).result;
    let mut out = vec![
        Instance { name: "G(2,7)".into(), g: h, framing: f },
        Instance { name: "car(8)".into(), framing: Framing::length(&c8), g: c8 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut k = 0;
    while out.len() < 2 + RANDOM_FULL {
        let inner = rng.gen_range(1..=5);
        let g = random_full_dag(&mut rng, inner);
        if g.num_edges() > 12 {
            continue;
        }
        let f = enumerate_ample_framings(&g).unwrap().next().unwrap().framing;
        out.push(Instance { name: format!("random#{k}"), g, framing: f });
        k += 1;
    }
    out
}

fn corpus_checks(rep: &mut Report) {
    let t0 = Instant::now();
    let inst = corpus();
    let opts = Options { seed: SEED, extensions: 20, ..Options::default() };
    let mut analyses = Vec::new();
    for i in &inst {
        analyses.push(analyze(&i.g, &i.framing, &opts).map_err(|e| format!("{}: {e}", i.name)));
    }
    let secs = t0.elapsed().as_secs_f64();
    let per = |names: &[&str]| -> Vec<String> {
        inst.iter()
            .zip(&analyses)
            .flat_map(|(i, a)| match a {
                Ok(a) => failing(a, names).into_iter().map(|s| format!("{}: {s}", i.name)).collect(),
                Err(e) => vec![e.clone()],
            })
            .collect()
    };
    let e4 = per(&["bijection", "extension", "rigidity", "support-tau-tilting"]);
    rep.line(
        4,
        "bijection suite",
        e4.is_empty() && secs < 120.0,
        format!("{} instances (G(2,7), car(8) contraction, {RANDOM_FULL} random full DAGs <= 12 edges); analysis {secs:.2}s < 120s; errors {e4:?}", inst.len()),
    );

    let mut e5 = per(&["poset", "kappa", "shelling", "bricks", "dcov-palindromic"]);
    let (h, f) = g27();
    let tri = Triangulation::new(&h, &f, DEFAULT_ROUTE_CAP, DEFAULT_CLIQUE_CAP).unwrap();
    let p = TauPoset::build(&h, &edge_labeling(&FramedDag::new(&h, &f).unwrap()).unwrap(), &tri).unwrap();
    let node = |routes: [&[u32]; 3]| {
        let mut c: Vec<usize> = routes.iter().map(|r| tri.routes.iter().position(|x| *x == route(r)).unwrap()).collect();
        c.extend(&tri.exceptional);
        c.sort_unstable();
        tri.clique_index(&c).unwrap()
    };
    let n3 = node([&[1, 4, 6, 8], &[1, 4, 7], &[1, 5, 8]]);
    let n7 = node([&[1, 4, 6, 8], &[1, 4, 6, 9], &[1, 4, 7]]);
    let n14 = node([&[1, 4, 7], &[2, 4, 6, 9], &[2, 4, 7]]);
    let n11 = node([&[1, 4, 6, 9], &[2, 4, 6, 9], &[3, 6, 9]]);
    let k3 = p.kappa(n3).ok();
    let k7 = p.kappa(n7).ok();
    let reproduced = p.covers_pair(n7, n3) && k3 == Some(n14) && k7 == Some(n11) && !p.leq(n11, n14);
    if !reproduced {
        e5.push("kappa counterexample on G(2,7) not reproduced".into());
    }
    rep.line(
        5,
        "poset/kappa suite",
        e5.is_empty(),
        format!("unique qualifying components, acyclic, transitively reduced, kappa bijective with dcov=ucov, 21 linear extensions each, kappa not order-preserving on G(2,7); errors {e5:?}"),
    );

    let mut e6 = per(&["oracle-hstar", "gorenstein", "differences", "volume", "special-simplex", "facets"]);
    let mut framings_checked = 0usize;
    let mut below_bound = Vec::new();
    for i in &inst {
        let all: Vec<Framing> = enumerate_ample_framings(&i.g).unwrap().map(|t| t.framing).collect();
        let m = path_cycle_decomposition(&i.g).unwrap().m();
        let mut simplices = BTreeSet::new();
        for f in &all {
            framings_checked += 1;
            match special_simplex_check(&i.g, f, DEFAULT_ROUTE_CAP) {
                Ok(r) if r.holds => {}
                Ok(r) => e6.push(format!("{}: special simplex fails {:?}", i.name, r.cover_counts)),
                Err(e) => e6.push(format!("{}: {e}", i.name)),
            }
            let fd = FramedDag::new(&i.g, f).unwrap();
            let routes = enumerate_routes(&i.g, DEFAULT_ROUTE_CAP).unwrap();
            let exc: BTreeSet<Route> = exceptional_routes(&fd, &routes).into_iter().map(|k| routes[k].clone()).collect();
            simplices.insert(exc);
        }
        if m >= 1 && simplices.len() < 1 << (m - 1) {
            below_bound.push(format!("{} (M={m}, {})", i.name, simplices.len()));
        }
    }
    rep.line(
        6,
        "oracle equivalence and Gorenstein",
        e6.is_empty(),
        format!("oracle h* = dcov, palindromic+unimodal, differences vanish, special simplex for {framings_checked} ample framings; errors {e6:?}; not part of the criterion: distinct special simplices below 2^(M-1) on {below_bound:?}"),
    );
}

// series idle edges may leave either edge id behind, so compare endpoints only
fn endpoint_multiset(g: &Dag) -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.tail.0, e.head.0)).collect();
    v.sort_unstable();
    v
}

fn criterion7(rep: &mut Report) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut errs: Vec<String> = Vec::new();
    let (mut framings, mut brute_checked) = (0usize, 0usize);
    for k in 0..RANDOM_VALID {
        let inner = rng.gen_range(1..=4);
        let expansions = rng.gen_range(1..=3);
        let g = random_valid_dag(&mut rng, inner, expansions);
        let trace = complete_contraction(&g);
        let h = &trace.result;
        let mut err = |s: String| errs.push(format!("valid#{k}: {s}"));
        if !is_full(h) {
            err("contraction not full".into());
            continue;
        }
        for _ in 0..3 {
            let other = complete_contraction_by(&g, |c| rng.gen_range(0..c.len()));
            if endpoint_multiset(&other.result) != endpoint_multiset(h) || other.result.vertices() != h.vertices() {
                err("contraction order matters".into());
            }
        }
        let h_routes = enumerate_routes(h, DEFAULT_ROUTE_CAP).unwrap();
        let source_out: usize = h.sources().iter().map(|&s| h.out_degree(s)).sum();
        for t in enumerate_ample_framings(h).unwrap() {
            let fd = FramedDag::new(h, &t.framing).unwrap();
            let exc: Vec<Route> = exceptional_routes(&fd, &h_routes).into_iter().map(|i| h_routes[i].clone()).collect();
            for e in h.edge_ids() {
                let c = exc.iter().filter(|r| r.contains(e)).count();
                if c != 1 {
                    err(format!("edge {e} on {c} exceptional routes"));
                }
            }
            if exc.len() != source_out {
                err(format!("{} exceptional routes, source out-degree sum {source_out}", exc.len()));
            }
            match check_exceptional_set(h, &exc) {
                Ok(Ok(_)) => {}
                Ok(Err(fail)) => err(format!("exceptional set rejected: {fail:?}")),
                Err(e) => err(e.to_string()),
            }
        }
        let g_routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        let idle = idle_edges(&g);
        let lifted = enumerate_valid_ample_framings(&g).unwrap();
        for f in &lifted {
            framings += 1;
            let fd = FramedDag::new(&g, f).unwrap();
            let exc: Vec<usize> = exceptional_routes(&fd, &g_routes);
            for e in g.edge_ids().filter(|e| !idle.contains(e)) {
                let c = exc.iter().filter(|&&i| g_routes[i].contains(e)).count();
                if c != 1 {
                    err(format!("lifted: edge {e} on {c} exceptional routes"));
                }
            }
            if exc.len() != source_out {
                err(format!("lifted: {} exceptional routes, expected {source_out}", exc.len()));
            }
        }
        if g.num_edges() <= 10 {
            brute_checked += 1;
            let brute: BTreeSet<Framing> = all_framings(&g)
                .into_iter()
                .filter(|f| is_ample(&FramedDag::new(&g, f).unwrap(), &g_routes))
                .collect();
            let ours: BTreeSet<Framing> = lifted.iter().cloned().collect();
            if brute != ours || ours.len() != lifted.len() {
                err(format!("enumerated {} framings, brute force {}", lifted.len(), brute.len()));
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    errs.truncate(20);
    rep.line(
        7,
        "structural fuzzing",
        errs.is_empty(),
        format!(
            "{RANDOM_VALID} random valid DAGs, {framings} lifted ample framings, {brute_checked} brute-forced (<= 10 edges), unique exceptional route per edge, count = source out-degree sum, bipartite adjacency, confluence; {secs:.2}s; first errors {errs:?}"
        ),
    );
}

fn main() {
    let mut rep = Report { failed: 0 };
    criterion1(&mut rep);
    criterion2(&mut rep);
    criterion3(&mut rep);
    corpus_checks(&mut rep);
    criterion7(&mut rep);
    if rep.failed > 0 {
        println!("{} criteria failed", rep.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
