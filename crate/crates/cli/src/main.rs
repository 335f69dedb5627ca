//! `ampleflow`: generate DAGs, contract them, frame them and run every
//! analysis. Exit codes: 0 all checks hold, 1 usage or limit error, 2 a
//! consistency check failed.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ampleflow::analysis::{analyze, Analysis, AnalysisError, Options};
use ampleflow::dag_core::{
    complete_contraction, enumerate_routes, is_full, is_valid, Dag, DEFAULT_ROUTE_CAP,
};
use ampleflow::ehrhart_oracle::{self, decimal, special_simplex_check, DEFAULT_FRONTIER_CAP};
use ampleflow::framing::{
    all_framings, count_all_framings, count_ample_framings, edge_labeling, enumerate_ample_framings,
    enumerate_valid_ample_framings, is_ample, path_cycle_decomposition, FramedDag, Framing,
};
use ampleflow::instances::{
    car, car8_core, g27_labels, gkn, nine_strand, random_full_dag, random_valid_dag, single_edge,
};
use ampleflow::io::{framing_from_json, graph_to_json, read_graph};
use ampleflow::poset::{check_symmetry_unimodality, h_from_linear_extension, to_big, Shape, TauPoset};
use ampleflow::triangulation::{verify_unimodular, Triangulation, DEFAULT_CLIQUE_CAP};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "ampleflow", version, about = "Ample framings, DKK triangulations and tau-tilting posets of flow polytopes")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_ROUTE_CAP)]
    max_routes: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_CLIQUE_CAP)]
    max_cliques: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Input {
    /// Graph file (JSON or `tail head [edge_id]` lines); stdin when absent.
    file: Option<PathBuf>,
    /// `length`, `paper-g27`, `first` (first enumerated ample framing) or a framing JSON file.
    #[arg(long)]
    framing: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a generated graph as JSON.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Completely contract the idle edges; the result goes to stdout, the trace to stderr.
    Contract { file: Option<PathBuf> },
    /// Decomposition and number of ample framings.
    Framings {
        file: Option<PathBuf>,
        /// List the framings too.
        #[arg(long)]
        enumerate: bool,
    },
    /// Routes and exceptional routes.
    Routes(Input),
    /// Maximal cliques of pairwise coherent routes.
    Cliques {
        #[command(flatten)]
        input: Input,
        /// Write the dual graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// The poset on maximal cliques.
    Poset {
        #[command(flatten)]
        input: Input,
        /// Write the Hasse diagram as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Random linear extensions used for the shelling check.
        #[arg(long, default_value_t = 20)]
        extensions: usize,
    },
    /// h-vector from the poset: down-cover counts and shellings.
    Hstar {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 20)]
        extensions: usize,
    },
    /// Brute-force lattice point counts, h*, and the special simplex check.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_FRONTIER_CAP)]
        max_frontier: usize,
    },
    /// Everything, with every cross-check.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 20)]
        extensions: usize,
        /// Skip the lattice point oracle.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Run the checks on random graphs.
    Fuzz {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_inner: u32,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Caracol graph on n vertices.
    Car { n: u32 },
    /// Vertices 1..=n, edges (i, i+1) and (i, i+k).
    Gkn { k: u32, n: u32 },
    /// Random full DAG.
    RandomFull {
        #[arg(long, default_value_t = 4)]
        inner: u32,
    },
    /// Random full DAG followed by idle expansions.
    RandomValid {
        #[arg(long, default_value_t = 3)]
        inner: u32,
        #[arg(long, default_value_t = 2)]
        expansions: u32,
    },
    /// A built-in graph.
    Named { name: Named },
}

#[derive(Clone, Copy, ValueEnum)]
enum Named {
    SingleEdge,
    NineStrand,
    Car8Core,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Consistency(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Consistency(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_input(file: Option<&Path>) -> Result<Dag, CliError> {
    let text = match file {
        Some(p) => std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(usage)?;
            s
        }
    };
    read_graph(&text).map_err(usage)
}

/// Full graphs pass through; valid ones are contracted first.
fn full_input(file: Option<&Path>) -> Result<Dag, CliError> {
    let g = read_input(file)?;
    if is_full(&g) {
        return Ok(g);
    }
    if !is_valid(&g) {
        return Err(usage("graph is neither full nor valid"));
    }
    eprintln!("note: graph is not full; using its complete contraction");
    Ok(complete_contraction(&g).result)
}

fn resolve_framing(g: &Dag, spec: Option<&str>) -> Result<Framing, CliError> {
    match spec.unwrap_or("first") {
        "first" => enumerate_ample_framings(g)
            .map_err(usage)?
            .next()
            .map(|t| t.framing)
            .ok_or_else(|| usage("no ample framing")),
        "length" => Ok(Framing::length(g)),
        "paper-g27" => Framing::from_labels(g, &g27_labels()).map_err(|e| usage(format!("paper-g27: {e}"))),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
            framing_from_json(g, &text).map_err(usage)
        }
    }
}

// A closed pipe (`| head`) is not an error.
fn out(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn emit<T: Serialize>(json: bool, value: &T, human: impl FnOnce() -> String) {
    if json {
        out(&format!("{}\n", serde_json::to_string_pretty(value).expect("serializable")));
    } else {
        out(&human());
    }
}

fn write_dot(path: &Path, dot: &str) -> Result<(), CliError> {
    std::fs::write(path, dot).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn strings(h: &[BigUint]) -> Vec<String> {
    h.iter().map(|x| x.to_string()).collect()
}

fn framed_triangulation(cli: &Cli, input: &Input) -> Result<(Dag, Framing, Triangulation), CliError> {
    let g = full_input(input.file.as_deref())?;
    let f = resolve_framing(&g, input.framing.as_deref())?;
    let t = Triangulation::new(&g, &f, cli.max_routes, cli.max_cliques).map_err(usage)?;
    Ok((g, f, t))
}

fn build_poset(g: &Dag, f: &Framing, t: &Triangulation) -> Result<TauPoset, CliError> {
    let fd = FramedDag::new(g, f).map_err(usage)?;
    if !is_ample(&fd, &t.routes) {
        return Err(usage("framing is not ample"));
    }
    let labels = edge_labeling(&fd).map_err(usage)?;
    TauPoset::build(g, &labels, t).map_err(|e| CliError::Consistency(format!("poset: {e}")))
}

fn cmd_gen(cli: &Cli, family: &Family) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let g = match family {
        Family::Car { n } if *n >= 3 => car(*n).map_err(usage)?,
        Family::Car { .. } => return Err(usage("car needs n >= 3")),
        Family::Gkn { k, n } if *k >= 1 && *n >= 2 => gkn(*k, *n).map_err(usage)?,
        Family::Gkn { .. } => return Err(usage("gkn needs k >= 1 and n >= 2")),
        Family::RandomFull { inner } => random_full_dag(&mut rng, *inner),
        Family::RandomValid { inner, expansions } => random_valid_dag(&mut rng, *inner, *expansions),
        Family::Named { name } => match name {
            Named::SingleEdge => single_edge(),
            Named::NineStrand => nine_strand(),
            Named::Car8Core => car8_core(),
        },
    };
    out(&format!("{}\n", graph_to_json(&g)));
    Ok(())
}

fn cmd_contract(file: Option<&Path>) -> Result<(), CliError> {
    let g = read_input(file)?;
    let t = complete_contraction(&g);
    for s in &t.steps {
        eprintln!("contract edge {} : {} absorbs {}", s.edge, s.kept, s.removed);
    }
    eprintln!(
        "{} idle edges contracted; input full: {}, result full: {}",
        t.steps.len(),
        is_full(&g),
        is_full(&t.result)
    );
    out(&format!("{}\n", graph_to_json(&t.result)));
    Ok(())
}

#[derive(Serialize)]
struct FramingsReport {
    m: usize,
    components: Vec<String>,
    #[serde(serialize_with = "decimal_one")]
    count: BigUint,
    #[serde(skip_serializing_if = "Option::is_none")]
    framings: Option<Vec<Framing>>,
}

fn decimal_one<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn cmd_framings(cli: &Cli, file: Option<&Path>, enumerate: bool) -> Result<(), CliError> {
    let g = read_input(file)?;
    if !is_valid(&g) {
        return Err(usage("graph is not valid"));
    }
    let h = complete_contraction(&g).result;
    let d = path_cycle_decomposition(&h).map_err(usage)?;
    let count = count_ample_framings(&g).map_err(usage)?;
    let components: Vec<String> = d
        .components
        .iter()
        .map(|c| {
            let w: Vec<String> = c.vertex_walk(&h).iter().map(|v| v.0.to_string()).collect();
            format!("{:?} {}", c.kind, w.join("-"))
        })
        .collect();
    let framings = if enumerate {
        let fs = if is_full(&g) {
            enumerate_ample_framings(&g).map_err(usage)?.filter(|t| t.canonical).map(|t| t.framing).collect()
        } else {
            enumerate_valid_ample_framings(&g).map_err(usage)?
        };
        Some(fs)
    } else {
        None
    };
    let rep = FramingsReport { m: d.m(), components, count, framings };
    emit(cli.json, &rep, || {
        let mut s = format!("M = {}\n", rep.m);
        for c in &rep.components {
            s.push_str(&format!("  {c}\n"));
        }
        s.push_str(&format!("ample framings: {}\n", rep.count));
        if let Some(fs) = &rep.framings {
            for f in fs {
                s.push_str(&format!("{}\n", serde_json::to_string(f).expect("framing")));
            }
        }
        s
    });
    Ok(())
}

fn cmd_routes(cli: &Cli, input: &Input) -> Result<(), CliError> {
    let g = read_input(input.file.as_deref())?;
    let routes = enumerate_routes(&g, cli.max_routes).map_err(usage)?;
    let f = if is_full(&g) {
        Some(resolve_framing(&g, input.framing.as_deref())?)
    } else {
        match input.framing.as_deref() {
            Some(spec) => Some(resolve_framing(&g, Some(spec))?),
            None => None,
        }
    };
    let exceptional: Vec<usize> = match &f {
        Some(f) => {
            let fd = FramedDag::new(&g, f).map_err(usage)?;
            ampleflow::framing::exceptional_routes(&fd, &routes)
        }
        None => Vec::new(),
    };
    #[derive(Serialize)]
    struct Out<'a> {
        routes: Vec<&'a [ampleflow::EdgeId]>,
        exceptional: &'a [usize],
    }
    let out = Out { routes: routes.iter().map(|r| r.edges()).collect(), exceptional: &exceptional };
    emit(cli.json, &out, || {
        let mut s = String::new();
        for (i, r) in routes.iter().enumerate() {
            let es: Vec<String> = r.edges().iter().map(|e| e.0.to_string()).collect();
            let mark = if exceptional.contains(&i) { " *" } else { "" };
            s.push_str(&format!("{i}: {}{mark}\n", es.join(" ")));
        }
        s.push_str(&format!("{} routes, {} exceptional\n", routes.len(), exceptional.len()));
        s
    });
    Ok(())
}

fn cmd_cliques(cli: &Cli, input: &Input, dot: Option<&Path>) -> Result<(), CliError> {
    let (g, _, t) = framed_triangulation(cli, input)?;
    let unimodular: Vec<bool> =
        t.cliques.iter().map(|c| matches!(verify_unimodular(&g, &t.routes, c), Ok(true))).collect();
    let dual = t.dual_graph();
    if let Some(p) = dot {
        write_dot(p, &dual.to_dot())?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        cliques: &'a [Vec<usize>],
        unimodular: &'a [bool],
        dual_edges: usize,
    }
    emit(cli.json, &Out { cliques: &t.cliques, unimodular: &unimodular, dual_edges: dual.edges.len() }, || {
        let mut s = String::new();
        for (c, u) in t.cliques.iter().zip(&unimodular) {
            s.push_str(&format!("{c:?}{}\n", if *u { "" } else { " NOT UNIMODULAR" }));
        }
        s.push_str(&format!("{} cliques, {} dual edges\n", t.cliques.len(), dual.edges.len()));
        s
    });
    if unimodular.iter().all(|&u| u) {
        Ok(())
    } else {
        Err(CliError::Consistency("unimodular: some clique is not a unimodular simplex".into()))
    }
}

fn cmd_poset(cli: &Cli, input: &Input, dot: Option<&Path>, extensions: usize) -> Result<(), CliError> {
    let (g, f, t) = framed_triangulation(cli, input)?;
    let p = build_poset(&g, &f, &t)?;
    if let Some(path) = dot {
        write_dot(path, &p.to_dot())?;
    }
    let kappa = p.kappa_map().map_err(|e| CliError::Consistency(format!("kappa: {e}")))?;
    let dcov = p.dcov_polynomial();
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let extension = p.random_linear_extension(&mut rng);
    let shelled = (0..extensions)
        .map(|_| p.random_linear_extension(&mut rng))
        .chain([p.default_linear_extension()])
        .all(|o| h_from_linear_extension(&p, &t.cliques, &o).ok().as_ref() == Some(&dcov));
    #[derive(Serialize)]
    struct Out<'a> {
        poset: &'a TauPoset,
        dcov: &'a [u64],
        kappa: &'a [usize],
        linear_extension: &'a [usize],
    }
    emit(cli.json, &Out { poset: &p, dcov: &dcov, kappa: &kappa, linear_extension: &extension }, || {
        let mut s = String::new();
        for c in &p.covers {
            s.push_str(&format!("{} < {}  [{}]\n", c.lower, c.upper, c.brick));
        }
        s.push_str(&format!("dcov {dcov:?}\nkappa {kappa:?}\n"));
        s
    });
    if !shelled {
        return Err(CliError::Consistency("shelling: h-vector differs from dcov".into()));
    }
    Ok(())
}

fn cmd_hstar(cli: &Cli, input: &Input, extensions: usize) -> Result<(), CliError> {
    let (g, f, t) = framed_triangulation(cli, input)?;
    let p = build_poset(&g, &f, &t)?;
    let dcov = p.dcov_polynomial();
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut shellings = vec![h_from_linear_extension(&p, &t.cliques, &p.default_linear_extension()).map_err(usage)?];
    for _ in 0..extensions {
        let o = p.random_linear_extension(&mut rng);
        shellings.push(h_from_linear_extension(&p, &t.cliques, &o).map_err(usage)?);
    }
    let shape = check_symmetry_unimodality(&to_big(&dcov));
    #[derive(Serialize)]
    struct Out<'a> {
        dcov: &'a [u64],
        shellings_agree: bool,
        shape: Shape,
    }
    let agree = shellings.iter().all(|h| *h == dcov);
    emit(cli.json, &Out { dcov: &dcov, shellings_agree: agree, shape }, || {
        format!(
            "h = {dcov:?}\nshellings agree: {agree}\nsymmetric: {}, unimodal: {}, gorenstein: {}\n",
            shape.symmetric, shape.unimodal, shape.gorenstein
        )
    });
    if !agree {
        return Err(CliError::Consistency("shelling: h-vector differs from dcov".into()));
    }
    if !(shape.symmetric && shape.unimodal) {
        return Err(CliError::Consistency("dcov-palindromic: h-vector not symmetric and unimodal".into()));
    }
    Ok(())
}

fn cmd_oracle(cli: &Cli, input: &Input, cap: usize) -> Result<(), CliError> {
    let g = full_input(input.file.as_deref())?;
    let r = ehrhart_oracle::oracle(&g, cap).map_err(usage)?;
    let shape = check_symmetry_unimodality(&r.hstar);
    let framings: Vec<Framing> = match input.framing.as_deref() {
        Some(spec) => vec![resolve_framing(&g, Some(spec))?],
        None => enumerate_ample_framings(&g).map_err(usage)?.map(|t| t.framing).collect(),
    };
    let verdicts: Vec<bool> = framings
        .iter()
        .map(|f| special_simplex_check(&g, f, cli.max_routes).map(|s| s.holds))
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    #[derive(Serialize)]
    struct Out<'a> {
        dim: usize,
        counts: &'a ehrhart_oracle::FlowCountTable,
        #[serde(serialize_with = "decimal")]
        hstar: &'a [BigUint],
        differences_vanish: bool,
        shape: Shape,
        special_simplex: &'a [bool],
    }
    let out = Out {
        dim: r.dim,
        counts: &r.counts,
        hstar: &r.hstar,
        differences_vanish: r.differences_vanish,
        shape,
        special_simplex: &verdicts,
    };
    emit(cli.json, &out, || {
        format!(
            "dim {}\ncounts {:?}\nh* {:?}\ndifferences vanish: {}\nsymmetric: {}, unimodal: {}, gorenstein: {}\nspecial simplex: {}/{} framings\n",
            r.dim,
            strings(&r.counts.counts),
            strings(&r.hstar),
            r.differences_vanish,
            shape.symmetric,
            shape.unimodal,
            shape.gorenstein,
            verdicts.iter().filter(|&&v| v).count(),
            verdicts.len()
        )
    });
    if !r.differences_vanish {
        return Err(CliError::Consistency("differences: counts are not polynomial of the expected degree".into()));
    }
    if !(shape.symmetric && shape.unimodal) {
        return Err(CliError::Consistency("gorenstein: h* not symmetric and unimodal".into()));
    }
    if !verdicts.iter().all(|&v| v) {
        return Err(CliError::Consistency("special-simplex: exceptional routes fail the special simplex test".into()));
    }
    Ok(())
}

fn human_analysis(a: &Analysis) -> String {
    let mut s = format!(
        "vertices {}, edges {}, inner {}\nroutes {}\nexceptional {} ({} through an inner vertex)\n",
        a.vertices, a.edges, a.inner, a.routes, a.exceptional.len(), a.exceptional_through_inner
    );
    for r in &a.exceptional {
        let es: Vec<String> = r.edges().iter().map(|e| e.0.to_string()).collect();
        s.push_str(&format!("  {}\n", es.join(" ")));
    }
    s.push_str(&format!("cliques {}\ndual edges {}\ndcov {:?}\n", a.cliques, a.dual_edges, a.dcov));
    if let (Some(h), Some(shape)) = (&a.hstar, &a.hstar_shape) {
        s.push_str(&format!(
            "h* {:?}\nsymmetric {}, unimodal {}, gorenstein {}\n",
            strings(h),
            shape.symmetric,
            shape.unimodal,
            shape.gorenstein
        ));
    }
    for c in &a.checks {
        s.push_str(&format!("[{}] {}: {}\n", if c.holds { "ok" } else { "FAIL" }, c.name, c.detail));
    }
    s
}

fn analysis_error(e: AnalysisError) -> CliError {
    usage(e)
}

fn cmd_analyze(cli: &Cli, input: &Input, extensions: usize, no_oracle: bool) -> Result<(), CliError> {
    let g = full_input(input.file.as_deref())?;
    let f = resolve_framing(&g, input.framing.as_deref())?;
    let opts = Options {
        route_cap: cli.max_routes,
        clique_cap: cli.max_cliques,
        extensions,
        seed: cli.seed,
        oracle: !no_oracle,
        ..Options::default()
    };
    let a = analyze(&g, &f, &opts).map_err(analysis_error)?;
    emit(cli.json, &a, || human_analysis(&a));
    let failed: Vec<&str> = a.failures().iter().map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Consistency(failed.join(", ")))
    }
}

fn cmd_fuzz(cli: &Cli, count: usize, max_inner: u32) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut failures: Vec<String> = Vec::new();
    let opts = Options { seed: cli.seed, extensions: 5, ..Options::default() };
    for i in 0..count {
        let inner = rng.gen_range(1..=max_inner.max(1));
        let g = random_full_dag(&mut rng, inner);
        let fs: Vec<Framing> = enumerate_ample_framings(&g).map_err(usage)?.map(|t| t.framing).collect();
        let f = &fs[rng.gen_range(0..fs.len())];
        match analyze(&g, f, &opts) {
            Ok(a) => failures.extend(a.failures().iter().map(|c| format!("full#{i}: {}: {}", c.name, c.detail))),
            Err(e) => failures.push(format!("full#{i}: {e}")),
        }
        let expansions = rng.gen_range(1..=3);
        let v = random_valid_dag(&mut rng, inner, expansions);
        let routes = enumerate_routes(&v, cli.max_routes).map_err(usage)?;
        let lifted = enumerate_valid_ample_framings(&v).map_err(usage)?;
        let expected = count_ample_framings(&v).map_err(usage)?;
        if BigUint::from(lifted.len()) != expected {
            failures.push(format!("valid#{i}: {} lifted framings, {expected} counted", lifted.len()));
        }
        if !lifted.iter().all(|f| FramedDag::new(&v, f).is_ok_and(|fd| is_ample(&fd, &routes))) {
            failures.push(format!("valid#{i}: lifted framing not ample"));
        }
        if count_all_framings(&v) <= BigUint::from(1u32 << 14) {
            let brute: BTreeSet<Framing> =
                all_framings(&v).into_iter().filter(|f| is_ample(&FramedDag::new(&v, f).unwrap(), &routes)).collect();
            if brute != lifted.iter().cloned().collect::<BTreeSet<_>>() {
                failures.push(format!("valid#{i}: enumeration differs from brute force"));
            }
        }
    }
    #[derive(Serialize)]
    struct Out<'a> {
        instances: usize,
        failures: &'a [String],
    }
    emit(cli.json, &Out { instances: count, failures: &failures }, || {
        let mut s = format!("{count} full and {count} valid random DAGs, {} failures\n", failures.len());
        for f in &failures {
            s.push_str(&format!("  {f}\n"));
        }
        s
    });
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Consistency(format!("{} fuzz failures", failures.len())))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Gen { family } => cmd_gen(cli, family),
        Cmd::Contract { file } => cmd_contract(file.as_deref()),
        Cmd::Framings { file, enumerate } => cmd_framings(cli, file.as_deref(), *enumerate),
        Cmd::Routes(input) => cmd_routes(cli, input),
        Cmd::Cliques { input, dot } => cmd_cliques(cli, input, dot.as_deref()),
        Cmd::Poset { input, dot, extensions } => cmd_poset(cli, input, dot.as_deref(), *extensions),
        Cmd::Hstar { input, extensions } => cmd_hstar(cli, input, *extensions),
        Cmd::Oracle { input, max_frontier } => cmd_oracle(cli, input, *max_frontier),
        Cmd::Analyze { input, extensions, no_oracle } => cmd_analyze(cli, input, *extensions, *no_oracle),
        Cmd::Fuzz { count, max_inner } => cmd_fuzz(cli, *count, *max_inner),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

