//! The gentle algebra of a framed full DAG: quiver with relations, strings,
//! the route/object bijection, blossoming, string extension and τ-rigidity.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::dag_core::{is_full, Dag, EdgeId, Route, VertexId};
use crate::framing::EdgeLabeling;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GentleError {
    #[error("graph is not full")]
    NotFull,
    #[error("edge {0} has no label; the framing is not ample")]
    NotAmple(EdgeId),
    #[error("route {0} is exceptional")]
    ExceptionalRoute(Route),
    #[error("quiver is not gentle: {0}")]
    NotGentle(String),
    #[error("a string reached the length cap {cap}")]
    InfiniteStrings { cap: usize },
    #[error("no route realises object {0}")]
    NoRoute(String),
    #[error("string extension is not unique at node {0}")]
    AmbiguousExtension(VertexId),
}

/// Arrows keep the id of the edge they come from.
pub type ArrowId = EdgeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Arrow {
    pub id: ArrowId,
    pub source: VertexId,
    pub target: VertexId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Quiver {
    pub nodes: BTreeSet<VertexId>,
    pub arrows: BTreeMap<ArrowId, Arrow>,
    /// Composable pairs `(a, b)` with `ab` in the ideal.
    pub relations: BTreeSet<(ArrowId, ArrowId)>,
}

impl Quiver {
    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[&a]
    }

    pub fn outgoing(&self, v: VertexId) -> Vec<ArrowId> {
        self.arrows.values().filter(|a| a.source == v).map(|a| a.id).collect()
    }

    pub fn incoming(&self, v: VertexId) -> Vec<ArrowId> {
        self.arrows.values().filter(|a| a.target == v).map(|a| a.id).collect()
    }

    pub fn composable(&self, a: ArrowId, b: ArrowId) -> bool {
        self.arrow(a).target == self.arrow(b).source
    }

    pub fn is_relation(&self, a: ArrowId, b: ArrowId) -> bool {
        self.relations.contains(&(a, b))
    }

    /// Checks the four gentleness conditions.
    pub fn check_gentle(&self) -> Result<(), GentleError> {
        let bad = |m: String| Err(GentleError::NotGentle(m));
        for &v in &self.nodes {
            if self.incoming(v).len() > 2 || self.outgoing(v).len() > 2 {
                return bad(format!("node {v} has more than two arrows on one side"));
            }
        }
        for &(a, b) in &self.relations {
            if !self.arrows.contains_key(&a) || !self.arrows.contains_key(&b) || !self.composable(a, b) {
                return bad(format!("relation {a}{b} is not a path of length two"));
            }
        }
        for &a in self.arrows.keys() {
            let after: Vec<ArrowId> = self.outgoing(self.arrow(a).target);
            let before: Vec<ArrowId> = self.incoming(self.arrow(a).source);
            let free_after = after.iter().filter(|&&b| !self.is_relation(a, b)).count();
            let free_before = before.iter().filter(|&&c| !self.is_relation(c, a)).count();
            let rel_after = after.len() - free_after;
            let rel_before = before.len() - free_before;
            if free_after > 1 || free_before > 1 {
                return bad(format!("arrow {a} has two continuations outside the ideal"));
            }
            if rel_after > 1 || rel_before > 1 {
                return bad(format!("arrow {a} has two continuations inside the ideal"));
            }
        }
        Ok(())
    }

    fn letter_source(&self, l: Letter) -> VertexId {
        let a = self.arrow(l.arrow);
        if l.sign > 0 { a.source } else { a.target }
    }

    fn letter_target(&self, l: Letter) -> VertexId {
        let a = self.arrow(l.arrow);
        if l.sign > 0 { a.target } else { a.source }
    }

    /// Whether `next` may follow `prev` in a string.
    pub fn can_follow(&self, prev: Letter, next: Letter) -> bool {
        if self.letter_target(prev) != self.letter_source(next) {
            return false;
        }
        if prev.arrow == next.arrow {
            return false;
        }
        match (prev.sign > 0, next.sign > 0) {
            (true, true) => !self.is_relation(prev.arrow, next.arrow),
            (false, false) => !self.is_relation(next.arrow, prev.arrow),
            _ => true,
        }
    }

    pub fn is_string(&self, w: &[Letter]) -> bool {
        w.iter().all(|l| self.arrows.contains_key(&l.arrow))
            && w.windows(2).all(|p| self.can_follow(p[0], p[1]))
    }

    /// Node sequence visited by a nonempty word.
    pub fn word_nodes(&self, w: &[Letter]) -> Vec<VertexId> {
        let mut out = vec![self.letter_source(w[0])];
        out.extend(w.iter().map(|&l| self.letter_target(l)));
        out
    }

    fn continuations(&self, w: &[Letter], direct: bool) -> Vec<Letter> {
        let last = *w.last().expect("nonempty word");
        let v = self.letter_target(last);
        let cands = if direct { self.outgoing(v) } else { self.incoming(v) };
        cands
            .into_iter()
            .map(|a| Letter { arrow: a, sign: if direct { 1 } else { -1 } })
            .filter(|&l| self.can_follow(last, l))
            .collect()
    }

    fn append_one(&self, w: &mut Vec<Letter>, direct: bool) -> Result<bool, GentleError> {
        let c = self.continuations(w, direct);
        match c.len() {
            0 => Ok(false),
            1 => {
                w.push(c[0]);
                Ok(true)
            }
            _ => Err(GentleError::AmbiguousExtension(self.letter_target(*w.last().unwrap()))),
        }
    }

    fn append_max(&self, w: &mut Vec<Letter>, direct: bool) -> Result<(), GentleError> {
        let cap = self.arrows.len() + 1;
        for _ in 0..cap {
            if !self.append_one(w, direct)? {
                return Ok(());
            }
        }
        Err(GentleError::InfiniteStrings { cap })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Letter {
    pub arrow: ArrowId,
    /// `+1` for an arrow, `-1` for an inverse arrow.
    pub sign: i8,
}

impl Letter {
    pub fn direct(a: ArrowId) -> Letter {
        Letter { arrow: a, sign: 1 }
    }

    pub fn inverse(a: ArrowId) -> Letter {
        Letter { arrow: a, sign: -1 }
    }
}

pub fn invert(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| Letter { arrow: l.arrow, sign: -l.sign }).collect()
}

/// The smaller of `w` and `w⁻¹`, comparing letters by arrow id with direct
/// letters first.
pub fn canonical(w: Vec<Letter>) -> Vec<Letter> {
    let inv = invert(&w);
    let key = |x: &[Letter]| x.iter().map(|l| (l.arrow, l.sign < 0)).collect::<Vec<_>>();
    if key(&inv) < key(&w) { inv } else { w }
}

/// An element of `T(Λ)`: a string module or a shifted projective.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Object {
    /// The constant string at a node.
    Empty(VertexId),
    /// A string of positive length in canonical orientation.
    Word(Vec<Letter>),
    /// The shifted projective at a node.
    Shifted(VertexId),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign > 0 {
            write!(f, "a{}", self.arrow.0)
        } else {
            write!(f, "a{}^-1", self.arrow.0)
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Empty(v) => write!(f, "eps{v}"),
            Object::Shifted(v) => write!(f, "P{v}[1]"),
            Object::Word(w) => {
                let parts: Vec<String> = w.iter().map(|l| l.to_string()).collect();
                write!(f, "{}", parts.join(" "))
            }
        }
    }
}

/// The quiver of a framed full DAG: inner vertices, one arrow per edge
/// between inner vertices (reversed when labeled 2), and relations at label
/// changes.
pub fn build_quiver(g: &Dag, labels: &EdgeLabeling) -> Result<Quiver, GentleError> {
    if !is_full(g) {
        return Err(GentleError::NotFull);
    }
    let mut q = Quiver { nodes: g.inner_vertices().into_iter().collect(), ..Quiver::default() };
    for e in g.edges() {
        if g.is_inner(e.tail) && g.is_inner(e.head) {
            let l = labels.get(e.id).ok_or(GentleError::NotAmple(e.id))?;
            let (source, target) = if l == 1 { (e.tail, e.head) } else { (e.head, e.tail) };
            q.arrows.insert(e.id, Arrow { id: e.id, source, target });
        }
    }
    q.relations = label_change_relations(&q, labels);
    Ok(q)
}

fn label_change_relations(q: &Quiver, labels: &EdgeLabeling) -> BTreeSet<(ArrowId, ArrowId)> {
    let mut rel = BTreeSet::new();
    for a in q.arrows.values() {
        for b in q.outgoing(a.target) {
            if b != a.id && labels.get(a.id) != labels.get(b) {
                rel.insert((a.id, b));
            }
        }
    }
    rel
}

/// All strings of positive length up to inversion, plus the constant strings.
pub fn enumerate_strings(q: &Quiver) -> Result<Vec<Object>, GentleError> {
    let cap = 2 * q.arrows.len() + 2;
    let mut found: BTreeSet<Vec<Letter>> = BTreeSet::new();
    let mut stack: Vec<Vec<Letter>> = q
        .arrows
        .keys()
        .flat_map(|&a| [Letter::direct(a), Letter::inverse(a)])
        .map(|l| vec![l])
        .collect();
    while let Some(w) = stack.pop() {
        if w.len() > cap {
            return Err(GentleError::InfiniteStrings { cap });
        }
        let last = *w.last().unwrap();
        let v = q.letter_target(last);
        for a in q.outgoing(v) {
            let l = Letter::direct(a);
            if q.can_follow(last, l) {
                let mut n = w.clone();
                n.push(l);
                stack.push(n);
            }
        }
        for a in q.incoming(v) {
            let l = Letter::inverse(a);
            if q.can_follow(last, l) {
                let mut n = w.clone();
                n.push(l);
                stack.push(n);
            }
        }
        found.insert(canonical(w));
    }
    let mut out: Vec<Object> = q.nodes.iter().map(|&v| Object::Empty(v)).collect();
    out.extend(found.into_iter().map(Object::Word));
    Ok(out)
}

/// Strings plus one shifted projective per node.
pub fn objects_t(q: &Quiver) -> Result<Vec<Object>, GentleError> {
    let mut out = enumerate_strings(q)?;
    out.extend(q.nodes.iter().map(|&v| Object::Shifted(v)));
    out.sort();
    Ok(out)
}

/// A quiver completed with fresh sources and sinks so that every original
/// node has two arrows on each side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlossomQuiver {
    pub quiver: Quiver,
    pub original: BTreeSet<VertexId>,
}

/// How relations are completed at a node carrying no original pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlossomTie {
    /// The smaller in-arrow is related to the smaller out-arrow.
    First,
    /// The smaller in-arrow is related to the larger out-arrow.
    Second,
}

/// Blossoming built from the quiver alone, with fresh ids above the
/// existing ones.
pub fn blossom(q: &Quiver, tie: BlossomTie) -> Result<BlossomQuiver, GentleError> {
    q.check_gentle()?;
    let mut bq = q.clone();
    let mut next_v = q.nodes.iter().map(|v| v.0 + 1).max().unwrap_or(0);
    let mut next_a = q.arrows.keys().map(|a| a.0 + 1).max().unwrap_or(0);
    for &v in &q.nodes {
        while bq.incoming(v).len() < 2 {
            let u = VertexId(next_v);
            next_v += 1;
            bq.nodes.insert(u);
            bq.arrows.insert(EdgeId(next_a), Arrow { id: EdgeId(next_a), source: u, target: v });
            next_a += 1;
        }
        while bq.outgoing(v).len() < 2 {
            let u = VertexId(next_v);
            next_v += 1;
            bq.nodes.insert(u);
            bq.arrows.insert(EdgeId(next_a), Arrow { id: EdgeId(next_a), source: v, target: u });
            next_a += 1;
        }
    }
    for &v in &q.nodes {
        let ins = bq.incoming(v);
        let outs = bq.outgoing(v);
        let orig = |a: ArrowId| q.arrows.contains_key(&a);
        // an original composable pair fixes the matching at v
        let mut fixed: Option<(usize, usize, bool)> = None;
        for (i, &a) in ins.iter().enumerate() {
            for (j, &b) in outs.iter().enumerate() {
                if orig(a) && orig(b) {
                    fixed = Some((i, j, q.is_relation(a, b)));
                }
            }
        }
        let diagonal = match fixed {
            Some((i, j, related)) => (i == j) == related,
            None => tie == BlossomTie::First,
        };
        let pairs = if diagonal {
            [(ins[0], outs[0]), (ins[1], outs[1])]
        } else {
            [(ins[0], outs[1]), (ins[1], outs[0])]
        };
        for p in pairs {
            bq.relations.insert(p);
        }
    }
    let bq = BlossomQuiver { quiver: bq, original: q.nodes.clone() };
    bq.quiver.check_gentle()?;
    Ok(bq)
}

/// Blossoming read off the graph: every edge at an inner vertex becomes an
/// arrow, with each source or sink endpoint replaced by its own fresh node.
pub fn blossom_from_graph(g: &Dag, labels: &EdgeLabeling) -> Result<BlossomQuiver, GentleError> {
    if !is_full(g) {
        return Err(GentleError::NotFull);
    }
    let mut q = Quiver { nodes: g.inner_vertices().into_iter().collect(), ..Quiver::default() };
    let original = q.nodes.clone();
    let mut next_v = g.vertices().iter().map(|v| v.0 + 1).max().unwrap_or(0);
    for e in g.edges() {
        if !g.is_inner(e.tail) && !g.is_inner(e.head) {
            continue;
        }
        let l = labels.get(e.id).ok_or(GentleError::NotAmple(e.id))?;
        let mut fresh = |v: VertexId, q: &mut Quiver| {
            if g.is_inner(v) {
                v
            } else {
                let u = VertexId(next_v);
                next_v += 1;
                q.nodes.insert(u);
                u
            }
        };
        let tail = fresh(e.tail, &mut q);
        let head = fresh(e.head, &mut q);
        let (source, target) = if l == 1 { (tail, head) } else { (head, tail) };
        q.arrows.insert(e.id, Arrow { id: e.id, source, target });
    }
    q.relations = label_change_relations(&q, labels);
    let bq = BlossomQuiver { quiver: q, original };
    bq.quiver.check_gentle()?;
    Ok(bq)
}

/// Appends one arrow and then as many inverse arrows as possible.
fn hook(bq: &Quiver, w: &mut Vec<Letter>) -> Result<(), GentleError> {
    bq.append_one(w, true)?;
    bq.append_max(w, false)
}

/// The maximal string `ŵ` of the blossoming attached to an object.
pub fn extend_object(bq: &BlossomQuiver, o: &Object) -> Result<Vec<Letter>, GentleError> {
    let q = &bq.quiver;
    let mut w = match o {
        Object::Word(w) => {
            let mut w = w.clone();
            hook(q, &mut w)?;
            let mut r = invert(&w);
            hook(q, &mut r)?;
            return Ok(canonical(r));
        }
        Object::Empty(v) => {
            let outs = q.outgoing(*v);
            vec![Letter::inverse(outs[0]), Letter::direct(outs[1])]
        }
        Object::Shifted(v) => {
            let ins = q.incoming(*v);
            vec![Letter::direct(ins[0]), Letter::inverse(ins[1])]
        }
    };
    q.append_max(&mut w, false)?;
    let mut r = invert(&w);
    q.append_max(&mut r, false)?;
    Ok(canonical(r))
}

/// Substring key: a node or a canonical letter range.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum SubKey {
    Node(VertexId),
    Letters(Vec<Letter>),
}

/// For every interior substring of a maximal string: whether both incident
/// arrows point away from it (`out`) or both point into it (`into`).
#[derive(Clone, Debug, Default)]
pub struct SubstringProfile {
    out: HashSet<SubKey>,
    into: HashSet<SubKey>,
}

pub fn substring_profile(bq: &BlossomQuiver, w: &[Letter]) -> SubstringProfile {
    let q = &bq.quiver;
    let nodes = q.word_nodes(w);
    let n = w.len();
    let mut p = SubstringProfile::default();
    // letters i..j form sigma; its nodes are nodes[i..=j]
    for i in 1..n {
        for j in i..n {
            let before = w[i - 1];
            let after = w[j];
            let before_out = before.sign < 0;
            let after_out = after.sign > 0;
            let key = if i == j {
                SubKey::Node(nodes[i])
            } else {
                SubKey::Letters(canonical(w[i..j].to_vec()))
            };
            match (before_out, after_out) {
                (true, true) => {
                    p.out.insert(key);
                }
                (false, false) => {
                    p.into.insert(key);
                }
                _ => {}
            }
        }
    }
    p
}

/// True when some substring has both arrows outgoing in `a` and both
/// incoming in `b`.
pub fn has_obstruction(a: &SubstringProfile, b: &SubstringProfile) -> bool {
    a.out.iter().any(|k| b.into.contains(k))
}

pub fn tau_rigid_pair(a: &SubstringProfile, b: &SubstringProfile) -> bool {
    !has_obstruction(a, b) && !has_obstruction(b, a)
}

/// The object attached to a non-exceptional route.
pub fn route_to_object(g: &Dag, labels: &EdgeLabeling, r: &Route) -> Result<Object, GentleError> {
    let es = r.edges();
    let w: Vec<u8> = es
        .iter()
        .map(|&e| labels.get(e).ok_or(GentleError::NotAmple(e)))
        .collect::<Result<_, _>>()?;
    if w.iter().all(|&x| x == w[0]) {
        return Err(GentleError::ExceptionalRoute(r.clone()));
    }
    let a = w.iter().take_while(|&&x| x == 1).count();
    if a > 0 && w[a..].iter().all(|&x| x == 2) {
        return Ok(Object::Shifted(g.head(es[a - 1])));
    }
    let i = w.iter().position(|&x| x == 2).unwrap();
    let j = w.iter().rposition(|&x| x == 1).unwrap();
    debug_assert!(i < j);
    if j == i + 1 {
        return Ok(Object::Empty(g.head(es[i])));
    }
    let letters: Vec<Letter> = (i + 1..j)
        .map(|k| Letter { arrow: es[k], sign: if w[k] == 1 { 1 } else { -1 } })
        .collect();
    Ok(Object::Word(canonical(letters)))
}

fn labeled_edge(labels: &EdgeLabeling, edges: &[EdgeId], label: u8) -> Option<EdgeId> {
    edges.iter().copied().find(|&e| labels.get(e) == Some(label))
}

/// Extends a path of `g` backwards along label-1 in-edges to a source.
fn back_chain(g: &Dag, labels: &EdgeLabeling, mut v: VertexId, out: &mut Vec<EdgeId>) -> Option<()> {
    while g.is_inner(v) {
        let e = labeled_edge(labels, g.in_edges(v), 1)?;
        out.push(e);
        v = g.tail(e);
    }
    Some(())
}

/// Extends a path of `g` forwards along label-2 out-edges to a sink.
fn forward_chain(g: &Dag, labels: &EdgeLabeling, mut v: VertexId, out: &mut Vec<EdgeId>) -> Option<()> {
    while g.is_inner(v) {
        let e = labeled_edge(labels, g.out_edges(v), 2)?;
        out.push(e);
        v = g.head(e);
    }
    Some(())
}

/// The non-exceptional route attached to an object.
pub fn object_to_route(g: &Dag, labels: &EdgeLabeling, o: &Object) -> Result<Route, GentleError> {
    let fail = || GentleError::NoRoute(o.to_string());
    let (middle, first_vertex, last_vertex): (Vec<EdgeId>, VertexId, VertexId) = match o {
        Object::Shifted(v) => {
            let mut back = Vec::new();
            back_chain(g, labels, *v, &mut back).ok_or_else(fail)?;
            back.reverse();
            forward_chain(g, labels, *v, &mut back).ok_or_else(fail)?;
            return Ok(Route(back));
        }
        Object::Empty(v) => (Vec::new(), *v, *v),
        Object::Word(w) => {
            let first = w[0];
            let forward = (first.sign > 0) == (labels.get(first.arrow) == Some(1));
            let w = if forward { w.clone() } else { invert(w) };
            let es: Vec<EdgeId> = w.iter().map(|l| l.arrow).collect();
            if !g.has_edge(es[0]) || es.windows(2).any(|p| !g.has_edge(p[1]) || g.head(p[0]) != g.tail(p[1])) {
                return Err(fail());
            }
            let (u, x) = (g.tail(es[0]), g.head(*es.last().unwrap()));
            (es, u, x)
        }
    };
    let mut before = Vec::new();
    let e_in = labeled_edge(labels, g.in_edges(first_vertex), 2).ok_or_else(fail)?;
    before.push(e_in);
    back_chain(g, labels, g.tail(e_in), &mut before).ok_or_else(fail)?;
    before.reverse();
    before.extend(middle);
    let e_out = labeled_edge(labels, g.out_edges(last_vertex), 1).ok_or_else(fail)?;
    before.push(e_out);
    forward_chain(g, labels, g.head(e_out), &mut before).ok_or_else(fail)?;
    Ok(Route(before))
}

/// A route of `g` read as a word of the graph blossoming: label-1 edges
/// forwards, label-2 edges backwards.
pub fn signed_route(labels: &EdgeLabeling, r: &Route) -> Vec<Letter> {
    r.edges()
        .iter()
        .map(|&e| Letter { arrow: e, sign: if labels.get(e) == Some(1) { 1 } else { -1 } })
        .collect()
}

/// Maximal pairwise τ-rigid collections, as sorted object index lists.
pub fn support_tau_tilting(
    bq: &BlossomQuiver,
    objects: &[Object],
    cap: usize,
) -> Result<Vec<Vec<usize>>, GentleError> {
    let profiles: Vec<SubstringProfile> = objects
        .iter()
        .map(|o| extend_object(bq, o).map(|w| substring_profile(bq, &w)))
        .collect::<Result<_, _>>()?;
    let n = objects.len();
    let mut adj = vec![FixedBitSet::with_capacity(n); n];
    for i in 0..n {
        for j in i..n {
            if tau_rigid_pair(&profiles[i], &profiles[j]) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let mut out = Vec::new();
    let mut p = FixedBitSet::with_capacity(n);
    p.insert_range(..);
    let x = FixedBitSet::with_capacity(n);
    maximal_sets(&adj, &mut Vec::new(), p, x, cap, &mut out)?;
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    Ok(out)
}

fn maximal_sets(
    adj: &[FixedBitSet],
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    cap: usize,
    out: &mut Vec<Vec<usize>>,
) -> Result<(), GentleError> {
    if p.is_clear() && x.is_clear() {
        if out.len() == cap {
            return Err(GentleError::InfiniteStrings { cap });
        }
        out.push(r.clone());
        return Ok(());
    }
    let pivot = p
        .union(&x)
        .max_by_key(|&u| adj[u].intersection(&p).count())
        .expect("p or x nonempty");
    let mut candidates = p.clone();
    candidates.difference_with(&adj[pivot]);
    candidates.set(pivot, p.contains(pivot));
    for v in candidates.ones() {
        let mut np = p.clone();
        np.intersect_with(&adj[v]);
        np.set(v, false);
        let mut nx = x.clone();
        nx.intersect_with(&adj[v]);
        nx.set(v, false);
        r.push(v);
        maximal_sets(adj, r, np, nx, cap, out)?;
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
    Ok(())
}
