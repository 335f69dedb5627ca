//! Brute-force Ehrhart data of the unit flow polytope: integer flows of each
//! strength, the h*-vector recovered from them, and the special-simplex test
//! for the exceptional routes.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dag_core::{enumerate_routes, flow_dims, Dag, DagError, EdgeId};
use crate::framing::{exceptional_routes, FramedDag, Framing, FramingError};

pub const DEFAULT_FRONTIER_CAP: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("more than {cap} frontier states")]
    FrontierExplosion { cap: usize },
    #[error("counts are not a polynomial of degree {d} in the dilation")]
    NonIntegralSolution { d: usize },
    #[error("h*_{index} is negative")]
    NegativeCoefficient { index: usize },
    #[error("need counts for t = 0..={need}, have {have}")]
    TooFewCounts { need: usize, have: usize },
    #[error("overflow in exact rank computation")]
    Overflow,
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Framing(#[from] FramingError),
}

/// Number of nonnegative integer flows on `g` conserved at inner vertices
/// with total source outflow `t`.
pub fn count_integer_flows(g: &Dag, t: u32, cap: usize) -> Result<BigUint, OracleError> {
    // state: remaining source budget followed by values on open edges
    let mut open: Vec<EdgeId> = Vec::new();
    let mut states: HashMap<Vec<u32>, BigUint> = HashMap::new();
    states.insert(vec![t], BigUint::one());
    for &v in g.topological_order() {
        let ins = g.in_edges(v);
        let outs = g.out_edges(v);
        let in_slots: Vec<usize> =
            ins.iter().map(|e| 1 + open.iter().position(|o| o == e).expect("in-edge is open")).collect();
        let keep: Vec<usize> = (1..=open.len()).filter(|i| !in_slots.contains(i)).collect();
        let mut next: HashMap<Vec<u32>, BigUint> = HashMap::new();
        for (state, count) in states {
            let inflow: u32 = in_slots.iter().map(|&i| state[i]).sum();
            let mut base: Vec<u32> = Vec::with_capacity(keep.len() + outs.len() + 1);
            base.push(state[0]);
            base.extend(keep.iter().map(|&i| state[i]));
            let mut emit = |budget: u32, amount: u32| -> Result<(), OracleError> {
                for parts in compositions(amount, outs.len()) {
                    let mut s = base.clone();
                    s[0] = budget;
                    s.extend(parts);
                    *next.entry(s).or_insert_with(BigUint::zero) += &count;
                    if next.len() > cap {
                        return Err(OracleError::FrontierExplosion { cap });
                    }
                }
                Ok(())
            };
            if ins.is_empty() {
                if outs.is_empty() {
                    emit(state[0], 0)?;
                } else {
                    for used in 0..=state[0] {
                        emit(state[0] - used, used)?;
                    }
                }
            } else if outs.is_empty() {
                emit(state[0], 0)?;
            } else {
                emit(state[0], inflow)?;
            }
        }
        open = keep.iter().map(|&i| open[i - 1]).chain(outs.iter().copied()).collect();
        states = next;
    }
    Ok(states.into_iter().filter(|(s, _)| s[0] == 0).map(|(_, c)| c).sum())
}

/// All ways to write `n` as an ordered sum of `k` nonnegative parts; `k = 0`
/// yields the empty composition only when `n = 0`.
fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for x in 0..=left {
            cur[i] = x;
            rec(i + 1, left - x, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// Big integers as decimal strings.
pub fn decimal<S: serde::Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowCountTable {
    #[serde(serialize_with = "decimal")]
    pub counts: Vec<BigUint>,
}

/// Counts for dilations `0..=max_t`.
pub fn count_table(g: &Dag, max_t: u32, cap: usize) -> Result<FlowCountTable, OracleError> {
    let counts = (0..=max_t).map(|t| count_integer_flows(g, t, cap)).collect::<Result<_, _>>()?;
    Ok(FlowCountTable { counts })
}

fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < k {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Recovers h* from `|tP| = sum_i h*_i C(t+d-i, d)` using counts for
/// `t = 0..=d`, then checks every further count in the table against the
/// reconstruction.
pub fn hstar_from_counts(tbl: &FlowCountTable, d: usize) -> Result<Vec<BigUint>, OracleError> {
    if tbl.counts.len() < d + 1 {
        return Err(OracleError::TooFewCounts { need: d, have: tbl.counts.len() });
    }
    let l: Vec<BigInt> = tbl.counts.iter().map(|c| BigInt::from(c.clone())).collect();
    let di = d as i64;
    let h: Vec<BigInt> = (0..=di)
        .map(|j| {
            (0..=j)
                .map(|k| {
                    let s = binom(di + 1, k) * &l[(j - k) as usize];
                    if k % 2 == 0 { s } else { -s }
                })
                .sum()
        })
        .collect();
    for (t, lt) in l.iter().enumerate() {
        let t = t as i64;
        let rebuilt: BigInt = h.iter().enumerate().map(|(i, hi)| hi * binom(t + di - i as i64, di)).sum();
        if &rebuilt != lt {
            return Err(OracleError::NonIntegralSolution { d });
        }
    }
    h.into_iter()
        .enumerate()
        .map(|(i, x)| match x.sign() {
            Sign::Minus => Err(OracleError::NegativeCoefficient { index: i }),
            _ => Ok(x.magnitude().clone()),
        })
        .collect()
}

/// Whether all finite differences of order `d + 1` of the table vanish.
pub fn finite_differences_vanish(tbl: &FlowCountTable, d: usize) -> bool {
    let mut row: Vec<BigInt> = tbl.counts.iter().map(|c| BigInt::from(c.clone())).collect();
    for _ in 0..=d {
        if row.len() < 2 {
            return false;
        }
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    !row.is_empty() && row.iter().all(|x| x.is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub dim: usize,
    pub counts: FlowCountTable,
    #[serde(serialize_with = "decimal")]
    pub hstar: Vec<BigUint>,
    pub differences_vanish: bool,
}

/// Counts up to `t = d + 2`, h*, and the finite-difference check.
pub fn oracle(g: &Dag, cap: usize) -> Result<OracleReport, OracleError> {
    let (_, d) = flow_dims(g)?;
    let counts = count_table(g, d as u32 + 2, cap)?;
    let hstar = hstar_from_counts(&counts, d)?;
    let differences_vanish = finite_differences_vanish(&counts, d);
    Ok(OracleReport { dim: d, counts, hstar, differences_vanish })
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn integer_rank(mut m: Vec<Vec<i128>>) -> Result<usize, OracleError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev: i128 = 1;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                let a = m[rank][c].checked_mul(m[r][k]).ok_or(OracleError::Overflow)?;
                let b = m[r][c].checked_mul(m[rank][k]).ok_or(OracleError::Overflow)?;
                m[r][k] = a.checked_sub(b).ok_or(OracleError::Overflow)? / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialSimplexReport {
    pub holds: bool,
    /// Number of exceptional routes through each edge.
    pub cover_counts: BTreeMap<EdgeId, usize>,
    /// Edges whose hyperplane `x_e = 0` does not cut out a facet.
    pub non_facets: Vec<EdgeId>,
}

/// Each facet `x_e = 0` must contain all but one exceptional route, that is,
/// each edge lies on exactly one exceptional route. Also records which `x_e = 0`
/// fail to be facets.
pub fn special_simplex_check(g: &Dag, f: &Framing, route_cap: usize) -> Result<SpecialSimplexReport, OracleError> {
    let fd = FramedDag::new(g, f)?;
    let routes = enumerate_routes(g, route_cap)?;
    let exc = exceptional_routes(&fd, &routes);
    let (_, d) = flow_dims(g)?;
    let mut cover_counts: BTreeMap<EdgeId, usize> = g.edge_ids().map(|e| (e, 0)).collect();
    for &i in &exc {
        for e in routes[i].edges() {
            *cover_counts.get_mut(e).expect("route edge") += 1;
        }
    }
    let mut non_facets = Vec::new();
    for e in g.edge_ids() {
        let m: Vec<Vec<i128>> = routes
            .iter()
            .filter(|r| !r.contains(e))
            .map(|r| r.characteristic_vector(g).into_iter().map(i128::from).collect())
            .collect();
        if integer_rank(m)? != d {
            non_facets.push(e);
        }
    }
    let holds = cover_counts.values().all(|&c| c == 1);
    Ok(SpecialSimplexReport { holds, cover_counts, non_facets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag_core::{complete_contraction, DEFAULT_ROUTE_CAP};
    use crate::instances::{car8_core, g27_labels, gkn, single_edge};

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn g27() -> Dag {
        complete_contraction(&gkn(2, 7).unwrap()).result
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 0).len(), 1);
        assert!(compositions(2, 0).is_empty());
    }

    #[test]
    fn trivial_counts() {
        let g = g27();
        assert_eq!(count_integer_flows(&g, 0, 1000).unwrap(), BigUint::one());
        for t in 0..6 {
            assert_eq!(count_integer_flows(&single_edge(), t, 1000).unwrap(), BigUint::one());
        }
        let r = oracle(&single_edge(), 1000).unwrap();
        assert_eq!(r.hstar, big(&[1]));
    }

    #[test]
    fn strength_one_counts_routes() {
        let g = g27();
        let n = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap().len();
        assert_eq!(count_integer_flows(&g, 1, 1000).unwrap(), BigUint::from(n));
        assert_eq!(n, 13);
    }

    #[test]
    fn parallel_edges_give_simplex() {
        // k parallel edges: the standard simplex, |tP| = C(t+k-1, k-1)
        let g = Dag::from_pairs(&[(0, 1), (0, 1), (0, 1)]).unwrap();
        let r = oracle(&g, 1000).unwrap();
        assert_eq!(r.dim, 2);
        assert_eq!(r.counts.counts, big(&[1, 3, 6, 10, 15]));
        assert_eq!(r.hstar, big(&[1, 0, 0]));
    }

    #[test]
    fn g27_hstar() {
        let r = oracle(&g27(), DEFAULT_FRONTIER_CAP).unwrap();
        assert_eq!(r.dim, 5);
        assert_eq!(r.hstar, big(&[1, 7, 7, 1, 0, 0]));
        assert!(r.differences_vanish);
    }

    #[test]
    fn wrong_degree_is_detected() {
        let tbl = count_table(&g27(), 7, DEFAULT_FRONTIER_CAP).unwrap();
        assert_eq!(hstar_from_counts(&tbl, 4), Err(OracleError::NonIntegralSolution { d: 4 }));
        assert!(!finite_differences_vanish(&tbl, 4));
    }

    #[test]
    fn frontier_cap() {
        assert_eq!(count_integer_flows(&g27(), 4, 3), Err(OracleError::FrontierExplosion { cap: 3 }));
    }

    #[test]
    fn rank() {
        assert_eq!(integer_rank(vec![vec![1, 2], vec![2, 4]]).unwrap(), 1);
        assert_eq!(integer_rank(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap(), 3);
        assert_eq!(integer_rank(vec![]).unwrap(), 0);
    }

    #[test]
    fn distinct_ample_framings_can_share_a_special_simplex() {
        // s => 1 => t and s => 2 => t glued at s and t
        let g = Dag::from_pairs(&[(0, 1), (0, 1), (0, 2), (0, 2), (1, 3), (1, 3), (2, 3), (2, 3)]).unwrap();
        let m = crate::framing::path_cycle_decomposition(&g).unwrap().m();
        let routes = enumerate_routes(&g, DEFAULT_ROUTE_CAP).unwrap();
        let mut simplices = std::collections::BTreeSet::new();
        let mut framings = 0;
        for t in crate::framing::enumerate_ample_framings(&g).unwrap() {
            assert!(special_simplex_check(&g, &t.framing, DEFAULT_ROUTE_CAP).unwrap().holds);
            let fd = FramedDag::new(&g, &t.framing).unwrap();
            simplices.insert(exceptional_routes(&fd, &routes));
            framings += 1;
        }
        assert_eq!((m, framings), (4, 16));
        // fewer than 2^(M-1) = 8
        assert_eq!(simplices.len(), 4);
    }

    #[test]
    fn special_simplices() {
        let g = g27();
        let f = Framing::from_labels(&g, &g27_labels()).unwrap();
        let r = special_simplex_check(&g, &f, DEFAULT_ROUTE_CAP).unwrap();
        assert!(r.holds);
        assert!(r.non_facets.is_empty());
        let core = car8_core();
        let r = special_simplex_check(&core, &Framing::length(&core), DEFAULT_ROUTE_CAP).unwrap();
        assert!(r.holds);
        assert!(r.non_facets.is_empty());
    }
}
