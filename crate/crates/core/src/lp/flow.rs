use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplex::{solve_lp_with, LinearProgram, Relation, Sense, SolverOptions};
use super::LpError;
use crate::cuts::VertexSet;
use crate::exec;
use crate::graph::{Edge, StGraph, VertexId};
use crate::scalar::{q_int, q_to_f64, Q};

/// Largest vertex count for exhaustive sparsest-cut enumeration.
pub const SPARSEST_MAX_VERTICES: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commodity {
    pub source: VertexId,
    pub sink: VertexId,
    pub demand: Q,
}

/// Undirected capacitated graph with demand pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowInstance {
    graph: StGraph,
    capacities: Vec<Q>,
    commodities: Vec<Commodity>,
}

impl FlowInstance {
    pub fn new(graph: StGraph, capacities: Vec<Q>, commodities: Vec<Commodity>) -> Result<Self, LpError> {
        if capacities.len() != graph.edge_count() {
            return Err(LpError::Malformed(format!(
                "{} capacities for {} edges",
                capacities.len(),
                graph.edge_count()
            )));
        }
        if let Some(i) = capacities.iter().position(Signed::is_negative) {
            return Err(LpError::Malformed(format!("capacity {i} is negative")));
        }
        if commodities.is_empty() {
            return Err(LpError::NoDemand);
        }
        let n = graph.vertex_count();
        for (i, c) in commodities.iter().enumerate() {
            if c.source >= n || c.sink >= n {
                return Err(LpError::Malformed(format!("commodity {i} names a missing vertex")));
            }
            if c.source == c.sink {
                return Err(LpError::Malformed(format!("commodity {i} has equal terminals")));
            }
            if !c.demand.is_positive() {
                return Err(LpError::Malformed(format!("commodity {i} has non-positive demand")));
            }
        }
        Ok(FlowInstance {
            graph,
            capacities,
            commodities,
        })
    }

    /// Every edge with capacity 1.
    pub fn unit_capacities(graph: StGraph, commodities: Vec<Commodity>) -> Result<Self, LpError> {
        let caps = vec![q_int(1); graph.edge_count()];
        Self::new(graph, caps, commodities)
    }

    pub fn graph(&self) -> &StGraph {
        &self.graph
    }

    pub fn capacities(&self) -> &[Q] {
        &self.capacities
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn scale_capacities(&self, factor: &Q) -> Self {
        FlowInstance {
            capacities: self.capacities.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    pub fn scale_demands(&self, factor: &Q) -> Self {
        FlowInstance {
            commodities: self
                .commodities
                .iter()
                .map(|c| Commodity {
                    demand: &c.demand * factor,
                    ..c.clone()
                })
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSolution {
    pub lambda: f64,
    /// `flows[i][e] = (u -> v, v -> u)` for commodity `i` on edge `e`.
    pub flows: Vec<Vec<(f64, f64)>>,
    pub iterations: usize,
}

pub fn max_concurrent_flow(inst: &FlowInstance) -> Result<FlowSolution, LpError> {
    max_concurrent_flow_with(inst, &SolverOptions::default())
}

/// Edge LP: directed flows per commodity and orientation, conservation at
/// every vertex except the sink, net outflow `lambda * D_i` at the source and
/// a joint capacity row per undirected edge.
pub fn max_concurrent_flow_with(inst: &FlowInstance, opts: &SolverOptions) -> Result<FlowSolution, LpError> {
    let g = &inst.graph;
    let (n, m, k) = (g.vertex_count(), g.edge_count(), inst.commodities.len());
    let var = |i: usize, e: usize, back: bool| 2 * (i * m + e) + back as usize;
    let lambda = 2 * k * m;
    let mut lp = LinearProgram::new(lambda + 1, Sense::Maximize);
    lp.objective[lambda] = 1.0;
    for (i, c) in inst.commodities.iter().enumerate() {
        for v in (0..n).filter(|&v| v != c.sink) {
            let mut row = Vec::new();
            for &(_, e) in g.neighbors(v) {
                let edge = &g.edges()[e];
                let out_is_forward = edge.u == v;
                row.push((var(i, e, !out_is_forward), 1.0));
                row.push((var(i, e, out_is_forward), -1.0));
            }
            if v == c.source {
                row.push((lambda, -q_to_f64(&c.demand)));
            }
            lp.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    for e in 0..m {
        let row = (0..k).flat_map(|i| [(var(i, e, false), 1.0), (var(i, e, true), 1.0)]).collect();
        lp.add_constraint(row, Relation::Le, q_to_f64(&inst.capacities[e]));
    }
    let sol = solve_lp_with(&lp, opts)?;
    let flows = (0..k)
        .map(|i| (0..m).map(|e| (sol.x[var(i, e, false)], sol.x[var(i, e, true)])).collect())
        .collect();
    Ok(FlowSolution {
        lambda: sol.value,
        flows,
        iterations: sol.iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsestCut {
    pub phi: Q,
    /// Minimising side, reported as the side containing vertex 0.
    pub side: VertexSet,
    pub capacity: Q,
    pub demand: Q,
}

/// Integer numerators over a common denominator.
fn common_scale(values: &[Q]) -> (Vec<i128>, BigInt) {
    let lcm = values.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scaled = values
        .iter()
        .map(|q| (q.numer() * (&lcm / q.denom())).to_i128().unwrap_or(i128::MAX))
        .collect();
    (scaled, lcm)
}

/// `Phi* = min_S C(S) / D(S)` by enumerating every cut `{S, V \ S}`. Cuts
/// separating no demand are skipped. Ties go to the lexicographically
/// smallest membership vector of the side containing vertex 0.
pub fn sparsest_cut(inst: &FlowInstance) -> Result<SparsestCut, LpError> {
    let g = &inst.graph;
    let n = g.vertex_count();
    if n > SPARSEST_MAX_VERTICES {
        return Err(LpError::Budget {
            required: 1u128 << (n - 1),
            limit: 1u128 << (SPARSEST_MAX_VERTICES - 1),
        });
    }
    let (caps, cap_scale) = common_scale(&inst.capacities);
    let demands: Vec<Q> = inst.commodities.iter().map(|c| c.demand.clone()).collect();
    let (dems, dem_scale) = common_scale(&demands);
    let limit = i64::MAX as i128;
    let total = |v: &[i128]| v.iter().fold(0i128, |a, &b| a.saturating_add(b));
    if total(&caps) > limit || total(&dems) > limit {
        return Err(LpError::Malformed("capacities or demands too large for exact enumeration".into()));
    }
    let in_side = |mask: u64, w: usize| w > 0 && mask >> (w - 1) & 1 == 1;
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|e: &Edge| (e.u, e.v)).collect();
    let pairs: Vec<(usize, usize)> = inst.commodities.iter().map(|c| (c.source, c.sink)).collect();
    // Lexicographic key of the side containing 0: bit v of that side is the
    // complement of mask bit v - 1, so the smallest membership vector has
    // the largest mask read from vertex 1 downward.
    let lex_key = |mask: u64| -> u64 {
        let bits = n - 1;
        (0..bits).fold(0u64, |acc, j| (acc << 1) | (mask >> j & 1))
    };
    type Best = Option<(i128, i128, u64)>;
    let better = |a: &(i128, i128, u64), b: &(i128, i128, u64)| {
        // a.0/a.1 < b.0/b.1, ties by larger key.
        let (l, r) = (a.0 * b.1, b.0 * a.1);
        l < r || (l == r && lex_key(a.2) > lex_key(b.2))
    };
    let total = (1u64 << (n - 1)) - 1;
    let best: Best = exec::fold_chunks(
        total as usize,
        1 << 14,
        |range| {
            let mut best: Best = None;
            for idx in range {
                let mask = idx as u64 + 1;
                let dem: i128 = pairs
                    .iter()
                    .zip(&dems)
                    .filter(|(&(a, b), _)| in_side(mask, a) != in_side(mask, b))
                    .map(|(_, &d)| d)
                    .sum();
                if dem == 0 {
                    continue;
                }
                let cap: i128 = edges
                    .iter()
                    .zip(&caps)
                    .filter(|(&(a, b), _)| in_side(mask, a) != in_side(mask, b))
                    .map(|(_, &c)| c)
                    .sum();
                let cand = (cap, dem, mask);
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
            }
            best
        },
        |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(if better(&y, &x) { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        },
    )
    .flatten();
    let (cap, dem, mask) = best.ok_or(LpError::NoSeparatedDemand)?;
    let capacity = Q::new(BigInt::from(cap), cap_scale);
    let demand = Q::new(BigInt::from(dem), dem_scale);
    let mut side = VertexSet::with_capacity(n);
    for v in (0..n).filter(|&v| !in_side(mask, v)) {
        side.insert(v);
    }
    Ok(SparsestCut {
        phi: &capacity / &demand,
        side,
        capacity,
        demand,
    })
}

/// Connected graph on `n` vertices: a random spanning tree plus up to
/// `extra` random chords, unit lengths, `s = 0`, `t = n - 1`.
pub fn random_connected_graph(n: usize, extra: usize, seed: u64) -> StGraph {
    assert!(n >= 2, "need at least two vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        present.insert((u, v));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            present.insert((u.min(v), u.max(v)));
        }
    }
    let edges = present
        .into_iter()
        .map(|(u, v)| Edge { u, v, len: q_int(1) })
        .collect();
    StGraph::new(n, edges, 0, n - 1).expect("unit-length connected graph")
}

/// Random integer capacities in `1..=max_capacity` and `commodities` random
/// demand pairs with demands in `1..=max_demand`.
pub fn random_instance(
    graph: StGraph,
    commodities: usize,
    max_capacity: i64,
    max_demand: i64,
    seed: u64,
) -> Result<FlowInstance, LpError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.vertex_count();
    let caps = (0..graph.edge_count())
        .map(|_| q_int(rng.gen_range(1..=max_capacity)))
        .collect();
    let mut list = Vec::with_capacity(commodities);
    while list.len() < commodities {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            list.push(Commodity {
                source: a,
                sink: b,
                demand: q_int(rng.gen_range(1..=max_demand)),
            });
        }
    }
    FlowInstance::new(graph, caps, list)
}

/// Unit demand between every pair of `terminals`.
pub fn all_pairs_commodities(terminals: &[VertexId]) -> Vec<Commodity> {
    let mut out = Vec::new();
    for (i, &a) in terminals.iter().enumerate() {
        for &b in &terminals[i + 1..] {
            out.push(Commodity {
                source: a,
                sink: b,
                demand: q_int(1),
            });
        }
    }
    out
}

pub(crate) fn phi_as_f64(cut: &SparsestCut) -> f64 {
    if cut.demand.is_zero() {
        f64::INFINITY
    } else {
        q_to_f64(&cut.phi)
    }
}
