use num_traits::One;

use super::address::{index_path, AddressBook, VertexAddress};
use super::metric::single_source;
use super::{Edge, GraphError, PowerInfo, StGraph, VertexId};
use crate::scalar::Q;

/// Default cap on constructed vertex counts.
pub const DEFAULT_VERTEX_BUDGET: u128 = 1_000_000;

/// A single unit-length edge `s = 0`, `t = 1`.
pub fn unit_edge() -> StGraph {
    StGraph::new_unreduced(
        2,
        vec![Edge {
            u: 0,
            v: 1,
            len: Q::one(),
        }],
        0,
        1,
    )
    .expect("unit edge is valid")
}

/// `K_{2,n}` with unit lengths: `s = 0`, `t = 1`, middle vertices `2..n+2`.
pub fn make_k2n(n: usize) -> Result<StGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyMiddle);
    }
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        edges.push(Edge {
            u: 0,
            v: 2 + i,
            len: Q::one(),
        });
        edges.push(Edge {
            u: 2 + i,
            v: 1,
            len: Q::one(),
        });
    }
    StGraph::new_unreduced(n + 2, edges, 0, 1)
}

struct Substitution {
    graph: StGraph,
    /// Oriented endpoints of each edge of the outer graph.
    orientation: Vec<(VertexId, VertexId)>,
}

/// Replaces every edge of `outer` by a copy of `inner`. New edge lengths are
/// `len_outer(e) * len_inner(f) / divisor`.
fn substitute(outer: &StGraph, inner: &StGraph, divisor: &Q) -> Substitution {
    let hops = outer.hops_from(outer.s());
    let inner_ids: Vec<Option<usize>> = {
        let mut next = 0;
        (0..inner.vertex_count())
            .map(|w| {
                if w == inner.s() || w == inner.t() {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let per_copy = inner.vertex_count() - 2;
    let base = outer.vertex_count();
    let mut edges = Vec::with_capacity(outer.edge_count() * inner.edge_count());
    let mut orientation = Vec::with_capacity(outer.edge_count());
    for (ei, e) in outer.edges().iter().enumerate() {
        let (src, dst) = outer.oriented_edge(ei, &hops);
        orientation.push((src, dst));
        let map = |w: VertexId| -> VertexId {
            if w == inner.s() {
                src
            } else if w == inner.t() {
                dst
            } else {
                base + ei * per_copy + inner_ids[w].expect("inner vertex")
            }
        };
        let factor = &e.len / divisor;
        for f in inner.edges() {
            edges.push(Edge {
                u: map(f.u),
                v: map(f.v),
                len: &factor * &f.len,
            });
        }
    }
    let vertex_count = base + outer.edge_count() * per_copy;
    let graph = StGraph::new_unreduced(vertex_count, edges, outer.s(), outer.t())
        .expect("substitution of valid graphs is valid");
    Substitution { graph, orientation }
}

/// `H ⊘ G`: every edge `(u, v)` of `H`, oriented away from `s(H)`, becomes a
/// copy of `G` with `s(G) ↦ u` and `t(G) ↦ v`, scaled by
/// `len_H(e) / d_G(s, t)` so that `V(H)` sits isometrically inside.
///
/// Vertex ids of `H` are kept; new vertices follow in (edge, template vertex)
/// order.
pub fn oslash(h: &StGraph, g: &StGraph) -> StGraph {
    let d_st = single_source(g, g.s())[g.t()].clone();
    substitute(h, g, &d_st).graph
}

/// `G^⊘k` with the default vertex budget.
pub fn power(g: &StGraph, k: usize) -> Result<StGraph, GraphError> {
    power_with_budget(g, k, DEFAULT_VERTEX_BUDGET)
}

/// `G^⊘k = G^⊘(k-1) ⊘ G`, normalised so that `G^⊘1 = G`: all lengths are
/// multiplied by `d_G(s,t)^k`. For unit-length templates every edge of the
/// power has length one and `d(s,t) = d_G(s,t)^k`.
///
/// The result carries an address book and the oriented endpoints of every
/// level copy.
pub fn power_with_budget(g: &StGraph, k: usize, budget: u128) -> Result<StGraph, GraphError> {
    let inner_per_copy = (g.vertex_count() - 2) as u128;
    let mut vertices: u128 = 2;
    let mut edges: u128 = 1;
    for _ in 0..k {
        vertices = vertices.saturating_add(edges.saturating_mul(inner_per_copy));
        edges = edges.saturating_mul(g.edge_count() as u128);
    }
    if vertices > budget {
        return Err(GraphError::Budget {
            required: vertices,
            budget,
        });
    }

    let template_edges = g.edge_count();
    let inner: Vec<VertexId> = g.inner_vertices().collect();
    let mut host = unit_edge();
    let mut addresses = vec![VertexAddress::S, VertexAddress::T];
    let mut copy_endpoints = Vec::with_capacity(k);
    for level in 0..k {
        let step = substitute(&host, g, &Q::one());
        for e in 0..host.edge_count() {
            let path = index_path(e, level, template_edges);
            for &w in &inner {
                addresses.push(VertexAddress::Inner {
                    path: path.clone(),
                    vertex: w as u32,
                });
            }
        }
        copy_endpoints.push(step.orientation);
        host = step.graph;
    }
    debug_assert_eq!(addresses.len(), host.vertex_count());
    host.set_power_info(PowerInfo {
        template: g.clone(),
        depth: k,
        addresses: AddressBook::from_vec(addresses),
        copy_endpoints,
    });
    Ok(host)
}

/// The other association order, `G ⊘ G^⊘(k-1)`, rescaled to the same
/// normalisation as [`power`]. Carries no address book.
pub fn power_right(g: &StGraph, k: usize) -> Result<StGraph, GraphError> {
    if k == 0 {
        return Ok(unit_edge());
    }
    let rest = power(g, k - 1)?;
    let d_st = single_source(g, g.s())[g.t()].clone();
    let mut scale = Q::one();
    for _ in 0..k - 1 {
        scale *= &d_st;
    }
    Ok(oslash(g, &rest).scaled(&scale))
}

/// Explicit isomorphism from [`power_right`] to [`power`]: `map[r]` is the
/// left-build vertex matching right-build vertex `r`. Fails with a message
/// when the address correspondence does not preserve edges and lengths.
pub fn right_build_isomorphism(g: &StGraph, k: usize) -> Result<Vec<VertexId>, String> {
    if k == 0 {
        return Ok(vec![0, 1]);
    }
    let left = power(g, k).map_err(|e| e.to_string())?;
    let right = power_right(g, k).map_err(|e| e.to_string())?;
    let rest = power(g, k - 1).map_err(|e| e.to_string())?;
    let info = left.power_info().ok_or("left build lacks addresses")?;
    let rest_book = rest.addresses().ok_or("inner build lacks addresses")?;
    let gv = g.vertex_count();
    let per_copy = rest.vertex_count() - 2;

    let mut map = Vec::with_capacity(right.vertex_count());
    for r in 0..right.vertex_count() {
        let address = if r < gv {
            if r == g.s() {
                VertexAddress::S
            } else if r == g.t() {
                VertexAddress::T
            } else {
                VertexAddress::Inner {
                    path: vec![],
                    vertex: r as u32,
                }
            }
        } else {
            let edge = (r - gv) / per_copy;
            let p = 2 + (r - gv) % per_copy;
            match rest_book.address(p) {
                VertexAddress::Inner { path, vertex } => {
                    let mut full = Vec::with_capacity(path.len() + 1);
                    full.push(edge as u32);
                    full.extend_from_slice(path);
                    VertexAddress::Inner {
                        path: full,
                        vertex: *vertex,
                    }
                }
                other => return Err(format!("unexpected inner address {other:?}")),
            }
        };
        let target = info
            .resolve(&address)
            .ok_or_else(|| format!("address {address:?} missing from left build"))?;
        map.push(target);
    }

    let mut hit = vec![false; left.vertex_count()];
    for &m in &map {
        if std::mem::replace(&mut hit[m], true) {
            return Err(format!("vertex {m} hit twice"));
        }
    }
    if map.len() != left.vertex_count() || right.edge_count() != left.edge_count() {
        return Err("vertex or edge counts differ".into());
    }
    for e in right.edges() {
        match left.edge_between(map[e.u], map[e.v]) {
            Some(f) if f.len == e.len => {}
            Some(f) => {
                return Err(format!(
                    "edge ({}, {}) length {} maps to length {}",
                    e.u, e.v, e.len, f.len
                ))
            }
            None => return Err(format!("edge ({}, {}) has no image", e.u, e.v)),
        }
    }
    Ok(map)
}
