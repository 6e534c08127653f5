use num_traits::{Signed, Zero};

use super::address::{index_path, VertexAddress};
use super::metric::{single_source, DistanceMatrix};
use super::{GraphError, StGraph, VertexId};
use crate::scalar::Q;

/// A scaled isometric copy of the template inside a power graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopyDescriptor {
    pub level: usize,
    /// Template edge path selecting the copy (empty for the level-1 copy).
    pub path: Vec<u32>,
    /// `vertex_map[w]` is the host vertex playing template vertex `w`.
    pub vertex_map: Vec<VertexId>,
    /// Distances in the copy are `scale` times template distances.
    pub scale: Q,
}

impl CopyDescriptor {
    pub fn s(&self, template: &StGraph) -> VertexId {
        self.vertex_map[template.s()]
    }

    pub fn t(&self, template: &StGraph) -> VertexId {
        self.vertex_map[template.t()]
    }
}

/// The `|E(G)|^(k-1)` level-k copies of the template in a power graph, in
/// lexicographic path order.
pub fn level_copies(host: &StGraph, k: usize) -> Result<Vec<CopyDescriptor>, GraphError> {
    let info = host.power_info().ok_or(GraphError::NotAPowerGraph)?;
    if k == 0 || k > info.depth {
        return Err(GraphError::LevelOutOfRange {
            level: k,
            depth: info.depth,
        });
    }
    let template = &info.template;
    let m = template.edge_count();
    let d_st = single_source(template, template.s())[template.t()].clone();
    // Copy scale = (length of the substituted edge, in host units) / d_G(s,t).
    // Host units put G^⊘(k-1) inside G^⊘N scaled by d_G(s,t)^(N-k+1).
    let mut lift = Q::from_integer(1.into());
    for _ in 0..(info.depth + 1 - k) {
        lift *= &d_st;
    }
    let level_graph_edges = m.pow(k as u32 - 1);
    let mut out = Vec::with_capacity(level_graph_edges);
    for i in 0..level_graph_edges {
        let path = index_path(i, k - 1, m);
        let edge_len = path
            .iter()
            .fold(Q::from_integer(1.into()), |acc, &e| acc * &template.edges()[e as usize].len);
        let vertex_map = (0..template.vertex_count())
            .map(|w| {
                info.resolve(&VertexAddress::Inner {
                    path: path.clone(),
                    vertex: w as u32,
                })
                .expect("level copy vertex exists")
            })
            .collect();
        out.push(CopyDescriptor {
            level: k,
            path,
            vertex_map,
            scale: &edge_len * &lift / &d_st,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CopyViolation {
    #[error("expected {expected} vertices, got {got}")]
    Cardinality { expected: usize, got: usize },
    #[error("host vertex {0} used twice")]
    NotInjective(VertexId),
    #[error("template pair ({u}, {v}) has host distance {host}, expected {expected}")]
    Pair {
        u: VertexId,
        v: VertexId,
        host: String,
        expected: String,
    },
}

/// Checks `d_host(f(u), f(v)) = C * d_template(u, v)` for one constant `C > 0`
/// and returns it, or a witness pair.
pub fn verify_copy(
    host: &DistanceMatrix,
    vertex_map: &[VertexId],
    template: &DistanceMatrix,
) -> Result<Q, CopyViolation> {
    if vertex_map.len() != template.len() {
        return Err(CopyViolation::Cardinality {
            expected: template.len(),
            got: vertex_map.len(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for &v in vertex_map {
        if !seen.insert(v) {
            return Err(CopyViolation::NotInjective(v));
        }
    }
    let mut scale: Option<Q> = None;
    for u in 0..template.len() {
        for v in u + 1..template.len() {
            let dt = template.get(u, v);
            let dh = host.get(vertex_map[u], vertex_map[v]);
            let c = scale.get_or_insert_with(|| {
                if dt.is_zero() {
                    Q::zero()
                } else {
                    dh / dt
                }
            });
            let expected = &*c * dt;
            if *dh != expected || !c.is_positive() {
                return Err(CopyViolation::Pair {
                    u,
                    v,
                    host: dh.to_string(),
                    expected: expected.to_string(),
                });
            }
        }
    }
    Ok(scale.unwrap_or_else(|| Q::from_integer(1.into())))
}
