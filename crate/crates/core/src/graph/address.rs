use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{PowerInfo, VertexId};

/// Position of a vertex inside `G^⊘N`.
///
/// `Inner { path, vertex }` is the template vertex `vertex` of the copy of `G`
/// reached by following template edge indices `path` from the top. The
/// canonical address of a vertex is the one of minimal depth; addresses that
/// name a copy's `s` or `t` are rewritten to the shallower vertex they denote.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexAddress {
    S,
    T,
    Inner { path: Vec<u32>, vertex: u32 },
}

impl VertexAddress {
    pub fn depth(&self) -> usize {
        match self {
            VertexAddress::S | VertexAddress::T => 0,
            VertexAddress::Inner { path, .. } => path.len() + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AddressBook {
    by_vertex: Vec<VertexAddress>,
    index: HashMap<VertexAddress, VertexId>,
}

impl AddressBook {
    pub(crate) fn from_vec(by_vertex: Vec<VertexAddress>) -> Self {
        let index = by_vertex
            .iter()
            .enumerate()
            .map(|(v, a)| (a.clone(), v))
            .collect();
        AddressBook { by_vertex, index }
    }

    pub fn address(&self, v: VertexId) -> &VertexAddress {
        &self.by_vertex[v]
    }

    pub fn as_slice(&self) -> &[VertexAddress] {
        &self.by_vertex
    }

    /// Lookup of a canonical address.
    pub fn vertex(&self, address: &VertexAddress) -> Option<VertexId> {
        self.index.get(address).copied()
    }

    pub fn len(&self) -> usize {
        self.by_vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_vertex.is_empty()
    }
}

/// Lexicographic index of an edge path among all paths of the same length.
pub(crate) fn path_index(path: &[u32], template_edges: usize) -> usize {
    path.iter()
        .fold(0usize, |acc, &e| acc * template_edges + e as usize)
}

/// Inverse of [`path_index`].
pub(crate) fn index_path(mut index: usize, len: usize, template_edges: usize) -> Vec<u32> {
    let mut path = vec![0u32; len];
    for slot in path.iter_mut().rev() {
        *slot = (index % template_edges) as u32;
        index /= template_edges;
    }
    path
}

impl PowerInfo {
    /// Rewrites any address to its canonical minimal-depth form. Returns
    /// `None` when the address does not exist in this power graph.
    pub fn canonicalize(&self, address: &VertexAddress) -> Option<VertexAddress> {
        self.resolve(address)
            .map(|v| self.addresses.address(v).clone())
    }

    /// Vertex id named by an address, canonical or not.
    pub fn resolve(&self, address: &VertexAddress) -> Option<VertexId> {
        match address {
            VertexAddress::S => Some(self.template_endpoint_host(true)),
            VertexAddress::T => Some(self.template_endpoint_host(false)),
            VertexAddress::Inner { path, vertex } => {
                let level = path.len();
                if level >= self.depth {
                    return None;
                }
                let m = self.template.edge_count();
                if path.iter().any(|&e| e as usize >= m) {
                    return None;
                }
                let w = *vertex as usize;
                if w >= self.template.vertex_count() {
                    return None;
                }
                if w == self.template.s() || w == self.template.t() {
                    let (src, dst) = self.copy_endpoints[level][path_index(path, m)];
                    Some(if w == self.template.s() { src } else { dst })
                } else {
                    self.addresses.vertex(address)
                }
            }
        }
    }

    // Power graphs keep the unit edge's ids: s = 0, t = 1.
    fn template_endpoint_host(&self, source: bool) -> VertexId {
        if source {
            0
        } else {
            1
        }
    }
}
