//! s-t graphs with exact rational edge lengths, the ⊘-composition, recursive
//! powers with hierarchical vertex addresses, shortest-path metrics, geodesic
//! enumeration and level-k copy extraction.

mod address;
mod compose;
mod copies;
mod geodesic;
mod metric;

use std::collections::{HashSet, VecDeque};

use num_traits::{One, Signed, Zero};

pub use address::{AddressBook, VertexAddress};
pub(crate) use address::{index_path, path_index};
pub use compose::{
    make_k2n, oslash, power, power_right, power_with_budget, right_build_isomorphism,
    unit_edge, DEFAULT_VERTEX_BUDGET,
};
pub use copies::{level_copies, verify_copy, CopyDescriptor, CopyViolation};
pub use geodesic::{st_geodesics, GeodesicFamily, DEFAULT_GEODESIC_CAP};
pub use metric::{all_pairs_distances, DistanceMatrix};

use crate::scalar::Q;

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub len: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph needs at least two vertices")]
    TooFewVertices,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("s and t must differ")]
    SameTerminals,
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(VertexId, VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) has non-positive length")]
    NonPositiveLength(VertexId, VertexId),
    #[error("graph is disconnected (vertex {0} unreachable from s)")]
    Disconnected(VertexId),
    #[error("edge ({u}, {v}) is not reduced: length {len} exceeds distance {dist}")]
    NotReduced {
        u: VertexId,
        v: VertexId,
        len: String,
        dist: String,
    },
    #[error("K_{{2,n}} needs n >= 1")]
    EmptyMiddle,
    #[error("construction needs {required} vertices, budget is {budget}")]
    Budget { required: u128, budget: u128 },
    #[error("level {level} outside 1..={depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("graph carries no address book")]
    NotAPowerGraph,
}

/// Construction record of a power graph `G^⊘N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerInfo {
    pub template: StGraph,
    pub depth: usize,
    pub addresses: AddressBook,
    /// `copy_endpoints[L][i]` = oriented (source, target) host vertices of
    /// the edge with lexicographic path index `i` in `G^⊘L`, i.e. the
    /// endpoints of the level-(L+1) copy substituted for it.
    pub copy_endpoints: Vec<Vec<(VertexId, VertexId)>>,
}

/// An s-t graph with positive reduced edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    s: VertexId,
    t: VertexId,
    adjacency: Vec<Vec<(VertexId, usize)>>,
    power: Option<Box<PowerInfo>>,
}

impl StGraph {
    /// Validates every structural invariant, including reducedness.
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        s: VertexId,
        t: VertexId,
    ) -> Result<Self, GraphError> {
        let graph = Self::new_unreduced(vertex_count, edges, s, t)?;
        graph.check_reduced()?;
        Ok(graph)
    }

    /// Everything in [`StGraph::new`] except the reduced-length check. Used by
    /// constructions that preserve reducedness by design.
    pub(crate) fn new_unreduced(
        vertex_count: usize,
        edges: Vec<Edge>,
        s: VertexId,
        t: VertexId,
    ) -> Result<Self, GraphError> {
        if vertex_count < 2 {
            return Err(GraphError::TooFewVertices);
        }
        for &x in &[s, t] {
            if x >= vertex_count {
                return Err(GraphError::VertexOutOfRange(x));
            }
        }
        if s == t {
            return Err(GraphError::SameTerminals);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= vertex_count {
                return Err(GraphError::VertexOutOfRange(e.u));
            }
            if e.v >= vertex_count {
                return Err(GraphError::VertexOutOfRange(e.v));
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u, e.v));
            }
            if !e.len.is_positive() {
                return Err(GraphError::NonPositiveLength(e.u, e.v));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(GraphError::DuplicateEdge(e.u, e.v));
            }
            adjacency[e.u].push((e.v, i));
            adjacency[e.v].push((e.u, i));
        }
        let graph = StGraph {
            vertex_count,
            edges,
            s,
            t,
            adjacency,
            power: None,
        };
        if let Some(v) = graph.hops_from(s).iter().position(|h| h.is_none()) {
            return Err(GraphError::Disconnected(v));
        }
        Ok(graph)
    }

    fn check_reduced(&self) -> Result<(), GraphError> {
        let dist = all_pairs_distances(self);
        for e in &self.edges {
            let d = dist.get(e.u, e.v);
            if *d < e.len {
                return Err(GraphError::NotReduced {
                    u: e.u,
                    v: e.v,
                    len: e.len.to_string(),
                    dist: d.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn s(&self) -> VertexId {
        self.s
    }

    pub fn t(&self) -> VertexId {
        self.t
    }

    /// Neighbours of `v` as `(neighbour, edge index)`.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, usize)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<&Edge> {
        self.adjacency[u]
            .iter()
            .find(|(w, _)| *w == v)
            .map(|&(_, i)| &self.edges[i])
    }

    pub fn power_info(&self) -> Option<&PowerInfo> {
        self.power.as_deref()
    }

    pub fn addresses(&self) -> Option<&AddressBook> {
        self.power.as_ref().map(|p| &p.addresses)
    }

    pub(crate) fn set_power_info(&mut self, info: PowerInfo) {
        self.power = Some(Box::new(info));
    }

    /// Every edge has length one.
    pub fn is_unit_length(&self) -> bool {
        self.edges.iter().all(|e| e.len.is_one())
    }

    /// Breadth-first hop counts from `root` (`None` for unreachable).
    pub fn hops_from(&self, root: VertexId) -> Vec<Option<usize>> {
        let mut hops = vec![None; self.vertex_count];
        hops[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let h = hops[x].unwrap_or_default();
            for &(y, _) in &self.adjacency[x] {
                if hops[y].is_none() {
                    hops[y] = Some(h + 1);
                    queue.push_back(y);
                }
            }
        }
        hops
    }

    /// Orients edge `i` from the endpoint with fewer hops from `s`, breaking
    /// ties by smaller vertex id.
    pub fn oriented_edge(&self, i: usize, hops: &[Option<usize>]) -> (VertexId, VertexId) {
        let e = &self.edges[i];
        let key = |x: VertexId| (hops[x].unwrap_or(usize::MAX), x);
        if key(e.u) <= key(e.v) {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        }
    }

    /// Middle vertices (everything except s and t) in id order.
    pub fn inner_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count).filter(move |&v| v != self.s && v != self.t)
    }

    /// The same graph with every length multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &Q) -> StGraph {
        assert!(factor.is_positive() && !factor.is_zero());
        let mut out = self.clone();
        for e in &mut out.edges {
            e.len = &e.len * factor;
        }
        out.power = None;
        out
    }
}
