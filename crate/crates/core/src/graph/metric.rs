use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{StGraph, VertexId};
use crate::exec;
use crate::scalar::{Scalar, Q};

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T = Q> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> DistanceMatrix<T> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                data.push(f(u, v));
            }
        }
        DistanceMatrix { n, data }
    }

    pub(crate) fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let data: Vec<T> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), n * n);
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> &T {
        &self.data[u * self.n + v]
    }

    pub fn row(&self, u: VertexId) -> &[T] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> DistanceMatrix<U> {
        DistanceMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Restriction to the listed vertices, in that order.
    pub fn restrict(&self, vertices: &[VertexId]) -> DistanceMatrix<T> {
        DistanceMatrix::from_fn(vertices.len(), |i, j| {
            self.get(vertices[i], vertices[j]).clone()
        })
    }

    /// Unordered pairs `u < v`.
    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId)> {
        let n = self.n;
        (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
    }
}

impl<T: Scalar> DistanceMatrix<T> {
    /// First violated metric axiom, if any, as a vertex triple.
    pub fn metric_violation(&self) -> Option<(VertexId, VertexId, VertexId)> {
        let n = self.n;
        for u in 0..n {
            if !self.get(u, u).approx_eq(&T::zero()) {
                return Some((u, u, u));
            }
            for v in 0..n {
                if !self.get(u, v).approx_eq(self.get(v, u)) {
                    return Some((u, v, u));
                }
                for w in 0..n {
                    let via = self.get(u, w).clone() + self.get(w, v).clone();
                    if !self.get(u, v).approx_le(&via) {
                        return Some((u, w, v));
                    }
                }
            }
        }
        None
    }

    pub fn to_f64(&self) -> DistanceMatrix<f64> {
        self.map(Scalar::to_f64)
    }
}

/// Common denominator of all edge lengths, and the integer lengths over it
/// when they fit in `u64`.
fn integer_lengths(graph: &StGraph) -> Option<(BigInt, Vec<u64>)> {
    let mut lcm = BigInt::one();
    for e in graph.edges() {
        lcm = lcm.lcm(e.len.denom());
    }
    let budget = u64::MAX / (graph.vertex_count() as u64).max(1);
    let mut out = Vec::with_capacity(graph.edge_count());
    for e in graph.edges() {
        let scaled = e.len.numer() * (&lcm / e.len.denom());
        let x = scaled.to_u64()?;
        if x > budget {
            return None;
        }
        out.push(x);
    }
    Some((lcm, out))
}

fn dijkstra_u64(graph: &StGraph, lengths: &[u64], src: VertexId) -> Vec<u64> {
    let mut dist = vec![u64::MAX; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0;
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, e) in graph.neighbors(x) {
            let nd = d + lengths[e];
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((nd, y)));
            }
        }
    }
    dist
}

fn dijkstra_q(graph: &StGraph, src: VertexId) -> Vec<Q> {
    let mut dist: Vec<Option<Q>> = vec![None; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(Q::zero());
    heap.push(Reverse((Q::zero(), src)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if dist[x].as_ref().is_some_and(|best| d > *best) {
            continue;
        }
        for &(y, e) in graph.neighbors(x) {
            let nd = &d + &graph.edges()[e].len;
            if dist[y].as_ref().is_none_or(|best| nd < *best) {
                dist[y] = Some(nd.clone());
                heap.push(Reverse((nd, y)));
            }
        }
    }
    dist.into_iter()
        .map(|d| d.expect("StGraph is connected"))
        .collect()
}

/// Exact distances from one source.
pub(crate) fn single_source(graph: &StGraph, src: VertexId) -> Vec<Q> {
    match integer_lengths(graph) {
        Some((den, lengths)) => dijkstra_u64(graph, &lengths, src)
            .into_iter()
            .map(|d| Q::new(BigInt::from(d), den.clone()))
            .collect(),
        None => dijkstra_q(graph, src),
    }
}

/// Exact shortest-path distances between all vertex pairs. Sources run in
/// parallel when the `parallel` feature is on.
pub fn all_pairs_distances(graph: &StGraph) -> DistanceMatrix {
    let rows = match integer_lengths(graph) {
        Some((den, lengths)) => exec::map_range(graph.vertex_count(), |src| {
            dijkstra_u64(graph, &lengths, src)
                .into_iter()
                .map(|d| Q::new(BigInt::from(d), den.clone()))
                .collect::<Vec<_>>()
        }),
        None => exec::map_range(graph.vertex_count(), |src| dijkstra_q(graph, src)),
    };
    DistanceMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_k2n, power, Edge};
    use crate::scalar::{q_frac, q_int};

    #[test]
    fn k22_middle_distance() {
        let g = make_k2n(2).unwrap();
        let d = all_pairs_distances(&g);
        assert_eq!(*d.get(2, 3), q_int(2));
        assert_eq!(*d.get(0, 1), q_int(2));
        for v in 0..4 {
            assert_eq!(*d.get(v, v), q_int(0));
        }
        assert!(d.metric_violation().is_none());
    }

    #[test]
    fn diamond_level_two_st_distance() {
        let g = power(&make_k2n(2).unwrap(), 2).unwrap();
        let d = all_pairs_distances(&g);
        assert_eq!(*d.get(g.s(), g.t()), q_int(4));
        assert!(d.metric_violation().is_none());
    }

    #[test]
    fn rational_and_bigint_paths_agree() {
        let edges = vec![
            Edge { u: 0, v: 2, len: q_frac(1, 3) },
            Edge { u: 2, v: 1, len: q_frac(2, 7) },
            Edge { u: 0, v: 3, len: q_frac(1, 2) },
            Edge { u: 3, v: 1, len: q_frac(1, 5) },
        ];
        let g = StGraph::new(4, edges, 0, 1).unwrap();
        let fast = all_pairs_distances(&g);
        for src in 0..4 {
            assert_eq!(dijkstra_q(&g, src), fast.row(src).to_vec());
        }
        assert_eq!(*fast.get(0, 1), q_frac(13, 21));
    }
}
