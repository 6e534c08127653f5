//! Coarse differentiation: level schedules, efficiency at a granularity,
//! per-level inefficiency censuses, the distortion lower bound that follows
//! from them, the efficient-copy search and the `K_{2,n}` certificate.

mod census;
mod certificate;
mod copy_search;
mod k2n;

pub use census::{census, granularity_efficiency, CensusRow, EfficiencyCensus, LevelSchedule};
pub use certificate::{
    diff_bound, Certificate, CertificateKind, CertificateStatus, CertificateError, Witness,
};
pub use copy_search::{audit, copy_recipe, find_efficient_copy, CopyRecipe, CopySearch, LevelScan};
pub use k2n::{k2n_certificate, K2nCheck};

use crate::cuts::{CutError, Metric};
use crate::graph::{DistanceMatrix, GraphError, VertexId};
use crate::scalar::{Extended, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoarseError {
    #[error("granularity must be at least 2, got {0}")]
    BadGranularity(usize),
    #[error("segment [{a}, {b}] is not split evenly into {m} parts")]
    NotDivisible { a: usize, b: usize, m: usize },
    #[error("segment [{a}, {b}] lies outside a path with {hops} hops")]
    SegmentOutOfRange { a: usize, b: usize, hops: usize },
    #[error("path {index} has {found} hops, expected {expected}")]
    MixedLengths {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("map expands the pair ({u}, {v}); the audit needs a non-expansive map")]
    Expansive { u: VertexId, v: VertexId },
    #[error("ground sets differ: map has {map} points, host has {host}")]
    SizeMismatch { map: usize, host: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// Smallest `eps` with `sum f(x_i, x_{i+1}) <= (1 + eps) f(x_1, x_k)`.
/// Infinite when the endpoints collapse but the walk does not; a fully
/// collapsed walk counts as 0-efficient.
pub(crate) fn walk_efficiency<T: Scalar>(f: &impl Metric<T>, points: &[VertexId]) -> Extended<T> {
    let walk = points
        .windows(2)
        .fold(T::zero(), |acc, w| acc + f.dist(w[0], w[1]));
    let ends = f.dist(points[0], points[points.len() - 1]);
    if !ends.is_positive() {
        return if walk.is_positive() {
            Extended::Infinite
        } else {
            Extended::Finite(T::zero())
        };
    }
    let eps = walk / ends - T::one();
    Extended::Finite(if eps < T::zero() { T::zero() } else { eps })
}

/// First pair with `f(u,v) > d(u,v)` beyond tolerance.
pub fn expansion_witness<T: Scalar>(
    f: &impl Metric<T>,
    host: &DistanceMatrix<T>,
) -> Result<Option<(VertexId, VertexId)>, CoarseError> {
    if f.point_count() != host.len() {
        return Err(CoarseError::SizeMismatch {
            map: f.point_count(),
            host: host.len(),
        });
    }
    Ok(host.pairs().find(|&(u, v)| !f.dist(u, v).approx_le(host.get(u, v))))
}

/// Fold of `d` around the midpoint of `s` and `t`: `x -> min(d(s,x), d(x,t))`
/// read as a line metric. It is 1-Lipschitz but collapses mirror images.
pub fn fold_map<T: Scalar>(d: &DistanceMatrix<T>, s: VertexId, t: VertexId) -> DistanceMatrix<T> {
    let height: Vec<T> = (0..d.len())
        .map(|v| {
            let (a, b) = (d.get(s, v).clone(), d.get(v, t).clone());
            if a < b {
                a
            } else {
                b
            }
        })
        .collect();
    DistanceMatrix::from_fn(d.len(), |u, v| height[u].abs_diff(&height[v]))
}
