//! Cut measures, the L1 pseudometrics they induce, monotonicity of cuts
//! along sequences, efficiency and distortion.

mod measure;
mod ops;

pub use measure::{
    bitset_from_hex, bitset_to_hex, Atom, CutMeasure, Embedding, VertexSet,
};
pub use ops::{
    distortion, efficiency, is_monotone, monotone_mass_check, Distortion, MassOutcome,
    MonotoneMass,
};

use crate::graph::{DistanceMatrix, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CutError {
    #[error("vertex {vertex} outside ground set of size {n}")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("cut side is empty or the whole ground set")]
    TrivialSide,
    #[error("atom weights must be positive")]
    NonPositiveWeight,
    #[error("sequence needs at least two entries")]
    SequenceTooShort,
    #[error("sequence repeats vertex {0} consecutively")]
    RepeatedConsecutive(VertexId),
    #[error("sequence endpoints {0} and {1} are at distance zero; efficiency undefined")]
    ZeroEndpointDistance(VertexId, VertexId),
    #[error("map is not injective: ({0}, {1}) collapse")]
    NonInjective(VertexId, VertexId),
    #[error("reference metric has zero distance between {0} and {1}")]
    DegenerateReference(VertexId, VertexId),
    #[error("ground sets differ: {0} vs {1}")]
    GroundSetMismatch(usize, usize),
    #[error("malformed bitset: {0}")]
    BadBitset(String),
}

/// Anything that can report a distance between two vertices.
pub trait Metric<T> {
    fn point_count(&self) -> usize;
    fn dist(&self, u: VertexId, v: VertexId) -> T;

    fn to_matrix(&self) -> DistanceMatrix<T>
    where
        T: Clone,
    {
        DistanceMatrix::from_fn(self.point_count(), |u, v| self.dist(u, v))
    }
}

impl<T: Clone> Metric<T> for DistanceMatrix<T> {
    fn point_count(&self) -> usize {
        self.len()
    }

    fn dist(&self, u: VertexId, v: VertexId) -> T {
        self.get(u, v).clone()
    }
}

/// An ordered vertex sequence `x_1, ..., x_k` with `k >= 2` and no
/// consecutive repeats. Non-consecutive repeats are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence(Vec<VertexId>);

impl Sequence {
    pub fn new(vertices: Vec<VertexId>) -> Result<Self, CutError> {
        if vertices.len() < 2 {
            return Err(CutError::SequenceTooShort);
        }
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(CutError::RepeatedConsecutive(w[0]));
        }
        Ok(Sequence(vertices))
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn first(&self) -> VertexId {
        self.0[0]
    }

    pub fn last(&self) -> VertexId {
        self.0[self.0.len() - 1]
    }
}

/// Converts an exact graph metric to the scalar type of a measure.
pub fn convert_metric<T: Scalar>(d: &DistanceMatrix) -> DistanceMatrix<T> {
    d.map(T::from_q)
}
