//! The recursive random-cut embedding of `K_{2,m}^{⊘k}`.
//!
//! A base cut of `K_{2,m}` puts `s` on one side, `t` on the other and splits
//! the middles as evenly as possible. The level-`k+1` cut is obtained from
//! the level-`k` cut by drawing an independent base cut in every new copy:
//! an inner vertex inherits the label of the copy's `s` endpoint when it
//! sits on the `s` side of its draw, and the label of `t` otherwise.
//!
//! Middle counts follow the graph, not the `2n` convention: `middles = 4`
//! means `K_{2,4}`.

mod exact;
mod oracle;
mod sample;

pub use exact::{
    case_combination, distortion_bound, embedding_distortion, pair_separation_probability,
    quadratic_min, separation_table, PairSeparation, SeparationCase, SeparationTable,
};
pub use oracle::{
    compare_monte_carlo, enumerate_separation, monte_carlo, walk_separation, McComparison,
    McCounts, McViolation,
};
pub use sample::{crossings, next_embedding, sample_recursive_cut, RecursiveCutSample};

use rand::seq::index;
use rand::Rng;

use crate::graph::{
    all_pairs_distances, make_k2n, power_with_budget, DistanceMatrix, GraphError, PowerInfo,
    StGraph, VertexId, DEFAULT_VERTEX_BUDGET,
};
use crate::cuts::{CutError, VertexSet};
use crate::scalar::{q_int, Q};

/// Largest middle count whose base-cut support is enumerated.
pub const MAX_MIDDLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("middle count must be in 1..={MAX_MIDDLES}, got {0}")]
    BadMiddleCount(usize),
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("expected {expected} base-cut draws, got {got}")]
    MissingDraws { expected: usize, got: usize },
    #[error("label vector of length {0} matches no level of the host")]
    LabelSize(usize),
    #[error("pair ({0}, {0}) is not a pair of distinct vertices")]
    SamePair(VertexId),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("pair ({u}, {v}) falls outside the case analysis")]
    Unclassified { u: VertexId, v: VertexId },
    #[error("enumeration needs {required} draw combinations, limit is {limit}")]
    Budget { required: u128, limit: u128 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// Law of the base cut on `K_{2,m}`: a uniformly random set of `floor(m/2)`
/// middles or its complement, each with probability 1/2, joined with `s`.
/// Every support element is equally likely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseCutLaw {
    middles: usize,
    /// Bit `i` set: middle `i` is on the `s` side.
    support: Vec<u64>,
}

impl BaseCutLaw {
    pub fn new(middles: usize) -> Result<Self, EmbedError> {
        if middles == 0 || middles > MAX_MIDDLES {
            return Err(EmbedError::BadMiddleCount(middles));
        }
        let lo = middles / 2;
        let hi = middles - lo;
        let support = (0u64..1 << middles)
            .filter(|mask| {
                let c = mask.count_ones() as usize;
                c == lo || c == hi
            })
            .collect();
        Ok(BaseCutLaw { middles, support })
    }

    pub fn middles(&self) -> usize {
        self.middles
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn atom_probability(&self) -> Q {
        Q::new(1.into(), (self.support.len() as i64).into())
    }

    /// Support element `i` as a vertex set of `K_{2,m}` (`s = 0`, middles
    /// `2..m+2`).
    pub fn side(&self, i: usize) -> VertexSet {
        let mut set = VertexSet::with_capacity(self.middles + 2);
        set.insert(0);
        for j in 0..self.middles {
            if self.support[i] >> j & 1 == 1 {
                set.insert(j + 2);
            }
        }
        set
    }

    /// `Pr[middle i on the s side]`, always 1/2.
    pub fn marginal(&self, i: usize) -> Q {
        let hits = self.support.iter().filter(|&&m| m >> i & 1 == 1).count();
        Q::new((hits as i64).into(), (self.support.len() as i64).into())
    }

    /// `joint[a][b] = Pr[side(x) = a, side(y) = b]` with index 0 for the `s`
    /// side and 1 for the `t` side.
    pub fn joint(&self, x: usize, y: usize) -> [[Q; 2]; 2] {
        let mut counts = [[0i64; 2]; 2];
        for &m in &self.support {
            let a = (m >> x & 1 == 0) as usize;
            let b = (m >> y & 1 == 0) as usize;
            counts[a][b] += 1;
        }
        let total = q_int(self.support.len() as i64);
        counts.map(|row| row.map(|c| q_int(c) / &total))
    }

    /// Probability that two distinct middles land on different sides:
    /// `floor(m/2) ceil(m/2) / C(m, 2)`. `None` when `m = 1`.
    pub fn pair_separation(&self) -> Option<Q> {
        let m = self.middles as i64;
        if m < 2 {
            return None;
        }
        Some(Q::new(((m / 2) * (m - m / 2)).into(), (m * (m - 1) / 2).into()))
    }

    /// Draws a base cut the way the law is described: a uniform
    /// `floor(m/2)`-subset, then a fair coin for complementing it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut mask = 0u64;
        for i in index::sample(rng, self.middles, self.middles / 2) {
            mask |= 1 << i;
        }
        if rng.gen::<bool>() {
            mask ^= (1u64 << self.middles) - 1;
        }
        mask
    }
}

/// `K_{2,m}^{⊘k}` with its metric and base-cut law.
#[derive(Clone, Debug)]
pub struct RecursiveFamily {
    law: BaseCutLaw,
    depth: usize,
    graph: StGraph,
    dist: DistanceMatrix,
}

impl RecursiveFamily {
    pub fn new(middles: usize, depth: usize) -> Result<Self, EmbedError> {
        Self::with_budget(middles, depth, DEFAULT_VERTEX_BUDGET)
    }

    pub fn with_budget(middles: usize, depth: usize, budget: u128) -> Result<Self, EmbedError> {
        let law = BaseCutLaw::new(middles)?;
        if depth == 0 {
            return Err(EmbedError::BadDepth);
        }
        let graph = power_with_budget(&make_k2n(middles)?, depth, budget)?;
        let dist = all_pairs_distances(&graph);
        Ok(RecursiveFamily {
            law,
            depth,
            graph,
            dist,
        })
    }

    pub fn law(&self) -> &BaseCutLaw {
        &self.law
    }

    pub fn middles(&self) -> usize {
        self.law.middles
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn graph(&self) -> &StGraph {
        &self.graph
    }

    pub fn dist(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub(crate) fn info(&self) -> &PowerInfo {
        self.graph.power_info().expect("power graph")
    }

    /// Number of copies drawn at each level, top level first.
    pub fn copies_per_level(&self) -> Vec<usize> {
        self.info().copy_endpoints.iter().map(Vec::len).collect()
    }
}

/// Vertex count of `K_{2,m}^{⊘level}`.
pub(crate) fn vertices_at_level(middles: usize, level: usize) -> usize {
    let mut vertices = 2;
    let mut edges = 1;
    for _ in 0..level {
        vertices += edges * middles;
        edges *= 2 * middles;
    }
    vertices
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn support_sizes_and_uniformity() {
        assert_eq!(BaseCutLaw::new(2).unwrap().support().len(), 2);
        assert_eq!(BaseCutLaw::new(4).unwrap().support().len(), 6);
        assert_eq!(BaseCutLaw::new(3).unwrap().support().len(), 6);
        assert_eq!(BaseCutLaw::new(1).unwrap().support(), &[0, 1]);
        assert_eq!(BaseCutLaw::new(0), Err(EmbedError::BadMiddleCount(0)));
        for m in 1..=8 {
            let law = BaseCutLaw::new(m).unwrap();
            for i in 0..m {
                assert_eq!(law.marginal(i), Q::new(1.into(), 2.into()));
            }
        }
    }

    #[test]
    fn key_fact_pair_separation() {
        // Direct count over the support versus the closed form.
        for m in 2..=9 {
            let law = BaseCutLaw::new(m).unwrap();
            let j = law.joint(0, 1);
            let sep = &j[0][1] + &j[1][0];
            assert_eq!(Some(sep), law.pair_separation(), "m = {m}");
        }
        let q = |m| BaseCutLaw::new(m).unwrap().pair_separation().unwrap();
        assert_eq!(q(4), Q::new(2.into(), 3.into()));
        assert_eq!(q(2), q_int(1));
        assert_eq!(q(3), Q::new(2.into(), 3.into()));
        assert_eq!(BaseCutLaw::new(1).unwrap().pair_separation(), None);
    }

    #[test]
    fn sampler_hits_only_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [2, 3, 4, 5] {
            let law = BaseCutLaw::new(m).unwrap();
            let mut seen = std::collections::HashSet::new();
            for _ in 0..2000 {
                let draw = law.sample(&mut rng);
                assert!(law.support().contains(&draw));
                seen.insert(draw);
            }
            assert_eq!(seen.len(), law.support().len());
        }
    }

    #[test]
    fn side_contains_s_not_t() {
        let law = BaseCutLaw::new(4).unwrap();
        for i in 0..law.support().len() {
            let side = law.side(i);
            assert!(side.contains(0) && !side.contains(1));
            assert_eq!(side.count_ones(..), 3);
        }
    }

    #[test]
    fn level_vertex_counts() {
        let fam = RecursiveFamily::new(2, 3).unwrap();
        assert_eq!(fam.graph().vertex_count(), vertices_at_level(2, 3));
        assert_eq!(vertices_at_level(2, 3), 44);
        assert_eq!(fam.copies_per_level(), vec![1, 4, 16]);
        assert_eq!(RecursiveFamily::new(2, 0).unwrap_err(), EmbedError::BadDepth);
    }
}
