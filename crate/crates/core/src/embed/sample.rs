use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{vertices_at_level, EmbedError, RecursiveFamily};
use crate::cuts::VertexSet;
use crate::exec;
use crate::graph::{index_path, PowerInfo, StGraph, VertexId};
use crate::seed::copy_seed;

/// One draw of the recursive cut: `labels` holds the vertices on the side of
/// `s`; `draws[level][copy]` is the base-cut mask drawn in each copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursiveCutSample {
    pub labels: VertexSet,
    pub draws: Vec<Vec<u64>>,
}

/// Applies one round of the next-embedding operator: `labels` is a cut of
/// `K_{2,m}^{⊘j}` (as a prefix of the host's vertex ids), `draws` has one
/// base cut per edge of that graph, and the result is a cut of
/// `K_{2,m}^{⊘(j+1)}`. The host must have depth at least `j + 1`.
pub fn next_embedding(
    host: &StGraph,
    labels: &VertexSet,
    draws: &[u64],
) -> Result<VertexSet, EmbedError> {
    let info = host
        .power_info()
        .ok_or(crate::graph::GraphError::NotAPowerGraph)?;
    let middles = info.template.vertex_count() - 2;
    let level = (0..info.depth)
        .find(|&j| vertices_at_level(middles, j) == labels.len())
        .ok_or(EmbedError::LabelSize(labels.len()))?;
    extend(info, level, labels, draws)
}

pub(crate) fn extend(
    info: &PowerInfo,
    level: usize,
    labels: &VertexSet,
    draws: &[u64],
) -> Result<VertexSet, EmbedError> {
    let endpoints = &info.copy_endpoints[level];
    if draws.len() != endpoints.len() {
        return Err(EmbedError::MissingDraws {
            expected: endpoints.len(),
            got: draws.len(),
        });
    }
    let middles = info.template.vertex_count() - 2;
    let base = labels.len();
    let mut out = labels.clone();
    out.grow(base + endpoints.len() * middles);
    for (e, (&(src, dst), &draw)) in endpoints.iter().zip(draws).enumerate() {
        let (at_s, at_t) = (labels.contains(src), labels.contains(dst));
        for i in 0..middles {
            let label = if draw >> i & 1 == 1 { at_s } else { at_t };
            if label {
                out.insert(base + e * middles + i);
            }
        }
    }
    Ok(out)
}

pub(crate) fn sample_with(family: &RecursiveFamily, seed: u64, parallel: bool) -> RecursiveCutSample {
    let info = family.info();
    let law = family.law();
    let edges = info.template.edge_count();
    let mut labels = VertexSet::with_capacity(2);
    labels.insert(info.addresses.vertex(&crate::graph::VertexAddress::S).unwrap_or(0));
    let mut draws = Vec::with_capacity(family.depth());
    for (level, endpoints) in info.copy_endpoints.iter().enumerate() {
        let draw = |e: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(copy_seed(seed, &index_path(e, level, edges)));
            law.sample(&mut rng)
        };
        let level_draws: Vec<u64> = if parallel {
            exec::map_range(endpoints.len(), draw)
        } else {
            (0..endpoints.len()).map(draw).collect()
        };
        labels = extend(info, level, &labels, &level_draws).expect("draw count matches");
        draws.push(level_draws);
    }
    RecursiveCutSample { labels, draws }
}

/// `S_k = P^{k-1}(S_1)` with the copy at edge path `p` drawing from the
/// stream `copy_seed(seed, p)`. Identical for every thread count.
pub fn sample_recursive_cut(family: &RecursiveFamily, seed: u64) -> RecursiveCutSample {
    sample_with(family, seed, true)
}

/// Number of consecutive pairs along `path` on opposite sides of the cut.
pub fn crossings(labels: &VertexSet, path: &[VertexId]) -> usize {
    path.windows(2)
        .filter(|w| labels.contains(w[0]) != labels.contains(w[1]))
        .count()
}
