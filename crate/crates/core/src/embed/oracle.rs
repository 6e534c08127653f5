use std::collections::HashMap;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::sample::{extend, sample_with};
use super::{EmbedError, RecursiveFamily, SeparationTable};
use crate::cuts::VertexSet;
use crate::exec;
use crate::graph::{path_index, DistanceMatrix, VertexAddress, VertexId};
use crate::scalar::{q_frac, q_int, q_to_f64, Q};
use crate::seed::sample_seed;

/// Exact table by enumerating every combination of per-copy base cuts.
/// Each combination is equally likely. Fails with `Budget` when the number
/// of combinations exceeds `limit`.
pub fn enumerate_separation(family: &RecursiveFamily, limit: u128) -> Result<DistanceMatrix, EmbedError> {
    let info = family.info();
    let support = family.law().support();
    let radix = support.len() as u128;
    let copies: usize = family.copies_per_level().iter().sum();
    let required = (0..copies).try_fold(1u128, |acc, _| acc.checked_mul(radix));
    let required = match required {
        Some(r) if r <= limit => r,
        other => {
            return Err(EmbedError::Budget {
                required: other.unwrap_or(u128::MAX),
                limit,
            })
        }
    };
    let n = family.graph().vertex_count();
    let total = required as usize;
    let counts = exec::fold_chunks(
        total,
        1 << 12,
        |range| {
            let mut counts = vec![0u64; n * n];
            for combo in range {
                let mut digits = combo;
                let mut labels = VertexSet::with_capacity(2);
                labels.insert(family.graph().s());
                for (level, endpoints) in info.copy_endpoints.iter().enumerate() {
                    let draws: Vec<u64> = (0..endpoints.len())
                        .map(|_| {
                            let d = support[digits % support.len()];
                            digits /= support.len();
                            d
                        })
                        .collect();
                    labels = extend(info, level, &labels, &draws).expect("draw count matches");
                }
                tally(&labels, n, &mut counts);
            }
            counts
        },
        add_counts,
    )
    .unwrap_or_else(|| vec![0; n * n]);
    let denom = q_int(total as i64);
    Ok(DistanceMatrix::from_fn(n, |u, v| {
        let (a, b) = (u.min(v), u.max(v));
        q_int(counts[a * n + b] as i64) / &denom
    }))
}

fn tally(labels: &VertexSet, n: usize, counts: &mut [u64]) {
    for u in 0..n {
        let lu = labels.contains(u);
        for v in u + 1..n {
            if lu != labels.contains(v) {
                counts[u * n + v] += 1;
            }
        }
    }
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Exact separation probability by a recursion over the two label
/// ancestries. The deeper vertex is replaced by the endpoint whose label it
/// copies (each with probability 1/2); two middles of the same copy are
/// resolved with the joint law of the base cut.
pub fn walk_separation(family: &RecursiveFamily, u: VertexId, v: VertexId) -> Result<Q, EmbedError> {
    let n = family.graph().vertex_count();
    for w in [u, v] {
        if w >= n {
            return Err(EmbedError::VertexOutOfRange(w));
        }
    }
    let mut memo = HashMap::new();
    Ok(Walker { family }.separation(u, v, &mut memo))
}

struct Walker<'a> {
    family: &'a RecursiveFamily,
}

struct Parent {
    depth: usize,
    copy: usize,
    middle: usize,
    src: VertexId,
    dst: VertexId,
}

impl Walker<'_> {
    fn parent(&self, v: VertexId) -> Option<Parent> {
        let info = self.family.info();
        match info.addresses.address(v) {
            VertexAddress::Inner { path, vertex } => {
                let copy = path_index(path, info.template.edge_count());
                let (src, dst) = info.copy_endpoints[path.len()][copy];
                Some(Parent {
                    depth: path.len() + 1,
                    copy,
                    middle: *vertex as usize - 2,
                    src,
                    dst,
                })
            }
            _ => None,
        }
    }

    fn separation(&self, a: VertexId, b: VertexId, memo: &mut HashMap<(VertexId, VertexId), Q>) -> Q {
        if a == b {
            return Q::zero();
        }
        let key = (a.min(b), a.max(b));
        if let Some(p) = memo.get(&key) {
            return p.clone();
        }
        let half = q_frac(1, 2);
        let p = match (self.parent(a), self.parent(b)) {
            // Distinct top terminals.
            (None, None) => q_int(1),
            (Some(pa), Some(pb)) if pa.depth == pb.depth && pa.copy == pb.copy => {
                let joint = self.family.law().joint(pa.middle, pb.middle);
                let ends_a = [pa.src, pa.dst];
                let ends_b = [pb.src, pb.dst];
                let mut total = Q::zero();
                for (i, row) in joint.iter().enumerate() {
                    for (j, w) in row.iter().enumerate() {
                        if !w.is_zero() {
                            total += w * self.separation(ends_a[i], ends_b[j], memo);
                        }
                    }
                }
                total
            }
            (Some(pa), pb) if pb.as_ref().is_none_or(|pb| pa.depth >= pb.depth) => {
                half.clone() * (self.separation(pa.src, b, memo) + self.separation(pa.dst, b, memo))
            }
            (_, Some(pb)) => half.clone() * (self.separation(a, pb.src, memo) + self.separation(a, pb.dst, memo)),
            (Some(_), None) => unreachable!("covered by the deeper-vertex arm"),
        };
        memo.insert(key, p.clone());
        p
    }
}

/// Upper-triangle separation counts over independent samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McCounts {
    pub samples: u64,
    pub master_seed: u64,
    pub vertices: usize,
    /// `counts[u * vertices + v]` for `u < v`.
    pub counts: Vec<u64>,
}

impl McCounts {
    pub fn count(&self, u: VertexId, v: VertexId) -> u64 {
        let (a, b) = (u.min(v), u.max(v));
        if a == b {
            0
        } else {
            self.counts[a * self.vertices + b]
        }
    }

    pub fn frequency(&self, u: VertexId, v: VertexId) -> f64 {
        self.count(u, v) as f64 / self.samples.max(1) as f64
    }
}

/// Draws `samples` recursive cuts with seeds `sample_seed(master, i)` and
/// counts separated pairs. Chunks are reduced in index order.
pub fn monte_carlo(family: &RecursiveFamily, samples: u64, master: u64) -> McCounts {
    let n = family.graph().vertex_count();
    let counts = exec::fold_chunks(
        samples as usize,
        1 << 10,
        |range| {
            let mut counts = vec![0u64; n * n];
            for i in range {
                let s = sample_with(family, sample_seed(master, i as u64), false);
                tally(&s.labels, n, &mut counts);
            }
            counts
        },
        add_counts,
    )
    .unwrap_or_else(|| vec![0; n * n]);
    McCounts {
        samples,
        master_seed: master,
        vertices: n,
        counts,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McViolation {
    pub u: VertexId,
    pub v: VertexId,
    pub exact: f64,
    pub frequency: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McComparison {
    pub pairs: usize,
    pub max_z: f64,
    /// Pairs whose frequency lies outside `exact ± z_limit * sigma`.
    pub violations: Vec<McViolation>,
}

impl McComparison {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Standardised deviation of each empirical frequency from the exact
/// probability, with `sigma = sqrt(p (1 - p) / samples)` taken from the exact
/// `p`. Degenerate `p` (0 or 1) demands an exact match.
pub fn compare_monte_carlo(table: &SeparationTable, counts: &McCounts, z_limit: f64) -> McComparison {
    let mut max_z: f64 = 0.0;
    let mut violations = Vec::new();
    let mut pairs = 0;
    let samples = counts.samples.max(1) as f64;
    for (u, v) in table.probabilities().pairs() {
        pairs += 1;
        let p = table.probability(u, v);
        let exact = q_to_f64(p);
        let frequency = counts.frequency(u, v);
        let sigma = (exact * (1.0 - exact) / samples).sqrt();
        let z = if sigma > 0.0 {
            (frequency - exact).abs() / sigma
        } else {
            let hits = p.to_u64().map(|one| one * counts.samples);
            if hits == Some(counts.count(u, v)) {
                0.0
            } else {
                f64::INFINITY
            }
        };
        max_z = max_z.max(z);
        if z > z_limit {
            violations.push(McViolation {
                u,
                v,
                exact,
                frequency,
                z,
            });
        }
    }
    McComparison {
        pairs,
        max_z,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{pair_separation_probability, separation_table};

    #[test]
    fn diamond_enumeration_has_32_combinations() {
        let fam = RecursiveFamily::new(2, 2).unwrap();
        assert_eq!(
            enumerate_separation(&fam, 31),
            Err(EmbedError::Budget { required: 32, limit: 31 })
        );
        let table = enumerate_separation(&fam, 32).unwrap();
        for e in fam.graph().edges() {
            assert_eq!(table.get(e.u, e.v), &q_frac(1, 4));
        }
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for (m, k) in [(2, 1), (2, 2), (4, 1), (6, 1), (8, 1), (3, 1), (1, 2), (1, 3)] {
            let fam = RecursiveFamily::new(m, k).unwrap();
            let oracle = enumerate_separation(&fam, 1 << 20).unwrap();
            let table = separation_table(&fam).unwrap();
            assert_eq!(table.probabilities(), &oracle, "m={m} k={k}");
        }
    }

    #[test]
    fn closed_form_matches_walk_recursion() {
        for (m, k) in [(2, 3), (4, 2), (3, 2), (5, 2), (6, 2)] {
            let fam = RecursiveFamily::new(m, k).unwrap();
            for (u, v) in fam.dist().pairs() {
                let closed = pair_separation_probability(&fam, u, v).unwrap().probability;
                assert_eq!(closed, walk_separation(&fam, u, v).unwrap(), "m={m} k={k} ({u},{v})");
            }
        }
    }

    #[test]
    fn walk_recursion_matches_enumeration() {
        let fam = RecursiveFamily::new(3, 2).unwrap();
        let oracle = enumerate_separation(&fam, 1 << 20).unwrap();
        for (u, v) in fam.dist().pairs() {
            assert_eq!(&walk_separation(&fam, u, v).unwrap(), oracle.get(u, v));
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let fam = RecursiveFamily::new(2, 2).unwrap();
        let a = monte_carlo(&fam, 4000, 5);
        assert_eq!(a, monte_carlo(&fam, 4000, 5));
        let table = separation_table(&fam).unwrap();
        let cmp = compare_monte_carlo(&table, &a, 5.0);
        assert_eq!(cmp.pairs, 66);
        assert!(cmp.passed(), "{:?}", cmp.violations);
        assert_eq!(a.count(0, 1), 4000);
    }

    #[test]
    fn comparison_flags_a_wrong_table() {
        let fam = RecursiveFamily::new(2, 1).unwrap();
        let counts = monte_carlo(&fam, 1000, 1);
        let table = separation_table(&fam).unwrap();
        assert!(compare_monte_carlo(&table, &counts, 3.0).passed());
        let mut skewed = counts.clone();
        skewed.counts[2 * 4 + 3] = 500;
        let cmp = compare_monte_carlo(&table, &skewed, 3.0);
        assert_eq!(cmp.violations.len(), 1);
        assert!(cmp.max_z.is_infinite());
    }
}
