use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{walk_efficiency, CoarseError};
use crate::cuts::Metric;
use crate::exec;
use crate::graph::VertexId;
use crate::scalar::{format_q, q_int, Extended, Scalar, Q};

/// Level points `L_k = {j M^-k : 0 <= j <= M^k}` and level segments
/// `S_k = {(j M^-k, (j+1) M^-k) : 0 <= j < M^k}` of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelSchedule {
    granularity: usize,
}

impl LevelSchedule {
    pub fn new(granularity: usize) -> Result<Self, CoarseError> {
        if granularity < 2 {
            return Err(CoarseError::BadGranularity(granularity));
        }
        Ok(LevelSchedule { granularity })
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    pub fn points(&self, k: u32) -> Vec<Q> {
        let count = self.granularity.pow(k);
        let den = q_int(count as i64);
        (0..=count).map(|j| q_int(j as i64) / &den).collect()
    }

    pub fn segments(&self, k: u32) -> Vec<(Q, Q)> {
        let pts = self.points(k);
        pts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    }
}

/// Efficiency of `f` on the `M`-point subdivision of the hop range `[a, b]`
/// of `path`.
pub fn granularity_efficiency<T: Scalar>(
    f: &impl Metric<T>,
    path: &[VertexId],
    a: usize,
    b: usize,
    m: usize,
) -> Result<Extended<T>, CoarseError> {
    if m < 2 {
        return Err(CoarseError::BadGranularity(m));
    }
    let hops = path.len().saturating_sub(1);
    if a >= b || b > hops {
        return Err(CoarseError::SegmentOutOfRange { a, b, hops });
    }
    if !(b - a).is_multiple_of(m) {
        return Err(CoarseError::NotDivisible { a, b, m });
    }
    let step = (b - a) / m;
    let points: Vec<VertexId> = (0..=m).map(|j| path[a + j * step]).collect();
    Ok(walk_efficiency(f, &points))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub level: usize,
    /// Segment/path pairs examined.
    pub total: u64,
    pub inefficient: u64,
}

impl CensusRow {
    pub fn delta(&self) -> Q {
        Q::new(self.inefficient.into(), self.total.into())
    }
}

/// Per-level counts of `(segment, path)` pairs on which the map fails to be
/// `eps`-efficient at granularity `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCensus {
    pub granularity: usize,
    pub eps: String,
    pub paths: usize,
    pub rows: Vec<CensusRow>,
}

impl EfficiencyCensus {
    /// Levels `k` with `delta_k >= delta`.
    pub fn inefficient_levels<T: Scalar>(&self, delta: &T) -> usize {
        self.rows
            .iter()
            .filter(|r| delta.approx_le(&T::from_q(&r.delta())))
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,total,inefficient,delta\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.level,
                r.total,
                r.inefficient,
                format_q(&r.delta())
            ));
        }
        out
    }
}

/// Level `k` (1-based) cuts each path into `M^(k-1)` segments, so level 1 is
/// the whole path and level `N` segments span `M` hops. Every path must have
/// exactly `M^N` hops.
pub fn census<T: Scalar>(
    f: &(impl Metric<T> + Sync),
    paths: &[Vec<VertexId>],
    m: usize,
    eps: &T,
    levels: u32,
) -> Result<EfficiencyCensus, CoarseError> {
    let schedule = LevelSchedule::new(m)?;
    let hops = m.pow(levels);
    for (index, p) in paths.iter().enumerate() {
        if p.len() != hops + 1 {
            return Err(CoarseError::MixedLengths {
                index,
                expected: hops,
                found: p.len().saturating_sub(1),
            });
        }
    }
    let hops_q = q_int(hops as i64);
    let bounds: Vec<Vec<(usize, usize)>> = (0..levels)
        .map(|k| {
            schedule
                .segments(k)
                .into_iter()
                .map(|(a, b)| (q_index(&(a * &hops_q)), q_index(&(b * &hops_q))))
                .collect()
        })
        .collect();
    let per_path: Vec<Vec<u64>> = exec::map_slice(paths, |p| {
        bounds
            .iter()
            .map(|segs| {
                segs.iter()
                    .filter(|&&(a, b)| {
                        let e = granularity_efficiency(f, p, a, b, m).expect("validated segment");
                        !e.approx_le(eps)
                    })
                    .count() as u64
            })
            .collect()
    });
    let rows = (0..levels as usize)
        .map(|k| CensusRow {
            level: k + 1,
            total: (bounds[k].len() * paths.len()) as u64,
            inefficient: per_path.iter().map(|c| c[k]).sum(),
        })
        .collect();
    Ok(EfficiencyCensus {
        granularity: m,
        eps: eps.to_text(),
        paths: paths.len(),
        rows,
    })
}

fn q_index(x: &Q) -> usize {
    debug_assert!(x.denom().is_one());
    num_traits::ToPrimitive::to_usize(x.numer()).expect("index fits")
}
