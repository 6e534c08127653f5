use num_integer::Integer;
use num_traits::ToPrimitive;

use super::certificate::recipe_levels;
use super::{
    census, diff_bound, expansion_witness, walk_efficiency, Certificate, CertificateKind,
    CertificateStatus, CoarseError, EfficiencyCensus, Witness,
};
use crate::cuts::Metric;
use crate::graph::{level_copies, st_geodesics, CopyDescriptor, DistanceMatrix, StGraph, VertexId};
use crate::scalar::{q_frac, q_int, Extended, Scalar, ScalarMode, Q};

/// Parameters that make the coarse-differentiation argument produce an
/// efficient copy: `delta = 1/|P_G|`, `alpha = 1/2`, `N = 8D/(eps delta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopyRecipe {
    pub delta: Q,
    pub alpha: Q,
    pub levels: Q,
    /// `ceil(levels)`, the number of composition levels actually needed.
    pub levels_ceil: u64,
}

pub fn copy_recipe(template: &StGraph, distortion: &Q, eps: &Q) -> Result<CopyRecipe, CoarseError> {
    if !Scalar::is_positive(eps) || !Scalar::is_positive(distortion) {
        return Err(CoarseError::BadParameter(
            "recipe needs positive distortion and eps".into(),
        ));
    }
    let count = st_geodesics(template, 1, 0).total;
    let delta = Q::new(1.into(), count.into());
    let levels = recipe_levels(distortion, eps, &delta);
    let ceil = levels.numer().div_ceil(levels.denom());
    Ok(CopyRecipe {
        delta,
        alpha: q_frac(1, 2),
        levels_ceil: ceil.to_u64().unwrap_or(u64::MAX),
        levels,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelScan {
    pub level: usize,
    pub copies: usize,
    pub efficient: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopySearch {
    /// First efficient copy in (level, path) order.
    pub copy: Option<CopyDescriptor>,
    pub scans: Vec<LevelScan>,
    pub template_geodesics: usize,
    pub sampled: bool,
}

impl CopySearch {
    /// Packages the search as a certificate against a distortion budget `d`.
    pub fn certificate<T: Scalar>(&self, mode: ScalarMode, d: &T, eps: &T) -> Certificate {
        let delta = T::from_q(&q_frac(1, self.template_geodesics as i64));
        let mut c = Certificate::new(CertificateKind::EfficientCopy, mode)
            .param("distortion", d.to_text())
            .param("eps", eps.to_text())
            .param("delta", delta.to_text())
            .param("alpha", T::from_q(&q_frac(1, 2)).to_text());
        c.bound = recipe_levels(d, eps, &delta).to_text();
        c.sampled = self.sampled;
        match &self.copy {
            Some(copy) => {
                c.status = CertificateStatus::Pass;
                c.witness = Witness::Copy {
                    level: copy.level,
                    path: copy.path.clone(),
                    vertex_map: copy.vertex_map.clone(),
                };
            }
            None => c.status = CertificateStatus::NotFound,
        }
        c
    }
}

/// Scans level-k copies of the template, `k = 1, 2, ...`, for one on which
/// `f` is `eps`-efficient along every template s-t geodesic. `f` must be
/// non-expansive against `host_dist`.
pub fn find_efficient_copy<T: Scalar>(
    f: &(impl Metric<T> + Sync),
    host: &StGraph,
    host_dist: &DistanceMatrix<T>,
    eps: &T,
    cap: usize,
    seed: u64,
) -> Result<CopySearch, CoarseError> {
    if let Some((u, v)) = expansion_witness(f, host_dist)? {
        return Err(CoarseError::Expansive { u, v });
    }
    let info = host.power_info().ok_or(crate::graph::GraphError::NotAPowerGraph)?;
    let family = st_geodesics(&info.template, cap, seed);
    let mut scans = Vec::new();
    for level in 1..=info.depth {
        let copies = level_copies(host, level)?;
        let efficient: Vec<bool> = crate::exec::map_slice(&copies, |c| {
            family.paths.iter().all(|geo| {
                let mapped: Vec<VertexId> = geo.iter().map(|&w| c.vertex_map[w]).collect();
                walk_efficiency(f, &mapped).approx_le(eps)
            })
        });
        scans.push(LevelScan {
            level,
            copies: copies.len(),
            efficient: efficient.iter().filter(|&&e| e).count(),
        });
        if let Some(i) = efficient.iter().position(|&e| e) {
            return Ok(CopySearch {
                copy: Some(copies[i].clone()),
                scans,
                template_geodesics: family.total.to_usize().unwrap_or(usize::MAX),
                sampled: !family.exhaustive,
            });
        }
    }
    Ok(CopySearch {
        copy: None,
        scans,
        template_geodesics: family.total.to_usize().unwrap_or(usize::MAX),
        sampled: !family.exhaustive,
    })
}

/// Contrapositive check of the differentiation theorem for path families:
/// with `h` levels at which `f` is `(eps, delta)`-inefficient, a measured
/// distortion below `eps * delta * h / 2` would be a counterexample.
#[allow(clippy::too_many_arguments)]
pub fn audit<T: Scalar>(
    f: &(impl Metric<T> + Sync),
    host_dist: &DistanceMatrix<T>,
    paths: &[Vec<VertexId>],
    m: usize,
    eps: &T,
    delta: &T,
    levels: u32,
    measured: &Extended<T>,
    mode: ScalarMode,
) -> Result<(Certificate, EfficiencyCensus), CoarseError> {
    if levels == 0 {
        return Err(CoarseError::BadParameter("audit needs at least one level".into()));
    }
    if let Some((u, v)) = expansion_witness(f, host_dist)? {
        return Err(CoarseError::Expansive { u, v });
    }
    let table = census(f, paths, m, eps, levels)?;
    let h = table.inefficient_levels(delta);
    let alpha = T::from_q(&(q_int(h as i64) / q_int(levels as i64)));
    let bound = diff_bound(eps, &alpha, delta, levels as u64);
    let mut cert = Certificate::new(CertificateKind::DiffBound, mode)
        .param("eps", eps.to_text())
        .param("delta", delta.to_text())
        .param("alpha", alpha.to_text())
        .param("levels", levels.to_string())
        .param("granularity", m.to_string())
        .param("inefficient_levels", h.to_string());
    cert.bound = bound.to_text();
    cert.measured = Some(measured.to_text());
    cert.status = if measured.approx_ge(&bound) {
        CertificateStatus::Pass
    } else {
        CertificateStatus::Fail
    };
    cert.witness = Witness::Census {
        rows: table.rows.clone(),
    };
    Ok((cert, table))
}
