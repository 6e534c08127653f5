use super::certificate::k2n_bound;
use super::{Certificate, CertificateKind, CertificateStatus, CoarseError, Witness};
use crate::cuts::{bitset_to_hex, convert_metric, distortion, efficiency, CutError, CutMeasure, Sequence};
use crate::graph::{all_pairs_distances, make_k2n};
use crate::scalar::{format_q, q_int, Extended, Scalar, ScalarMode, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct K2nCheck<T> {
    pub certificate: Certificate,
    /// `mu` is `eps/n`-efficient on every geodesic `s - m_i - t`.
    pub hypothesis: bool,
    pub measured: Extended<T>,
    pub bound: T,
    /// `sum_{i != j} d(m_i, m_j) = n (n-1) d(s, t)` in `K_{2,n}`.
    pub middle_identity: bool,
    /// Every atom separates exactly `2a(n-a) <= n^2/2` ordered middle pairs.
    pub cut_counts: bool,
}

/// Lower-bound certificate for an embedding of `K_{2,n}` given by `mu`
/// (vertices as built by `make_k2n`: `s = 0`, `t = 1`, middles `2..n+2`).
pub fn k2n_certificate<T: Scalar>(
    mu: &CutMeasure<T>,
    n: usize,
    eps: &T,
    mode: ScalarMode,
) -> Result<K2nCheck<T>, CoarseError> {
    let half = T::from_q(&Q::new(1.into(), 2.into()));
    if *eps < T::zero() || !eps.approx_le(&half) || eps.approx_eq(&half) {
        return Err(CoarseError::BadParameter(format!(
            "eps must lie in [0, 1/2), got {}",
            eps.to_text()
        )));
    }
    let g = make_k2n(n)?;
    if mu.ground_size() != g.vertex_count() {
        return Err(CutError::GroundSetMismatch(mu.ground_size(), g.vertex_count()).into());
    }
    let (s, t) = (g.s(), g.t());
    if !mu.cut_distance(s, t).is_positive() {
        return Err(CutError::ZeroEndpointDistance(s, t).into());
    }
    let middles: Vec<usize> = g.inner_vertices().collect();

    let per_geodesic = eps.clone() / T::from_q(&q_int(n as i64));
    let mut hypothesis = true;
    for &m in &middles {
        let seq = Sequence::new(vec![s, m, t])?;
        if !efficiency(mu, &seq)?.approx_le(&per_geodesic) {
            hypothesis = false;
        }
    }

    let exact = all_pairs_distances(&g);
    let measured = match distortion(mu, &convert_metric::<T>(&exact)) {
        Ok(d) => Extended::Finite(d.value),
        Err(CutError::NonInjective(..)) => Extended::Infinite,
        Err(e) => return Err(e.into()),
    };

    let middle_sum: Q = middles
        .iter()
        .flat_map(|&i| middles.iter().map(move |&j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| exact.get(i, j).clone())
        .sum();
    let identity_rhs = q_int((n * (n - 1)) as i64) * exact.get(s, t);
    let middle_identity = middle_sum == identity_rhs;

    let mut cut_counts = true;
    let mut atoms = Vec::with_capacity(mu.atoms().len());
    for atom in mu.atoms() {
        let a = middles.iter().filter(|&&m| atom.side.contains(m)).count();
        let ordered = middles
            .iter()
            .flat_map(|&i| middles.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| atom.separates(i, j))
            .count() as u64;
        let formula = 2 * a as u64 * (n - a) as u64;
        if ordered != formula || 2 * ordered > (n * n) as u64 {
            cut_counts = false;
        }
        atoms.push((bitset_to_hex(&atom.side), a, ordered));
    }

    let bound = k2n_bound(n, eps);
    let mut certificate = Certificate::new(CertificateKind::K2nLb, mode)
        .param("n", n.to_string())
        .param("eps", eps.to_text());
    certificate.bound = bound.to_text();
    certificate.measured = Some(measured.to_text());
    certificate.status = if !hypothesis {
        CertificateStatus::NotApplicable
    } else if measured.approx_ge(&bound) && middle_identity && cut_counts {
        CertificateStatus::Pass
    } else {
        CertificateStatus::Fail
    };
    certificate.witness = Witness::Counts {
        atoms,
        middle_sum: format_q(&middle_sum),
        identity_rhs: format_q(&identity_rhs),
    };
    Ok(K2nCheck {
        certificate,
        hypothesis,
        measured,
        bound,
        middle_identity,
        cut_counts,
    })
}
