use super::{CutError, CutMeasure, Metric, Sequence, VertexSet};
use crate::graph::{DistanceMatrix, VertexId};
use crate::scalar::Scalar;

/// True iff the membership trace of `side` along `seq` changes value at most
/// once. This is the same as one of `side`, `complement(side)` meeting the
/// sequence in a prefix.
pub fn is_monotone(side: &VertexSet, seq: &[VertexId]) -> bool {
    let mut changes = 0;
    for w in seq.windows(2) {
        if side.contains(w[0]) != side.contains(w[1]) {
            changes += 1;
            if changes > 1 {
                return false;
            }
        }
    }
    true
}

/// Smallest `eps` such that `seq` is `eps`-efficient under `f`:
/// `sum d(x_i, x_{i+1}) / d(x_1, x_k) - 1`.
pub fn efficiency<T: Scalar>(f: &impl Metric<T>, seq: &Sequence) -> Result<T, CutError> {
    let ends = f.dist(seq.first(), seq.last());
    if !ends.is_positive() {
        return Err(CutError::ZeroEndpointDistance(seq.first(), seq.last()));
    }
    let walk = seq
        .vertices()
        .windows(2)
        .fold(T::zero(), |acc, w| acc + f.dist(w[0], w[1]));
    let eps = walk / ends - T::one();
    Ok(if eps < T::zero() { T::zero() } else { eps })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Distortion<T> {
    /// `max f(u,v) / d(u,v)`.
    pub expansion: T,
    /// `max d(u,v) / f(u,v)`.
    pub contraction: T,
    pub value: T,
    pub expansion_pair: (VertexId, VertexId),
    pub contraction_pair: (VertexId, VertexId),
}

/// Lipschitz constants of `f` against the reference metric `d` and their
/// product. A collapsed pair is reported as [`CutError::NonInjective`].
pub fn distortion<T: Scalar>(
    f: &impl Metric<T>,
    d: &DistanceMatrix<T>,
) -> Result<Distortion<T>, CutError> {
    if f.point_count() != d.len() {
        return Err(CutError::GroundSetMismatch(f.point_count(), d.len()));
    }
    let mut best: Option<Distortion<T>> = None;
    for (u, v) in d.pairs() {
        let dv = d.get(u, v).clone();
        if !dv.is_positive() {
            return Err(CutError::DegenerateReference(u, v));
        }
        let fv = f.dist(u, v);
        if !fv.is_positive() {
            return Err(CutError::NonInjective(u, v));
        }
        let up = fv.clone() / dv.clone();
        let down = dv / fv;
        match &mut best {
            None => {
                best = Some(Distortion {
                    expansion: up,
                    contraction: down,
                    value: T::zero(),
                    expansion_pair: (u, v),
                    contraction_pair: (u, v),
                })
            }
            Some(b) => {
                if up > b.expansion {
                    b.expansion = up;
                    b.expansion_pair = (u, v);
                }
                if down > b.contraction {
                    b.contraction = down;
                    b.contraction_pair = (u, v);
                }
            }
        }
    }
    let mut out = best.ok_or(CutError::SequenceTooShort)?;
    out.value = out.expansion.clone() * out.contraction.clone();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassOutcome {
    Pass,
    Fail,
    /// The map is not `eps`-efficient on the sequence.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneMass<T> {
    /// `mu^{x1|xk}` mass of cuts monotone on the sequence.
    pub monotone_mass: T,
    pub endpoint_distance: T,
    pub efficiency: T,
    pub outcome: MassOutcome,
}

/// Checks that `eps`-efficiency on `seq` forces at least
/// `(1 - eps) * ||f(x_1) - f(x_k)||` of separating mass onto monotone cuts.
pub fn monotone_mass_check<T: Scalar>(
    mu: &CutMeasure<T>,
    seq: &Sequence,
    eps: &T,
) -> Result<MonotoneMass<T>, CutError> {
    let (x, y) = (seq.first(), seq.last());
    let endpoint_distance = mu.cut_distance(x, y);
    let efficiency = efficiency(mu, seq)?;
    let monotone_mass = mu
        .atoms()
        .iter()
        .filter(|a| a.separates(x, y) && is_monotone(&a.side, seq.vertices()))
        .fold(T::zero(), |acc, a| acc + a.weight.clone());
    let outcome = if !efficiency.approx_le(eps) {
        MassOutcome::NotApplicable
    } else if ((T::one() - eps.clone()) * endpoint_distance.clone()).approx_le(&monotone_mass) {
        MassOutcome::Pass
    } else {
        MassOutcome::Fail
    };
    Ok(MonotoneMass {
        monotone_mass,
        endpoint_distance,
        efficiency,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::convert_metric;
    use crate::graph::{all_pairs_distances, make_k2n};
    use crate::scalar::{q_frac, q_int, Q};
    use fixedbitset::FixedBitSet;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn set(n: usize, members: &[usize]) -> VertexSet {
        let mut s = FixedBitSet::with_capacity(n);
        s.extend(members.iter().copied());
        s
    }

    #[test]
    fn monotone_traces() {
        let seq = [0, 1, 2, 3];
        assert!(is_monotone(&set(4, &[0, 1]), &seq));
        assert!(!is_monotone(&set(4, &[1]), &[0, 1, 2]));
        assert!(is_monotone(&set(4, &[]), &seq));
        assert!(is_monotone(&set(4, &[0, 1, 2, 3]), &seq));
    }

    /// The line metric |f(u) - f(v)| for real values.
    fn line(values: &[i64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(values.len(), |u, v| q_int((values[u] - values[v]).abs()))
    }

    #[test]
    fn geodesic_is_zero_efficient() {
        let d = line(&[0, 1, 2, 3, 4]);
        let seq = Sequence::new(vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(efficiency(&d, &seq).unwrap(), Q::zero());
    }

    #[test]
    fn fold_map_efficiency() {
        // Fold of a 4-edge path: f = min(d(s,v), 4 - d(s,v)) = 0,1,2,1,0.
        let f = line(&[0, 1, 2, 1, 0]);
        let full = Sequence::new(vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(efficiency(&f, &full), Err(CutError::ZeroEndpointDistance(0, 4)));
        // First three edges: values 0,1,2,1, walk 3, endpoint distance 1.
        let prefix = Sequence::new(vec![0, 1, 2, 3]).unwrap();
        let brute: i64 = [0i64, 1, 2, 1].windows(2).map(|w| (w[0] - w[1]).abs()).sum();
        assert_eq!(brute, 3);
        assert_eq!(efficiency(&f, &prefix).unwrap(), q_int(2));
    }

    #[test]
    fn sequence_validation() {
        assert_eq!(Sequence::new(vec![1]), Err(CutError::SequenceTooShort));
        assert_eq!(Sequence::new(vec![1, 1, 2]), Err(CutError::RepeatedConsecutive(1)));
        assert!(Sequence::new(vec![1, 2, 1, 3]).is_ok());
    }

    #[test]
    fn distortion_identity_and_scaling() {
        let g = make_k2n(3).unwrap();
        let d = all_pairs_distances(&g);
        let id = distortion(&d, &d).unwrap();
        assert_eq!(id.value, q_int(1));
        let doubled = d.map(|x| x * q_int(2));
        let dd = distortion(&doubled, &d).unwrap();
        assert_eq!(dd.value, q_int(1));
        assert_eq!(dd.expansion, q_int(2));
        assert_eq!(dd.contraction, q_frac(1, 2));
    }

    #[test]
    fn single_cut_is_not_injective() {
        let g = make_k2n(2).unwrap();
        let d = all_pairs_distances(&g);
        let mut mu = CutMeasure::new(4);
        mu.add_vertices([0, 2], q_int(1)).unwrap();
        let err = distortion(&mu, &d).unwrap_err();
        assert!(matches!(err, CutError::NonInjective(0, 2) | CutError::NonInjective(2, 3)));
    }

    #[test]
    fn double_mode_distortion() {
        let g = make_k2n(2).unwrap();
        let d: DistanceMatrix<f64> = convert_metric(&all_pairs_distances(&g));
        let mut mu = CutMeasure::<f64>::new(4);
        mu.add_vertices([0, 2], 1.0).unwrap();
        mu.add_vertices([0, 3], 1.0).unwrap();
        let dist = distortion(&mu, &d).unwrap();
        assert!(dist.value.approx_eq(&1.0));
    }

    #[test]
    fn monotone_mass_examples() {
        // K_{2,3}: s=0, t=1, middles 2,3,4. Geodesic s - m1 - t.
        let seq = Sequence::new(vec![0, 2, 1]).unwrap();
        let mut mono = CutMeasure::new(5);
        mono.add_vertices([0], q_int(1)).unwrap();
        mono.add_vertices([0, 2, 3], q_frac(1, 2)).unwrap();
        for eps in [q_int(0), q_frac(1, 10), q_frac(1, 2)] {
            let r = monotone_mass_check(&mono, &seq, &eps).unwrap();
            assert_eq!(r.monotone_mass, r.endpoint_distance);
            assert_eq!(r.outcome, MassOutcome::Pass);
            assert_eq!(r.efficiency, Q::zero());
        }
        // A cut with m1 alone on one side is not monotone on s-m1-t.
        let mut bent = mono.clone();
        bent.add_vertices([2], q_int(1)).unwrap();
        let r = monotone_mass_check(&bent, &seq, &q_frac(1, 10)).unwrap();
        assert_eq!(r.outcome, MassOutcome::NotApplicable);
        let r = monotone_mass_check(&bent, &seq, &q_int(2)).unwrap();
        assert_eq!(r.outcome, MassOutcome::Pass);
    }

    fn k23_measure() -> impl Strategy<Value = CutMeasure> {
        prop::collection::vec((1u64..16, 1i64..12, 1i64..5), 1..8).prop_map(|raw| {
            let mut mu = CutMeasure::new(5);
            for (mask, p, q) in raw {
                let side = (0..4).filter(|b| mask >> b & 1 == 1).map(|b| b + 1);
                mu.add_vertices(side, q_frac(p, q)).unwrap();
            }
            mu
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn monotone_under_complement(members in prop::collection::vec(any::<bool>(), 8), seq in prop::collection::vec(0usize..8, 2..10)) {
            let mut side = FixedBitSet::with_capacity(8);
            let mut comp = FixedBitSet::with_capacity(8);
            for (v, &m) in members.iter().enumerate() {
                if m { side.insert(v) } else { comp.insert(v) }
            }
            prop_assert_eq!(is_monotone(&side, &seq), is_monotone(&comp, &seq));
        }

        #[test]
        fn prefix_definition_agrees(members in prop::collection::vec(any::<bool>(), 6), seq in prop::collection::vec(0usize..6, 2..8)) {
            let mut side = FixedBitSet::with_capacity(6);
            for (v, &m) in members.iter().enumerate() {
                if m { side.insert(v) }
            }
            // Some side meets the sequence in exactly a prefix x_1..x_i.
            let trace: Vec<bool> = seq.iter().map(|&v| side.contains(v)).collect();
            let prefix = |want: bool| {
                (1..=trace.len()).any(|i| {
                    trace.iter().enumerate().all(|(j, &b)| (b == want) == (j < i))
                })
            };
            prop_assert_eq!(is_monotone(&side, &seq), prefix(true) || prefix(false));
        }

        #[test]
        fn lemma_holds_on_random_k23(mu in k23_measure(), m in 2usize..5, eps_num in 0i64..10) {
            let seq = Sequence::new(vec![0, m, 1]).unwrap();
            prop_assume!(mu.cut_distance(0, 1) > Q::zero());
            let eps = q_frac(eps_num, 10);
            let r = monotone_mass_check(&mu, &seq, &eps).unwrap();
            prop_assert_ne!(r.outcome, MassOutcome::Fail);
            // With eps at the measured efficiency the hypothesis always holds.
            let tight = monotone_mass_check(&mu, &seq, &r.efficiency).unwrap();
            prop_assert_eq!(tight.outcome, MassOutcome::Pass);
        }

        #[test]
        fn all_monotone_means_efficient(raw in prop::collection::vec((0usize..6, 1i64..9), 1..6)) {
            // Path 0-1-2-3-4-5; prefix cuts {0..=i} are monotone on it.
            let mut mu = CutMeasure::new(6);
            for (i, w) in raw {
                if i < 5 {
                    mu.add_vertices(0..=i, q_int(w)).unwrap();
                }
            }
            prop_assume!(!mu.is_empty());
            let seq = Sequence::new(vec![0, 1, 2, 3, 4, 5]).unwrap();
            prop_assert_eq!(efficiency(&mu, &seq).unwrap(), Q::zero());
        }
    }
}
