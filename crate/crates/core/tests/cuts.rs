use cutgap::cuts::{
    bitset_from_hex, bitset_to_hex, distortion, efficiency, is_monotone, monotone_mass_check, CutError,
    CutMeasure, MassOutcome, Metric, Sequence, VertexSet,
};
use cutgap::graph::{all_pairs_distances, make_k2n};
use cutgap::scalar::{q_frac, q_int, Q};

fn set(n: usize, members: &[usize]) -> VertexSet {
    let mut s = VertexSet::with_capacity(n);
    for &v in members {
        s.insert(v);
    }
    s
}

/// Uniform measure on the balanced monotone cuts of `K_{2,4}`.
fn balanced_k24() -> CutMeasure<Q> {
    let mut mu = CutMeasure::new(6);
    for a in 2..6 {
        for b in a + 1..6 {
            mu.add_vertices([0, a, b], q_frac(1, 6)).unwrap();
        }
    }
    mu
}

#[test]
fn coordinates_realise_cut_distances() {
    let mu = balanced_k24();
    let emb = mu.to_coordinates();
    for u in 0..6 {
        for v in 0..6 {
            assert_eq!(emb.l1_distance(u, v), mu.cut_distance(u, v));
        }
    }
}

#[test]
fn balanced_measure_is_tight() {
    let mu = balanced_k24();
    let d = all_pairs_distances(&make_k2n(4).unwrap());
    let dist = distortion(&mu, &d).unwrap();
    assert_eq!(dist.value, q_frac(3, 2));
}

#[test]
fn complements_merge() {
    let mut mu = CutMeasure::new(4);
    mu.add(&set(4, &[0, 2]), q_int(1)).unwrap();
    mu.add(&set(4, &[1, 3]), q_int(2)).unwrap();
    assert_eq!(mu.atoms().len(), 1);
    assert_eq!(mu.cut_distance(0, 1), q_int(3));
    assert_eq!(mu.add(&set(4, &[0, 1, 2, 3]), q_int(1)), Err(CutError::TrivialSide));
}

#[test]
fn efficiency_and_monotone_mass() {
    let mu = balanced_k24();
    let geo = Sequence::new(vec![0, 2, 1]).unwrap();
    assert_eq!(efficiency(&mu, &geo).unwrap(), q_int(0));
    let check = monotone_mass_check(&mu, &geo, &q_int(0)).unwrap();
    assert_eq!(check.outcome, MassOutcome::Pass);
    assert_eq!(check.monotone_mass, check.endpoint_distance);
    assert!(is_monotone(&set(6, &[0, 2]), &[0, 2, 1]));
    assert!(!is_monotone(&set(6, &[0, 1]), &[0, 2, 1]));
}

#[test]
fn hex_bitsets_round_trip() {
    let s = set(13, &[0, 4, 12]);
    assert_eq!(bitset_from_hex(&bitset_to_hex(&s), 13).unwrap(), s);
}

#[test]
fn double_mode_matches_rational() {
    let mu = balanced_k24();
    let d = all_pairs_distances(&make_k2n(4).unwrap());
    let exact = distortion(&mu, &d).unwrap().value;
    let approx = distortion(&mu.to_f64(), &d.to_f64()).unwrap().value;
    assert!((approx - 1.5).abs() < 1e-12 && exact == q_frac(3, 2));
    assert_eq!(mu.to_f64().point_count(), 6);
}
