use cutgap::embed::{
    crossings, distortion_bound, embedding_distortion, enumerate_separation,
    sample_recursive_cut, separation_table, walk_separation, RecursiveFamily,
};
use cutgap::graph::st_geodesics;
use cutgap::scalar::{q_frac, q_int};
use cutgap::seed::{derive_seed, sample_seed, vertex_seed};
use cutgap::graph::VertexAddress;

#[test]
fn closed_form_matches_enumeration() {
    for (m, k) in [(2, 2), (4, 1), (3, 2)] {
        let family = RecursiveFamily::new(m, k).unwrap();
        let table = separation_table(&family).unwrap();
        let brute = enumerate_separation(&family, 1 << 22).unwrap();
        assert_eq!(table.probabilities(), &brute, "m={m} k={k}");
    }
}

#[test]
fn closed_form_matches_walk_recursion_on_deeper_graphs() {
    let family = RecursiveFamily::new(2, 3).unwrap();
    let table = separation_table(&family).unwrap();
    let n = family.graph().vertex_count();
    for u in (0..n).step_by(3) {
        for v in (u + 1..n).step_by(5) {
            assert_eq!(&walk_separation(&family, u, v).unwrap(), table.probability(u, v));
        }
    }
}

#[test]
fn distortion_within_bound() {
    for (m, k, want) in [(2, 1, q_int(1)), (2, 2, q_frac(4, 3)), (4, 2, q_frac(3, 2))] {
        let family = RecursiveFamily::new(m, k).unwrap();
        let dist = embedding_distortion(&separation_table(&family).unwrap(), &family).unwrap();
        assert_eq!(dist.value, want);
        assert!(dist.value <= distortion_bound(m));
    }
}

#[test]
fn samples_cross_each_geodesic_exactly_once() {
    let family = RecursiveFamily::new(2, 3).unwrap();
    let paths = st_geodesics(family.graph(), 1000, 0).paths;
    for i in 0..50 {
        let sample = sample_recursive_cut(&family, sample_seed(3, i));
        for p in &paths {
            assert_eq!(crossings(&sample.labels, p), 1);
        }
    }
}

#[test]
fn seeds_are_stable_and_distinct() {
    let a = vertex_seed(0, &VertexAddress::S);
    let b = vertex_seed(0, &VertexAddress::T);
    assert_ne!(a, b);
    assert_eq!(a, vertex_seed(0, &VertexAddress::S));
    assert_eq!(derive_seed(7, &[3, 0]), sample_seed(7, 0));
}

#[cfg(feature = "parallel")]
#[test]
fn thread_count_does_not_change_results() {
    let family = RecursiveFamily::new(2, 2).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| (sample_recursive_cut(&family, 7), cutgap::embed::monte_carlo(&family, 500, 7)));
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel = wide.install(|| (sample_recursive_cut(&family, 7), cutgap::embed::monte_carlo(&family, 500, 7)));
    assert_eq!(serial, parallel);
}
