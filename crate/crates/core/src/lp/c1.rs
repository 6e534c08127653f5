use serde::{Deserialize, Serialize};

use super::simplex::{solve_lp_with, LinearProgram, Relation, Sense, SolverOptions};
use super::LpError;
use crate::cuts::{CutMeasure, VertexSet};
use crate::graph::DistanceMatrix;
use crate::scalar::{Scalar, F64_TOLERANCE};

/// Largest ground set for which every cut gets a variable.
pub const C1_MAX_VERTICES: usize = 20;


#[derive(Clone, Debug, PartialEq)]
pub struct C1Solution {
    /// Optimal `t`: the least distortion of `d` into `L1`.
    pub value: f64,
    /// Optimal measure, scaled so it never contracts: `d <= d_mu <= t d`.
    pub measure: CutMeasure<f64>,
    pub cut_variables: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1Summary {
    pub value: f64,
    pub cut_variables: usize,
    pub support: usize,
    pub iterations: usize,
}

impl C1Solution {
    pub fn summary(&self) -> C1Summary {
        C1Summary {
            value: self.value,
            cut_variables: self.cut_variables,
            support: self.measure.atoms().len(),
            iterations: self.iterations,
        }
    }
}

/// Side of cut `mask`: vertex `j + 1` is in the side when bit `j` is set, so
/// vertex 0 is never in it.
pub fn cut_side(mask: u64, n: usize) -> VertexSet {
    let mut side = VertexSet::with_capacity(n);
    for j in 0..n.saturating_sub(1) {
        if mask >> j & 1 == 1 {
            side.insert(j + 1);
        }
    }
    side
}

fn separates(mask: u64, u: usize, v: usize) -> bool {
    let bit = |w: usize| w > 0 && mask >> (w - 1) & 1 == 1;
    bit(u) != bit(v)
}

pub fn c1_lp<T: Scalar>(d: &DistanceMatrix<T>) -> Result<C1Solution, LpError> {
    c1_lp_with(d, &SolverOptions::default())
}

/// Minimises `t` subject to `d(u,v) <= sum_S y_S |1_S(u) - 1_S(v)| <= t d(u,v)`
/// over all `2^(n-1) - 1` cuts.
pub fn c1_lp_with<T: Scalar>(d: &DistanceMatrix<T>, opts: &SolverOptions) -> Result<C1Solution, LpError> {
    let n = d.len();
    if n > C1_MAX_VERTICES {
        return Err(LpError::Budget {
            required: 1u128 << (n - 1),
            limit: 1u128 << (C1_MAX_VERTICES - 1),
        });
    }
    if n < 2 {
        return Err(LpError::Malformed("c1 needs at least two points".into()));
    }
    let cuts = (1usize << (n - 1)) - 1;
    let t = cuts;
    let mut lp = LinearProgram::new(cuts + 1, Sense::Minimize);
    lp.objective[t] = 1.0;
    for (u, v) in d.pairs() {
        let duv = d.get(u, v).to_f64();
        if duv < 0.0 {
            return Err(LpError::Malformed(format!("negative distance at ({u}, {v})")));
        }
        let row: Vec<(usize, f64)> = (1..=cuts as u64)
            .filter(|&mask| separates(mask, u, v))
            .map(|mask| (mask as usize - 1, 1.0))
            .collect();
        lp.add_constraint(row.clone(), Relation::Ge, duv);
        let mut upper = row;
        upper.push((t, -duv));
        lp.add_constraint(upper, Relation::Le, 0.0);
    }
    let sol = solve_lp_with(&lp, opts)?;
    let mut measure = CutMeasure::new(n);
    for mask in 1..=cuts {
        let w = sol.x[mask - 1];
        // Weights at noise level are dropped from the reported measure.
        if w > F64_TOLERANCE {
            measure
                .add(&cut_side(mask as u64, n), w)
                .expect("cut sides are proper and nonempty");
        }
    }
    Ok(C1Solution {
        value: sol.value,
        measure,
        cut_variables: cuts,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::distortion;
    use crate::graph::{all_pairs_distances, make_k2n, Edge, StGraph};
    use crate::scalar::q_int;

    fn path_graph(n: usize) -> StGraph {
        let edges = (0..n - 1)
            .map(|i| Edge {
                u: i,
                v: i + 1,
                len: q_int(1),
            })
            .collect();
        StGraph::new(n, edges, 0, n - 1).unwrap()
    }

    #[test]
    fn square_is_isometric() {
        let d = all_pairs_distances(&make_k2n(2).unwrap());
        let sol = c1_lp(&d).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-6);
        assert_eq!(sol.cut_variables, 7);
    }

    #[test]
    fn path_is_isometric() {
        let d = all_pairs_distances(&path_graph(4));
        assert!((c1_lp(&d).unwrap().value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn measure_reproduces_value() {
        for n in 2..=5 {
            let d = all_pairs_distances(&make_k2n(n).unwrap()).to_f64();
            let sol = c1_lp(&d).unwrap();
            let dist = distortion(&sol.measure, &d).unwrap();
            assert!((dist.value - sol.value).abs() < 1e-6, "n={n}");
            assert!(dist.contraction <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn k23_in_range() {
        let v = c1_lp(&all_pairs_distances(&make_k2n(3).unwrap())).unwrap().value;
        assert!((1.0..=1.5).contains(&v));
    }

    #[test]
    fn canonical_cut_sides() {
        let side = cut_side(0b101, 4);
        assert_eq!(side.ones().collect::<Vec<_>>(), vec![1, 3]);
        assert!(separates(0b101, 0, 1) && !separates(0b101, 1, 3));
    }

    #[test]
    fn too_many_vertices() {
        let d = DistanceMatrix::from_fn(21, |u, v| if u == v { 0.0 } else { 1.0 });
        assert!(matches!(c1_lp(&d), Err(LpError::Budget { .. })));
    }

    #[test]
    fn k2n_regression_values() {
        // Frozen from the first solve; see the ledger for the level-2 value.
        let expected = [1.0, 4.0 / 3.0, 4.0 / 3.0, 1.4, 1.4];
        for (n, want) in (2..=6).zip(expected) {
            let v = c1_lp(&all_pairs_distances(&make_k2n(n).unwrap())).unwrap().value;
            assert!((v - want).abs() < 1e-6, "n={n}: {v}");
        }
    }
}
