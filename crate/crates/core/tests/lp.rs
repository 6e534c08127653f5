//! LP kernel against an independent Big-M tableau, plus flow/cut and c1
//! properties on small graphs.

use cutgap::graph::{all_pairs_distances, make_k2n, power};
use cutgap::lp::{
    all_pairs_commodities, c1_lp, gap_report, max_concurrent_flow, random_connected_graph, random_instance,
    solve_lp, sparsest_cut, Commodity, FlowInstance, LinearProgram, LpError, Relation, Sense,
};
use cutgap::scalar::{q_int, q_to_f64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type DenseRow = (Vec<f64>, Relation, f64);

/// Textbook Big-M primal simplex with Bland's rule. Maximises `c x` over
/// `x >= 0` and the given rows. Written separately from the crate kernel:
/// one phase, penalty costs, no perturbation.
fn big_m(c: &[f64], rows: &[DenseRow]) -> Option<f64> {
    const M: f64 = 1e6;
    let n = c.len();
    let m = rows.len();
    let mut norm: Vec<DenseRow> = rows
        .iter()
        .map(|(a, r, b)| {
            if *b < 0.0 {
                let flip = match r {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (a.iter().map(|x| -x).collect(), flip, -b)
            } else {
                (a.clone(), *r, *b)
            }
        })
        .collect();
    let slacks = norm.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = norm.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + slacks + artificials;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(c);
    let mut basis = vec![0; m];
    let (mut s, mut a) = (n, n + slacks);
    for (i, (row, rel, b)) in norm.iter_mut().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][cols] = *b;
        match rel {
            Relation::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                t[i][s] = -1.0;
                t[i][a] = 1.0;
                cost[a] = -M;
                basis[i] = a;
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                t[i][a] = 1.0;
                cost[a] = -M;
                basis[i] = a;
                a += 1;
            }
        }
    }
    for _ in 0..100_000 {
        let profit = |j: usize, t: &Vec<Vec<f64>>, basis: &Vec<usize>| {
            cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>()
        };
        let Some(enter) = (0..cols).find(|&j| profit(j, &t, &basis) > 1e-9) else {
            if (0..m).any(|i| basis[i] >= n + slacks && t[i][cols] > 1e-7) {
                return None;
            }
            return Some((0..m).filter(|&i| basis[i] < n).map(|i| c[basis[i]] * t[i][cols]).sum());
        };
        let leave = (0..m)
            .filter(|&i| t[i][enter] > 1e-12)
            .min_by(|&x, &y| {
                let (rx, ry) = (t[x][cols] / t[x][enter], t[y][cols] / t[y][enter]);
                rx.partial_cmp(&ry).unwrap().then(basis[x].cmp(&basis[y]))
            })?;
        let p = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave && row[enter] != 0.0 {
                let f = row[enter];
                for (v, q) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * q;
                }
            }
        }
        basis[leave] = enter;
    }
    None
}

fn random_lp(seed: u64, vars: usize, rows: usize) -> (Vec<f64>, Vec<DenseRow>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..vars).map(|_| rng.gen_range(0.0..2.0)).collect();
    let c: Vec<f64> = (0..vars).map(|_| rng.gen_range(-1.0..3.0)).collect();
    let mut out = Vec::new();
    // Keeps the feasible region bounded.
    out.push((vec![1.0; vars], Relation::Le, x0.iter().sum::<f64>() + 5.0));
    for r in 0..rows {
        let a: Vec<f64> = (0..vars)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(-1.0..2.0) } else { 0.0 })
            .collect();
        let ax: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
        let rel = match r % 5 {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = match rel {
            Relation::Eq => ax,
            Relation::Ge => ax - rng.gen_range(0.0..1.0),
            Relation::Le => ax + rng.gen_range(0.0..1.0),
        };
        out.push((a, rel, rhs));
    }
    (c, out)
}

fn to_program(c: &[f64], rows: &[DenseRow]) -> LinearProgram {
    let mut lp = LinearProgram::new(c.len(), Sense::Maximize);
    lp.objective = c.to_vec();
    for (a, rel, b) in rows {
        let coeffs = a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
        lp.add_constraint(coeffs, *rel, *b);
    }
    lp
}

#[test]
fn random_twenty_variable_lps_match_big_m() {
    for seed in 0..12 {
        let (c, rows) = random_lp(seed, 20, 14);
        let oracle = big_m(&c, &rows).expect("constructed feasible and bounded");
        let sol = solve_lp(&to_program(&c, &rows)).unwrap();
        assert!(
            (sol.value - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
            "seed {seed}: kernel {} oracle {oracle}",
            sol.value
        );
        for (a, rel, b) in &rows {
            let ax: f64 = a.iter().zip(&sol.x).map(|(p, q)| p * q).sum();
            let ok = match rel {
                Relation::Le => ax <= b + 1e-7,
                Relation::Ge => ax >= b - 1e-7,
                Relation::Eq => (ax - b).abs() <= 1e-7,
            };
            assert!(ok, "seed {seed}: row violated by {}", ax - b);
        }
    }
}

#[test]
fn trivial_programs() {
    let mut lp = LinearProgram::new(1, Sense::Maximize);
    lp.objective = vec![1.0];
    lp.add_constraint(vec![(0, 1.0)], Relation::Le, 3.0);
    assert!((solve_lp(&lp).unwrap().value - 3.0).abs() < 1e-9);

    let mut lp = LinearProgram::new(2, Sense::Maximize);
    lp.objective = vec![1.0, 1.0];
    lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
    assert!((solve_lp(&lp).unwrap().value - 1.0).abs() < 1e-9);

    let mut lp = LinearProgram::new(1, Sense::Maximize);
    lp.objective = vec![1.0];
    lp.add_constraint(vec![(0, 1.0)], Relation::Ge, 2.0);
    assert_eq!(solve_lp(&lp), Err(LpError::Unbounded));
}

#[test]
fn single_commodity_flow_equals_cut() {
    for seed in 0..20u64 {
        let n = 3 + (seed as usize % 6);
        let g = random_connected_graph(n, n, seed);
        let inst = random_instance(g, 1, 5, 3, 1000 + seed).unwrap();
        let flow = max_concurrent_flow(&inst).unwrap();
        let cut = sparsest_cut(&inst).unwrap();
        assert!((flow.lambda - q_to_f64(&cut.phi)).abs() < 1e-6, "seed {seed}");
    }
}

#[test]
fn square_flow_and_cut() {
    let g = make_k2n(2).unwrap();
    let (s, t) = (g.s(), g.t());
    let inst = FlowInstance::unit_capacities(
        g,
        vec![Commodity {
            source: s,
            sink: t,
            demand: q_int(1),
        }],
    )
    .unwrap();
    assert!((max_concurrent_flow(&inst).unwrap().lambda - 2.0).abs() < 1e-9);
    let cut = sparsest_cut(&inst).unwrap();
    assert_eq!(cut.phi, q_int(2));
    assert_eq!(cut.side.ones().collect::<Vec<_>>(), vec![s]);
}

#[test]
fn scaling_laws() {
    let g = random_connected_graph(6, 4, 3);
    let inst = random_instance(g, 3, 4, 4, 8).unwrap();
    let base = max_concurrent_flow(&inst).unwrap().lambda;
    let scaled = inst.scale_capacities(&q_int(3));
    assert!((max_concurrent_flow(&scaled).unwrap().lambda - 3.0 * base).abs() < 1e-6);
    let doubled = inst.scale_demands(&q_int(2));
    assert_eq!(sparsest_cut(&doubled).unwrap().phi * q_int(2), sparsest_cut(&inst).unwrap().phi);
}

#[test]
fn c1_of_k2n_nondecreasing_and_bounded() {
    let values: Vec<f64> = (2..=6)
        .map(|n| c1_lp(&all_pairs_distances(&make_k2n(n).unwrap())).unwrap().value)
        .collect();
    assert!((values[0] - 1.0).abs() < 1e-6);
    for w in values.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{values:?}");
    }
    assert!(values.iter().all(|&v| v <= 1.5 + 1e-6));
}

#[test]
fn multicommodity_gap_within_c1() {
    let g = power(&make_k2n(2).unwrap(), 2).unwrap();
    let c1 = c1_lp(&all_pairs_distances(&g)).unwrap().value;
    for seed in 0..4 {
        let inst = random_instance(g.clone(), 5, 4, 4, 77 + seed).unwrap();
        let r = gap_report(&inst, Some(c1)).unwrap();
        assert!(r.lambda <= r.phi_value + 1e-9);
        assert_eq!(r.within_c1, Some(true), "seed {seed}: ratio {}", r.ratio);
    }
}

#[test]
fn all_pairs_gap_on_k24() {
    let g = make_k2n(4).unwrap();
    let terminals: Vec<usize> = (0..g.vertex_count()).collect();
    let inst = FlowInstance::unit_capacities(g, all_pairs_commodities(&terminals)).unwrap();
    let r = gap_report(&inst, None).unwrap();
    assert!(r.ratio > 1.0 && r.ratio <= 1.5 + 1e-9);
}
