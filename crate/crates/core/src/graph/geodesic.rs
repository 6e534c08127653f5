use num_bigint::{BigUint, RandBigInt};
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metric::single_source;
use super::{StGraph, VertexId};

/// Exhaustive enumeration up to this many geodesics; above it we sample.
pub const DEFAULT_GEODESIC_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicFamily {
    /// Vertex sequences from s to t.
    pub paths: Vec<Vec<VertexId>>,
    /// Number of s-t geodesics in the graph.
    pub total: BigUint,
    /// False when `paths` is a uniform sample (with replacement).
    pub exhaustive: bool,
}

/// Tight successor lists of the s-t geodesic DAG and path counts to t.
fn geodesic_dag(graph: &StGraph) -> (Vec<Vec<VertexId>>, Vec<BigUint>) {
    let from_s = single_source(graph, graph.s());
    let to_t = single_source(graph, graph.t());
    let total = from_s[graph.t()].clone();
    let n = graph.vertex_count();
    let on_geodesic: Vec<bool> = (0..n).map(|v| &from_s[v] + &to_t[v] == total).collect();
    let mut succ = vec![Vec::new(); n];
    for (x, list) in succ.iter_mut().enumerate() {
        if !on_geodesic[x] {
            continue;
        }
        let mut next: Vec<VertexId> = graph
            .neighbors(x)
            .iter()
            .filter(|&&(y, e)| on_geodesic[y] && &from_s[x] + &graph.edges()[e].len == from_s[y])
            .map(|&(y, _)| y)
            .collect();
        next.sort_unstable();
        *list = next;
    }
    let mut order: Vec<VertexId> = (0..n).filter(|&v| on_geodesic[v]).collect();
    order.sort_by(|a, b| from_s[*b].cmp(&from_s[*a]));
    let mut count = vec![BigUint::zero(); n];
    count[graph.t()] = BigUint::from(1u32);
    for &x in &order {
        if x == graph.t() {
            continue;
        }
        let c: BigUint = succ[x].iter().map(|&y| count[y].clone()).sum();
        count[x] = c;
    }
    (succ, count)
}

/// All s-t shortest paths when there are at most `cap`, otherwise `cap`
/// independent uniform samples drawn with a ChaCha8 stream seeded by `seed`.
pub fn st_geodesics(graph: &StGraph, cap: usize, seed: u64) -> GeodesicFamily {
    assert!(cap >= 1, "geodesic cap must be positive");
    let (succ, count) = geodesic_dag(graph);
    let total = count[graph.s()].clone();
    if total <= BigUint::from(cap) {
        let mut paths = Vec::with_capacity(total.to_usize().unwrap_or(0));
        let mut stack = vec![graph.s()];
        enumerate(graph.t(), &succ, &mut stack, &mut paths);
        return GeodesicFamily {
            paths,
            total,
            exhaustive: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = (0..cap)
        .map(|_| {
            let mut r = rng.gen_biguint_below(&total);
            let mut x = graph.s();
            let mut path = vec![x];
            while x != graph.t() {
                for &y in &succ[x] {
                    if r < count[y] {
                        x = y;
                        break;
                    }
                    r -= &count[y];
                }
                path.push(x);
            }
            path
        })
        .collect();
    GeodesicFamily {
        paths,
        total,
        exhaustive: false,
    }
}

fn enumerate(
    t: VertexId,
    succ: &[Vec<VertexId>],
    stack: &mut Vec<VertexId>,
    out: &mut Vec<Vec<VertexId>>,
) {
    let x = *stack.last().expect("non-empty");
    if x == t {
        out.push(stack.clone());
        return;
    }
    for &y in &succ[x] {
        stack.push(y);
        enumerate(t, succ, stack, out);
        stack.pop();
    }
}
