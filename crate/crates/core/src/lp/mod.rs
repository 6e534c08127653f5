//! Linear programming kernel and the flow/cut optimisers built on it.

mod c1;
mod flow;
mod simplex;

pub use c1::{c1_lp, c1_lp_with, cut_side, C1Solution, C1Summary, C1_MAX_VERTICES};
pub use flow::{
    all_pairs_commodities, max_concurrent_flow, max_concurrent_flow_with, random_connected_graph,
    random_instance, sparsest_cut, Commodity, FlowInstance, FlowSolution, SparsestCut,
    SPARSEST_MAX_VERTICES,
};
pub use simplex::{
    solve_lp, solve_lp_with, Bounds, Constraint, LinearProgram, LpSolution, Relation, Sense,
    SolverOptions,
};

use serde::{Deserialize, Serialize};

use crate::cuts::bitset_to_hex;
use crate::scalar::format_q;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex stopped after {0} pivots")]
    IterationCap(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("problem needs {required} units, budget is {limit}")]
    Budget { required: u128, limit: u128 },
    #[error("instance has no commodities")]
    NoDemand,
    #[error("no cut separates any demand pair")]
    NoSeparatedDemand,
    #[error("flow {lambda} exceeds sparsest cut {phi}")]
    WeakDuality { lambda: f64, phi: f64 },
}

/// Flow/cut gap of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lambda: f64,
    /// Exact sparsest-cut value as `p/q`.
    pub phi: String,
    pub phi_value: f64,
    /// Side of the sparsest cut containing vertex 0, as a hex bitset.
    pub cut: String,
    pub ratio: f64,
    pub c1_reference: Option<f64>,
    /// `ratio <= c1_reference + 1e-6`, when a reference is given.
    pub within_c1: Option<bool>,
}

impl GapReport {
    pub fn csv_header() -> &'static str {
        "lambda,phi,ratio,c1_reference,within_c1,cut"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:?},{},{:?},{},{},{}",
            self.lambda,
            self.phi,
            self.ratio,
            self.c1_reference.map(|c| format!("{c:?}")).unwrap_or_default(),
            self.within_c1.map(|b| b.to_string()).unwrap_or_default(),
            self.cut
        )
    }
}

/// Solves both sides of the gap. `lambda <= phi` is checked with tolerance
/// `1e-9` and reported as an error when violated.
pub fn gap_report(inst: &FlowInstance, c1_reference: Option<f64>) -> Result<GapReport, LpError> {
    let flow = max_concurrent_flow(inst)?;
    let cut = sparsest_cut(inst)?;
    let phi_value = flow::phi_as_f64(&cut);
    if flow.lambda > phi_value * (1.0 + 1e-9) + 1e-9 {
        return Err(LpError::WeakDuality {
            lambda: flow.lambda,
            phi: phi_value,
        });
    }
    let ratio = phi_value / flow.lambda;
    Ok(GapReport {
        lambda: flow.lambda,
        phi: format_q(&cut.phi),
        phi_value,
        cut: bitset_to_hex(&cut.side),
        ratio,
        c1_reference,
        within_c1: c1_reference.map(|c| ratio <= c + 1e-6),
    })
}
