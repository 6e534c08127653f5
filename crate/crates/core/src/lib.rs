//! Flow/cut-gap laboratory for recursive series-parallel compositions.

pub mod coarse;
pub mod cuts;
pub mod embed;
pub mod exec;
pub mod graph;
pub mod harness;
pub mod io;
pub mod lp;
pub mod scalar;
pub mod seed;
