//! Dense two-phase tableau simplex.
//!
//! Pricing is Dantzig's largest reduced cost. After a run of degenerate
//! pivots the phase switches to Bland's rule for good, which rules out
//! cycling while keeping the common case fast. All ties are broken by the
//! smallest index, so a solve is fully deterministic.
//!
//! Highly degenerate programs (the cut LPs are) stall even with these rules,
//! so pivoting runs on a slightly relaxed right-hand side. The original one
//! is carried as an extra tableau column; at the end the final basis is
//! evaluated on it and any small infeasibility is repaired by dual simplex
//! pivots, so reported solutions satisfy the unperturbed constraints.

use serde::{Deserialize, Serialize};

use super::LpError;

/// Sparse row, relation and right-hand side.
type Row = (Vec<(usize, f64)>, Relation, f64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Sparse row: `(variable, coefficient)`. Repeated variables add up.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Variable bounds; `None` means unbounded in that direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            lower: Some(0.0),
            upper: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// `vars` nonnegative variables with zero objective.
    pub fn new(vars: usize, sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: vec![0.0; vars],
            constraints: Vec::new(),
            bounds: vec![Bounds::default(); vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.vars();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Malformed(format!("objective coefficient {j} is not finite")));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("constraint {i} has a non-finite right-hand side")));
            }
            for &(j, a) in &c.coeffs {
                if j >= n {
                    return Err(LpError::Malformed(format!("constraint {i} names variable {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!("constraint {i} has a non-finite coefficient")));
                }
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let bad = b.lower.is_some_and(|l| !l.is_finite())
                || b.upper.is_some_and(|u| !u.is_finite())
                || matches!((b.lower, b.upper), (Some(l), Some(u)) if l > u);
            if bad {
                return Err(LpError::Malformed(format!("variable {j} has invalid bounds")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest tableau (rows times columns) the solver will allocate.
    pub max_entries: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_streak: usize,
    /// Relative size of the right-hand-side relaxation used while pivoting.
    pub perturbation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-9,
            max_iterations: 200_000,
            max_entries: 1 << 25,
            degenerate_streak: 50,
            perturbation: 1e-6,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SolverOptions::default())
}

/// How an original variable is recovered from nonnegative columns:
/// `x = offset + sign * col` or `x = col_plus - col_minus`.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    Shifted { col: usize, offset: f64, sign: f64 },
    Free { plus: usize, minus: usize },
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.vars();

    // Map variables onto nonnegative structural columns.
    let mut maps = Vec::with_capacity(n);
    let mut cols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        match (b.lower, b.upper) {
            (Some(l), u) => {
                maps.push(VarMap::Shifted { col: cols, offset: l, sign: 1.0 });
                if let Some(u) = u {
                    extra_rows.push((cols, u - l));
                }
                cols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Shifted { col: cols, offset: u, sign: -1.0 });
                cols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Free { plus: cols, minus: cols + 1 });
                cols += 2;
            }
        }
    }
    let structural = cols;

    // Rows in structural columns, right-hand side made nonnegative.
    let mut rows: Vec<Row> = Vec::new();
    for c in &lp.constraints {
        let mut row = Vec::with_capacity(c.coeffs.len());
        let mut rhs = c.rhs;
        for &(j, a) in &c.coeffs {
            match maps[j] {
                VarMap::Shifted { col, offset, sign } => {
                    rhs -= a * offset;
                    row.push((col, a * sign));
                }
                VarMap::Free { plus, minus } => {
                    row.push((plus, a));
                    row.push((minus, -a));
                }
            }
        }
        rows.push((row, c.relation, rhs));
    }
    for &(col, cap) in &extra_rows {
        rows.push((vec![(col, 1.0)], Relation::Le, cap));
    }
    // Nonnegative right-hand sides; `>= 0` rows become `<= 0` so that every
    // `>=` row can be relaxed without changing sign.
    for (row, rel, rhs) in &mut rows {
        if *rhs < 0.0 || (*rhs == 0.0 && *rel == Relation::Ge) {
            *rhs = -*rhs;
            for (_, a) in row.iter_mut() {
                *a = -*a;
            }
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = structural + slacks + artificials;
    // Two right-hand sides: the perturbed one drives pivoting, the original
    // one is carried along for the final evaluation.
    let width = cols + 2;
    let required = m.saturating_mul(width);
    if required > opts.max_entries {
        return Err(LpError::Budget {
            required: required as u128,
            limit: opts.max_entries as u128,
        });
    }

    let mut t = Tableau {
        m,
        cols,
        width,
        a: vec![0.0; m * width],
        obj: vec![0.0; width],
        basis: vec![0; m],
        blocked: vec![false; cols],
        tol: opts.tolerance,
        iterations: 0,
    };
    let mut next_slack = structural;
    let mut next_art = structural + slacks;
    let first_art = next_art;
    for (i, (row, rel, rhs)) in rows.iter().enumerate() {
        for &(j, a) in row {
            t.a[i * width + j] += a;
        }
        // Deterministic, row-dependent and strictly relaxing.
        let golden = 0.618_033_988_749_895 * (i + 1) as f64;
        let p = opts.perturbation * (1.0 + rhs.abs()) * (0.5 + 0.5 * golden.fract());
        let relaxed = match rel {
            Relation::Le => rhs + p,
            Relation::Ge if *rhs > 2.0 * p => rhs - p,
            _ => *rhs,
        };
        t.a[i * width + cols] = relaxed;
        t.a[i * width + cols + 1] = *rhs;
        match rel {
            Relation::Le => {
                t.a[i * width + next_slack] = 1.0;
                t.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.a[i * width + next_slack] = -1.0;
                next_slack += 1;
                t.a[i * width + next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.a[i * width + next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    // Phase 1: maximise minus the sum of artificials.
    if artificials > 0 {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        t.set_objective(&cost);
        t.run(opts)?;
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).sum::<f64>();
        if -t.obj[cols] > opts.tolerance * scale {
            return Err(LpError::Infeasible);
        }
        t.drive_out_artificials(first_art);
        for b in t.blocked.iter_mut().skip(first_art) {
            *b = true;
        }
    }

    // Phase 2 on the true objective (always maximised internally).
    let flip = if lp.sense == Sense::Minimize { -1.0 } else { 1.0 };
    let mut cost = vec![0.0; cols];
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shifted { col, sign, .. } => cost[col] += flip * c * sign,
            VarMap::Free { plus, minus } => {
                cost[plus] += flip * c;
                cost[minus] -= flip * c;
            }
        }
    }
    t.set_objective(&cost);
    t.run(opts)?;
    // The basis is optimal for the relaxed data and dual feasible for the
    // original; restore primal feasibility there.
    t.restore(opts)?;

    let mut col_values = vec![0.0; structural];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < structural {
            col_values[b] = t.a[i * width + cols + 1].max(0.0);
        }
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, offset, sign } => offset + sign * col_values[col],
            VarMap::Free { plus, minus } => col_values[plus] - col_values[minus],
        })
        .collect();
    let value = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        value,
        x,
        iterations: t.iterations,
    })
}

struct Tableau {
    m: usize,
    cols: usize,
    width: usize,
    a: Vec<f64>,
    /// Reduced costs `c_B B^-1 A - c`, then the objective value under each
    /// right-hand side.
    obj: Vec<f64>,
    basis: Vec<usize>,
    blocked: Vec<bool>,
    tol: f64,
    iterations: usize,
}

impl Tableau {
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        self.obj = cost.iter().map(|c| -c).chain([0.0, 0.0]).collect();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * w..(i + 1) * w];
                for (o, &x) in self.obj.iter_mut().zip(row) {
                    *o += cb * x;
                }
            }
        }
    }

    fn run(&mut self, opts: &SolverOptions) -> Result<(), LpError> {
        let w = self.width;
        let mut bland = false;
        let mut streak = 0;
        loop {
            let entering = if bland {
                (0..self.cols).find(|&j| !self.blocked[j] && self.obj[j] < -self.tol)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.cols {
                    if !self.blocked[j] && self.obj[j] < -self.tol && best.is_none_or(|(_, v)| self.obj[j] < v) {
                        best = Some((j, self.obj[j]));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.a[i * w + col];
                if a > self.tol {
                    let ratio = self.a[i * w + self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - self.tol
                                || (ratio <= best + self.tol && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if self.iterations >= opts.max_iterations {
                return Err(LpError::IterationCap(opts.max_iterations));
            }
            if ratio <= self.tol {
                streak += 1;
                if streak >= opts.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        self.iterations += 1;
        let p = self.a[row * w + col];
        let pivot_row: Vec<f64> = self.a[row * w..(row + 1) * w].iter().map(|x| x / p).collect();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.a[i * w + col];
            if f != 0.0 {
                let r = &mut self.a[i * w..(i + 1) * w];
                for (x, &y) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                r[col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (x, &y) in self.obj.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
            self.obj[col] = 0.0;
        }
        self.a[row * w..(row + 1) * w].copy_from_slice(&pivot_row);
        self.basis[row] = col;
    }

    /// Dual simplex on the original right-hand side.
    fn restore(&mut self, opts: &SolverOptions) -> Result<(), LpError> {
        let w = self.width;
        let orig = self.cols + 1;
        let scale = 1.0 + (0..self.m).map(|i| self.a[i * w + orig].abs()).fold(0.0, f64::max);
        loop {
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let b = self.a[i * w + orig];
                if b < -self.tol * scale && leave.is_none_or(|(_, v)| b < v) {
                    leave = Some((i, b));
                }
            }
            let Some((row, _)) = leave else {
                return Ok(());
            };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                let a = self.a[row * w + j];
                if !self.blocked[j] && a < -self.tol {
                    let ratio = self.obj[j].max(0.0) / -a;
                    if enter.is_none_or(|(_, r)| ratio < r - self.tol) {
                        enter = Some((j, ratio));
                    }
                }
            }
            let Some((col, _)) = enter else {
                return Err(LpError::Infeasible);
            };
            if self.iterations >= opts.max_iterations {
                return Err(LpError::IterationCap(opts.max_iterations));
            }
            self.pivot(row, col);
        }
    }

    /// Pivots basic artificials (at level zero) out of the basis; rows with
    /// no usable column are redundant and dropped.
    fn drive_out_artificials(&mut self, first_art: usize) {
        let w = self.width;
        let mut i = 0;
        while i < self.m {
            if self.basis[i] >= first_art {
                let col = (0..first_art)
                    .filter(|&j| !self.blocked[j])
                    .max_by(|&x, &y| {
                        let (ax, ay) = (self.a[i * w + x].abs(), self.a[i * w + y].abs());
                        ax.total_cmp(&ay).then(y.cmp(&x))
                    })
                    .filter(|&j| self.a[i * w + j].abs() > self.tol);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.a.drain(i * w..(i + 1) * w);
                        self.basis.remove(i);
                        self.m -= 1;
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
