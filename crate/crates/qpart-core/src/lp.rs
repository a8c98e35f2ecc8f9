//! Exact linear programming over the rationals.
//!
//! A dense-tableau two-phase simplex with Bland's anti-cycling rule. Every
//! pivot is carried out in arbitrary-precision rational arithmetic, so
//! reported optima are exact and "primal value equals dual value" can be
//! asserted with `==` rather than a tolerance. The problems this crate
//! generates are small (tens of rows and columns), which is exactly the
//! regime where a dense exact tableau is the simplest correct tool; there is
//! deliberately no floating-point fast path and no sparse representation.
//!
//! Variables carry lower bounds (default 0) and are otherwise free upward;
//! general constraints take relations `<=`, `==`, `>=`. Equality rows are
//! expanded into opposing inequalities before the solve.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::Rat;

/// Optimization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// Maximize the objective.
    Maximize,
    /// Minimize the objective.
    Minimize,
}

/// Relation of a linear constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Row value at most the right-hand side.
    Le,
    /// Row value equal to the right-hand side.
    Eq,
    /// Row value at least the right-hand side.
    Ge,
}

/// One linear constraint: `coeffs . x  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    /// Dense coefficient vector, one entry per variable.
    pub coeffs: Vec<Rat>,
    /// Constraint relation.
    pub relation: Relation,
    /// Right-hand side.
    pub rhs: Rat,
}

/// A linear program over `n_vars` variables with per-variable lower bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    /// Number of decision variables.
    pub n_vars: usize,
    /// Optimization direction.
    pub sense: Sense,
    /// Dense objective vector.
    pub objective: Vec<Rat>,
    /// Constraint rows.
    pub constraints: Vec<Constraint>,
    /// Per-variable lower bounds; variables are unbounded above.
    pub lower_bounds: Vec<Rat>,
}

/// Terminal states other than a finite optimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpError {
    /// No point satisfies the constraints.
    Infeasible,
    /// The objective improves without bound over the feasible region.
    Unbounded,
    /// Structurally broken input (wrong vector length).
    Malformed {
        /// What had the wrong shape.
        what: &'static str,
    },
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "infeasible"),
            LpError::Unbounded => write!(f, "unbounded"),
            LpError::Malformed { what } => write!(f, "malformed program: {what}"),
        }
    }
}

/// An optimal solution: the exact objective value and one optimal point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Objective value at `point`, recomputed from the original objective.
    pub value: Rat,
    /// Optimal assignment of the decision variables.
    pub point: Vec<Rat>,
}

impl LinearProgram {
    /// New program with all lower bounds zero and no constraints yet.
    pub fn new(sense: Sense, objective: Vec<Rat>) -> Self {
        let n_vars = objective.len();
        LinearProgram {
            n_vars,
            sense,
            objective,
            constraints: Vec::new(),
            lower_bounds: vec![Rat::zero(); n_vars],
        }
    }

    /// Adds one constraint row.
    pub fn push(&mut self, coeffs: Vec<Rat>, relation: Relation, rhs: Rat) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Solves the program exactly.
    pub fn solve(&self) -> Result<Solution, LpError> {
        if self.objective.len() != self.n_vars {
            return Err(LpError::Malformed { what: "objective length" });
        }
        if self.lower_bounds.len() != self.n_vars {
            return Err(LpError::Malformed { what: "lower_bounds length" });
        }
        for c in &self.constraints {
            if c.coeffs.len() != self.n_vars {
                return Err(LpError::Malformed { what: "constraint length" });
            }
        }

        // Shift out the lower bounds (x = y + lb, y >= 0) and normalize the
        // sense to minimization; both are undone when extracting the result.
        let minimize: Vec<Rat> = match self.sense {
            Sense::Minimize => self.objective.clone(),
            Sense::Maximize => self.objective.iter().map(|c| -c).collect(),
        };

        // Expand to <= rows only. Equality rows become opposing inequalities.
        let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for c in &self.constraints {
            let shift: Rat = c
                .coeffs
                .iter()
                .zip(&self.lower_bounds)
                .map(|(a, lb)| a * lb)
                .sum();
            let rhs = &c.rhs - &shift;
            match c.relation {
                Relation::Le => rows.push((c.coeffs.clone(), rhs)),
                Relation::Ge => {
                    rows.push((c.coeffs.iter().map(|a| -a).collect(), -rhs));
                }
                Relation::Eq => {
                    rows.push((c.coeffs.clone(), rhs.clone()));
                    rows.push((c.coeffs.iter().map(|a| -a).collect(), -rhs));
                }
            }
        }

        let y = simplex_min(self.n_vars, &minimize, &rows)?;
        let point: Vec<Rat> = y.iter().zip(&self.lower_bounds).map(|(yi, lb)| yi + lb).collect();
        let value: Rat = self.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        Ok(Solution { value, point })
    }
}

/// Minimizes `cost . y` subject to `row . y <= rhs` for every row and
/// `y >= 0`, returning an optimal `y`.
fn simplex_min(n: usize, cost: &[Rat], rows: &[(Vec<Rat>, Rat)]) -> Result<Vec<Rat>, LpError> {
    let m = rows.len();
    if m == 0 {
        // Without constraints the minimum sits at the origin unless some
        // coefficient rewards growing a variable forever.
        if cost.iter().any(|c| c.is_negative()) {
            return Err(LpError::Unbounded);
        }
        return Ok(vec![Rat::zero(); n]);
    }

    // Column layout: structural 0..n, slacks n..n+m, artificials after that,
    // and the right-hand side last. Rows with a negative rhs are negated
    // (flipping their slack sign), then given an artificial basis column.
    let mut artificial_rows: Vec<usize> = Vec::new();
    for (i, (_, rhs)) in rows.iter().enumerate() {
        if rhs.is_negative() {
            artificial_rows.push(i);
        }
    }
    let n_art = artificial_rows.len();
    let width = n + m + n_art + 1;
    let rhs_col = width - 1;

    let mut t: Vec<Vec<Rat>> = vec![vec![Rat::zero(); width]; m];
    let mut basis: Vec<usize> = vec![0; m];
    let mut next_art = n + m;
    for (i, (coeffs, rhs)) in rows.iter().enumerate() {
        let negate = rhs.is_negative();
        for (j, a) in coeffs.iter().enumerate() {
            t[i][j] = if negate { -a } else { a.clone() };
        }
        t[i][n + i] = if negate { -Rat::one() } else { Rat::one() };
        t[i][rhs_col] = if negate { -rhs } else { rhs.clone() };
        if negate {
            t[i][next_art] = Rat::one();
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = n + i;
        }
    }

    // Phase-2 objective row (reduced costs), kept in sync through phase 1.
    let mut obj: Vec<Rat> = vec![Rat::zero(); width];
    for (j, c) in cost.iter().enumerate() {
        obj[j] = c.clone();
    }

    if n_art > 0 {
        // Phase 1: minimize the sum of artificials. Its reduced-cost row
        // starts as minus the sum of the artificial rows.
        let mut phase1: Vec<Rat> = vec![Rat::zero(); width];
        for &i in &artificial_rows {
            for j in 0..width {
                let d = &phase1[j] - &t[i][j];
                phase1[j] = d;
            }
        }
        for j in (n + m)..(n + m + n_art) {
            phase1[j] = Rat::zero();
        }
        pivot_loop(&mut t, &mut basis, &mut phase1, Some(&mut obj), n + m, rhs_col)?;
        if phase1[rhs_col].is_negative() {
            // Residual artificial infeasibility (the row holds minus the
            // phase-1 objective value).
            return Err(LpError::Infeasible);
        }
        // Drive any artificial still in the basis out of it; a row with no
        // structural pivot available is redundant and can be zeroed.
        for i in 0..m {
            if basis[i] >= n + m {
                let col = (0..n + m).find(|&j| !t[i][j].is_zero());
                match col {
                    Some(j) => {
                        pivot(&mut t, &mut basis, &mut obj, None, i, j, rhs_col);
                    }
                    None => {
                        for j in 0..width {
                            t[i][j] = Rat::zero();
                        }
                        // Park the basis entry on its own artificial column;
                        // the all-zero row can never be chosen again.
                    }
                }
            }
        }
    }

    pivot_loop(&mut t, &mut basis, &mut obj, None, n + m, rhs_col)?;

    let mut y = vec![Rat::zero(); n];
    for i in 0..m {
        if basis[i] < n {
            y[basis[i]] = t[i][rhs_col].clone();
        }
    }
    Ok(y)
}

/// Runs Bland-rule pivots until the reduced costs in `active` are
/// nonnegative over columns `0..limit`. `shadow` is a second objective row
/// kept in sync (the phase-2 row while phase 1 runs).
fn pivot_loop(
    t: &mut [Vec<Rat>],
    basis: &mut [usize],
    active: &mut [Rat],
    mut shadow: Option<&mut Vec<Rat>>,
    limit: usize,
    rhs_col: usize,
) -> Result<(), LpError> {
    loop {
        // Bland: entering column is the lowest index with a negative reduced
        // cost; never re-admit a column currently basic.
        let entering = (0..limit).find(|&j| active[j].is_negative() && !basis.contains(&j));
        let Some(col) = entering else {
            return Ok(());
        };

        // Ratio test; ties broken by the smallest basis variable index,
        // completing Bland's rule.
        let mut leave: Option<(usize, Rat)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[col].is_positive() {
                let ratio = &row[rhs_col] / &row[col];
                match &leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < *lr || (ratio == *lr && basis[i] < basis[*li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(LpError::Unbounded);
        };

        pivot(t, basis, active, shadow.as_deref_mut(), row, col, rhs_col);
    }
}

/// Single pivot on `(row, col)`, updating the basis and the objective rows.
fn pivot(
    t: &mut [Vec<Rat>],
    basis: &mut [usize],
    obj_a: &mut [Rat],
    obj_b: Option<&mut Vec<Rat>>,
    row: usize,
    col: usize,
    rhs_col: usize,
) {
    let p = t[row][col].clone();
    if !p.is_one() {
        for x in t[row].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let factor = r[col].clone();
        for j in 0..=rhs_col {
            if !pivot_row[j].is_zero() {
                let d = &r[j] - &factor * &pivot_row[j];
                r[j] = d;
            }
        }
        r[col] = Rat::zero();
    }
    for objs in [Some(obj_a), obj_b.map(|v| v.as_mut_slice())].into_iter().flatten() {
        if !objs[col].is_zero() {
            let factor = objs[col].clone();
            for j in 0..=rhs_col {
                if !pivot_row[j].is_zero() {
                    let d = &objs[j] - &factor * &pivot_row[j];
                    objs[j] = d;
                }
            }
            objs[col] = Rat::zero();
        }
    }
    basis[row] = col;
}

/// Text rendering of a program for triage; intentionally plain.
pub fn render(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let sense = match lp.sense {
        Sense::Maximize => "max",
        Sense::Minimize => "min",
    };
    out.push_str(&format!("{sense} {:?}\n", lp.objective));
    for c in &lp.constraints {
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "==",
            Relation::Ge => ">=",
        };
        out.push_str(&format!("  {:?} {rel} {}\n", c.coeffs, c.rhs));
    }
    out
}
