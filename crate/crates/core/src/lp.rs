//! Small dense simplex solver.
//!
//! Two-phase tableau method. Pricing is Dantzig's largest-coefficient rule;
//! after a run of degenerate pivots it switches to Bland's smallest-index
//! rule, which cannot cycle, until the objective moves again. Meant for
//! desk-scale certificate problems (a few hundred rows), not as a general LP
//! engine.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Pivot and feasibility tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const DEGENERATE_SWITCH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// `x ≥ 0`.
    NonNeg,
    /// Unrestricted.
    Free,
    /// `lo ≤ x ≤ hi`.
    Range(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize cᵀx` subject to linear rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    bounds: Vec<Bound>,
    rows: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub outcome: LpOutcome,
    /// Pivots over both phases.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpError {
    /// The pivot budget ran out; distinct from infeasibility.
    IterationLimit { iterations: usize },
    /// A row or objective has the wrong length or a bound is inverted.
    Malformed,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::IterationLimit { iterations } => write!(f, "pivot limit reached after {iterations} pivots"),
            LpError::Malformed => write!(f, "malformed linear program"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LpError {}

impl LinearProgram {
    /// A program over `objective.len()` variables, all nonnegative by default.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { objective, bounds: vec![Bound::NonNeg; n], rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound) -> &mut Self {
        self.bounds[var] = bound;
        self
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.solve_with_limit(200_000)
    }

    pub fn solve_with_limit(&self, max_pivots: usize) -> Result<LpSolution, LpError> {
        let n = self.objective.len();
        if self.rows.iter().any(|r| r.coeffs.len() != n) {
            return Err(LpError::Malformed);
        }
        // Substitution x = shift + Σ col·y over nonnegative columns y.
        let mut columns: Vec<(usize, f64)> = Vec::new();
        let mut shift = vec![0.0; n];
        let mut extra_rows: Vec<(usize, f64)> = Vec::new();
        for (j, b) in self.bounds.iter().enumerate() {
            match *b {
                Bound::NonNeg => columns.push((j, 1.0)),
                Bound::Free => {
                    columns.push((j, 1.0));
                    columns.push((j, -1.0));
                }
                Bound::Range(lo, hi) => {
                    if !(lo <= hi) || !lo.is_finite() {
                        return Err(LpError::Malformed);
                    }
                    shift[j] = lo;
                    columns.push((j, 1.0));
                    if hi.is_finite() {
                        extra_rows.push((columns.len() - 1, hi - lo));
                    }
                }
            }
        }
        let ncols = columns.len();
        let mut std_rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(self.rows.len() + extra_rows.len());
        for row in &self.rows {
            let a: Vec<f64> = columns.iter().map(|&(j, s)| row.coeffs[j] * s).collect();
            let offset: f64 = row.coeffs.iter().zip(&shift).map(|(c, s)| c * s).sum();
            std_rows.push((a, row.relation, row.rhs - offset));
        }
        for &(col, cap) in &extra_rows {
            let mut a = vec![0.0; ncols];
            a[col] = 1.0;
            std_rows.push((a, Relation::Le, cap));
        }
        let cost: Vec<f64> = columns.iter().map(|&(j, s)| self.objective[j] * s).collect();
        let constant: f64 = self.objective.iter().zip(&shift).map(|(c, s)| c * s).sum();

        let mut tableau = Tableau::build(&std_rows, &cost);
        let mut iterations = 0;
        if tableau.n_artificial > 0 {
            tableau.set_phase_one_objective();
            match tableau.run(max_pivots, &mut iterations)? {
                Phase::Optimal => {}
                Phase::Unbounded => unreachable!("phase one is bounded"),
            }
            let scale = 1.0 + std_rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
            if tableau.objective_value() < -PIVOT_TOL * scale {
                return Ok(LpSolution { outcome: LpOutcome::Infeasible, iterations });
            }
            tableau.drive_out_artificials(&mut iterations);
            tableau.set_phase_two_objective(&cost);
        }
        let outcome = match tableau.run(max_pivots, &mut iterations)? {
            Phase::Unbounded => LpOutcome::Unbounded,
            Phase::Optimal => {
                let y = tableau.primal();
                let mut x = shift.clone();
                for (c, &(j, s)) in columns.iter().enumerate() {
                    x[j] += s * y[c];
                }
                let objective = tableau.objective_value() + constant;
                LpOutcome::Optimal { x, objective }
            }
        };
        Ok(LpSolution { outcome, iterations })
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

/// Row-major tableau; the last row holds reduced costs `c_j - z_j` and `-z`.
struct Tableau {
    rows: usize,
    /// Structural + slack/surplus + artificial columns, plus rhs.
    width: usize,
    n_artificial: usize,
    first_artificial: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter.
    active: Vec<bool>,
}

impl Tableau {
    fn build(rows: &[(Vec<f64>, Relation, f64)], cost: &[f64]) -> Tableau {
        let m = rows.len();
        let n = cost.len();
        let mut normalized: Vec<(Vec<f64>, Relation, f64)> = rows
            .iter()
            .map(|(a, rel, b)| {
                if *b < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (a.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (a.clone(), *rel, *b)
                }
            })
            .collect();
        let n_slack = normalized.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_artificial = normalized.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + n_slack;
        let cols = first_artificial + n_artificial;
        let width = cols + 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (n, first_artificial);
        for (i, (a, rel, b)) in normalized.iter_mut().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[..n].copy_from_slice(a);
            row[cols] = *b;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        let mut t = Tableau {
            rows: m,
            width,
            n_artificial,
            first_artificial,
            data,
            basis,
            active: vec![true; cols],
        };
        t.set_phase_two_objective(cost);
        t
    }

    fn cols(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    /// Loads `cost` (structural columns) into the reduced-cost row and prices out the basis.
    fn load_objective(&mut self, full_cost: &[f64]) {
        let m = self.rows;
        let w = self.width;
        let obj = m * w;
        for c in 0..w {
            self.data[obj + c] = if c < full_cost.len() { full_cost[c] } else { 0.0 };
        }
        for r in 0..m {
            let cb = full_cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for c in 0..w {
                    self.data[obj + c] -= cb * self.data[r * w + c];
                }
            }
        }
    }

    fn set_phase_one_objective(&mut self) {
        let mut cost = vec![0.0; self.cols()];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = -1.0;
        }
        self.load_objective(&cost);
    }

    fn set_phase_two_objective(&mut self, cost: &[f64]) {
        for c in self.first_artificial..self.cols() {
            self.active[c] = false;
        }
        let mut full = vec![0.0; self.cols()];
        full[..cost.len()].copy_from_slice(cost);
        self.load_objective(&full);
    }

    fn objective_value(&self) -> f64 {
        -self.data[self.rows * self.width + self.cols()]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    fn run(&mut self, max_pivots: usize, iterations: &mut usize) -> Result<Phase, LpError> {
        let m = self.rows;
        let rhs = self.cols();
        let mut degenerate_run = 0;
        loop {
            let obj = m * self.width;
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let mut entering = None;
            let mut best_cost = PIVOT_TOL;
            for c in 0..self.cols() {
                let rc = self.data[obj + c];
                if self.active[c] && rc > PIVOT_TOL {
                    if bland {
                        entering = Some(c);
                        break;
                    }
                    if rc > best_cost {
                        best_cost = rc;
                        entering = Some(c);
                    }
                }
            }
            let Some(pc) = entering else {
                return Ok(Phase::Optimal);
            };
            // Ties go to the largest pivot element, or to the smallest basis
            // index under Bland's rule.
            let mut best: Option<(f64, usize, f64)> = None;
            for r in 0..m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs) / a;
                    let better = match best {
                        None => true,
                        Some((br, bp, ba)) => {
                            let slack = PIVOT_TOL * (1.0 + br.abs());
                            ratio < br - slack
                                || (ratio <= br + slack
                                    && if bland { self.basis[r] < self.basis[bp] } else { a > ba })
                        }
                    };
                    if better {
                        best = Some((ratio, r, a));
                    }
                }
            }
            let Some((ratio, pr, _)) = best else {
                return Ok(Phase::Unbounded);
            };
            if ratio <= PIVOT_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            if *iterations >= max_pivots {
                return Err(LpError::IterationLimit { iterations: *iterations });
            }
            self.pivot(pr, pc);
            *iterations += 1;
        }
    }

    /// After phase one, swaps zero-valued artificials out of the basis; rows
    /// with no usable pivot are redundant and get cleared.
    fn drive_out_artificials(&mut self, iterations: &mut usize) {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let candidate = (0..self.first_artificial).find(|&c| self.at(r, c).abs() > PIVOT_TOL);
            match candidate {
                Some(c) => {
                    self.pivot(r, c);
                    *iterations += 1;
                }
                None => {
                    let w = self.width;
                    for c in 0..w {
                        self.data[r * w + c] = 0.0;
                    }
                }
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.first_artificial];
        for r in 0..self.rows {
            let b = self.basis[r];
            if b < self.first_artificial {
                y[b] = self.at(r, self.cols());
            }
        }
        y
    }
}
