//! Dense two-phase simplex for the small linear programs this crate
//! generates (minimization over nonnegative variables). Bland's rule keeps
//! degenerate instances from cycling.

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows[i] has n_cols coefficients followed by the rhs.
    rows: Vec<Vec<f64>>,
    objective: Vec<f64>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, pivot_row: usize, pivot_col: usize) {
        let scale = self.rows[pivot_row][pivot_col];
        for v in self.rows[pivot_row].iter_mut() {
            *v /= scale;
        }
        let pivot_vals = self.rows[pivot_row].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == pivot_row {
                continue;
            }
            let factor = row[pivot_col];
            if factor != 0.0 {
                for (v, &p) in row.iter_mut().zip(&pivot_vals) {
                    *v -= factor * p;
                }
            }
        }
        let factor = self.objective[pivot_col];
        if factor != 0.0 {
            for (v, &p) in self.objective.iter_mut().zip(&pivot_vals) {
                *v -= factor * p;
            }
        }
        self.basis[pivot_row] = pivot_col;
    }

    /// Runs simplex iterations until optimal or unbounded. `allowed`
    /// filters the columns permitted to enter the basis.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<(), ()> {
        loop {
            // Bland: lowest-index column with negative reduced cost.
            let entering = (0..self.n_cols)
                .find(|&j| allowed(j) && self.objective[j] < -TOL);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > TOL {
                    let ratio = row[self.n_cols] / a;
                    let better = match leaving {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio - TOL
                                || (ratio < best_ratio + TOL
                                    && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(()), // unbounded in this direction
            }
        }
    }
}

/// Minimizes `objective . x` subject to the constraints, `x >= 0`.
pub fn minimize(objective: &[f64], constraints: &[Constraint]) -> LpOutcome {
    let n = objective.len();
    let m = constraints.len();

    // Count auxiliary columns.
    let mut n_slack = 0;
    let mut n_art = 0;
    for c in constraints {
        debug_assert_eq!(c.coeffs.len(), n);
        let flip = c.rhs < 0.0;
        let rel = effective_relation(c.relation, flip);
        match rel {
            Relation::Le => n_slack += 1,
            Relation::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Relation::Eq => n_art += 1,
        }
    }
    let n_cols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_idx = n;
    let mut art_idx = art_start;
    for c in constraints {
        let flip = c.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        let rel = effective_relation(c.relation, flip);
        let mut row = vec![0.0; n_cols + 1];
        for (j, &a) in c.coeffs.iter().enumerate() {
            row[j] = sign * a;
        }
        row[n_cols] = sign * c.rhs;
        match rel {
            Relation::Le => {
                row[slack_idx] = 1.0;
                basis.push(slack_idx);
                slack_idx += 1;
            }
            Relation::Ge => {
                row[slack_idx] = -1.0;
                slack_idx += 1;
                row[art_idx] = 1.0;
                basis.push(art_idx);
                art_idx += 1;
            }
            Relation::Eq => {
                row[art_idx] = 1.0;
                basis.push(art_idx);
                art_idx += 1;
            }
        }
        rows.push(row);
    }

    let mut tableau = Tableau {
        rows,
        objective: vec![0.0; n_cols + 1],
        basis,
        n_cols,
    };

    // Phase 1: minimize the sum of artificial variables.
    if n_art > 0 {
        // Reduced costs of W = sum of artificials, canonicalized against the
        // artificial basis rows.
        for i in 0..m {
            if tableau.basis[i] >= art_start {
                let row = tableau.rows[i].clone();
                for (v, &a) in tableau.objective.iter_mut().zip(&row) {
                    *v -= a;
                }
            }
        }
        for j in art_start..n_cols {
            tableau.objective[j] += 1.0;
        }
        if tableau.optimize(&|_| true).is_err() {
            // W is bounded below by zero; unboundedness cannot happen.
            return LpOutcome::Infeasible;
        }
        let w = -tableau.objective[n_cols];
        if w > 1e-7 {
            return LpOutcome::Infeasible;
        }
        // Pivot any zero-level artificial out of the basis; drop rows that
        // became redundant.
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] >= art_start {
                let col = (0..art_start).find(|&j| tableau.rows[i][j].abs() > 1e-9);
                match col {
                    Some(j) => tableau.pivot(i, j),
                    None => {
                        tableau.rows.remove(i);
                        tableau.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2: real objective, artificial columns banned.
    tableau.objective = vec![0.0; n_cols + 1];
    for (j, &c) in objective.iter().enumerate() {
        tableau.objective[j] = c;
    }
    for i in 0..tableau.rows.len() {
        let b = tableau.basis[i];
        let cost = if b < n { objective[b] } else { 0.0 };
        if cost != 0.0 {
            let row = tableau.rows[i].clone();
            for (v, &a) in tableau.objective.iter_mut().zip(&row) {
                *v -= cost * a;
            }
        }
    }
    if tableau.optimize(&|j| j < art_start).is_err() {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for (i, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            x[b] = tableau.rows[i][n_cols].max(0.0);
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal {
        x,
        objective: value,
    }
}

fn effective_relation(rel: Relation, flipped: bool) -> Relation {
    if !flipped {
        return rel;
    }
    match rel {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    }
}
