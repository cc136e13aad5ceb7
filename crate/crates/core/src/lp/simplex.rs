//! Two-phase dense tableau simplex.
//!
//! Free variables are split internally into `x⁺ − x⁻`; every row gets a slack,
//! and rows with a negative right-hand side get an artificial variable for
//! phase one. Pivoting starts with Dantzig's rule and falls back to Bland's
//! rule for good once the Dantzig budget is spent or the method stalls on
//! degenerate pivots.

use nalgebra::DVector;

use super::{LpError, LpOutcome, LpProblem, LpSolver};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Hard limit on pivots across both phases.
    pub max_pivots: usize,
    /// Dantzig pivots allowed before switching to Bland's rule.
    pub dantzig_pivots: usize,
    /// Consecutive degenerate pivots tolerated under Dantzig's rule.
    pub stall_limit: usize,
    pub pivot_tol: f64,
    pub cost_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_pivots: 50_000,
            dantzig_pivots: 5_000,
            stall_limit: 50,
            pivot_tol: 1e-9,
            cost_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Simplex {
    options: SimplexOptions,
}

impl Simplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }

    pub fn options(&self) -> &SimplexOptions {
        &self.options
    }
}

impl LpSolver for Simplex {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError> {
        Run::new(problem, self.options).solve()
    }
}

enum Phase {
    Optimal,
    Unbounded(usize),
}

struct Run<'a> {
    problem: &'a LpProblem,
    opts: SimplexOptions,
    n: usize,
    ncols: usize,
    first_artificial: usize,
    /// Row-major `rows × (ncols + 1)`; the last column is the rhs.
    tab: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    eligible: Vec<bool>,
    pivots: usize,
    stalled: usize,
    bland: bool,
}

impl<'a> Run<'a> {
    fn new(problem: &'a LpProblem, opts: SimplexOptions) -> Self {
        let a = problem.constraint_matrix();
        let b = problem.rhs();
        let (m, n) = (a.nrows(), a.ncols());
        let n_art = b.iter().filter(|&&v| v < 0.0).count();
        let first_artificial = 2 * n + m;
        let ncols = first_artificial + n_art;

        let mut tab = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = first_artificial;
        for i in 0..m {
            let mut row = vec![0.0; ncols + 1];
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                row[j] = sign * a[(i, j)];
                row[n + j] = -sign * a[(i, j)];
            }
            row[2 * n + i] = sign;
            row[ncols] = sign * b[i];
            if b[i] < 0.0 {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(2 * n + i);
            }
            tab.push(row);
        }

        Self {
            problem,
            opts,
            n,
            ncols,
            first_artificial,
            tab,
            cost: vec![0.0; ncols + 1],
            basis,
            eligible: vec![true; ncols],
            pivots: 0,
            stalled: 0,
            bland: opts.dantzig_pivots == 0,
        }
    }

    fn solve(mut self) -> Result<LpOutcome, LpError> {
        if self.ncols > self.first_artificial {
            let mut phase_one = vec![0.0; self.ncols];
            for c in &mut phase_one[self.first_artificial..] {
                *c = -1.0;
            }
            self.set_objective(&phase_one);
            // Phase one is bounded above by zero, so it always ends optimal.
            let _ = self.iterate()?;
            let infeasibility: f64 = self
                .basis
                .iter()
                .zip(&self.tab)
                .filter(|(&j, _)| j >= self.first_artificial)
                .map(|(_, row)| row[self.ncols].max(0.0))
                .sum();
            if infeasibility > self.problem.feasibility_tol() {
                return Ok(LpOutcome::Infeasible);
            }
            self.expel_artificials();
        }

        let c = self.problem.objective();
        let mut phase_two = vec![0.0; self.ncols];
        for j in 0..self.n {
            phase_two[j] = c[j];
            phase_two[self.n + j] = -c[j];
        }
        self.set_objective(&phase_two);
        match self.iterate()? {
            Phase::Optimal => {
                let x = self.primal_point();
                let value = c.dot(&x);
                Ok(LpOutcome::Optimal { value, point: x })
            }
            Phase::Unbounded(entering) => Ok(LpOutcome::Unbounded { ray: self.ray(entering) }),
        }
    }

    fn set_objective(&mut self, c: &[f64]) {
        self.cost[..self.ncols].copy_from_slice(c);
        self.cost[self.ncols] = 0.0;
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = c[bj];
            if cb != 0.0 {
                for (dst, src) in self.cost.iter_mut().zip(&self.tab[i]) {
                    *dst -= cb * src;
                }
            }
        }
    }

    fn iterate(&mut self) -> Result<Phase, LpError> {
        loop {
            let Some(entering) = self.entering() else {
                return Ok(Phase::Optimal);
            };
            let Some(leaving) = self.leaving(entering) else {
                return Ok(Phase::Unbounded(entering));
            };
            if self.pivots >= self.opts.max_pivots {
                return Err(LpError::PivotBudget { budget: self.opts.max_pivots });
            }
            let step = self.tab[leaving][self.ncols].max(0.0) / self.tab[leaving][entering];
            self.pivot(leaving, entering);
            self.pivots += 1;
            if step <= 1e-12 {
                self.stalled += 1;
            } else {
                self.stalled = 0;
            }
            if !self.bland
                && (self.pivots >= self.opts.dantzig_pivots || self.stalled >= self.opts.stall_limit)
            {
                log::debug!("simplex switching to Bland's rule after {} pivots", self.pivots);
                self.bland = true;
            }
        }
    }

    fn entering(&self) -> Option<usize> {
        let tol = self.opts.cost_tol;
        let candidates = (0..self.ncols).filter(|&j| self.eligible[j] && self.cost[j] > tol);
        if self.bland {
            candidates.min()
        } else {
            candidates.max_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]).then(b.cmp(&a)))
        }
    }

    fn leaving(&self, entering: usize) -> Option<usize> {
        let tol = self.opts.pivot_tol;
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.tab.iter().enumerate() {
            let a = row[entering];
            if a <= tol {
                continue;
            }
            let ratio = row[self.ncols].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                    let better = if tie {
                        if self.bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            a > self.tab[bi][entering]
                        }
                    } else {
                        ratio < br
                    };
                    if better { Some((i, ratio)) } else { Some((bi, br)) }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.tab[r][c];
        for v in self.tab[r].iter_mut() {
            *v /= p;
        }
        self.tab[r][c] = 1.0;
        let pivot_row = self.tab[r].clone();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst -= f * src;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (dst, src) in self.cost.iter_mut().zip(&pivot_row) {
                *dst -= f * src;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Pivots zero-level artificials out of the basis; rows where that is
    /// impossible are linearly dependent and get dropped.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.tab.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            let replacement = (0..self.first_artificial)
                .filter(|&j| self.tab[i][j].abs() > self.opts.pivot_tol)
                .max_by(|&a, &b| self.tab[i][a].abs().total_cmp(&self.tab[i][b].abs()));
            match replacement {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.tab.remove(i);
                    self.basis.remove(i);
                }
            }
        }
        for e in &mut self.eligible[self.first_artificial..] {
            *e = false;
        }
    }

    fn primal_point(&self) -> DVector<f64> {
        let mut vals = vec![0.0; self.ncols];
        for (row, &bj) in self.tab.iter().zip(&self.basis) {
            vals[bj] = row[self.ncols].max(0.0);
        }
        DVector::from_fn(self.n, |j, _| vals[j] - vals[self.n + j])
    }

    fn ray(&self, entering: usize) -> DVector<f64> {
        let mut dir = vec![0.0; self.ncols];
        dir[entering] = 1.0;
        for (row, &bj) in self.tab.iter().zip(&self.basis) {
            dir[bj] = -row[entering];
        }
        DVector::from_fn(self.n, |j, _| dir[j] - dir[self.n + j])
    }
}
