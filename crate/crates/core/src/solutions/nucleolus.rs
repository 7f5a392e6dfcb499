//! Nucleolus by the sequential linear-programming scheme.
//!
//! Each stage minimizes the largest excess `t` over the coalitions that are
//! still free, subject to every previously fixed coalition keeping its excess.
//! Coalitions whose excess equals `t*` at every stage optimum are then fixed,
//! and any coalition whose indicator lies in the span of the fixed ones is
//! settled too. The payoff is pinned once the fixed indicators (with the
//! grand coalition) span all players.
//!
//! Variables are shifted to `y_i = x_i − v({i}) ≥ 0`, which both restricts the
//! search to imputations and keeps the simplex in its `x ≥ 0` form.

use super::simplex::{LinearProgram, Relation};
use super::PayoffVector;
use crate::coalition::Coalition;
use crate::game::CharacteristicFunction;
use crate::{Error, Result};

pub const MAX_NUCLEOLUS_PLAYERS: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct NucleolusOptions {
    /// Tightness tolerance, relative to `1 + |t*|`.
    pub tolerance: f64,
    pub max_stages: usize,
}

impl Default for NucleolusOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_stages: 256,
        }
    }
}

pub fn nucleolus(v: &CharacteristicFunction) -> Result<PayoffVector> {
    nucleolus_with(v, NucleolusOptions::default())
}

pub fn nucleolus_with(v: &CharacteristicFunction, opts: NucleolusOptions) -> Result<PayoffVector> {
    let n = v.n_players();
    if n > MAX_NUCLEOLUS_PLAYERS {
        return Err(Error::TooManyPlayers(n, MAX_NUCLEOLUS_PLAYERS));
    }
    let singles: Vec<f64> = (0..n).map(|i| v.worth(Coalition::singleton(i))).collect();
    let singles_total: f64 = singles.iter().sum();
    let surplus = v.grand_worth() - singles_total;
    let scale = 1.0 + v.worths().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if surplus < -1e-9 * scale {
        return Err(Error::EmptyImputationSet {
            grand: v.grand_worth(),
            singletons: singles_total,
        });
    }
    let surplus = surplus.max(0.0);
    if n == 1 {
        return Ok(PayoffVector::raw(vec![v.grand_worth()]));
    }

    let mut solver = Stages {
        v,
        n,
        singles,
        surplus,
        fixed: Vec::new(),
        active: Coalition::all_proper(n).collect(),
        span: Span::new(n),
    };
    solver.span.insert(&indicator(Coalition::grand(n), n));

    for _ in 0..opts.max_stages {
        let (y, t_star) = solver.minimize_max_excess()?;
        let tol = opts.tolerance * (1.0 + t_star.abs());
        let tight: Vec<Coalition> = solver
            .active
            .iter()
            .copied()
            .filter(|&s| (solver.excess(s, &y) - t_star).abs() <= tol)
            .collect();

        let mut newly_fixed = Vec::new();
        if tight.len() == 1 {
            newly_fixed.push(tight[0]);
        } else {
            for &s in &tight {
                if solver.min_excess(s, t_star)? >= t_star - tol {
                    newly_fixed.push(s);
                }
            }
        }
        if newly_fixed.is_empty() {
            // Numerical corner: accept everything tight at this optimum.
            newly_fixed = tight;
        }
        if newly_fixed.is_empty() {
            return Err(Error::NucleolusStalled(solver.fixed.len()));
        }
        for s in newly_fixed {
            solver.fix(s, t_star);
        }
        // Coalitions spanned by the fixed ones have a determined excess.
        let spanned: Vec<Coalition> = solver
            .active
            .iter()
            .copied()
            .filter(|&s| solver.span.contains(&indicator(s, n)))
            .collect();
        for s in spanned {
            let e = solver.excess(s, &y);
            solver.fix(s, e);
        }
        if solver.span.rank() == n || solver.active.is_empty() {
            let x = y
                .iter()
                .zip(&solver.singles)
                .map(|(yi, vi)| yi + vi)
                .collect();
            return Ok(PayoffVector::raw(x));
        }
    }
    Err(Error::NucleolusStalled(opts.max_stages))
}

struct Stages<'a> {
    v: &'a CharacteristicFunction,
    n: usize,
    singles: Vec<f64>,
    surplus: f64,
    fixed: Vec<(Coalition, f64)>,
    active: Vec<Coalition>,
    span: Span,
}

impl Stages<'_> {
    fn singles_of(&self, s: Coalition) -> f64 {
        s.members().map(|i| self.singles[i]).sum()
    }

    fn excess(&self, s: Coalition, y: &[f64]) -> f64 {
        self.v.worth(s) - self.singles_of(s) - s.members().map(|i| y[i]).sum::<f64>()
    }

    fn fix(&mut self, s: Coalition, excess: f64) {
        self.active.retain(|&a| a != s);
        self.span.insert(&indicator(s, self.n));
        self.fixed.push((s, excess));
    }

    /// Rows shared by both LP kinds, over `n + extra` variables.
    fn base_program(&self, objective: Vec<f64>) -> Result<LinearProgram> {
        let width = objective.len();
        let mut lp = LinearProgram::minimize(objective);
        let mut all = vec![0.0; width];
        all[..self.n].fill(1.0);
        lp.add(all, Relation::Eq, self.surplus)?;
        for &(s, e) in &self.fixed {
            let mut row = vec![0.0; width];
            for i in s.members() {
                row[i] = 1.0;
            }
            lp.add(row, Relation::Eq, self.v.worth(s) - self.singles_of(s) - e)?;
        }
        Ok(lp)
    }

    /// min t s.t. e(S, x) ≤ t for active S. Variables: y, t⁺, t⁻.
    fn minimize_max_excess(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.n;
        let mut objective = vec![0.0; n + 2];
        objective[n] = 1.0;
        objective[n + 1] = -1.0;
        let mut lp = self.base_program(objective)?;
        for &s in &self.active {
            let mut row = vec![0.0; n + 2];
            for i in s.members() {
                row[i] = -1.0;
            }
            row[n] = -1.0;
            row[n + 1] = 1.0;
            lp.add(row, Relation::Le, self.singles_of(s) - self.v.worth(s))?;
        }
        let sol = lp.solve()?;
        Ok((sol.x[..n].to_vec(), sol.x[n] - sol.x[n + 1]))
    }

    /// Smallest excess `target` can reach while every active excess stays ≤ `t_star`.
    fn min_excess(&self, target: Coalition, t_star: f64) -> Result<f64> {
        let n = self.n;
        let mut objective = vec![0.0; n];
        for i in target.members() {
            objective[i] = -1.0;
        }
        let mut lp = self.base_program(objective)?;
        for &s in &self.active {
            let mut row = vec![0.0; n];
            for i in s.members() {
                row[i] = -1.0;
            }
            lp.add(row, Relation::Le, t_star + self.singles_of(s) - self.v.worth(s))?;
        }
        let sol = lp.solve()?;
        Ok(self.excess(target, &sol.x))
    }
}

fn indicator(s: Coalition, n: usize) -> Vec<f64> {
    (0..n).map(|i| if s.contains(i) { 1.0 } else { 0.0 }).collect()
}

/// Incrementally reduced row-echelon basis of the fixed indicators.
struct Span {
    rows: Vec<(usize, Vec<f64>)>,
    n: usize,
}

impl Span {
    fn new(n: usize) -> Self {
        Self {
            rows: Vec::new(),
            n,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for (pivot, row) in &self.rows {
            let f = r[*pivot];
            if f != 0.0 {
                for (a, b) in r.iter_mut().zip(row) {
                    *a -= f * b;
                }
            }
        }
        r
    }

    fn contains(&self, v: &[f64]) -> bool {
        self.reduce(v).iter().all(|a| a.abs() < 1e-9)
    }

    fn insert(&mut self, v: &[f64]) {
        let mut r = self.reduce(v);
        let Some(pivot) = (0..self.n).max_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs())) else {
            return;
        };
        if r[pivot].abs() < 1e-9 {
            return;
        }
        let p = r[pivot];
        r.iter_mut().for_each(|a| *a /= p);
        for (_, row) in self.rows.iter_mut() {
            let f = row[pivot];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(&r) {
                    *a -= f * b;
                }
            }
        }
        self.rows.push((pivot, r));
    }
}
