//! Exact linear programming.
//!
//! A dense two-phase simplex over [`Scalar`] with Bland's anticycling rule.
//! There are no tolerances anywhere: a problem is reported feasible only with
//! a witness satisfying every constraint exactly, and infeasible only with a
//! Farkas multiplier vector that can be checked independently through
//! [`Farkas::verifies`].

use serde::Serialize;

use crate::linalg::{dot, zeros, Vector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vector,
    pub relation: Relation,
    pub rhs: Scalar,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    free: Vec<bool>,
    constraints: Vec<Constraint>,
}

/// Multipliers `y` over the constraints proving infeasibility: `y·rhs > 0`,
/// `y^T A_j <= 0` for every non-negative variable, `y^T A_j = 0` for every
/// free variable, `y_i <= 0` on `<=` rows and `y_i >= 0` on `>=` rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Farkas {
    pub multipliers: Vector,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal { x: Vector, value: Scalar },
    Infeasible(Farkas),
    /// `x` is feasible and `x + t * ray` stays feasible for all `t >= 0`
    /// while the objective improves without bound.
    Unbounded { x: Vector, ray: Vector },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible(_))
    }

    pub fn optimum(&self) -> Option<(&Vector, &Scalar)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `num_vars` non-negative variables with no constraints.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { free: vec![false; num_vars], constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.free.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_free(&self, var: usize) -> bool {
        self.free[var]
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    pub fn set_free_range(&mut self, vars: std::ops::Range<usize>) -> &mut Self {
        for v in vars {
            self.free[v] = true;
        }
        self
    }

    pub fn add(&mut self, coeffs: Vector, relation: Relation, rhs: Scalar) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    /// Checks `x` against every bound and constraint exactly.
    pub fn is_feasible_point(&self, x: &[Scalar]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        if x.iter().zip(&self.free).any(|(v, &free)| !free && v.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs = dot(&c.coeffs, x);
            match c.relation {
                Relation::Eq => lhs == c.rhs,
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    pub fn feasible(&self) -> LpOutcome {
        self.minimize(&zeros(self.num_vars()))
    }

    pub fn maximize(&self, objective: &[Scalar]) -> LpOutcome {
        let negated: Vector = objective.iter().map(|c| -c).collect();
        match self.minimize(&negated) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
            other => other,
        }
    }

    pub fn minimize(&self, objective: &[Scalar]) -> LpOutcome {
        assert_eq!(objective.len(), self.num_vars(), "objective width");
        StandardForm::build(self).solve(objective)
    }

    /// Lexicographically minimal feasible point with respect to `order`:
    /// minimizes `x[order[0]]`, fixes it, then `x[order[1]]`, and so on.
    pub fn lex_min(&self, order: &[usize]) -> LpOutcome {
        let mut lp = self.clone();
        let n = self.num_vars();
        let mut last = lp.feasible();
        if !last.is_feasible() {
            return last;
        }
        for &var in order {
            let mut objective = zeros(n);
            objective[var] = Scalar::one();
            last = lp.minimize(&objective);
            match &last {
                LpOutcome::Optimal { value, .. } => {
                    let value = value.clone();
                    lp.add(objective, Relation::Eq, value);
                }
                _ => return last,
            }
        }
        last
    }
}

impl Farkas {
    /// Independent check of the infeasibility proof against `lp`.
    pub fn verifies(&self, lp: &LinearProgram) -> bool {
        let y = &self.multipliers;
        if y.len() != lp.constraints.len() {
            return false;
        }
        let yb: Scalar = lp.constraints.iter().zip(y).map(|(c, yi)| &c.rhs * yi).sum();
        if !yb.is_positive() {
            return false;
        }
        for (c, yi) in lp.constraints.iter().zip(y) {
            let ok = match c.relation {
                Relation::Eq => true,
                Relation::Le => !yi.is_positive(),
                Relation::Ge => !yi.is_negative(),
            };
            if !ok {
                return false;
            }
        }
        (0..lp.num_vars()).all(|j| {
            let s: Scalar = lp.constraints.iter().zip(y).map(|(c, yi)| &c.coeffs[j] * yi).sum();
            if lp.free[j] {
                s.is_zero()
            } else {
                !s.is_positive()
            }
        })
    }
}

/// `A z = b`, `z >= 0`, `b >= 0`, with bookkeeping back to the caller's variables.
struct StandardForm {
    rows: Vec<Vector>,
    rhs: Vector,
    /// +1 or -1 per row; rows were negated to make `rhs` non-negative.
    flips: Vec<bool>,
    /// For each original variable: (positive column, optional negative column).
    var_cols: Vec<(usize, Option<usize>)>,
    num_cols: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.num_vars());
        let mut next = 0;
        for &free in &lp.free {
            if free {
                var_cols.push((next, Some(next + 1)));
                next += 2;
            } else {
                var_cols.push((next, None));
                next += 1;
            }
        }
        let num_slacks = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let num_cols = next + num_slacks;
        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut rhs = Vec::with_capacity(lp.constraints.len());
        let mut flips = Vec::with_capacity(lp.constraints.len());
        let mut slack = next;
        for c in &lp.constraints {
            let mut row = zeros(num_cols);
            for (j, a) in c.coeffs.iter().enumerate() {
                let (p, n) = var_cols[j];
                row[p] = a.clone();
                if let Some(n) = n {
                    row[n] = -a;
                }
            }
            match c.relation {
                Relation::Eq => {}
                Relation::Le => {
                    row[slack] = Scalar::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Scalar::one();
                    slack += 1;
                }
            }
            let flip = c.rhs.is_negative();
            if flip {
                row.iter_mut().for_each(|x| *x = -&*x);
                rhs.push(-&c.rhs);
            } else {
                rhs.push(c.rhs.clone());
            }
            rows.push(row);
            flips.push(flip);
        }
        StandardForm { rows, rhs, flips, var_cols, num_cols }
    }

    fn recover(&self, z: &[Scalar]) -> Vector {
        self.var_cols
            .iter()
            .map(|&(p, n)| match n {
                Some(n) => &z[p] - &z[n],
                None => z[p].clone(),
            })
            .collect()
    }

    fn solve(self, objective: &[Scalar]) -> LpOutcome {
        let m = self.rows.len();
        let n = self.num_cols;
        let mut tab = Tableau::new(&self.rows, &self.rhs, n);

        // Phase 1: minimize the sum of artificials.
        let mut phase1 = vec![Scalar::zero(); n + m];
        for c in phase1.iter_mut().skip(n) {
            *c = Scalar::one();
        }
        tab.set_objective(&phase1);
        tab.run(n + m);
        let infeasibility = -tab.objective_value_negated();
        if infeasibility.is_positive() {
            let multipliers = (0..m)
                .map(|i| {
                    let y = Scalar::one() - &tab.obj[n + i];
                    if self.flips[i] {
                        -y
                    } else {
                        y
                    }
                })
                .collect();
            return LpOutcome::Infeasible(Farkas { multipliers });
        }
        tab.drive_out_artificials(n);

        // Phase 2 over the structural and slack columns only.
        let mut costs = zeros(n + m);
        for (j, c) in objective.iter().enumerate() {
            let (p, neg) = self.var_cols[j];
            costs[p] = c.clone();
            if let Some(neg) = neg {
                costs[neg] = -c;
            }
        }
        tab.set_objective(&costs);
        match tab.run(n) {
            Termination::Optimal => {
                let z = tab.solution(n);
                let x = self.recover(&z);
                let value = dot(objective, &x);
                LpOutcome::Optimal { x, value }
            }
            Termination::Unbounded(col) => {
                let z = tab.solution(n);
                let mut dz = zeros(n);
                dz[col] = Scalar::one();
                for (i, &b) in tab.basis.iter().enumerate() {
                    if b < n {
                        dz[b] = -&tab.t[i][col];
                    }
                }
                LpOutcome::Unbounded { x: self.recover(&z), ray: self.recover(&dz) }
            }
        }
    }
}

enum Termination {
    Optimal,
    Unbounded(usize),
}

struct Tableau {
    /// m rows of width `cols + 1`; the last entry is the right-hand side.
    t: Vec<Vector>,
    /// Reduced costs; the last entry is minus the objective value.
    obj: Vector,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn new(rows: &[Vector], rhs: &[Scalar], n: usize) -> Self {
        let m = rows.len();
        let cols = n + m;
        let t = rows
            .iter()
            .zip(rhs)
            .enumerate()
            .map(|(i, (r, b))| {
                let mut row = r.clone();
                row.extend((0..m).map(|k| if k == i { Scalar::one() } else { Scalar::zero() }));
                row.push(b.clone());
                row
            })
            .collect();
        Tableau { t, obj: zeros(cols + 1), basis: (n..n + m).collect(), cols }
    }

    fn set_objective(&mut self, costs: &[Scalar]) {
        let mut obj: Vector = costs.to_vec();
        obj.push(Scalar::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (o, x) in obj.iter_mut().zip(&self.t[i]) {
                *o -= cb * x;
            }
        }
        self.obj = obj;
    }

    fn objective_value_negated(&self) -> Scalar {
        self.obj[self.cols].clone()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.t[r][c].recip();
        for x in self.t[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.t[r].clone();
        let eliminate = |row: &mut Vector| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        };
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Bland's rule over columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Termination {
        let rhs = self.cols;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return Termination::Optimal;
            };
            let mut best: Option<(usize, Scalar)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.t[i][rhs] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((leave, _)) => self.pivot(leave, enter),
                None => return Termination::Unbounded(enter),
            }
        }
    }

    fn drive_out_artificials(&mut self, n: usize) {
        for i in 0..self.t.len() {
            if self.basis[i] < n {
                continue;
            }
            if let Some(j) = (0..n).find(|&j| !self.t[i][j].is_zero()) {
                self.pivot(i, j);
            }
        }
    }

    fn solution(&self, n: usize) -> Vector {
        let mut z = zeros(n);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                z[b] = self.t[i][self.cols].clone();
            }
        }
        z
    }
}
