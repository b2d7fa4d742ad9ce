//! Dense two-phase simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest eligible index for both the
//! entering and the leaving variable), so the method cannot cycle.
//! Variables are implicitly nonnegative.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, objective: vec![Rational::zero(); num_vars], constraints: Vec::new() }
    }

    pub fn add(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        debug_assert!(terms.iter().all(|(v, _)| *v < self.num_vars));
        self.constraints.push(LinearConstraint { terms, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        let slack_count = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        // Artificial columns are only needed for rows without a usable slack.
        let needs_art: Vec<bool> = lp
            .constraints
            .iter()
            .map(|c| {
                let rel = if c.rhs.is_negative() { flip(c.relation) } else { c.relation };
                rel != Relation::Le
            })
            .collect();
        let art_count = needs_art.iter().filter(|&&b| b).count();
        let cols = n + slack_count + art_count;
        let first_artificial = n + slack_count;

        let mut t = vec![vec![Rational::zero(); cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut art = first_artificial;
        for (r, c) in lp.constraints.iter().enumerate() {
            let negate = c.rhs.is_negative();
            let rel = if negate { flip(c.relation) } else { c.relation };
            for (v, a) in &c.terms {
                if negate {
                    t[r][*v] -= a;
                } else {
                    t[r][*v] += a;
                }
            }
            t[r][cols] = if negate { -c.rhs.clone() } else { c.rhs.clone() };
            match rel {
                Relation::Le => {
                    t[r][slack] = Rational::from_integer(1.into());
                    basis[r] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    t[r][slack] = Rational::from_integer((-1).into());
                    slack += 1;
                }
                Relation::Eq => {}
            }
            if needs_art[r] {
                t[r][art] = Rational::from_integer(1.into());
                basis[r] = art;
                art += 1;
            }
        }
        Tableau { t, basis, cols, first_artificial }
    }

    fn pivot(&mut self, row: usize, col: usize, obj: &mut [Rational]) {
        let p = self.t[row][col].clone();
        for x in self.t[row].iter_mut() {
            *x /= &p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].is_zero() {
                continue;
            }
            let f = line[col].clone();
            for (x, y) in line.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for (x, y) in obj.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced-cost row for maximizing `c`: `obj[j] = -(c_j - c_B B⁻¹ A_j)`,
    /// with `obj[cols] = c_B x_B`.
    fn objective_row(&self, c: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = (0..=self.cols).map(|j| -c.get(j).cloned().unwrap_or_default()).collect();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = c.get(b).cloned().unwrap_or_default();
            if cb.is_zero() {
                continue;
            }
            for (x, y) in obj.iter_mut().zip(&self.t[r]) {
                *x += &cb * y;
            }
        }
        obj
    }

    /// Bland-rule simplex on the columns `< limit`. Returns false if unbounded.
    fn optimize(&mut self, obj: &mut [Rational], limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.t[r][self.cols] / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(row, col, obj);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let cols = self.cols;
        if self.first_artificial < cols {
            // Phase 1: maximize -Σ artificials.
            let mut c1 = vec![Rational::zero(); cols];
            for x in &mut c1[self.first_artificial..] {
                *x = Rational::from_integer((-1).into());
            }
            let mut obj = self.objective_row(&c1);
            self.optimize(&mut obj, cols);
            if !obj[cols].is_zero() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut r = 0;
            while r < self.t.len() {
                if self.basis[r] >= self.first_artificial {
                    if let Some(col) = (0..self.first_artificial).find(|&j| !self.t[r][j].is_zero()) {
                        self.pivot(r, col, &mut obj);
                    } else {
                        // Redundant equality.
                        self.t.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
                r += 1;
            }
        }
        let limit = self.first_artificial;
        let mut obj = self.objective_row(&lp.objective);
        if !self.optimize(&mut obj, limit) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); lp.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < lp.num_vars {
                x[b] = self.t[r][cols].clone();
            }
        }
        LpOutcome::Optimal { value: obj[cols].clone(), x }
    }
}

fn flip(r: Relation) -> Relation {
    match r {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    }
}
