//! Exact two-phase simplex over the rationals.
//!
//! Callers state constraints naturally (`<=`, `=`, `>=` rows over free or
//! nonnegative variables); variable splitting, slacks and artificials are
//! internal. Every result carries a certificate that [`check_certificate`]
//! verifies without looking at the tableau:
//!
//! Write `s_i = -1` for a `>=` row and `s_i = +1` otherwise, so each row
//! reads `s_i a_i . x <= s_i b_i` (with equality for `=` rows). For a
//! multiplier vector `u` that is nonnegative on inequality rows, let
//! `g = Σ u_i s_i a_i` and `β = Σ u_i s_i b_i`.
//!
//! * `Infeasible { farkas: u }`: `g_j = 0` on free variables, `g_j >= 0` on
//!   nonnegative ones, and `β < 0`. Then `0 <= g . x <= β < 0`.
//! * `Optimal { duals: u }`: with `c` the objective in minimization form,
//!   `c + g` vanishes on free variables and is nonnegative on nonnegative
//!   ones, so `c . x >= -β` for every feasible `x`; optimality is `c . x* = -β`.
//! * `Unbounded { point, ray }`: `point` is feasible, `ray` keeps every row
//!   satisfied and strictly decreases the minimization objective.
//!
//! Pivoting uses Bland's rule, so the solver never cycles.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{serde_rational, QVector, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn sign(self) -> Rational {
        match self {
            Relation::Ge => -Rational::one(),
            _ => Rational::one(),
        }
    }

    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: QVector,
    pub relation: Relation,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub coeffs: QVector,
    pub sense: Sense,
}

impl Objective {
    fn min_form(&self) -> QVector {
        match self.sense {
            Sense::Min => self.coeffs.clone(),
            Sense::Max => -&self.coeffs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: usize,
    /// Per-variable sign restriction; empty means every variable is free.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nonnegative: Vec<bool>,
    pub constraints: Vec<Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
}

impl LinearProgram {
    /// A program over `variables` free variables with no constraints.
    pub fn new(variables: usize) -> Self {
        LinearProgram {
            variables,
            nonnegative: Vec::new(),
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn all_nonnegative(mut self) -> Self {
        self.nonnegative = vec![true; self.variables];
        self
    }

    pub fn constrain(&mut self, coeffs: QVector, relation: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn minimize(mut self, coeffs: QVector) -> Self {
        self.objective = Some(Objective {
            coeffs,
            sense: Sense::Min,
        });
        self
    }

    pub fn maximize(mut self, coeffs: QVector) -> Self {
        self.objective = Some(Objective {
            coeffs,
            sense: Sense::Max,
        });
        self
    }

    pub fn is_nonnegative(&self, j: usize) -> bool {
        self.nonnegative.get(j).copied().unwrap_or(false)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables;
        if !self.nonnegative.is_empty() && self.nonnegative.len() != n {
            return Err(Error::MalformedProgram(format!(
                "sign restriction list has length {}, expected {n}",
                self.nonnegative.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.dim() != n {
                return Err(Error::MalformedProgram(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.dim()
                )));
            }
        }
        if let Some(obj) = &self.objective {
            if obj.coeffs.dim() != n {
                return Err(Error::MalformedProgram(format!(
                    "objective has {} coefficients, expected {n}",
                    obj.coeffs.dim()
                )));
            }
        }
        Ok(())
    }

    /// Whether `x` satisfies every row and sign restriction exactly.
    pub fn is_feasible(&self, x: &QVector) -> bool {
        if x.dim() != self.variables {
            return false;
        }
        let signs_ok = (0..self.variables).all(|j| !self.is_nonnegative(j) || !x[j].is_negative());
        signs_ok
            && self
                .constraints
                .iter()
                .all(|c| c.relation.holds(&c.coeffs.dot(x), &c.rhs))
    }

    /// `(g, β)` for a multiplier vector, as described in the module docs.
    fn combine(&self, multipliers: &QVector) -> (QVector, Rational) {
        let mut g = QVector::zeros(self.variables);
        let mut beta = Rational::zero();
        for (c, u) in self.constraints.iter().zip(multipliers.iter()) {
            if u.is_zero() {
                continue;
            }
            let w = u * c.relation.sign();
            g = &g + &c.coeffs.scale(&w);
            beta += &w * &c.rhs;
        }
        (g, beta)
    }

    fn multipliers_signed_ok(&self, multipliers: &QVector) -> bool {
        multipliers.dim() == self.constraints.len()
            && self
                .constraints
                .iter()
                .zip(multipliers.iter())
                .all(|(c, u)| c.relation == Relation::Eq || !u.is_negative())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LpResult {
    Optimal {
        point: QVector,
        #[serde(with = "serde_rational")]
        value: Rational,
        duals: QVector,
    },
    Feasible {
        point: QVector,
    },
    Infeasible {
        farkas: QVector,
    },
    Unbounded {
        point: QVector,
        ray: QVector,
    },
}

impl LpResult {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpResult::Infeasible { .. })
    }

    pub fn point(&self) -> Option<&QVector> {
        match self {
            LpResult::Optimal { point, .. }
            | LpResult::Feasible { point }
            | LpResult::Unbounded { point, .. } => Some(point),
            LpResult::Infeasible { .. } => None,
        }
    }
}

/// Verifies a result against `lp` exactly, independent of how it was produced.
pub fn check_certificate(lp: &LinearProgram, result: &LpResult) -> bool {
    if lp.validate().is_err() {
        return false;
    }
    let n = lp.variables;
    match result {
        LpResult::Feasible { point } => lp.is_feasible(point),
        LpResult::Infeasible { farkas } => {
            if !lp.multipliers_signed_ok(farkas) {
                return false;
            }
            let (g, beta) = lp.combine(farkas);
            let g_ok = (0..n).all(|j| {
                if lp.is_nonnegative(j) {
                    !g[j].is_negative()
                } else {
                    g[j].is_zero()
                }
            });
            g_ok && beta.is_negative()
        }
        LpResult::Optimal {
            point,
            value,
            duals,
        } => {
            let Some(obj) = &lp.objective else {
                return false;
            };
            if !lp.is_feasible(point) || obj.coeffs.dot(point) != *value {
                return false;
            }
            if !lp.multipliers_signed_ok(duals) {
                return false;
            }
            let c = obj.min_form();
            let (g, beta) = lp.combine(duals);
            let reduced = &c + &g;
            let reduced_ok = (0..n).all(|j| {
                if lp.is_nonnegative(j) {
                    !reduced[j].is_negative()
                } else {
                    reduced[j].is_zero()
                }
            });
            reduced_ok && c.dot(point) == -beta
        }
        LpResult::Unbounded { point, ray } => {
            let Some(obj) = &lp.objective else {
                return false;
            };
            if !lp.is_feasible(point) || ray.dim() != n {
                return false;
            }
            let signs_ok = (0..n).all(|j| !lp.is_nonnegative(j) || !ray[j].is_negative());
            let rows_ok = lp.constraints.iter().all(|c| {
                let t = c.coeffs.dot(ray);
                c.relation.holds(&t, &Rational::zero())
            });
            signs_ok && rows_ok && obj.min_form().dot(ray).is_negative()
        }
    }
}

/// Solves `lp` exactly. Without an objective this decides feasibility.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult> {
    lp.validate()?;
    Ok(Tableau::build(lp).solve(lp))
}

/// Standard-form tableau `T = [B⁻¹A | B⁻¹b]` with an attached reduced-cost row.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry holds `-objective`.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    /// Column that was basic in each row initially; those columns of `T` hold `B⁻¹`.
    initial: Vec<usize>,
    /// Sign applied to each original row to make its right-hand side nonnegative.
    flip: Vec<Rational>,
    /// Standard columns of each original variable: (positive part, negative part).
    var_cols: Vec<(usize, Option<usize>)>,
    structural: usize,
    first_artificial: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.variables);
        let mut next = 0;
        for j in 0..lp.variables {
            if lp.is_nonnegative(j) {
                var_cols.push((next, None));
                next += 1;
            } else {
                var_cols.push((next, Some(next + 1)));
                next += 2;
            }
        }
        let structural = next;

        let mut flip = Vec::with_capacity(lp.constraints.len());
        let mut relations = Vec::with_capacity(lp.constraints.len());
        for c in &lp.constraints {
            if c.rhs.is_negative() {
                flip.push(-Rational::one());
                relations.push(c.relation.flipped());
            } else {
                flip.push(Rational::one());
                relations.push(c.relation);
            }
        }
        let slacks = relations.iter().filter(|r| **r != Relation::Eq).count();
        let artificials = relations.iter().filter(|r| **r != Relation::Le).count();
        let first_artificial = structural + slacks;
        let width = first_artificial + artificials;

        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut basis = Vec::with_capacity(lp.constraints.len());
        let mut slack_col = structural;
        let mut art_col = first_artificial;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            for (j, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let a = a * &flip[i];
                let (pos, neg) = var_cols[j];
                if let Some(neg) = neg {
                    row[neg] = -a.clone();
                }
                row[pos] = a;
            }
            row[width] = &c.rhs * &flip[i];
            match relations[i] {
                Relation::Le => {
                    row[slack_col] = Rational::one();
                    basis.push(slack_col);
                    slack_col += 1;
                }
                Relation::Ge => {
                    row[slack_col] = -Rational::one();
                    slack_col += 1;
                    row[art_col] = Rational::one();
                    basis.push(art_col);
                    art_col += 1;
                }
                Relation::Eq => {
                    row[art_col] = Rational::one();
                    basis.push(art_col);
                    art_col += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            obj: vec![Rational::zero(); width + 1],
            initial: basis.clone(),
            basis,
            flip,
            var_cols,
            structural,
            first_artificial,
            width,
        }
    }

    /// Resets the reduced-cost row for cost vector `cost` over all columns.
    fn price(&mut self, cost: &[Rational]) {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(row.iter()) {
                if !t.is_zero() {
                    *o -= cb * t;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let support: Vec<usize> = (0..=self.width)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            eliminate(row, &pivot_row, c, &support);
        }
        eliminate(&mut self.obj, &pivot_row, c, &support);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs Bland's rule over columns `< limit`. Returns the unbounded column, if any.
    fn iterate(&mut self, limit: usize) -> Option<usize> {
        loop {
            let enter = (0..limit).find(|&j| self.obj[j].is_negative())?;
            let mut leave: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Some(enter),
            }
        }
    }

    /// Current basic solution, mapped back to the original variables.
    fn point(&self) -> QVector {
        let mut std = vec![Rational::zero(); self.width];
        for (r, &b) in self.basis.iter().enumerate() {
            std[b] = self.rows[r][self.width].clone();
        }
        self.to_original(&std)
    }

    fn to_original(&self, std: &[Rational]) -> QVector {
        QVector::new(
            self.var_cols
                .iter()
                .map(|&(pos, neg)| match neg {
                    Some(neg) => &std[pos] - &std[neg],
                    None => std[pos].clone(),
                })
                .collect(),
        )
    }

    /// Row multipliers in the module's certificate convention, read off the
    /// reduced costs of the initial basis columns.
    fn multipliers(&self, lp: &LinearProgram, cost: &[Rational]) -> QVector {
        QVector::new(
            lp.constraints
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let col = self.initial[i];
                    let y = &cost[col] - &self.obj[col];
                    -(y * &self.flip[i] * c.relation.sign())
                })
                .collect(),
        )
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            if let Some(c) = (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                self.pivot(r, c);
            }
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> LpResult {
        let mut phase1 = vec![Rational::zero(); self.width];
        for c in phase1.iter_mut().skip(self.first_artificial) {
            *c = Rational::one();
        }
        self.price(&phase1);
        self.iterate(self.width);
        if !self.obj[self.width].is_zero() {
            return LpResult::Infeasible {
                farkas: self.multipliers(lp, &phase1),
            };
        }
        self.drive_out_artificials();

        let Some(objective) = &lp.objective else {
            return LpResult::Feasible { point: self.point() };
        };
        let c = objective.min_form();
        let mut cost = vec![Rational::zero(); self.width];
        for (j, &(pos, neg)) in self.var_cols.iter().enumerate() {
            cost[pos] = c[j].clone();
            if let Some(neg) = neg {
                cost[neg] = -c[j].clone();
            }
        }
        debug_assert!(self.structural <= self.first_artificial);
        self.price(&cost);
        match self.iterate(self.first_artificial) {
            None => {
                let point = self.point();
                let value = objective.coeffs.dot(&point);
                LpResult::Optimal {
                    duals: self.multipliers(lp, &cost),
                    point,
                    value,
                }
            }
            Some(enter) => {
                let mut dir = vec![Rational::zero(); self.width];
                dir[enter] = Rational::one();
                for (r, &b) in self.basis.iter().enumerate() {
                    dir[b] = -self.rows[r][enter].clone();
                }
                LpResult::Unbounded {
                    point: self.point(),
                    ray: self.to_original(&dir),
                }
            }
        }
    }
}

fn eliminate(row: &mut [Rational], pivot_row: &[Rational], c: usize, support: &[usize]) {
    if row[c].is_zero() {
        return;
    }
    let factor = row[c].clone();
    for &j in support {
        let delta = &factor * &pivot_row[j];
        row[j] -= delta;
    }
}
