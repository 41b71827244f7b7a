//! Norms realizing a prescribed δ-additive configuration.
//!
//! Nonzero `x_1, ..., x_m` are the unit vectors of a δ-additive set for some
//! norm iff there are dual vectors `y_1, ..., y_m` with
//!
//! ```text
//!   <x_i, y_i> = 1
//!   -1 <= <x_j, y_i> <= δ - 1          for j != i
//!   <x_j + x_k, y_i> >= -δ             for j != k
//! ```
//!
//! [`find_witness`] decides this system one `y_i` at a time (the rows for
//! different `i` share no variables). [`build_norm`] goes the other way and
//! returns the ball `conv{±x_i, ±(x_i + x_j)/δ}`, thickened by an orthogonal
//! complement basis when the hull is flat.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::{self, q, serde_rational, QVector, Rational};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpResult, Relation};
use crate::norms::{check_distinct, support_check, Norm};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    #[serde(with = "serde_rational")]
    delta: Rational,
    xs: Vec<QVector>,
}

#[derive(Deserialize)]
struct RawInstance {
    #[serde(with = "serde_rational")]
    delta: Rational,
    xs: Vec<QVector>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;
    fn try_from(raw: RawInstance) -> Result<Self> {
        Instance::new(raw.delta, raw.xs)
    }
}

impl Instance {
    /// Validates `0 < δ <= 2` and that the vectors are nonzero, distinct and
    /// of one common positive dimension.
    pub fn new(delta: Rational, xs: Vec<QVector>) -> Result<Self> {
        if !delta.is_positive() || delta > Rational::from_integer(2.into()) {
            return Err(Error::DeltaOutOfRange(delta, "(0, 2]"));
        }
        let Some(d) = arith::common_dim(&xs)? else {
            return Err(Error::InvalidInstance("no vectors".into()));
        };
        if d == 0 {
            return Err(Error::InvalidInstance("dimension 0".into()));
        }
        if let Some(i) = xs.iter().position(QVector::is_zero) {
            return Err(Error::ZeroVector(i));
        }
        check_distinct(&xs)?;
        Ok(Instance { delta, xs })
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn xs(&self) -> &[QVector] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs[0].dim()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub ys: Vec<QVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum WitnessResult {
    Feasible { witness: Witness },
    /// The subsystem for `y_index` is infeasible; `farkas` certifies it
    /// against [`subsystem`]`(instance, index)`.
    Infeasible { index: usize, farkas: QVector },
}

impl WitnessResult {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            WitnessResult::Feasible { witness } => Some(witness),
            WitnessResult::Infeasible { .. } => None,
        }
    }
}

/// The feasibility program for `y_i`, rows in a fixed order: the equality,
/// then the two bounds for each `j != i`, then `x_j + x_k` for `j < k`.
pub fn subsystem(instance: &Instance, i: usize) -> LinearProgram {
    let xs = instance.xs();
    let delta = instance.delta();
    let one = Rational::one();
    let mut lp = LinearProgram::new(instance.dim());
    lp.constrain(xs[i].clone(), Relation::Eq, one.clone());
    for (j, xj) in xs.iter().enumerate() {
        if j == i {
            continue;
        }
        lp.constrain(xj.clone(), Relation::Ge, -one.clone());
        lp.constrain(xj.clone(), Relation::Le, delta - &one);
    }
    for j in 0..xs.len() {
        for k in j + 1..xs.len() {
            lp.constrain(&xs[j] + &xs[k], Relation::Ge, -delta.clone());
        }
    }
    lp
}

/// Solves the dual system; reports the lowest infeasible index, if any.
pub fn find_witness(instance: &Instance) -> WitnessResult {
    let mut ys = Vec::with_capacity(instance.len());
    for i in 0..instance.len() {
        let lp = subsystem(instance, i);
        let result = solve_lp(&lp).expect("dual subsystem is well formed");
        match result {
            LpResult::Feasible { point } => ys.push(point),
            LpResult::Infeasible { farkas } => {
                return WitnessResult::Infeasible { index: i, farkas };
            }
            other => unreachable!("feasibility program returned {other:?}"),
        }
    }
    WitnessResult::Feasible {
        witness: Witness { ys },
    }
}

/// `table[i][j] = <x_j, y_i>`.
pub fn dual_values(instance: &Instance, witness: &Witness) -> Vec<Vec<Rational>> {
    witness
        .ys
        .iter()
        .map(|y| instance.xs().iter().map(|x| x.dot(y)).collect())
        .collect()
}

/// Exact check of every row of the dual system.
pub fn verify_witness(instance: &Instance, witness: &Witness) -> bool {
    let m = instance.len();
    if witness.ys.len() != m || witness.ys.iter().any(|y| y.dim() != instance.dim()) {
        return false;
    }
    let delta = instance.delta();
    let one = Rational::one();
    let upper = delta - &one;
    let table = dual_values(instance, witness);
    table.iter().enumerate().all(|(i, row)| {
        row[i].is_one()
            && row
                .iter()
                .enumerate()
                .all(|(j, v)| j == i || (*v >= -one.clone() && *v <= upper))
            && (0..m).all(|j| (j + 1..m).all(|k| &row[j] + &row[k] >= -delta.clone()))
    })
}

/// The unit ball `conv{±x_i, ±(x_i + x_j)/δ}`, thickened if it is flat.
pub fn build_norm(instance: &Instance, witness: &Witness) -> Result<Norm> {
    if !verify_witness(instance, witness) {
        return Err(Error::InvalidWitness);
    }
    let d = instance.dim();
    let inv = Rational::one() / instance.delta();
    let xs = instance.xs();
    let mut generators: Vec<QVector> = xs.to_vec();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let s = &xs[i] + &xs[j];
            if !s.is_zero() {
                generators.push(s.scale(&inv));
            }
        }
    }
    generators.extend(arith::orthogonal_complement_basis(xs, d)?);
    Norm::polytope(d, generators)
}

/// Norming functionals of the `x_i` for the ball returned by [`build_norm`]:
/// each `y_i` projected onto `span{x_j}`. The projection leaves every
/// `<x_j, y_i>` unchanged and annihilates the thickening directions, so
/// `support_check(generators, f_i, 1)` holds and certifies `‖x_i‖ = 1`
/// without solving a gauge program.
pub fn norming_functionals(instance: &Instance, witness: &Witness) -> Result<Vec<QVector>> {
    let norm = build_norm(instance, witness)?;
    let complement = arith::orthogonal_complement_basis(instance.xs(), instance.dim())?;
    let functionals: Vec<QVector> = witness
        .ys
        .iter()
        .map(|y| arith::project_out(y, &complement))
        .collect();
    if let Norm::Polytope { generators, .. } = &norm {
        let one = Rational::one();
        debug_assert!(functionals
            .iter()
            .zip(instance.xs())
            .all(|(f, x)| f.dot(x).is_one() && support_check(generators, f, &one)));
    }
    Ok(functionals)
}

/// At δ = 2/3 with m >= 3 every off-diagonal dual value is forced to -1/3.
/// Returns `None` when those preconditions do not hold.
pub fn forced_dual_values(instance: &Instance, witness: &Witness) -> Option<bool> {
    if *instance.delta() != q(2, 3) || instance.len() < 3 || witness.ys.len() != instance.len() {
        return None;
    }
    let third = q(-1, 3);
    let table = dual_values(instance, witness);
    Some(
        table
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, v)| j == i || *v == third)),
    )
}

/// Whether every linear dependence among `xs` has all coefficients equal.
pub fn kernel_equal_coefficients(xs: &[QVector]) -> Result<bool> {
    Ok(arith::kernel_basis(xs)?
        .iter()
        .all(|k| k.iter().all(|c| *c == k[0])))
}

/// For a four-vector instance at δ = 2/3, the frame `z_i = (3/2)(x_i + x_4)`.
pub fn octahedral_frame(instance: &Instance) -> Option<Vec<QVector>> {
    if *instance.delta() != q(2, 3) || instance.len() != 4 {
        return None;
    }
    let xs = instance.xs();
    let scale = q(3, 2);
    Some((0..3).map(|i| (&xs[i] + &xs[3]).scale(&scale)).collect())
}

/// Sum of the vectors of an instance.
pub fn vector_sum(xs: &[QVector]) -> QVector {
    let d = xs.first().map_or(0, QVector::dim);
    xs.iter().fold(QVector::zeros(d), |acc, x| &acc + x)
}
