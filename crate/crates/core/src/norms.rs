//! Norms on Q^d and exact verification of δ-additive sets.
//!
//! A polytope norm is given by generators `g_1, ..., g_n` and has unit ball
//! `conv{±g_1, ..., ±g_n}`. Its gauge at `x` is the optimum of
//! `min Σ λ  s.t.  Σ λ_k s_k = x, λ >= 0` over the signed generators `s_k`.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, common_dim, serde_rational, QVector, Rational};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpResult, Relation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Norm {
    #[serde(rename = "linf")]
    LInf { dimension: usize },
    L1 { dimension: usize },
    Polytope {
        dimension: usize,
        generators: Vec<QVector>,
    },
}

impl Norm {
    /// Symmetric-hull norm of `generators`; zero generators are rejected.
    pub fn polytope(dimension: usize, generators: Vec<QVector>) -> Result<Norm> {
        let norm = Norm::Polytope {
            dimension,
            generators,
        };
        norm.validate()?;
        Ok(norm)
    }

    pub fn dimension(&self) -> usize {
        match self {
            Norm::LInf { dimension } | Norm::L1 { dimension } | Norm::Polytope { dimension, .. } => {
                *dimension
            }
        }
    }

    /// Structural checks: matching dimensions and nonzero generators.
    /// Spanning is checked lazily by [`Norm::evaluator`].
    pub fn validate(&self) -> Result<()> {
        if let Norm::Polytope {
            dimension,
            generators,
        } = self
        {
            for (i, g) in generators.iter().enumerate() {
                g.check_dim(*dimension)?;
                if g.is_zero() {
                    return Err(Error::ZeroVector(i));
                }
            }
        }
        Ok(())
    }

    /// Prepares repeated gauge evaluations, checking once that the ball is
    /// full-dimensional.
    pub fn evaluator(&self) -> Result<Gauge<'_>> {
        self.validate()?;
        if let Norm::Polytope {
            dimension,
            generators,
        } = self
        {
            let rank = arith::rank(generators)?;
            if rank < *dimension {
                return Err(Error::DegenerateBall {
                    rank,
                    dimension: *dimension,
                });
            }
        }
        Ok(Gauge { norm: self })
    }

    pub fn gauge(&self, x: &QVector) -> Result<Rational> {
        self.evaluator()?.eval(x)
    }
}

/// A norm whose ball has been checked to be full-dimensional.
pub struct Gauge<'a> {
    norm: &'a Norm,
}

impl Gauge<'_> {
    pub fn norm(&self) -> &Norm {
        self.norm
    }

    pub fn eval(&self, x: &QVector) -> Result<Rational> {
        x.check_dim(self.norm.dimension())?;
        match self.norm {
            Norm::LInf { .. } => Ok(x.norm_inf()),
            Norm::L1 { .. } => Ok(x.norm_l1()),
            Norm::Polytope { generators, .. } => {
                if x.is_zero() {
                    return Ok(Rational::zero());
                }
                polytope_gauge(generators, x)
            }
        }
    }
}

/// Gauge of `x` with respect to `conv{±generators}`.
pub fn gauge(norm: &Norm, x: &QVector) -> Result<Rational> {
    norm.gauge(x)
}

fn polytope_gauge(generators: &[QVector], x: &QVector) -> Result<Rational> {
    let n = generators.len();
    let d = x.dim();
    let mut lp = LinearProgram::new(2 * n)
        .all_nonnegative()
        .minimize(QVector::new(vec![Rational::one(); 2 * n]));
    for k in 0..d {
        let coeffs = generators
            .iter()
            .flat_map(|g| [g[k].clone(), -g[k].clone()])
            .collect::<Vec<_>>();
        lp.constrain(QVector::new(coeffs), Relation::Eq, x[k].clone());
    }
    match solve_lp(&lp)? {
        LpResult::Optimal { value, .. } => Ok(value),
        // A spanning symmetric hull makes the program feasible and bounded below by 0.
        other => unreachable!("gauge program of a full-dimensional ball returned {other:?}"),
    }
}

/// Whether the half space `{x : <x, y> <= c}` contains `conv{±generators}`.
pub fn support_check(generators: &[QVector], y: &QVector, c: &Rational) -> bool {
    generators.iter().all(|g| g.dot(y).abs() <= *c)
}

/// Rejects δ outside the open interval (0, 2).
pub fn check_delta_open(delta: &Rational) -> Result<()> {
    if !delta.is_positive() || *delta >= Rational::from_integer(2.into()) {
        return Err(Error::DeltaOutOfRange(delta.clone(), "(0, 2)"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitViolation {
    pub index: usize,
    #[serde(with = "serde_rational")]
    pub gauge: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    #[serde(with = "serde_rational")]
    pub gauge: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub unit_violations: Vec<UnitViolation>,
    pub pair_violations: Vec<PairViolation>,
    pub pass: bool,
    /// Pairs whose sum has gauge exactly δ.
    pub tight_pairs: Vec<(usize, usize)>,
}

/// Fails on the first pair of identical vectors.
pub fn check_distinct(xs: &[QVector]) -> Result<()> {
    let mut seen: HashMap<&QVector, usize> = HashMap::with_capacity(xs.len());
    for (j, x) in xs.iter().enumerate() {
        if let Some(&i) = seen.get(x) {
            return Err(Error::DuplicateInput(i, j));
        }
        seen.insert(x, j);
    }
    Ok(())
}

/// Exact check that `xs` are unit vectors with pairwise sums of norm at most δ.
pub fn verify_additive_set(norm: &Norm, xs: &[QVector], delta: &Rational) -> Result<AdditivityReport> {
    check_delta_open(delta)?;
    if let Some(d) = common_dim(xs)? {
        if d != norm.dimension() {
            return Err(Error::DimensionMismatch {
                expected: norm.dimension(),
                found: d,
            });
        }
    }
    check_distinct(xs)?;
    let gauge = norm.evaluator()?;

    let mut unit_violations = Vec::new();
    for (index, x) in xs.iter().enumerate() {
        let g = gauge.eval(x)?;
        if !g.is_one() {
            unit_violations.push(UnitViolation { index, gauge: g });
        }
    }
    let mut pair_violations = Vec::new();
    let mut tight_pairs = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let g = gauge.eval(&(&xs[i] + &xs[j]))?;
            if g > *delta {
                pair_violations.push(PairViolation { i, j, gauge: g });
            } else if g == *delta {
                tight_pairs.push((i, j));
            }
        }
    }
    Ok(AdditivityReport {
        pass: unit_violations.is_empty() && pair_violations.is_empty(),
        unit_violations,
        pair_violations,
        tight_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, q};

    fn cross_polytope(d: usize) -> Norm {
        Norm::polytope(d, (0..d).map(|i| QVector::unit(d, i)).collect()).unwrap()
    }

    #[test]
    fn cross_polytope_gauge_is_l1() {
        let x = QVector::from_fracs(&[(1, 3), (1, 3), (1, 3)]);
        assert_eq!(gauge(&cross_polytope(3), &x).unwrap(), int(1));
        let y = QVector::from_fracs(&[(1, 3), (-1, 3), (-1, 3)]);
        assert_eq!(gauge(&cross_polytope(3), &y).unwrap(), int(1));
    }

    #[test]
    fn gauge_of_zero_is_zero() {
        let z = QVector::zeros(3);
        for norm in [
            Norm::LInf { dimension: 3 },
            Norm::L1 { dimension: 3 },
            cross_polytope(3),
        ] {
            assert_eq!(gauge(&norm, &z).unwrap(), int(0));
        }
    }

    #[test]
    fn degenerate_ball_is_rejected() {
        let flat = Norm::polytope(2, vec![QVector::unit(2, 0)]).unwrap();
        assert_eq!(
            gauge(&flat, &QVector::unit(2, 0)).unwrap_err(),
            Error::DegenerateBall {
                rank: 1,
                dimension: 2
            }
        );
    }

    #[test]
    fn zero_generator_is_rejected() {
        assert_eq!(
            Norm::polytope(2, vec![QVector::unit(2, 0), QVector::zeros(2)]).unwrap_err(),
            Error::ZeroVector(1)
        );
    }

    #[test]
    fn support_check_examples() {
        let gens: Vec<QVector> = (0..3).map(|i| QVector::unit(3, i)).collect();
        assert!(support_check(&gens, &QVector::unit(3, 0), &int(1)));
        assert!(!support_check(&gens, &QVector::unit(3, 0), &q(1, 2)));
    }

    #[test]
    fn verify_rejects_bad_inputs() {
        let norm = Norm::LInf { dimension: 2 };
        let xs = vec![QVector::unit(2, 0), QVector::unit(2, 0)];
        assert_eq!(
            verify_additive_set(&norm, &xs, &q(2, 3)).unwrap_err(),
            Error::DuplicateInput(0, 1)
        );
        for bad in [int(0), int(2), q(-1, 2), q(5, 2)] {
            assert!(matches!(
                verify_additive_set(&norm, &[QVector::unit(2, 0)], &bad),
                Err(Error::DeltaOutOfRange(..))
            ));
        }
    }

    #[test]
    fn orthogonal_pair_is_not_two_thirds_additive() {
        let norm = Norm::LInf { dimension: 2 };
        let xs = vec![QVector::unit(2, 0), QVector::unit(2, 1)];
        let report = verify_additive_set(&norm, &xs, &q(2, 3)).unwrap();
        assert!(!report.pass);
        assert!(report.unit_violations.is_empty());
        assert_eq!(
            report.pair_violations,
            vec![PairViolation {
                i: 0,
                j: 1,
                gauge: int(1)
            }]
        );
    }

    #[test]
    fn non_unit_vectors_are_reported() {
        let norm = Norm::L1 { dimension: 2 };
        let xs = vec![QVector::from_fracs(&[(1, 2), (0, 1)]), QVector::from_ints(&[0, -1])];
        let report = verify_additive_set(&norm, &xs, &int(1)).unwrap();
        assert_eq!(
            report.unit_violations,
            vec![UnitViolation {
                index: 0,
                gauge: q(1, 2)
            }]
        );
        assert!(!report.pass);
    }

    #[test]
    fn norm_json_schema() {
        let n = Norm::LInf { dimension: 3 };
        assert_eq!(
            serde_json::to_string(&n).unwrap(),
            r#"{"kind":"linf","dimension":3}"#
        );
        let p: Norm = serde_json::from_str(
            r#"{"kind":"polytope","dimension":2,"generators":[["1","0"],["1/2","1"]]}"#,
        )
        .unwrap();
        assert_eq!(
            p,
            Norm::Polytope {
                dimension: 2,
                generators: vec![QVector::from_ints(&[1, 0]), QVector::from_fracs(&[(1, 2), (1, 1)])]
            }
        );
    }
}
