//! Explicit δ-additive configurations.
//!
//! * [`cube_family`]: the `d` coordinate permutations of `(1, -1/3, ..., -1/3)`
//!   in ℓ∞^d, pairwise sums of norm exactly 2/3.
//! * [`octahedron_instance`]: four 2/3-additive unit vectors of ℓ₁³, the
//!   centroids of alternate faces of the cross-polytope.
//! * [`wyner_lift`]: for δ > 2/3, a spherical code `v_i` with
//!   `|<v_i, v_j>| < δ' = (3δ - 2)/(6 - δ)` lifted to `x_i = v_i + e` together
//!   with the explicit dual witness `y_i = λ v_i + (1 - λ) e`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{int, q, serde_rational, QVector, Rational};
use crate::duality::{Instance, Witness};
use crate::error::{Error, Result};
use crate::norms::Norm;

/// Grid denominator for sampled stereographic parameters.
pub const GRID_BITS: u32 = 16;

pub fn cube_family(d: usize) -> (Norm, Vec<QVector>) {
    assert!(d >= 1, "cube family needs d >= 1");
    let xs = (0..d)
        .map(|i| {
            QVector::new(
                (0..d)
                    .map(|k| if k == i { int(1) } else { q(-1, 3) })
                    .collect(),
            )
        })
        .collect();
    (Norm::LInf { dimension: d }, xs)
}

/// The four vectors `(1/3)(z_1 - z_2 - z_3)`, ..., `(1/3)(z_1 + z_2 + z_3)`
/// in the coordinates of the octahedral frame `z`.
pub fn octahedron_instance() -> (Norm, Vec<QVector>) {
    let xs = [[1, -1, -1], [-1, 1, -1], [-1, -1, 1], [1, 1, 1]]
        .iter()
        .map(|s| QVector::new(s.iter().map(|&c| q(c, 3)).collect()))
        .collect();
    (Norm::L1 { dimension: 3 }, xs)
}

/// `y_i = 3 x_i`, which realizes `<x_j, y_i> = 1` on the diagonal and `-1/3` off it.
pub fn octahedron_witness() -> Witness {
    let (_, xs) = octahedron_instance();
    Witness {
        ys: xs.iter().map(|x| x.scale(&int(3))).collect(),
    }
}

/// Inverse stereographic projection: `(2p, 1 - |p|²) / (1 + |p|²)`.
pub fn rational_unit_vector(p: &QVector) -> QVector {
    let sq = p.dot(p);
    let one = Rational::one();
    let denom = &one + &sq;
    let two = int(2);
    let mut coords: Vec<Rational> = p.iter().map(|c| c * &two / &denom).collect();
    coords.push((&one - &sq) / &denom);
    QVector::new(coords)
}

/// `δ' = (3δ - 2)/(6 - δ)`.
pub fn delta_prime(delta: &Rational) -> Rational {
    (int(3) * delta - int(2)) / (int(6) - delta)
}

/// `λ = (6 - δ)/4`, the value for which both witness bounds close exactly.
pub fn lambda_corrected(delta: &Rational) -> Rational {
    (int(6) - delta) / int(4)
}

/// `λ = 2/3 - δ/4`, a transposed variant that fails the upper identity.
pub fn lambda_printed(delta: &Rational) -> Rational {
    q(2, 3) - delta / int(4)
}

/// The two identities a witness scale λ must satisfy at the extremes
/// `<v_i, v_j> = ±δ'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaCheck {
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    #[serde(with = "serde_rational")]
    pub delta_prime: Rational,
    #[serde(with = "serde_rational")]
    pub lambda: Rational,
    /// `λδ' + 1 - λ`; must equal `δ - 1`.
    #[serde(with = "serde_rational")]
    pub upper: Rational,
    #[serde(with = "serde_rational")]
    pub required_upper: Rational,
    /// `1 - λ(1 + δ')`; must equal `-δ/2`.
    #[serde(with = "serde_rational")]
    pub lower: Rational,
    #[serde(with = "serde_rational")]
    pub required_lower: Rational,
    pub holds: bool,
}

pub fn lambda_identities(delta: &Rational, lambda: &Rational) -> LambdaCheck {
    let dp = delta_prime(delta);
    let one = Rational::one();
    let upper = lambda * &dp + &one - lambda;
    let lower = &one - lambda * (&one + &dp);
    let required_upper = delta - &one;
    let required_lower = -(delta / int(2));
    LambdaCheck {
        holds: upper == required_upper && lower == required_lower,
        delta: delta.clone(),
        delta_prime: dp,
        lambda: lambda.clone(),
        upper,
        required_upper,
        lower,
        required_lower,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErratumRow {
    pub printed: LambdaCheck,
    pub corrected: LambdaCheck,
}

pub fn erratum_table(deltas: &[Rational]) -> Vec<ErratumRow> {
    deltas
        .iter()
        .map(|d| ErratumRow {
            printed: lambda_identities(d, &lambda_printed(d)),
            corrected: lambda_identities(d, &lambda_corrected(d)),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WynerParams {
    /// Dimension of the spherical code; the lifted instance lives in `d + 1`.
    pub d: usize,
    pub delta: Rational,
    pub target_m: usize,
    pub seed: u64,
    pub max_tries: usize,
    /// Accepted codes satisfy `|<v_i, v_j>| <= δ' - margin`.
    pub margin: Rational,
    /// Half-width of the sampling box for stereographic parameters; rounded
    /// down to the `2^-16` grid.
    pub spread: Rational,
}

impl WynerParams {
    /// Defaults: margin `δ'/10`, target `2d`, `50` tries per target vector, and
    /// spread `≈ sqrt(3/(d-1))` so that sampled parameters have `|p|² ≈ 1`.
    pub fn new(d: usize, delta: Rational) -> Result<Self> {
        let margin = delta_prime(&delta) / int(10);
        let target_m = 2 * d.max(1);
        let params = WynerParams {
            d,
            target_m,
            seed: 0,
            max_tries: 50 * target_m,
            margin,
            spread: default_spread(d),
            delta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta <= q(2, 3) || self.delta >= int(2) {
            return Err(Error::DeltaOutOfRange(self.delta.clone(), "(2/3, 2)"));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameters("d must be at least 1".into()));
        }
        if self.target_m == 0 {
            return Err(Error::InvalidParameters("target must be at least 1".into()));
        }
        let dp = delta_prime(&self.delta);
        if !self.margin.is_positive() || self.margin >= dp {
            return Err(Error::InvalidParameters(format!(
                "margin must lie in (0, {dp})"
            )));
        }
        if grid_radius(&self.spread) <= 0.into() && self.d > 1 {
            return Err(Error::InvalidParameters(
                "spread must be at least 2^-16".into(),
            ));
        }
        Ok(())
    }
}

fn default_spread(d: usize) -> Rational {
    if d <= 1 {
        return int(1);
    }
    let scale = BigInt::one() << (2 * GRID_BITS);
    let radius = (BigInt::from(3) * scale / BigInt::from(d - 1)).sqrt();
    Rational::new(radius, BigInt::one() << GRID_BITS)
}

fn grid_radius(spread: &Rational) -> BigInt {
    (spread * Rational::from_integer(BigInt::one() << GRID_BITS)).floor().to_integer()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WynerLift {
    pub instance: Instance,
    pub witness: Witness,
    /// The tries ran out before `target_m` codewords were accepted.
    pub shortfall: bool,
    pub tries: usize,
}

/// A sampled code point kept as an integer vector over a common denominator:
/// `v = w / s` with `<w, w> = s²`.
struct Codeword {
    w: Vec<BigInt>,
    s: BigInt,
}

impl Codeword {
    fn from_grid(p: &[BigInt]) -> Self {
        let scale = BigInt::one() << (2 * GRID_BITS);
        let sq: BigInt = p.iter().map(|c| c * c).sum();
        let mut w: Vec<BigInt> = p.iter().map(|c| c << (GRID_BITS + 1)).collect();
        w.push(&scale - &sq);
        Codeword { w, s: scale + sq }
    }

    fn dot(&self, other: &Codeword) -> BigInt {
        self.w.iter().zip(&other.w).map(|(a, b)| a * b).sum()
    }

    fn to_qvector(&self) -> QVector {
        QVector::new(
            self.w
                .iter()
                .map(|c| Rational::new(c.clone(), self.s.clone()))
                .collect(),
        )
    }
}

/// Greedy seeded sampling of a spherical code with exact rational points,
/// lifted to an instance with its explicit witness.
pub fn wyner_lift(params: &WynerParams) -> Result<WynerLift> {
    params.validate()?;
    let threshold = delta_prime(&params.delta) - &params.margin;
    let (t_num, t_den) = (threshold.numer().clone(), threshold.denom().clone());
    let radius = grid_radius(&params.spread);
    let k: i64 = radius
        .try_into()
        .map_err(|_| Error::InvalidParameters("spread too large".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut kept: Vec<Codeword> = Vec::new();
    let mut tries = 0;
    while kept.len() < params.target_m && tries < params.max_tries {
        tries += 1;
        let p: Vec<BigInt> = (0..params.d - 1)
            .map(|_| BigInt::from(rng.gen_range(-k..=k)))
            .collect();
        let cand = Codeword::from_grid(&p);
        // |<v, u>| <= t  <=>  t_den |<w_v, w_u>| <= t_num s_v s_u
        let ok = kept.iter().all(|u| {
            &t_den * cand.dot(u).abs() <= &t_num * &cand.s * &u.s
        });
        if ok {
            kept.push(cand);
        }
    }

    let lambda = lambda_corrected(&params.delta);
    let rest = Rational::one() - &lambda;
    let vs: Vec<QVector> = kept.iter().map(Codeword::to_qvector).collect();
    let xs: Vec<QVector> = vs.iter().map(|v| v.extended(Rational::one())).collect();
    let ys: Vec<QVector> = vs
        .iter()
        .map(|v| v.scale(&lambda).extended(rest.clone()))
        .collect();
    debug_assert!(vs.iter().all(|v| v.dot(v).is_one()));
    debug_assert!(!rest.is_zero());
    Ok(WynerLift {
        shortfall: kept.len() < params.target_m,
        instance: Instance::new(params.delta.clone(), xs)?,
        witness: Witness { ys },
        tries,
    })
}
