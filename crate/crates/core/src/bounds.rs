//! Upper bounds on the size of δ-additive sets.
//!
//! The packing bound compares `(⌊N/2⌋^{1/d} + ⌈N/2⌉^{1/d})(1 - δ/2)` with the
//! radius of a ball containing the sum of the two half-packings. With the
//! radius 2 this reproduces the closed form `2 (2/(2-δ))^d` for even `N`;
//! the radius is a parameter so that `3 - δ` can be evaluated alongside.
//! Every root comparison is decided exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::{floor, int, q, serde_bigint, serde_opt_bigint, serde_rational, Rational};
use crate::error::Result;
use crate::norms::check_delta_open;

/// `⌊2 (2/(2-δ))^d⌋`.
pub fn bm_closed_form(d: u32, delta: &Rational) -> Result<BigInt> {
    check_delta_open(delta)?;
    let ratio = int(2) / (int(2) - delta);
    Ok(floor(&(int(2) * num_traits::pow(ratio, d as usize))))
}

/// Largest `N >= 2` with `(⌊N/2⌋^{1/d} + ⌈N/2⌉^{1/d})(1 - δ/2) <= radius`,
/// or `None` when even `N = 2` fails.
pub fn bm_sharp(d: u32, delta: &Rational, radius: &Rational) -> Result<Option<BigInt>> {
    check_delta_open(delta)?;
    assert!(d >= 1, "dimension must be positive");
    let scaled = radius / (int(1) - delta / int(2));
    let holds = |n: &BigInt| {
        let (lo, rem) = n.div_rem(&BigInt::from(2));
        let hi = &lo + rem;
        root_sum_at_most(&lo, &hi, d, &scaled)
    };
    let two = BigInt::from(2);
    if !holds(&two) {
        return Ok(None);
    }
    let mut good = two.clone();
    let mut bad = BigInt::from(4);
    while holds(&bad) {
        good = bad.clone();
        bad <<= 1;
    }
    while &bad - &good > BigInt::one() {
        let mid: BigInt = (&good + &bad) >> 1;
        if holds(&mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Some(good))
}

/// Decides `a^{1/d} + b^{1/d} <= r` for nonnegative integers `a`, `b`.
///
/// If both are perfect `d`-th powers the comparison is exact. Otherwise the
/// sum is irrational (a rational sum of two real radicals forces both to be
/// rational), so refining dyadic brackets always separates it from `r`.
pub fn root_sum_at_most(a: &BigInt, b: &BigInt, d: u32, r: &Rational) -> bool {
    let ra = a.nth_root(d);
    let rb = b.nth_root(d);
    if ra.pow(d) == *a && rb.pow(d) == *b {
        return Rational::from_integer(ra + rb) <= *r;
    }
    let mut bits: u32 = 16;
    loop {
        let scale = BigInt::one() << (bits as usize * d as usize);
        let la = (a * &scale).nth_root(d);
        let lb = (b * &scale).nth_root(d);
        let unit = BigInt::one() << bits as usize;
        let lower = Rational::new(&la + &lb, unit.clone());
        let upper = Rational::new(la + lb + BigInt::from(2), unit);
        if upper <= *r {
            return true;
        }
        if lower >= *r {
            return false;
        }
        bits *= 2;
    }
}

/// `Some(2)` when δ < 2/3. Three vectors would give
/// `2 <= ‖x₁ + x₂‖ + ‖x₁ - x₂‖ <= δ + (‖x₁ + x₃‖ + ‖x₂ + x₃‖) <= 3δ`.
pub fn trivial_bound(delta: &Rational) -> Option<u32> {
    (delta.is_positive() && *delta < q(2, 3)).then_some(2)
}

/// Inner-product ceiling `(dδ² - 2)/2` for distinct members of a δ-additive
/// set, measured in the inner product whose ball is within a factor `sqrt(d)`
/// of the unit ball.
pub fn ellipsoid_inner_product_bound(d: u32, delta: &Rational) -> Rational {
    (int(d as i64) * delta * delta - int(2)) / int(2)
}

/// Largest `m` with `m + m(m-1)c >= 0`, i.e. `⌊1 - 1/c⌋`, when `c < 0`.
pub fn gram_bound(c: &Rational) -> Option<BigInt> {
    c.is_negative().then(|| floor(&(int(1) - c.recip())))
}

pub fn default_radius() -> Rational {
    int(2)
}

/// The alternative containment radius `3 - δ`, for comparison with the default.
pub fn printed_radius(delta: &Rational) -> Rational {
    int(3) - delta
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(with = "serde_bigint")]
    pub closed_form: BigInt,
    #[serde(with = "serde_opt_bigint")]
    pub sharp: Option<BigInt>,
    #[serde(with = "serde_rational")]
    pub radius_used: Rational,
    /// `sharp <= closed_form + 1`.
    pub agreement: bool,
}

pub fn bound_report(d: u32, delta: &Rational, radius: &Rational) -> Result<BoundReport> {
    let closed_form = bm_closed_form(d, delta)?;
    let sharp = bm_sharp(d, delta, radius)?;
    let agreement = sharp
        .as_ref()
        .is_none_or(|s| *s <= &closed_form + BigInt::one());
    Ok(BoundReport {
        closed_form,
        sharp,
        radius_used: radius.clone(),
        agreement,
    })
}
