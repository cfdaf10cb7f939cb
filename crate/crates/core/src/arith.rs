//! Gcd decomposition of the Mukai data `v = (r, H, s)` with `H = d·H̃`.
//!
//! Everything here is gcd arithmetic; no prime factorisation is needed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{name} must be a positive integer, got {value}")]
    NonPositive { name: &'static str, value: BigInt },
    #[error("v = (r, H, s) is not primitive: gcd(c, d) = {gcd} with c = {c}, d = {d}")]
    NotPrimitive { c: BigInt, d: BigInt, gcd: BigInt },
    #[error("d² = {d_sq} does not divide a·b = {ab}, so H̃² = 2rs/d² is not an even integer")]
    NotDivisible { d_sq: BigInt, ab: BigInt },
    #[error("cannot split γ = {gamma} against a₁ = {a1}, b₁ = {b1}: {detail}")]
    SplitFailure {
        gamma: BigInt,
        a1: BigInt,
        b1: BigInt,
        detail: &'static str,
    },
}

/// Raw Mukai data: `v = (r, H, s)` with `H = d·H̃`, `H̃` primitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MukaiInput {
    #[serde(with = "crate::intser")]
    pub r: BigInt,
    #[serde(with = "crate::intser")]
    pub s: BigInt,
    #[serde(with = "crate::intser")]
    pub d: BigInt,
}

impl MukaiInput {
    pub fn new(r: impl Into<BigInt>, s: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        MukaiInput {
            r: r.into(),
            s: s.into(),
            d: d.into(),
        }
    }
}

/// All derived invariants of `(r, s, d)`.
///
/// `c = gcd(r, s)`, `a = r/c`, `b = s/c`, `d = d_a·d_b` with `d_a = gcd(d, a)`,
/// `d_b = gcd(d, b)`, `a₁ = a/d_a²`, `b₁ = b/d_b²` and `H̃² = 2·n_half`
/// where `n_half = a₁b₁c²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MukaiInvariants {
    #[serde(with = "crate::intser")]
    pub c: BigInt,
    #[serde(with = "crate::intser")]
    pub a: BigInt,
    #[serde(with = "crate::intser")]
    pub b: BigInt,
    #[serde(with = "crate::intser")]
    pub d_a: BigInt,
    #[serde(with = "crate::intser")]
    pub d_b: BigInt,
    #[serde(with = "crate::intser")]
    pub a1: BigInt,
    #[serde(with = "crate::intser")]
    pub b1: BigInt,
    #[serde(with = "crate::intser")]
    pub n_half: BigInt,
}

impl MukaiInvariants {
    pub fn d(&self) -> BigInt {
        &self.d_a * &self.d_b
    }

    /// `a₁c`, the rank of the intermediate vector `(a₁c, H̃, b₁c)`.
    pub fn a1c(&self) -> BigInt {
        &self.a1 * &self.c
    }

    pub fn b1c(&self) -> BigInt {
        &self.b1 * &self.c
    }
}

fn positive(name: &'static str, v: &BigInt) -> Result<(), ArithError> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(ArithError::NonPositive { name, value: v.clone() })
    }
}

pub fn invariants(input: &MukaiInput) -> Result<MukaiInvariants, ArithError> {
    positive("r", &input.r)?;
    positive("s", &input.s)?;
    positive("d", &input.d)?;
    let c = input.r.gcd(&input.s);
    let a = &input.r / &c;
    let b = &input.s / &c;
    let g = c.gcd(&input.d);
    if !g.is_one() {
        return Err(ArithError::NotPrimitive {
            c,
            d: input.d.clone(),
            gcd: g,
        });
    }
    let d_sq = &input.d * &input.d;
    let ab = &a * &b;
    if !ab.is_multiple_of(&d_sq) {
        return Err(ArithError::NotDivisible { d_sq, ab });
    }
    // gcd(a, b) = 1 and d² | ab force d = d_a·d_b with d_a² | a and d_b² | b.
    let d_a = input.d.gcd(&a);
    let d_b = input.d.gcd(&b);
    debug_assert_eq!(&d_a * &d_b, input.d);
    let a1 = &a / (&d_a * &d_a);
    let b1 = &b / (&d_b * &d_b);
    let n_half = &a1 * &b1 * &c * &c;
    Ok(MukaiInvariants {
        c,
        a,
        b,
        d_a,
        d_b,
        a1,
        b1,
        n_half,
    })
}

/// `n(v) = gcd(r, s, γ)`.
pub fn n_of_v(r: &BigInt, s: &BigInt, gamma: &BigInt) -> BigInt {
    r.gcd(s).gcd(gamma)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaSplit {
    #[serde(with = "crate::intser")]
    pub gamma_a: BigInt,
    #[serde(with = "crate::intser")]
    pub gamma_b: BigInt,
    #[serde(with = "crate::intser")]
    pub gamma_2: BigInt,
}

/// Splits `γ | 2a₁b₁` as `γ = γ_a·γ_b·γ₂` with `γ_a = gcd(γ, a₁)`,
/// `γ_b = gcd(γ, b₁)` and `γ₂ | 2`.
pub fn gamma_split(gamma: &BigInt, a1: &BigInt, b1: &BigInt) -> Result<GammaSplit, ArithError> {
    let fail = |detail| ArithError::SplitFailure {
        gamma: gamma.clone(),
        a1: a1.clone(),
        b1: b1.clone(),
        detail,
    };
    if !gamma.is_positive() || !a1.is_positive() || !b1.is_positive() {
        return Err(fail("inputs must be positive"));
    }
    let gamma_a = gamma.gcd(a1);
    let gamma_b = gamma.gcd(b1);
    let ab = &gamma_a * &gamma_b;
    if !gamma.is_multiple_of(&ab) {
        return Err(fail("γ_a·γ_b does not divide γ"));
    }
    let gamma_2 = gamma / &ab;
    if !(BigInt::from(2) % &gamma_2).is_zero() {
        return Err(fail("γ does not divide 2a₁b₁"));
    }
    Ok(GammaSplit {
        gamma_a,
        gamma_b,
        gamma_2,
    })
}
