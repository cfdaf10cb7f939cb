//! Fundamental solution of `t² − Δu² = 1` by the continued fraction of `√Δ`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Minimal `(t, u)` with `u ≥ 1` and `t² − Δu² = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellUnit {
    #[serde(with = "crate::intser")]
    pub t: BigInt,
    #[serde(with = "crate::intser")]
    pub u: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pell {
    Unit(PellUnit),
    SquareDiscriminant,
}

impl Pell {
    pub fn unit(self) -> Option<PellUnit> {
        match self {
            Pell::Unit(u) => Some(u),
            Pell::SquareDiscriminant => None,
        }
    }
}

pub fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

pub fn pell_fundamental(disc: &BigInt) -> Pell {
    assert!(disc.is_positive(), "Pell discriminant must be positive");
    let a0 = disc.sqrt();
    if &a0 * &a0 == *disc {
        return Pell::SquareDiscriminant;
    }
    // Convergents p/q of √Δ; the first one with p² − Δq² = 1 is minimal.
    let (mut m, mut d, mut a) = (BigInt::zero(), BigInt::one(), a0.clone());
    let (mut p_prev, mut p) = (BigInt::one(), a0.clone());
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    loop {
        if &p * &p - disc * &q * &q == BigInt::one() {
            return Pell::Unit(PellUnit { t: p, u: q });
        }
        m = &d * &a - &m;
        d = (disc - &m * &m) / &d;
        a = (&a0 + &m) / &d;
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
}

/// The automorphism `(x, y) ↦ (tx + δuy, γux + ty)` of `γx² − δy²`.
pub fn act(unit: &PellUnit, gamma: &BigInt, delta: &BigInt, x: &BigInt, y: &BigInt) -> (BigInt, BigInt) {
    (&unit.t * x + delta * &unit.u * y, gamma * &unit.u * x + &unit.t * y)
}
