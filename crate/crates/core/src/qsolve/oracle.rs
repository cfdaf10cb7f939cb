//! Bounded brute-force enumeration, used only as an oracle for the exact solver.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ConstraintSet;

/// Machine-width parameters; every intermediate fits in `i128` when
/// `γ, δ, |m| < 2⁴⁰` and `B < 2²⁰`.
struct Small {
    gamma: i128,
    delta: i128,
    m: i128,
    bound: i128,
}

fn small(gamma: &BigInt, delta: &BigInt, m: &BigInt, bound: u64) -> Option<Small> {
    const LIM: i128 = 1 << 40;
    let fit = |v: &BigInt| v.to_i128().filter(|x| x.abs() < LIM);
    if bound >= 1 << 20 {
        return None;
    }
    Some(Small {
        gamma: fit(gamma)?,
        delta: fit(delta)?,
        m: fit(m)?,
        bound: bound as i128,
    })
}

fn exact_sqrt_i128(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    // Float estimate is within a few units for v < 2¹⁰⁰; settle it exactly.
    let v = v as u128;
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    (r * r == v).then_some(r as i128)
}

fn exact_sqrt(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

fn finish(mut out: Vec<(BigInt, BigInt)>, cs: &ConstraintSet) -> Vec<(BigInt, BigInt)> {
    out.retain(|(x, y)| cs.admits(x, y));
    out.sort();
    out.dedup();
    out
}

/// All `(x, y)` with `|x|, |y| ≤ B`, `γx² − δy² = m` and every congruence of
/// `cs`, in lexicographic order. Scans `y`.
pub fn enumerate_bounded(
    gamma: &BigInt,
    delta: &BigInt,
    m: &BigInt,
    cs: &ConstraintSet,
    bound: u64,
) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    if gamma.is_zero() {
        return out;
    }
    if let Some(p) = small(gamma, delta, m, bound) {
        // Only y ≥ 0 in residue classes with γ | m + δy² can contribute.
        let classes: Vec<i128> = (0..p.gamma.min(p.bound + 1))
            .filter(|&r| (p.m + p.delta * r * r).rem_euclid(p.gamma) == 0)
            .collect();
        let step = if p.gamma > p.bound { p.bound + 1 } else { p.gamma };
        for r in classes {
            let mut y = r;
            while y <= p.bound {
                let rhs = p.m + p.delta * y * y;
                if let Some(x) = exact_sqrt_i128(rhs / p.gamma).filter(|&x| x <= p.bound) {
                    for (sx, sy) in [(x, y), (-x, y), (x, -y), (-x, -y)] {
                        out.push((BigInt::from(sx), BigInt::from(sy)));
                    }
                }
                y += step;
            }
        }
    } else {
        let b = BigInt::from(bound);
        let mut y = -b.clone();
        while y <= b {
            let rhs = m + delta * &y * &y;
            if rhs.is_multiple_of(gamma) {
                if let Some(x) = exact_sqrt(&(rhs / gamma)).filter(|x| *x <= b) {
                    out.push((-x.clone(), y.clone()));
                    out.push((x, y.clone()));
                }
            }
            y += 1;
        }
    }
    finish(out, cs)
}

/// Same contract as [`enumerate_bounded`], implemented independently by
/// scanning `x`.
pub fn enumerate_bounded_by_x(
    gamma: &BigInt,
    delta: &BigInt,
    m: &BigInt,
    cs: &ConstraintSet,
    bound: u64,
) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    if delta.is_zero() {
        return out;
    }
    let b = bound as i128;
    match small(gamma, delta, m, bound) {
        Some(p) => {
            for x in -b..=b {
                let num = p.gamma * x * x - p.m;
                if num % p.delta != 0 {
                    continue;
                }
                if let Some(y) = exact_sqrt_i128(num / p.delta).filter(|&y| y <= b) {
                    out.push((BigInt::from(x), BigInt::from(y)));
                    out.push((BigInt::from(x), BigInt::from(-y)));
                }
            }
        }
        None => {
            let bb = BigInt::from(bound);
            let mut x = -bb.clone();
            while x <= bb {
                let num = gamma * &x * &x - m;
                if num.is_multiple_of(delta) {
                    if let Some(y) = exact_sqrt(&(num / delta)).filter(|y| *y <= bb) {
                        out.push((x.clone(), -y.clone()));
                        out.push((x.clone(), y));
                    }
                }
                x += 1;
            }
        }
    }
    finish(out, cs)
}
