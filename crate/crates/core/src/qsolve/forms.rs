//! Indefinite binary quadratic forms `ax² + bxy + cy²` with positive non-square
//! discriminant: reduction, reduced cycles, proper equivalence and the
//! classical enumeration of representation orbits.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// 2×2 integer matrix, row-major.
pub type Mat2 = [[BigInt; 2]; 2];

pub fn identity() -> Mat2 {
    [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]]
}

pub fn mat_mul(p: &Mat2, q: &Mat2) -> Mat2 {
    [
        [
            &p[0][0] * &q[0][0] + &p[0][1] * &q[1][0],
            &p[0][0] * &q[0][1] + &p[0][1] * &q[1][1],
        ],
        [
            &p[1][0] * &q[0][0] + &p[1][1] * &q[1][0],
            &p[1][0] * &q[0][1] + &p[1][1] * &q[1][1],
        ],
    ]
}

/// Inverse of a determinant-one matrix.
pub fn inverse_sl2(p: &Mat2) -> Mat2 {
    [[p[1][1].clone(), -&p[0][1]], [-&p[1][0], p[0][0].clone()]]
}

pub fn mat_pow(p: &Mat2, mut e: u64) -> Mat2 {
    let mut acc = identity();
    let mut base = p.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    acc
}

pub fn apply(p: &Mat2, v: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (&p[0][0] * &v.0 + &p[0][1] * &v.1, &p[1][0] * &v.0 + &p[1][1] * &v.1)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Form {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl Form {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Form {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    pub fn content(&self) -> BigInt {
        self.a.gcd(&self.b).gcd(&self.c)
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        &self.a * x * x + &self.b * x * y + &self.c * y * y
    }

    /// The form `(x, y) ↦ F(S·(x, y))`.
    pub fn transform(&self, s: &Mat2) -> Form {
        let (p, q, r, t) = (&s[0][0], &s[0][1], &s[1][0], &s[1][1]);
        Form {
            a: self.eval(p, r),
            b: BigInt::from(2) * &self.a * p * q + &self.b * (p * t + q * r) + BigInt::from(2) * &self.c * r * t,
            c: self.eval(q, t),
        }
    }

    pub fn divide(&self, k: &BigInt) -> Form {
        Form {
            a: &self.a / k,
            b: &self.b / k,
            c: &self.c / k,
        }
    }
}

/// Reduction data for a fixed non-square discriminant `Δ > 0`.
#[derive(Debug, Clone)]
pub struct Reducer {
    disc: BigInt,
    root: BigInt,
}

impl Reducer {
    pub fn new(disc: &BigInt) -> Self {
        assert!(disc.is_positive());
        let root = disc.sqrt();
        assert!(&root * &root != *disc, "discriminant must not be a square");
        Reducer {
            disc: disc.clone(),
            root,
        }
    }

    /// `|√Δ − 2|a|| < b < √Δ`. Comparisons against the irrational `√Δ` are
    /// made through `s = ⌊√Δ⌋`: an integer `n` satisfies `n < √Δ` iff `n ≤ s`.
    pub fn is_reduced(&self, f: &Form) -> bool {
        let s = &self.root;
        let two_a = BigInt::from(2) * f.a.abs();
        f.b.is_positive() && &f.b <= s && &(&two_a - &f.b) <= s && &(&two_a + &f.b) > s
    }

    /// One reduction step `ρ`, returning the new form and `S` with `F∘S = ρ(F)`.
    pub fn rho(&self, f: &Form) -> (Form, Mat2) {
        let cc = f.c.abs();
        let two_c = BigInt::from(2) * &cc;
        let lo = if cc > self.root {
            BigInt::one() - &cc
        } else {
            &self.root + 1 - &two_c
        };
        let r = &lo + (-&f.b - &lo).mod_floor(&two_c);
        let twice = BigInt::from(2) * &f.c;
        let t = (&r + &f.b) / &twice;
        debug_assert!((&r + &f.b).is_multiple_of(&twice));
        let next = Form {
            a: f.c.clone(),
            c: (&r * &r - &self.disc) / (BigInt::from(4) * &f.c),
            b: r,
        };
        (next, [[BigInt::zero(), -BigInt::one()], [BigInt::one(), t]])
    }

    /// Applies `ρ` until the form is reduced.
    pub fn reduce(&self, f: &Form) -> (Form, Mat2) {
        let mut cur = f.clone();
        let mut acc = identity();
        while !self.is_reduced(&cur) {
            let (next, step) = self.rho(&cur);
            acc = mat_mul(&acc, &step);
            cur = next;
        }
        (cur, acc)
    }
}

/// The `ρ`-cycle of reduced forms properly equivalent to a base form.
#[derive(Debug, Clone)]
pub struct Cycle {
    reducer: Reducer,
    base: Form,
    /// Reduced form ↦ `S` with `base∘S = form`.
    members: HashMap<Form, Mat2>,
    len: usize,
}

impl Cycle {
    pub fn new(base: &Form) -> Self {
        let reducer = Reducer::new(&base.discriminant());
        let (start, to_start) = reducer.reduce(base);
        let mut members = HashMap::new();
        let mut cur = start.clone();
        let mut acc = to_start;
        loop {
            members.insert(cur.clone(), acc.clone());
            let (next, step) = reducer.rho(&cur);
            acc = mat_mul(&acc, &step);
            cur = next;
            if cur == start {
                break;
            }
        }
        let len = members.len();
        Cycle {
            reducer,
            base: base.clone(),
            members,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn base(&self) -> &Form {
        &self.base
    }

    /// `S ∈ SL₂(ℤ)` with `base∘S = g`, if `g` is properly equivalent to the base.
    pub fn equivalence_to(&self, g: &Form) -> Option<Mat2> {
        let (g_red, to_g_red) = self.reducer.reduce(g);
        let s = self.members.get(&g_red)?;
        Some(mat_mul(s, &inverse_sl2(&to_g_red)))
    }
}

/// All `b ∈ [0, 2|m|)` with `b² ≡ Δ (mod 4|m|)`.
pub fn sqrt_disc_mod(disc: &BigInt, m: &BigInt) -> Vec<BigInt> {
    let n = m.abs();
    let four_n = BigInt::from(4) * &n;
    if let (Some(n64), Some(mod64)) = (n.to_u64(), four_n.to_u64()) {
        if mod64 <= u32::MAX as u64 * 2 {
            let target = disc.mod_floor(&four_n).to_u64().unwrap();
            let modulus = mod64 as u128;
            return (0..2 * n64)
                .filter(|&b| ((b as u128 * b as u128) % modulus) as u64 == target)
                .map(BigInt::from)
                .collect();
        }
    }
    let mut out = Vec::new();
    let target = disc.mod_floor(&four_n);
    let mut b = BigInt::zero();
    let end = BigInt::from(2) * &n;
    while b < end {
        if (&b * &b).mod_floor(&four_n) == target {
            out.push(b.clone());
        }
        b += 1;
    }
    out
}

/// One representative `(x, y)` of a class of solutions of `F(x, y) = m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRep {
    pub x: BigInt,
    pub y: BigInt,
    /// `gcd(x, y)`.
    pub scale: BigInt,
    /// Root `b mod 2|m/scale²|` labelling the primitive orbit.
    pub root: BigInt,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrbitStats {
    pub roots_tested: usize,
    pub cycle_len: usize,
}

/// Representatives of every `Aut⁺(F)`-orbit of solutions to `F(x, y) = m` for a
/// primitive form of positive non-square discriminant.
///
/// Primitive solutions up to `Aut⁺(F)` correspond to the roots `b` of
/// `b² ≡ Δ (mod 4|m|)` for which `[m, b, (b² − Δ)/4m]` is properly equivalent
/// to `F`; imprimitive ones are `g` times a primitive solution of `m/g²`.
pub fn orbit_representatives(f: &Form, m: &BigInt) -> (Vec<OrbitRep>, OrbitStats) {
    assert!(!m.is_zero());
    debug_assert!(f.content().is_one());
    let disc = f.discriminant();
    let cycle = Cycle::new(f);
    let mut stats = OrbitStats {
        roots_tested: 0,
        cycle_len: cycle.len(),
    };
    let mut reps = Vec::new();
    let mut g = BigInt::one();
    while &g * &g <= m.abs() {
        let g2 = &g * &g;
        if m.is_multiple_of(&g2) {
            let mp = m / &g2;
            for root in sqrt_disc_mod(&disc, &mp) {
                stats.roots_tested += 1;
                let c = (&root * &root - &disc) / (BigInt::from(4) * &mp);
                let target = Form {
                    a: mp.clone(),
                    b: root.clone(),
                    c,
                };
                if let Some(s) = cycle.equivalence_to(&target) {
                    let (x, y) = (&g * &s[0][0], &g * &s[1][0]);
                    debug_assert_eq!(f.eval(&x, &y), *m);
                    reps.push(OrbitRep {
                        x,
                        y,
                        scale: g.clone(),
                        root,
                    });
                }
            }
        }
        g += 1;
    }
    (reps, stats)
}

/// Fundamental proper automorphism of a primitive form from the minimal
/// solution of `t² − Δu² = 4`, given as `(t, u)`.
pub fn automorphism(f: &Form, t: &BigInt, u: &BigInt) -> Mat2 {
    let two = BigInt::from(2);
    [[(t - &f.b * u) / &two, -(&f.c * u)], [&f.a * u, (t + &f.b * u) / &two]]
}

/// Positive and negative divisors of a nonzero integer, ascending.
pub fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    assert!(!n.is_zero());
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = BigInt::one();
    while &i * &i <= n {
        if n.is_multiple_of(&i) {
            let j = &n / &i;
            if j != i {
                large.push(j);
            }
            small.push(i.clone());
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    let mut all: Vec<BigInt> = small.iter().rev().map(|d| -d).collect();
    all.extend(small);
    all
}

/// Every solution of `γx² − δy² = m` when `γδ = k²` is a perfect square.
/// The form splits as `γ·F = (γx − ky)(γx + ky)`, so there are finitely many.
pub fn split_form_solutions(gamma: &BigInt, delta: &BigInt, m: &BigInt) -> Vec<(BigInt, BigInt)> {
    let k = (gamma * delta).sqrt();
    debug_assert_eq!(&k * &k, gamma * delta);
    let n = gamma * m;
    let two_gamma = BigInt::from(2) * gamma;
    let two_k = BigInt::from(2) * &k;
    let mut out = Vec::new();
    for u in divisors(&n) {
        let v = &n / &u;
        let sum = &u + &v;
        let diff = &v - &u;
        if sum.is_multiple_of(&two_gamma) && diff.is_multiple_of(&two_k) {
            let (x, y) = (sum / &two_gamma, diff / &two_k);
            debug_assert_eq!(gamma * &x * &x - delta * &y * &y, *m);
            out.push((x, y));
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn transform_composes() {
        let f = Form::new(3, 1, -5);
        let s = [[b(2), b(1)], [b(1), b(1)]];
        let t = [[b(1), b(-3)], [b(0), b(1)]];
        assert_eq!(f.transform(&s).transform(&t), f.transform(&mat_mul(&s, &t)));
        assert_eq!(f.transform(&s).discriminant(), f.discriminant());
    }

    #[test]
    fn rho_steps_are_proper_equivalences() {
        let f = Form::new(7, 3, -11);
        let red = Reducer::new(&f.discriminant());
        let (g, s) = red.rho(&f);
        assert_eq!(f.transform(&s), g);
        let (r, s) = red.reduce(&f);
        assert!(red.is_reduced(&r));
        assert_eq!(f.transform(&s), r);
    }

    #[test]
    fn reduced_forms_stay_reduced_and_cycle_back() {
        for (a, bb, c) in [(1, 0, -2), (1, 0, -109), (3, 1, -5), (2, 0, -7), (5, 4, -3)] {
            let f = Form::new(a, bb, c);
            let cyc = Cycle::new(&f);
            for (g, s) in &cyc.members {
                assert!(cyc.reducer.is_reduced(g));
                assert_eq!(f.transform(s), *g);
            }
        }
    }

    #[test]
    fn equivalence_found_for_random_transforms() {
        let f = Form::new(2, 1, -4);
        let cyc = Cycle::new(&f);
        let s = [[b(5), b(7)], [b(2), b(3)]];
        let g = f.transform(&s);
        let found = cyc.equivalence_to(&g).expect("equivalent");
        assert_eq!(f.transform(&found), g);
    }

    #[test]
    fn x2_minus_3y2_does_not_represent_minus_one() {
        // x² − 3y² ≡ −1 (mod 3) has no solution; forms of disc 12: [1,0,−3] and [−1,0,3].
        let f = Form::new(1, 0, -3);
        let cyc = Cycle::new(&f);
        assert!(cyc.equivalence_to(&Form::new(-1, 0, 3)).is_none());
        let (reps, _) = orbit_representatives(&f, &b(-1));
        assert!(reps.is_empty());
        let (reps, _) = orbit_representatives(&f, &b(-2));
        assert!(!reps.is_empty());
    }

    #[test]
    fn orbit_representatives_solve_the_equation() {
        let f = Form::new(1, 0, -7);
        for m in [-6i64, -3, 2, 9, 18, 21, 57] {
            let (reps, _) = orbit_representatives(&f, &b(m));
            for r in reps {
                assert_eq!(f.eval(&r.x, &r.y), b(m));
            }
        }
    }

    #[test]
    fn automorphism_preserves_form() {
        let f = Form::new(3, 1, -5);
        assert_eq!(f.discriminant(), b(61));
        // t² − 61u² = 4: (1523, 195)
        let u = automorphism(&f, &b(1523), &b(195));
        assert_eq!(f.transform(&u), f);
    }

    #[test]
    fn split_form_examples() {
        // x² − y² = 8
        let sols = split_form_solutions(&b(1), &b(1), &b(8));
        assert_eq!(sols, vec![(b(-3), b(-1)), (b(-3), b(1)), (b(3), b(-1)), (b(3), b(1))]);
        // 2x² − 2y² = 4 has no solution
        assert!(split_form_solutions(&b(2), &b(2), &b(4)).is_empty());
        // 2x² − 2y² = 8: (±2, 0)
        assert_eq!(
            split_form_solutions(&b(2), &b(2), &b(8)),
            vec![(b(-2), b(0)), (b(2), b(0))]
        );
    }

    #[test]
    fn divisors_are_signed_and_sorted() {
        assert_eq!(
            divisors(&b(12)),
            [-12, -6, -4, -3, -2, -1, 1, 2, 3, 4, 6, 12].map(b).to_vec()
        );
    }

    #[test]
    fn square_roots_of_discriminant() {
        assert_eq!(sqrt_disc_mod(&b(8), &b(2)), vec![b(0)]);
        assert_eq!(sqrt_disc_mod(&b(12), &b(3)), vec![b(0)]);
        assert_eq!(sqrt_disc_mod(&b(5), &b(1)), vec![b(1)]);
    }
}
