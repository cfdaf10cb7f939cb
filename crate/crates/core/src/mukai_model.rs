//! Period-level model of `ν(d₁, d₂)` inside `U⁽¹⁾ ⊕ U⁽²⁾`.
//!
//! Basis `(e₁, e₂, f₁, f₂)` with `e₁·e₂ = −1`, `f₁·f₂ = 1`, all other pairings
//! zero. `X` has Picard lattice `ℤH`, `H = abc²f₁ + f₂`, and transcendental
//! generator `t = −abc²f₁ + f₂`. For a primitive isotropic `v` the lattice
//! `v^⊥/ℤv` is computed by unimodular column reduction; the signature-(2, 18)
//! summand is common to every lattice compared here and is left out.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsolve::forms::{mat_mul, Mat2};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("vector is not isotropic (square {0})")]
    NotIsotropic(BigInt),
    #[error("vector is not primitive")]
    NotPrimitive,
}

/// `e₁·E1 + e₂·E2 + f₁·F1 + f₂·F2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelVector {
    #[serde(with = "crate::intser")]
    pub e1: BigInt,
    #[serde(with = "crate::intser")]
    pub e2: BigInt,
    #[serde(with = "crate::intser")]
    pub f1: BigInt,
    #[serde(with = "crate::intser")]
    pub f2: BigInt,
}

impl ModelVector {
    pub fn new(e1: impl Into<BigInt>, e2: impl Into<BigInt>, f1: impl Into<BigInt>, f2: impl Into<BigInt>) -> Self {
        ModelVector {
            e1: e1.into(),
            e2: e2.into(),
            f1: f1.into(),
            f2: f2.into(),
        }
    }

    fn from_coords(c: [BigInt; 4]) -> Self {
        let [e1, e2, f1, f2] = c;
        ModelVector { e1, e2, f1, f2 }
    }

    pub fn coords(&self) -> [BigInt; 4] {
        [self.e1.clone(), self.e2.clone(), self.f1.clone(), self.f2.clone()]
    }

    pub fn dot(&self, o: &ModelVector) -> BigInt {
        -(&self.e1 * &o.e2 + &self.e2 * &o.e1) + &self.f1 * &o.f2 + &self.f2 * &o.f1
    }

    pub fn square(&self) -> BigInt {
        self.dot(self)
    }

    pub fn content(&self) -> BigInt {
        self.e1.gcd(&self.e2).gcd(&self.f1).gcd(&self.f2)
    }

    fn combine(terms: &[(&BigInt, &ModelVector)]) -> ModelVector {
        let mut out = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (k, v) in terms {
            for (o, c) in out.iter_mut().zip(v.coords()) {
                *o += *k * c;
            }
        }
        ModelVector::from_coords(out)
    }
}

fn require_coprime(name: &str, x: &BigInt, y: &BigInt) -> Result<(), ModelError> {
    let g = x.gcd(y);
    if g.is_one() {
        Ok(())
    } else {
        Err(ModelError::PreconditionViolated(format!("gcd{name} = {g} ≠ 1")))
    }
}

/// Model vector of `(d₁²ac, d₁d₂H, d₂²bc)`.
pub fn build_v(a: &BigInt, b: &BigInt, c: &BigInt, d1: &BigInt, d2: &BigInt) -> Result<ModelVector, ModelError> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d1", d1), ("d2", d2)] {
        if !v.is_positive() {
            return Err(ModelError::PreconditionViolated(format!(
                "{name} = {v} must be positive"
            )));
        }
    }
    require_coprime("(a, b)", a, b)?;
    require_coprime("(d1, bc)", d1, &(b * c))?;
    require_coprime("(d2, ac)", d2, &(a * c))?;
    require_coprime("(d1, d2)", d1, d2)?;
    let d = d1 * d2;
    Ok(ModelVector {
        e1: d1 * d1 * a * c,
        e2: d2 * d2 * b * c,
        f1: &d * a * b * c * c,
        f2: d,
    })
}

/// Unimodular `U` (with inverse) such that `row·U = (g, 0, …, 0)`.
fn column_reduce(row: &[BigInt]) -> (BigInt, Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let n = row.len();
    let ident = |n: usize| -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect()
    };
    let mut r = row.to_vec();
    let mut u = ident(n);
    let mut uinv = ident(n);
    for j in 1..n {
        if r[j].is_zero() {
            continue;
        }
        let eg = r[0].extended_gcd(&r[j]);
        let (g, x, y) = (eg.gcd, eg.x, eg.y);
        let (p, q) = (&r[0] / &g, &r[j] / &g);
        // Columns 0, j ← (x·c₀ + y·c_j, −q·c₀ + p·c_j); det = 1.
        for row_u in u.iter_mut() {
            let (c0, cj) = (row_u[0].clone(), row_u[j].clone());
            row_u[0] = &x * &c0 + &y * &cj;
            row_u[j] = -&q * &c0 + &p * &cj;
        }
        // Inverse acts on rows 0, j with [[p, q], [−y, x]].
        let (r0, rj) = (uinv[0].clone(), uinv[j].clone());
        for k in 0..n {
            uinv[0][k] = &p * &r0[k] + &q * &rj[k];
            uinv[j][k] = -&y * &r0[k] + &x * &rj[k];
        }
        r[0] = g;
        r[j] = BigInt::zero();
    }
    if r[0].is_negative() {
        for row_u in u.iter_mut() {
            row_u[0] = -row_u[0].clone();
        }
        for e in uinv[0].iter_mut() {
            *e = -e.clone();
        }
        r[0] = -r[0].clone();
    }
    (r[0].clone(), u, uinv)
}

fn mat_vec(m: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(BigInt::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn gram_of(q: &[ModelVector; 2]) -> Mat2 {
    [[q[0].square(), q[0].dot(&q[1])], [q[1].dot(&q[0]), q[1].square()]]
}

fn form(g: &Mat2, u: &(BigInt, BigInt), w: &(BigInt, BigInt)) -> BigInt {
    &u.0 * (&g[0][0] * &w.0 + &g[0][1] * &w.1) + &u.1 * (&g[1][0] * &w.0 + &g[1][1] * &w.1)
}

/// `v^⊥/ℤv` with its Picard and transcendental generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientReport {
    /// Lifts of the quotient basis to `v^⊥`.
    pub basis: [ModelVector; 2],
    #[serde(with = "crate::intser::matrix2")]
    pub gram: Mat2,
    /// Columns `(e, f)` with `e² = f² = 0`, `e·f = 1`, in quotient coordinates.
    #[serde(with = "crate::intser::matrix2")]
    pub hyperbolic: Mat2,
    /// Transcendental class `t` of `X`; absent when `v` has no `U⁽²⁾` part.
    pub t: Option<ModelVector>,
    /// Image of `t` in quotient coordinates.
    #[serde(with = "crate::intser::option_pair")]
    pub t_bar: Option<(BigInt, BigInt)>,
    /// Divisibility of `t̄`; `t̃ = t̄/index`.
    #[serde(with = "crate::intser::option")]
    pub index: Option<BigInt>,
    #[serde(with = "crate::intser::option_pair")]
    pub t_tilde: Option<(BigInt, BigInt)>,
    /// Primitive generator of `t̃^⊥`, first nonzero coordinate positive.
    #[serde(with = "crate::intser::option_pair")]
    pub h: Option<(BigInt, BigInt)>,
    #[serde(with = "crate::intser::option")]
    pub h_sq: Option<BigInt>,
}

impl QuotientReport {
    pub fn det(&self) -> BigInt {
        &self.gram[0][0] * &self.gram[1][1] - &self.gram[0][1] * &self.gram[1][0]
    }
}

/// Explicit `P` with `Pᵀ·G·P = [[0, 1], [1, 0]]`, for an even `G` of
/// determinant `−1`.
pub fn hyperbolic_basis(g: &Mat2) -> Option<Mat2> {
    let det = &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0];
    if !(-det).is_one() || g[0][0].is_odd() || g[1][1].is_odd() || g[0][1] != g[1][0] {
        return None;
    }
    let e = if g[0][0].is_zero() {
        (BigInt::one(), BigInt::zero())
    } else {
        // a·x² + 2b·xy + c·y² = 0 at x/y = (1 − b)/a.
        let (x, y) = (BigInt::one() - &g[0][1], g[0][0].clone());
        let k = x.gcd(&y);
        (x / &k, y / k)
    };
    let l = (&g[0][0] * &e.0 + &g[0][1] * &e.1, &g[1][0] * &e.0 + &g[1][1] * &e.1);
    let eg = l.0.extended_gcd(&l.1);
    if !eg.gcd.is_one() {
        return None;
    }
    let u = (eg.x, eg.y);
    let half = form(g, &u, &u) / 2;
    let f: (BigInt, BigInt) = (&u.0 - &half * &e.0, &u.1 - &half * &e.1);
    let p: Mat2 = [[e.0.clone(), f.0.clone()], [e.1.clone(), f.1.clone()]];
    let pt: Mat2 = [[e.0, e.1], [f.0, f.1]];
    let check = mat_mul(&mat_mul(&pt, g), &p);
    let u_form: Mat2 = [[BigInt::zero(), BigInt::one()], [BigInt::one(), BigInt::zero()]];
    (check == u_form).then_some(p)
}

/// Computes `v^⊥/ℤv`, the image `t̄` of `t`, its divisibility and the
/// generator `h` of `t̃^⊥`.
pub fn perp_quotient(v: &ModelVector) -> Result<QuotientReport, ModelError> {
    let sq = v.square();
    if !sq.is_zero() {
        return Err(ModelError::NotIsotropic(sq));
    }
    if !v.content().is_one() {
        return Err(ModelError::NotPrimitive);
    }
    // v·u = Σ cᵢuᵢ.
    let c = [-v.e2.clone(), -v.e1.clone(), v.f2.clone(), v.f1.clone()];
    let (g, u, uinv) = column_reduce(&c);
    debug_assert!(g.is_one(), "unimodular lattice, primitive v");
    let kernel: Vec<ModelVector> = (1..4)
        .map(|j| ModelVector::from_coords([u[0][j].clone(), u[1][j].clone(), u[2][j].clone(), u[3][j].clone()]))
        .collect();
    let kernel_coords = |w: &ModelVector| -> Vec<BigInt> { mat_vec(&uinv, &w.coords())[1..].to_vec() };

    // Re-basis v^⊥ so that its first vector is v: kᵀ·W = (1, 0, 0) gives
    // the basis K·(W⁻¹)ᵀ.
    let k = kernel_coords(v);
    let (gk, w_mat, winv) = column_reduce(&k);
    debug_assert!(gk.is_one());
    let lift = |col: usize| -> ModelVector {
        // Column `col` of (W⁻¹)ᵀ is row `col` of W⁻¹.
        let coeffs = &winv[col];
        ModelVector::combine(&[
            (&coeffs[0], &kernel[0]),
            (&coeffs[1], &kernel[1]),
            (&coeffs[2], &kernel[2]),
        ])
    };
    debug_assert_eq!(lift(0), *v);
    let basis = [lift(1), lift(2)];
    let gram = gram_of(&basis);
    let hyperbolic = hyperbolic_basis(&gram)
        .ok_or_else(|| ModelError::PreconditionViolated(format!("quotient Gram {gram:?} is not congruent to U")))?;

    let mut report = QuotientReport {
        basis,
        gram,
        hyperbolic,
        t: None,
        t_bar: None,
        index: None,
        t_tilde: None,
        h: None,
        h_sq: None,
    };
    // U⁽²⁾ part of v is a multiple of p·f₁ + q·f₂; t = −p·f₁ + q·f₂.
    let kf = v.f1.gcd(&v.f2);
    if kf.is_zero() {
        return Ok(report);
    }
    let t = ModelVector::new(0, 0, -(&v.f1 / &kf), &v.f2 / &kf);
    debug_assert!(t.dot(v).is_zero());
    // Coordinates of t in the basis (v, q₁, q₂): Wᵀ·κ.
    let kappa = kernel_coords(&t);
    let coord = |i: usize| -> BigInt { (0..3).fold(BigInt::zero(), |acc, r| acc + &w_mat[r][i] * &kappa[r]) };
    let t_bar = (coord(1), coord(2));
    let index = t_bar.0.gcd(&t_bar.1);
    let t_tilde = (&t_bar.0 / &index, &t_bar.1 / &index);
    let row = (
        &report.gram[0][0] * &t_tilde.0 + &report.gram[0][1] * &t_tilde.1,
        &report.gram[1][0] * &t_tilde.0 + &report.gram[1][1] * &t_tilde.1,
    );
    let hk = row.0.gcd(&row.1);
    let mut h = (&row.1 / &hk, -(&row.0 / &hk));
    if h.0.is_negative() || (h.0.is_zero() && h.1.is_negative()) {
        h = (-h.0, -h.1);
    }
    let h_sq = form(&report.gram, &h, &h);
    report.t = Some(t);
    report.t_bar = Some(t_bar);
    report.index = Some(index);
    report.t_tilde = Some(t_tilde);
    report.h = Some(h);
    report.h_sq = Some(h_sq);
    Ok(report)
}

/// Outcome of [`verify_nu`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuReport {
    pub base: QuotientReport,
    pub image: QuotientReport,
    /// Isometry from the base quotient to the image quotient, in quotient
    /// coordinates, sending `t̃ ↦ t_sign·t̃₁`.
    #[serde(with = "crate::intser::matrix2")]
    pub isometry: Mat2,
    pub t_sign: i8,
    pub nu_ok: bool,
}

fn columns(p: &(BigInt, BigInt), q: &(BigInt, BigInt)) -> Mat2 {
    [[p.0.clone(), q.0.clone()], [p.1.clone(), q.1.clone()]]
}

fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0].clone(), m[1][0].clone()], [m[0][1].clone(), m[1][1].clone()]]
}

/// `Φ` with `Φ·[h t̃] = [h₁ ±t̃₁]`, if integral, unimodular and isometric.
fn match_generators(base: &QuotientReport, image: &QuotientReport, sh: i8, st: i8) -> Option<Mat2> {
    let (h0, t0) = (base.h.as_ref()?, base.t_tilde.as_ref()?);
    let (h1, t1) = (image.h.as_ref()?, image.t_tilde.as_ref()?);
    let s = |k: i8, p: &(BigInt, BigInt)| (BigInt::from(k) * &p.0, BigInt::from(k) * &p.1);
    let src = columns(h0, t0);
    let dst = columns(&s(sh, h1), &s(st, t1));
    let det = &src[0][0] * &src[1][1] - &src[0][1] * &src[1][0];
    if det.is_zero() {
        return None;
    }
    // Φ = dst·adj(src)/det.
    let adj: Mat2 = [
        [src[1][1].clone(), -src[0][1].clone()],
        [-src[1][0].clone(), src[0][0].clone()],
    ];
    let num = mat_mul(&dst, &adj);
    if num.iter().flatten().any(|e| !e.is_multiple_of(&det)) {
        return None;
    }
    let phi = num.map(|r| r.map(|e| e / &det));
    let phi_det = &phi[0][0] * &phi[1][1] - &phi[0][1] * &phi[1][0];
    if !phi_det.abs().is_one() {
        return None;
    }
    let pulled = mat_mul(&mat_mul(&transpose(&phi), &image.gram), &phi);
    (pulled == base.gram).then_some(phi)
}

/// Checks that `v^⊥/ℤv` for `(1, 1)` and for `(d₁, d₂)` are isometric by a
/// map carrying the transcendental generator to itself up to sign.
pub fn verify_nu(a: &BigInt, b: &BigInt, c: &BigInt, d1: &BigInt, d2: &BigInt) -> Result<NuReport, ModelError> {
    let one = BigInt::one();
    let base = perp_quotient(&build_v(a, b, c, &one, &one)?)?;
    let image = perp_quotient(&build_v(a, b, c, d1, d2)?)?;
    for (sh, st) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        if let Some(phi) = match_generators(&base, &image, sh, st) {
            return Ok(NuReport {
                base,
                image,
                isometry: phi,
                t_sign: st,
                nu_ok: true,
            });
        }
    }
    let zero: Mat2 = [[BigInt::zero(), BigInt::zero()], [BigInt::zero(), BigInt::zero()]];
    Ok(NuReport {
        base,
        image,
        isometry: zero,
        t_sign: 0,
        nu_ok: false,
    })
}

/// Change of quotient basis `P` maps the Gram to `U`; exposed for reports.
pub fn to_hyperbolic(report: &QuotientReport) -> Mat2 {
    let p = &report.hyperbolic;
    mat_mul(&mat_mul(&transpose(p), &report.gram), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn v(a: i64, bb: i64, c: i64, d1: i64, d2: i64) -> Result<ModelVector, ModelError> {
        build_v(&b(a), &b(bb), &b(c), &b(d1), &b(d2))
    }

    #[test]
    fn build_examples() {
        assert_eq!(v(2, 3, 1, 1, 1).unwrap(), ModelVector::new(2, 3, 6, 1));
        assert_eq!(v(1, 1, 2, 3, 1).unwrap(), ModelVector::new(18, 2, 12, 3));
        assert_eq!(v(1, 1, 1, 1, 1).unwrap(), ModelVector::new(1, 1, 1, 1));
        for w in [v(2, 3, 1, 1, 1), v(1, 1, 2, 3, 1), v(3, 5, 2, 1, 7)] {
            assert_eq!(w.unwrap().square(), b(0));
        }
        assert!(matches!(v(1, 2, 1, 2, 1), Err(ModelError::PreconditionViolated(_))));
    }

    #[test]
    fn quotient_examples() {
        let r = perp_quotient(&v(2, 3, 1, 1, 1).unwrap()).unwrap();
        assert_eq!(r.det(), b(-1));
        assert_eq!(r.h_sq.as_ref(), Some(&b(12)));
        assert_eq!(r.index.as_ref(), Some(&b(1)));

        let r = perp_quotient(&v(1, 1, 2, 1, 1).unwrap()).unwrap();
        assert_eq!(r.index.as_ref(), Some(&b(2)));
        assert_eq!(r.h_sq.as_ref(), Some(&b(2)));

        let r = perp_quotient(&ModelVector::new(1, 0, 0, 0)).unwrap();
        assert_eq!(r.det(), b(-1));
        assert!(r.t.is_none());
    }

    #[test]
    fn quotient_rejects_bad_vectors() {
        assert!(matches!(
            perp_quotient(&ModelVector::new(1, 1, 0, 0)),
            Err(ModelError::NotIsotropic(_))
        ));
        assert!(matches!(
            perp_quotient(&ModelVector::new(2, 0, 0, 0)),
            Err(ModelError::NotPrimitive)
        ));
    }

    #[test]
    fn hyperbolic_basis_is_explicit() {
        for g in [
            [[0, 1], [1, 0]],
            [[2, 1], [1, 0]],
            [[2, 3], [3, 4]],
            [[-2, 1], [1, 0]],
            [[0, -1], [-1, 0]],
        ] {
            let g: Mat2 = g.map(|r| r.map(b));
            let p = hyperbolic_basis(&g).unwrap();
            let u: Mat2 = [[b(0), b(1)], [b(1), b(0)]];
            assert_eq!(mat_mul(&mat_mul(&transpose(&p), &g), &p), u);
        }
        assert!(hyperbolic_basis(&[[b(2), b(0)], [b(0), b(-2)]]).is_none());
    }

    #[test]
    fn hand_bases_span_the_quotient() {
        // α = e₁ + bc·f₁, β = e₂ + ac·f₁, t = −abc²·f₁ + f₂ span v^⊥ and
        // ᾱ, β̄ form a hyperbolic pair.
        let (a, bb, c) = (2, 3, 2);
        let w = v(a, bb, c, 1, 1).unwrap();
        let alpha = ModelVector::new(1, 0, bb * c, 0);
        let beta = ModelVector::new(0, 1, a * c, 0);
        let t = ModelVector::new(0, 0, -a * bb * c * c, 1);
        for x in [&alpha, &beta, &t] {
            assert_eq!(x.dot(&w), b(0));
        }
        assert_eq!(
            ModelVector::combine(&[(&b(a * c), &alpha), (&b(bb * c), &beta), (&b(1), &t)]),
            w
        );
        assert_eq!((alpha.square(), beta.square(), alpha.dot(&beta)), (b(0), b(0), b(-1)));
        let r = perp_quotient(&w).unwrap();
        assert_eq!(r.index.as_ref(), Some(&b(c)));
        assert_eq!(r.h_sq.as_ref(), Some(&b(2 * a * bb)));
    }

    #[test]
    fn nu_examples() {
        assert!(verify_nu(&b(1), &b(1), &b(2), &b(3), &b(1)).unwrap().nu_ok);
        assert!(verify_nu(&b(2), &b(3), &b(1), &b(1), &b(5)).unwrap().nu_ok);
        assert!(matches!(
            verify_nu(&b(1), &b(2), &b(1), &b(2), &b(1)),
            Err(ModelError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn report_json_has_plain_integers() {
        let r = perp_quotient(&v(2, 3, 1, 1, 1).unwrap()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains(r#""h_sq":12"#), "{text}");
        assert!(text.contains(r#""index":1"#), "{text}");
        assert_eq!(to_hyperbolic(&r), [[b(0), b(1)], [b(1), b(0)]]);
    }
}
