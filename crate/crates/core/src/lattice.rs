//! The rank-2 even hyperbolic lattice `N` containing a primitive polarization `H̃`.
//!
//! With `M = 2·n_half/γ` and `f = f(H̃)` a generator of `H̃^⊥`, every vector is
//! written `z = (x·H̃ + y·f)/M` with `x ≡ μ·y (mod M)`. Then
//! `z·z' = (γxx' − δyy')/M`, `H̃ = (M, 0)`, `f = (0, M)` and the glue vector is
//! `w = (μ, 1)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single failed lattice invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    NonPositiveNHalf,
    NonPositiveGamma,
    NonPositiveDelta,
    GammaDivisibility,
    MuNotUnit,
    DeltaCongruence,
    GramNotEven,
    Determinant,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::NonPositiveNHalf => "n_half positivity",
            Violation::NonPositiveGamma => "gamma positivity",
            Violation::NonPositiveDelta => "delta positivity",
            Violation::GammaDivisibility => "gamma divides 2*n_half",
            Violation::MuNotUnit => "mu unit modulo M",
            Violation::DeltaCongruence => "delta congruence",
            Violation::GramNotEven => "gram evenness",
            Violation::Determinant => "determinant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("invariant: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))]
    Invalid(Vec<Violation>),
    #[error("vector ({x}, {y}) violates x ≡ μy (mod {modulus})")]
    NotInLattice { x: BigInt, y: BigInt, modulus: BigInt },
    #[error("pairing numerator {numerator} is not divisible by {modulus}")]
    IntegralityFailure { numerator: BigInt, modulus: BigInt },
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix has an odd diagonal entry")]
    NotEven,
    #[error("gram matrix determinant {det} is not negative")]
    NotHyperbolic { det: BigInt },
    #[error("polarization vector is not primitive")]
    NotPrimitivePolarization,
    #[error("polarization square {square} is not positive")]
    NotPositive { square: BigInt },
}

/// A vector of `N` in `(x, y)` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeVector {
    #[serde(with = "crate::intser")]
    pub x: BigInt,
    #[serde(with = "crate::intser")]
    pub y: BigInt,
}

impl LatticeVector {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        LatticeVector {
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn zero() -> Self {
        LatticeVector::new(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        }
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    pub fn scale(&self, k: &BigInt) -> LatticeVector {
        LatticeVector {
            x: &self.x * k,
            y: &self.y * k,
        }
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector {
            x: -&self.x,
            y: -&self.y,
        }
    }

    /// Exact coordinate-wise division, `None` if `k` does not divide both.
    pub fn div_exact(&self, k: &BigInt) -> Option<LatticeVector> {
        if k.is_zero() || !self.x.is_multiple_of(k) || !self.y.is_multiple_of(k) {
            return None;
        }
        Some(LatticeVector {
            x: &self.x / k,
            y: &self.y / k,
        })
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The pair `H̃ ∈ N` in its `(γ, δ, μ)` presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolarizedLattice {
    #[serde(with = "crate::intser")]
    pub n_half: BigInt,
    #[serde(with = "crate::intser")]
    pub gamma: BigInt,
    #[serde(with = "crate::intser")]
    pub delta: BigInt,
    #[serde(with = "crate::intser")]
    pub mu: BigInt,
}

/// Outcome of [`PolarizedLattice::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeReport {
    #[serde(with = "crate::intser")]
    pub modulus: BigInt,
    #[serde(with = "crate::intser")]
    pub mu_canonical: BigInt,
    /// Gram matrix on `{H̃, w}` with `w = (μ'·H̃ + f)/M`, `μ'` canonical.
    #[serde(with = "crate::intser::matrix2")]
    pub gram: [[BigInt; 2]; 2],
}

/// `min(μ mod M, −μ mod M)`.
pub fn canonical_mu(mu: &BigInt, modulus: &BigInt) -> BigInt {
    let m0 = mu.mod_floor(modulus);
    let m1 = (-mu).mod_floor(modulus);
    m0.min(m1)
}

impl PolarizedLattice {
    pub fn new(
        n_half: impl Into<BigInt>,
        gamma: impl Into<BigInt>,
        delta: impl Into<BigInt>,
        mu: impl Into<BigInt>,
    ) -> Self {
        PolarizedLattice {
            n_half: n_half.into(),
            gamma: gamma.into(),
            delta: delta.into(),
            mu: mu.into(),
        }
    }

    /// `M = 2·n_half/γ` (floored if `γ ∤ 2·n_half`; validate first).
    pub fn modulus(&self) -> BigInt {
        (BigInt::from(2) * &self.n_half) / &self.gamma
    }

    fn gram_for(&self, mu: &BigInt) -> Option<[[BigInt; 2]; 2]> {
        let m = self.modulus();
        let num = &self.gamma * mu * mu - &self.delta;
        if !num.is_multiple_of(&m) {
            return None;
        }
        let off = &self.gamma * mu;
        Some([[BigInt::from(2) * &self.n_half, off.clone()], [off, num / &m]])
    }

    /// Gram matrix on the basis `{H̃, w}` using the stored `μ`.
    pub fn gram(&self) -> Result<[[BigInt; 2]; 2], LatticeError> {
        self.validate()?;
        Ok(self.gram_for(&self.mu).expect("validated"))
    }

    pub fn validate(&self) -> Result<LatticeReport, LatticeError> {
        let mut bad = Vec::new();
        if !self.n_half.is_positive() {
            bad.push(Violation::NonPositiveNHalf);
        }
        if !self.gamma.is_positive() {
            bad.push(Violation::NonPositiveGamma);
        }
        if !self.delta.is_positive() {
            bad.push(Violation::NonPositiveDelta);
        }
        if !bad.is_empty() {
            return Err(LatticeError::Invalid(bad));
        }
        let two_n = BigInt::from(2) * &self.n_half;
        if !two_n.is_multiple_of(&self.gamma) {
            return Err(LatticeError::Invalid(vec![Violation::GammaDivisibility]));
        }
        let m = self.modulus();
        if !self.mu.gcd(&m).is_one() {
            bad.push(Violation::MuNotUnit);
        }
        let two_m = BigInt::from(2) * &m;
        if !(&self.delta - &self.mu * &self.mu * &self.gamma).is_multiple_of(&two_m) {
            bad.push(Violation::DeltaCongruence);
        }
        if !bad.is_empty() {
            return Err(LatticeError::Invalid(bad));
        }
        let mu_canonical = canonical_mu(&self.mu, &m);
        let gram = match self.gram_for(&mu_canonical) {
            Some(g) => g,
            None => return Err(LatticeError::Invalid(vec![Violation::GramNotEven])),
        };
        if gram[1][1].is_odd() {
            return Err(LatticeError::Invalid(vec![Violation::GramNotEven]));
        }
        let det = &gram[0][0] * &gram[1][1] - &gram[0][1] * &gram[1][0];
        if det != -(&self.gamma * &self.delta) {
            return Err(LatticeError::Invalid(vec![Violation::Determinant]));
        }
        Ok(LatticeReport {
            modulus: m,
            mu_canonical,
            gram,
        })
    }

    /// Same lattice with `μ` replaced by its canonical representative.
    pub fn canonical(&self) -> PolarizedLattice {
        PolarizedLattice {
            mu: canonical_mu(&self.mu, &self.modulus()),
            ..self.clone()
        }
    }

    pub fn contains(&self, z: &LatticeVector) -> bool {
        (&z.x - &self.mu * &z.y).is_multiple_of(&self.modulus())
    }

    pub fn check_vector(&self, z: &LatticeVector) -> Result<(), LatticeError> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(LatticeError::NotInLattice {
                x: z.x.clone(),
                y: z.y.clone(),
                modulus: self.modulus(),
            })
        }
    }

    /// `H̃ = (M, 0)`.
    pub fn polarization(&self) -> LatticeVector {
        LatticeVector::new(self.modulus(), 0)
    }

    /// `f(H̃) = (0, M)`.
    pub fn orthogonal_generator(&self) -> LatticeVector {
        LatticeVector::new(0, self.modulus())
    }

    /// `w = (μ, 1)`.
    pub fn glue(&self) -> LatticeVector {
        LatticeVector::new(self.mu.clone(), 1)
    }

    /// Lattice vector with coordinates `α·H̃ + β·w`.
    pub fn from_basis(&self, alpha: &BigInt, beta: &BigInt) -> LatticeVector {
        LatticeVector {
            x: alpha * self.modulus() + beta * &self.mu,
            y: beta.clone(),
        }
    }

    /// Coordinates `(α, β)` with `z = α·H̃ + β·w`.
    pub fn to_basis(&self, z: &LatticeVector) -> Result<(BigInt, BigInt), LatticeError> {
        self.check_vector(z)?;
        Ok(((&z.x - &self.mu * &z.y) / self.modulus(), z.y.clone()))
    }

    pub fn pairing(&self, z: &LatticeVector, z2: &LatticeVector) -> Result<BigInt, LatticeError> {
        let numerator = &self.gamma * &z.x * &z2.x - &self.delta * &z.y * &z2.y;
        let m = self.modulus();
        if !numerator.is_multiple_of(&m) {
            return Err(LatticeError::IntegralityFailure { numerator, modulus: m });
        }
        Ok(numerator / m)
    }

    pub fn square(&self, z: &LatticeVector) -> Result<BigInt, LatticeError> {
        self.pairing(z, z)
    }

    /// Divisibility of `z` in `N`; `0` for the zero vector.
    pub fn content(&self, z: &LatticeVector) -> Result<BigInt, LatticeError> {
        let (alpha, beta) = self.to_basis(z)?;
        Ok(alpha.gcd(&beta))
    }
}

/// Integer pair in the ambient `ℤ²` of a Gram matrix.
pub type Coords = (BigInt, BigInt);

/// Change of coordinates between a raw Gram basis and the `(x, y)` presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMap {
    #[serde(with = "crate::intser::matrix2")]
    pub gram: [[BigInt; 2]; 2],
    #[serde(with = "crate::intser::pair")]
    pub h: Coords,
    /// `f(H̃)` in raw coordinates, sign fixed so that `w ∈ N`.
    #[serde(with = "crate::intser::pair")]
    pub f: Coords,
    pub lattice: PolarizedLattice,
}

impl BasisMap {
    fn raw_pairing(&self, u: &Coords, v: &Coords) -> BigInt {
        let g = &self.gram;
        &u.0 * (&g[0][0] * &v.0 + &g[0][1] * &v.1) + &u.1 * (&g[1][0] * &v.0 + &g[1][1] * &v.1)
    }

    /// Raw coordinates to `(x, y)`: `x = H̃·u/γ`, `y = −f·u/δ`.
    pub fn to_lattice(&self, u: &Coords) -> LatticeVector {
        let l = &self.lattice;
        let hx = self.raw_pairing(&self.h, u);
        let fy = self.raw_pairing(&self.f, u);
        debug_assert!(hx.is_multiple_of(&l.gamma) && fy.is_multiple_of(&l.delta));
        LatticeVector {
            x: hx / &l.gamma,
            y: -(fy / &l.delta),
        }
    }

    /// `(x, y)` to raw coordinates: `u = (x·h + y·f)/M`.
    pub fn from_lattice(&self, z: &LatticeVector) -> Option<Coords> {
        let m = self.lattice.modulus();
        let u0 = &z.x * &self.h.0 + &z.y * &self.f.0;
        let u1 = &z.x * &self.h.1 + &z.y * &self.f.1;
        if !u0.is_multiple_of(&m) || !u1.is_multiple_of(&m) {
            return None;
        }
        Some((u0 / &m, u1 / &m))
    }

    /// Round trip on the standard basis plus transport of the Gram matrix.
    pub fn certify(&self) -> bool {
        let e = [(BigInt::one(), BigInt::zero()), (BigInt::zero(), BigInt::one())];
        let images: Vec<LatticeVector> = e.iter().map(|u| self.to_lattice(u)).collect();
        for (u, z) in e.iter().zip(&images) {
            if !self.lattice.contains(z) || self.from_lattice(z).as_ref() != Some(u) {
                return false;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                match self.lattice.pairing(&images[i], &images[j]) {
                    Ok(p) if p == self.gram[i][j] => {}
                    _ => return false,
                }
            }
        }
        self.from_lattice(&self.lattice.glue()).is_some()
    }
}

/// Recovers the `(γ, δ, μ)` presentation of `h ∈ (ℤ², G)`.
pub fn from_gram(gram: [[BigInt; 2]; 2], h: Coords) -> Result<BasisMap, LatticeError> {
    if gram[0][1] != gram[1][0] {
        return Err(LatticeError::NotSymmetric);
    }
    if gram[0][0].is_odd() || gram[1][1].is_odd() {
        return Err(LatticeError::NotEven);
    }
    let det = &gram[0][0] * &gram[1][1] - &gram[0][1] * &gram[1][0];
    if !det.is_negative() {
        return Err(LatticeError::NotHyperbolic { det });
    }
    if !h.0.gcd(&h.1).is_one() {
        return Err(LatticeError::NotPrimitivePolarization);
    }
    let gh = (
        &gram[0][0] * &h.0 + &gram[0][1] * &h.1,
        &gram[1][0] * &h.0 + &gram[1][1] * &h.1,
    );
    let square = &h.0 * &gh.0 + &h.1 * &gh.1;
    if !square.is_positive() {
        return Err(LatticeError::NotPositive { square });
    }
    let gamma = gh.0.gcd(&gh.1);
    let n_half = &square / 2;
    let delta = -&det / &gamma;
    let m = (BigInt::from(2) * &n_half) / &gamma;

    let mut f = (&gh.1 / &gamma, -(&gh.0 / &gamma));
    // Complete h to a basis {h, u} of ℤ² with det[h u] = 1.
    let eg = h.0.extended_gcd(&h.1);
    let u = (-eg.y, eg.x);
    debug_assert!((&h.0 * &u.1 - &h.1 * &u.0).is_one());
    // f = α·h + β·u with |β| = [N : ℤH̃ ⊕ ℤf] = M.
    let mut beta = &h.0 * &f.1 - &h.1 * &f.0;
    let mut alpha = &f.0 * &u.1 - &f.1 * &u.0;
    if beta.is_negative() {
        f = (-f.0, -f.1);
        beta = -beta;
        alpha = -alpha;
    }
    debug_assert_eq!(beta, m);
    let mu0 = (-alpha).mod_floor(&m);
    let mu = canonical_mu(&mu0, &m);
    if mu != mu0 {
        f = (-f.0, -f.1);
    }
    let lattice = PolarizedLattice {
        n_half,
        gamma,
        delta,
        mu,
    };
    lattice.validate()?;
    let map = BasisMap { gram, h, f, lattice };
    debug_assert!(map.certify());
    Ok(map)
}

/// All valid lattices for a given `n_half` with `γδ ≤ max_gamma_delta` and
/// canonical `μ`, ordered by `(γ, δ, μ)`.
pub fn enumerate(n_half: &BigInt, max_gamma_delta: &BigInt) -> Vec<PolarizedLattice> {
    let mut out = Vec::new();
    let two_n = BigInt::from(2) * n_half;
    let mut gamma = BigInt::one();
    while &gamma <= max_gamma_delta && gamma <= two_n {
        if two_n.is_multiple_of(&gamma) {
            let m = &two_n / &gamma;
            let two_m = BigInt::from(2) * &m;
            let mut mus = Vec::new();
            let mut mu = BigInt::zero();
            while mu < m {
                if mu.gcd(&m).is_one() && canonical_mu(&mu, &m) == mu {
                    mus.push(mu.clone());
                }
                mu += 1;
            }
            let mut delta = BigInt::one();
            while &gamma * &delta <= *max_gamma_delta {
                for mu in &mus {
                    if (&delta - mu * mu * &gamma).is_multiple_of(&two_m) {
                        out.push(PolarizedLattice {
                            n_half: n_half.clone(),
                            gamma: gamma.clone(),
                            delta: delta.clone(),
                            mu: mu.clone(),
                        });
                    }
                }
                delta += 1;
            }
        }
        gamma += 1;
    }
    out
}
