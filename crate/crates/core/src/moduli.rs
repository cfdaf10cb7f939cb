//! Mukai vectors over `N` and the universal isomorphisms between moduli spaces.
//!
//! Morphisms act on Mukai-vector bookkeeping only. A [`Chain`] records every
//! intermediate vector so that it can be replayed and checked independently.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticeError, LatticeVector, PolarizedLattice};

/// Fixed note attached to every chain ending in a Tyurin isomorphism.
pub const TYURIN_CAVEAT: &str = "the Tyurin step also needs h^0(O(h1)) = h^0(O(-h1)) = 0 on X; \
this cohomology condition is not determined by lattice data and is not checked";

/// `v = (ρ, ℓ, σ)` with `ℓ ∈ N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MukaiVector {
    #[serde(with = "crate::intser")]
    pub rho: BigInt,
    pub ell: LatticeVector,
    #[serde(with = "crate::intser")]
    pub sigma: BigInt,
}

impl MukaiVector {
    pub fn new(rho: impl Into<BigInt>, ell: LatticeVector, sigma: impl Into<BigInt>) -> Self {
        MukaiVector {
            rho: rho.into(),
            ell,
            sigma: sigma.into(),
        }
    }

    /// `ℓ·ℓ − 2ρσ`.
    pub fn mukai_square(&self, l: &PolarizedLattice) -> Result<BigInt, LatticeError> {
        l.check_vector(&self.ell)?;
        Ok(l.square(&self.ell)? - BigInt::from(2) * &self.rho * &self.sigma)
    }

    /// `gcd(ρ, content(ℓ), σ)`.
    pub fn divisor(&self, l: &PolarizedLattice) -> Result<BigInt, LatticeError> {
        Ok(self.rho.gcd(&l.content(&self.ell)?).gcd(&self.sigma))
    }

    pub fn is_primitive(&self, l: &PolarizedLattice) -> Result<bool, LatticeError> {
        Ok(self.divisor(l)?.is_one())
    }
}

impl fmt::Display for MukaiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.rho, self.ell, self.sigma)
    }
}

/// `±1`, serialized as an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_int(self) -> BigInt {
        BigInt::from(self.value())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match i64::deserialize(d)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(de::Error::custom(format!("sign must be 1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Morphism {
    /// `M(ρ, ℓ, σ) ≅ M(σ, ℓ, ρ)`.
    Reflection,
    /// Tensoring by a line bundle of class `D`.
    Twist { d: LatticeVector },
    /// `M(ρ, ℓ, σ) ≅ M(d₁²ρ, d₁d₂ℓ, d₂²σ)`.
    Nu {
        #[serde(with = "crate::intser")]
        d1: BigInt,
        #[serde(with = "crate::intser")]
        d2: BigInt,
    },
    NuInverse {
        #[serde(with = "crate::intser")]
        d1: BigInt,
        #[serde(with = "crate::intser")]
        d2: BigInt,
    },
    /// `M(±h₁²/2, h₁, ±1) ≅ X`; terminal.
    Tyurin { sign: Sign, h1: LatticeVector },
}

impl Morphism {
    pub fn kind(&self) -> &'static str {
        match self {
            Morphism::Reflection => "reflection",
            Morphism::Twist { .. } => "twist",
            Morphism::Nu { .. } => "nu",
            Morphism::NuInverse { .. } => "nu_inverse",
            Morphism::Tyurin { .. } => "tyurin",
        }
    }
}

/// Image of a morphism: another moduli space or `X` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Vector(MukaiVector),
    X,
}

impl Target {
    pub fn vector(&self) -> Option<&MukaiVector> {
        match self {
            Target::Vector(v) => Some(v),
            Target::X => None,
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Target::Vector(v) => v.serialize(s),
            Target::X => s.serialize_str("X"),
        }
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Marker(String),
            Vector(MukaiVector),
        }
        match Repr::deserialize(d)? {
            Repr::Marker(m) if m == "X" => Ok(Target::X),
            Repr::Marker(m) => Err(de::Error::custom(format!("unknown target marker {m:?}"))),
            Repr::Vector(v) => Ok(Target::Vector(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("{kind}: precondition violated: {detail}")]
    PreconditionViolated { kind: &'static str, detail: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn violated(kind: &'static str, detail: impl Into<String>) -> MorphismError {
    MorphismError::PreconditionViolated {
        kind,
        detail: detail.into(),
    }
}

fn require_primitive_isotropic(kind: &'static str, v: &MukaiVector, l: &PolarizedLattice) -> Result<(), MorphismError> {
    let sq = v.mukai_square(l)?;
    if !sq.is_zero() {
        return Err(violated(kind, format!("{v} is not isotropic (v² = {sq})")));
    }
    let g = v.divisor(l)?;
    if !g.is_one() {
        return Err(violated(kind, format!("{v} is not primitive (divisor {g})")));
    }
    Ok(())
}

fn nu_conditions(
    kind: &'static str,
    d1: &BigInt,
    d2: &BigInt,
    v: &MukaiVector,
    l: &PolarizedLattice,
) -> Result<(), MorphismError> {
    if !d1.is_positive() || !d2.is_positive() {
        return Err(violated(kind, format!("d1 = {d1}, d2 = {d2} must be positive")));
    }
    if !v.rho.is_positive() || !v.sigma.is_positive() {
        return Err(violated(kind, format!("{v} needs positive rank and σ")));
    }
    let content = l.content(&v.ell)?;
    if !content.is_one() {
        return Err(violated(kind, format!("{} is not primitive in N", v.ell)));
    }
    for (name, x, y) in [("(d1, σ)", d1, &v.sigma), ("(d2, ρ)", d2, &v.rho), ("(d1, d2)", d1, d2)] {
        let g = x.gcd(y);
        if !g.is_one() {
            return Err(violated(kind, format!("gcd{name} = {g} ≠ 1")));
        }
    }
    Ok(())
}

/// Applies one morphism to `v`, checking its preconditions.
pub fn apply(m: &Morphism, v: &MukaiVector, l: &PolarizedLattice) -> Result<Target, MorphismError> {
    let kind = m.kind();
    l.check_vector(&v.ell)?;
    match m {
        Morphism::Reflection => {
            if !v.rho.is_positive() || !v.sigma.is_positive() {
                return Err(violated(kind, format!("{v} needs ρ, σ ≥ 1")));
            }
            require_primitive_isotropic(kind, v, l)?;
            Ok(Target::Vector(MukaiVector {
                rho: v.sigma.clone(),
                ell: v.ell.clone(),
                sigma: v.rho.clone(),
            }))
        }
        Morphism::Twist { d } => {
            l.check_vector(d)?;
            let d_sq = l.square(d)?;
            if d_sq.is_odd() {
                return Err(violated(kind, format!("D² = {d_sq} is odd")));
            }
            let sigma = &v.sigma + &v.rho * (&d_sq / 2) + l.pairing(d, &v.ell)?;
            Ok(Target::Vector(MukaiVector {
                rho: v.rho.clone(),
                ell: v.ell.add(&d.scale(&v.rho)),
                sigma,
            }))
        }
        Morphism::Nu { d1, d2 } => {
            nu_conditions(kind, d1, d2, v, l)?;
            Ok(Target::Vector(MukaiVector {
                rho: d1 * d1 * &v.rho,
                ell: v.ell.scale(&(d1 * d2)),
                sigma: d2 * d2 * &v.sigma,
            }))
        }
        Morphism::NuInverse { d1, d2 } => {
            if !d1.is_positive() || !d2.is_positive() {
                return Err(violated(kind, format!("d1 = {d1}, d2 = {d2} must be positive")));
            }
            let (d1_sq, d2_sq) = (d1 * d1, d2 * d2);
            let ell = v.ell.div_exact(&(d1 * d2));
            let ell = match ell {
                Some(e) if v.rho.is_multiple_of(&d1_sq) && v.sigma.is_multiple_of(&d2_sq) => e,
                _ => return Err(violated(kind, format!("{v} is not of the form (d1²ρ, d1d2ℓ, d2²σ)"))),
            };
            let pre = MukaiVector {
                rho: &v.rho / d1_sq,
                ell,
                sigma: &v.sigma / d2_sq,
            };
            l.check_vector(&pre.ell)
                .map_err(|_| violated(kind, format!("ℓ/(d1d2) = {} is not in N", pre.ell)))?;
            nu_conditions(kind, d1, d2, &pre, l)?;
            Ok(Target::Vector(pre))
        }
        Morphism::Tyurin { sign, h1 } => {
            l.check_vector(h1)?;
            let h_sq = l.square(h1)?;
            let signed = sign.as_int() * &h_sq;
            if !signed.is_positive() {
                return Err(violated(kind, format!("sign·h1² = {signed} is not positive")));
            }
            let expected = MukaiVector {
                rho: signed / 2,
                ell: h1.clone(),
                sigma: sign.as_int(),
            };
            if *v != expected {
                return Err(violated(
                    kind,
                    format!("{v} does not have the shape (±h1²/2, h1, ±1) = {expected}"),
                ));
            }
            Ok(Target::X)
        }
    }
}

/// Divisor and Mukai square before and after a twist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistReport {
    pub image: MukaiVector,
    #[serde(with = "crate::intser")]
    pub divisor_before: BigInt,
    #[serde(with = "crate::intser")]
    pub divisor_after: BigInt,
    #[serde(with = "crate::intser")]
    pub square_before: BigInt,
    #[serde(with = "crate::intser")]
    pub square_after: BigInt,
}

impl TwistReport {
    pub fn preserved(&self) -> bool {
        self.divisor_before == self.divisor_after && self.square_before == self.square_after
    }
}

pub fn twist_preserves(v: &MukaiVector, d: &LatticeVector, l: &PolarizedLattice) -> Result<TwistReport, MorphismError> {
    let image = match apply(&Morphism::Twist { d: d.clone() }, v, l)? {
        Target::Vector(w) => w,
        Target::X => unreachable!("twists are not terminal"),
    };
    Ok(TwistReport {
        divisor_before: v.divisor(l)?,
        divisor_after: image.divisor(l)?,
        square_before: v.mukai_square(l)?,
        square_after: image.mukai_square(l)?,
        image,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub morphism: Morphism,
    pub source: MukaiVector,
    pub target: Target,
}

/// A composable sequence of morphisms starting at `source`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub source: MukaiVector,
    pub steps: Vec<Step>,
    pub caveat: String,
}

impl Chain {
    /// Applies `morphisms` in order. Fails on the first violated precondition.
    pub fn build(source: MukaiVector, morphisms: Vec<Morphism>, l: &PolarizedLattice) -> Result<Chain, ChainError> {
        let mut steps = Vec::with_capacity(morphisms.len());
        let mut current = Target::Vector(source.clone());
        for (i, m) in morphisms.into_iter().enumerate() {
            let v = current.vector().cloned().ok_or_else(|| ChainError::TerminalNotLast {
                step: i.saturating_sub(1),
            })?;
            let target = apply(&m, &v, l).map_err(|e| ChainError::Morphism { step: i, error: e })?;
            steps.push(Step {
                morphism: m,
                source: v,
                target: target.clone(),
            });
            current = target;
        }
        Ok(Chain {
            source,
            steps,
            caveat: TYURIN_CAVEAT.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("chain has no steps")]
    Empty,
    #[error("step {step}: {error}")]
    Morphism { step: usize, error: MorphismError },
    #[error("step {step}: source {found} does not match the previous target {expected}")]
    SourceMismatch {
        step: usize,
        expected: Box<MukaiVector>,
        found: Box<MukaiVector>,
    },
    #[error("step {step}: recorded target differs from the replayed image")]
    TargetMismatch { step: usize },
    #[error("step {step}: Tyurin is terminal but further steps follow")]
    TerminalNotLast { step: usize },
    #[error("last step is {kind}, not tyurin")]
    NotTerminal { kind: &'static str },
    #[error("step {step}: intermediate {vector} is not isotropic (square {square})")]
    NotIsotropic {
        step: usize,
        vector: Box<MukaiVector>,
        square: BigInt,
    },
    #[error("step {step}: intermediate {vector} is not primitive (divisor {divisor})")]
    NotPrimitive {
        step: usize,
        vector: Box<MukaiVector>,
        divisor: BigInt,
    },
    #[error("step {step}: gcd(d2, ρ) = {gcd} ≠ 1 at the ν(1, d2) step")]
    Coprimality { step: usize, gcd: BigInt },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Summary of a successful replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub steps: usize,
    /// Number of `ν(1, d₂)` steps whose coprimality was checked.
    pub nu_steps_checked: usize,
    pub endpoint: MukaiVector,
    pub caveat: String,
}

fn check_vertex(step: usize, v: &MukaiVector, l: &PolarizedLattice) -> Result<(), ChainError> {
    let square = v.mukai_square(l)?;
    if !square.is_zero() {
        return Err(ChainError::NotIsotropic {
            step,
            vector: Box::new(v.clone()),
            square,
        });
    }
    let divisor = v.divisor(l)?;
    if !divisor.is_one() {
        return Err(ChainError::NotPrimitive {
            step,
            vector: Box::new(v.clone()),
            divisor,
        });
    }
    Ok(())
}

/// Replays every step and reports the first failure.
pub fn validate_chain(ch: &Chain, l: &PolarizedLattice) -> Result<ChainReport, ChainError> {
    if ch.steps.is_empty() {
        return Err(ChainError::Empty);
    }
    check_vertex(0, &ch.source, l)?;
    let mut current = ch.source.clone();
    let mut nu_steps_checked = 0;
    let last = ch.steps.len() - 1;
    for (i, step) in ch.steps.iter().enumerate() {
        if step.source != current {
            return Err(ChainError::SourceMismatch {
                step: i,
                expected: Box::new(current),
                found: Box::new(step.source.clone()),
            });
        }
        if let Morphism::Nu { d1, d2 } = &step.morphism {
            if d1.is_one() {
                let gcd = d2.gcd(&step.source.rho);
                if !gcd.is_one() {
                    return Err(ChainError::Coprimality { step: i, gcd });
                }
                nu_steps_checked += 1;
            }
        }
        let image = apply(&step.morphism, &step.source, l).map_err(|e| ChainError::Morphism { step: i, error: e })?;
        if image != step.target {
            return Err(ChainError::TargetMismatch { step: i });
        }
        match image {
            Target::X if i != last => return Err(ChainError::TerminalNotLast { step: i }),
            Target::X => {}
            Target::Vector(v) => {
                if i == last {
                    return Err(ChainError::NotTerminal {
                        kind: step.morphism.kind(),
                    });
                }
                check_vertex(i, &v, l)?;
                current = v;
            }
        }
    }
    Ok(ChainReport {
        steps: ch.steps.len(),
        nu_steps_checked,
        endpoint: current,
        caveat: ch.caveat.clone(),
    })
}
