//! Series witnesses, certificate synthesis and the verdict.
//!
//! Series A looks for `h̃₁ ∈ N` with `h̃₁² = ±2b₁c`,
//! `H̃·h̃₁ ≡ 0 (mod γ(b₁/γ_b)c)` and `f(H̃)·h̃₁ ≡ 0 (mod δb₁c)`; series B is the
//! same with `a₁` in place of `b₁`. A witness yields `d₂` and `D` with
//! `h̃₁ = d₂H̃ + b₁c·D` (resp. `a₁c·D`) and the chain
//! `Tyu(±h̃₁) ∘ T_D ∘ ν(1, d₂) ∘ δ ∘ ν(d_a, d_b)⁻¹` (no `δ` for series B).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError, MukaiInput, MukaiInvariants};
use crate::lattice::{self, Coords, LatticeError, LatticeVector, PolarizedLattice};
use crate::moduli::{self, Chain, ChainError, Morphism, MukaiVector};
use crate::qsolve::{self, ConstraintSet, Representation, SolveError, SolveStats};

pub use crate::moduli::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Series {
    A,
    B,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Series::A => "A",
            Series::B => "B",
        })
    }
}

/// Fixed search order.
pub const SEARCH_ORDER: [(Series, Sign); 4] = [
    (Series::A, Sign::Plus),
    (Series::A, Sign::Minus),
    (Series::B, Sign::Plus),
    (Series::B, Sign::Minus),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("theorem hypothesis fails: gcd(c, dγ) = {gcd}")]
    HypothesisViolated { gcd: BigInt },
    #[error("lattice n_half = {lattice} but the Mukai data give a₁b₁c² = {mukai}")]
    LatticeMismatch { lattice: BigInt, mukai: BigInt },
    #[error("solver: {0}")]
    Solve(#[from] SolveError),
    #[error("certificate synthesis failed at {step}: {detail}")]
    SynthesisFailure { step: &'static str, detail: String },
}

/// The decision problem: `M_X(r, dH̃, s)` against `X` with `H̃ ∈ N ⊆ N(X)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionInput {
    pub mukai: MukaiInput,
    pub lattice: PolarizedLattice,
    /// `N = N(X)` and the transcendental periods have only `±1` as automorphisms.
    pub full_picard_general: bool,
}

/// A lattice either in `(γ, δ, μ)` form or as a Gram matrix with `H̃`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeInput {
    Presentation(PolarizedLattice),
    Gram {
        #[serde(with = "crate::intser::matrix2")]
        gram: [[BigInt; 2]; 2],
        #[serde(with = "crate::intser::pair")]
        h: Coords,
    },
}

impl LatticeInput {
    pub fn resolve(&self) -> Result<PolarizedLattice, LatticeError> {
        match self {
            LatticeInput::Presentation(l) => {
                l.validate()?;
                Ok(l.clone())
            }
            LatticeInput::Gram { gram, h } => Ok(lattice::from_gram(gram.clone(), h.clone())?.lattice),
        }
    }
}

/// Flat JSON request: `{"r", "s", "d", "lattice", "full"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    #[serde(with = "crate::intser")]
    pub r: BigInt,
    #[serde(with = "crate::intser")]
    pub s: BigInt,
    #[serde(with = "crate::intser")]
    pub d: BigInt,
    pub lattice: LatticeInput,
    #[serde(alias = "full_picard_general", default)]
    pub full: bool,
}

impl DecisionRequest {
    pub fn into_input(self) -> Result<DecisionInput, DecideError> {
        Ok(DecisionInput {
            mukai: MukaiInput::new(self.r, self.s, self.d),
            lattice: self.lattice.resolve()?,
            full_picard_general: self.full,
        })
    }
}

/// Witness together with the derived chain data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub series: Series,
    pub sign: Sign,
    pub witness: LatticeVector,
    #[serde(with = "crate::intser")]
    pub p1: BigInt,
    #[serde(with = "crate::intser")]
    pub q1: BigInt,
    #[serde(with = "crate::intser")]
    pub d2: BigInt,
    #[serde(rename = "D")]
    pub twist: LatticeVector,
    pub lattice: PolarizedLattice,
    pub chain: Chain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Yes(Box<Certificate>),
    No(String),
    Unknown(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No(_) => "no",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::Yes(c) => Some(c),
            _ => None,
        }
    }

    pub fn reason(&self) -> String {
        match self {
            Verdict::Yes(c) => format!("series {} witness with sign {}", c.series, c.sign),
            Verdict::No(r) | Verdict::Unknown(r) => r.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VerdictRepr {
    verdict: String,
    certificate: Option<Certificate>,
    reason: String,
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VerdictRepr {
            verdict: self.label().to_string(),
            certificate: self.certificate().cloned(),
            reason: self.reason(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = VerdictRepr::deserialize(d)?;
        match (r.verdict.as_str(), r.certificate) {
            ("yes", Some(c)) => Ok(Verdict::Yes(Box::new(c))),
            ("no", None) => Ok(Verdict::No(r.reason)),
            ("unknown", None) => Ok(Verdict::Unknown(r.reason)),
            (v, _) => Err(D::Error::custom(format!("inconsistent verdict {v:?}"))),
        }
    }
}

/// Series parameters: `k = (e₁/γ_e)c` and the norm `e₁c`, with `e = b` for
/// series A and `e = a` for series B.
struct SeriesData {
    /// `e₁c`; `h̃₁² = ±2e₁c`.
    norm: BigInt,
    /// `(e₁/γ_e)c`; `x ≡ 0` modulo this.
    k: BigInt,
    /// `γ_e`.
    gamma_e: BigInt,
    /// `(2/γ₂)(o₁/γ_o)c` with `o` the other index.
    denom: BigInt,
}

fn series_data(l: &PolarizedLattice, inv: &MukaiInvariants, series: Series) -> Result<SeriesData, DecideError> {
    let split = arith::gamma_split(&l.gamma, &inv.a1, &inv.b1)?;
    let (e1, gamma_e, o1, gamma_o) = match series {
        Series::A => (&inv.b1, &split.gamma_b, &inv.a1, &split.gamma_a),
        Series::B => (&inv.a1, &split.gamma_a, &inv.b1, &split.gamma_b),
    };
    Ok(SeriesData {
        norm: e1 * &inv.c,
        k: e1 / gamma_e * &inv.c,
        gamma_e: gamma_e.clone(),
        denom: BigInt::from(2) / &split.gamma_2 * (o1 / gamma_o) * &inv.c,
    })
}

/// Direct check of the three series conditions on `z`.
pub fn check_series(l: &PolarizedLattice, inv: &MukaiInvariants, z: &LatticeVector, series: Series) -> Option<Sign> {
    if !l.contains(z) {
        return None;
    }
    let e1 = match series {
        Series::A => &inv.b1,
        Series::B => &inv.a1,
    };
    let gamma_e = l.gamma.gcd(e1);
    let norm = e1 * &inv.c;
    let sq = l.square(z).ok()?;
    let sign = if sq == BigInt::from(2) * &norm {
        Sign::Plus
    } else if sq == BigInt::from(-2) * &norm {
        Sign::Minus
    } else {
        return None;
    };
    let h_dot = &l.gamma * &z.x;
    let f_dot = -(&l.delta * &z.y);
    let ok = h_dot.is_multiple_of(&(&l.gamma * (e1 / &gamma_e) * &inv.c)) && f_dot.is_multiple_of(&(&l.delta * &norm));
    ok.then_some(sign)
}

/// Solver target and congruences for one series and sign.
pub fn series_problem(
    l: &PolarizedLattice,
    inv: &MukaiInvariants,
    series: Series,
    sign: Sign,
) -> Result<(BigInt, ConstraintSet), DecideError> {
    let data = series_data(l, inv, series)?;
    let m = sign.as_int() * BigInt::from(2) * &data.norm * l.modulus();
    let cs = ConstraintSet::new()
        .x_mod(0, data.k)
        .y_mod(0, data.norm)
        .coupled(l.mu.clone(), l.modulus());
    Ok((m, cs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub series: Series,
    pub sign: Sign,
    pub z: LatticeVector,
}

/// Solver effort over all calls of one search.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub solver_calls: usize,
    pub orbit_reps: usize,
    pub roots_tested: usize,
    pub max_walk_order: u64,
}

impl SearchStats {
    fn absorb(&mut self, s: &SolveStats) {
        self.solver_calls += 1;
        self.orbit_reps += s.orbit_reps;
        self.roots_tested += s.roots_tested;
        self.max_walk_order = self.max_walk_order.max(s.walk_order);
    }
}

fn check_hypothesis(l: &PolarizedLattice, inv: &MukaiInvariants) -> Result<(), DecideError> {
    let gcd = inv.c.gcd(&(inv.d() * &l.gamma));
    if gcd.is_one() {
        Ok(())
    } else {
        Err(DecideError::HypothesisViolated { gcd })
    }
}

fn check_match(l: &PolarizedLattice, inv: &MukaiInvariants) -> Result<(), DecideError> {
    l.validate()?;
    if l.n_half != inv.n_half {
        return Err(DecideError::LatticeMismatch {
            lattice: l.n_half.clone(),
            mukai: inv.n_half.clone(),
        });
    }
    Ok(())
}

pub fn find_witness(l: &PolarizedLattice, inv: &MukaiInvariants) -> Result<Option<Witness>, DecideError> {
    find_witness_with_stats(l, inv).map(|(w, _)| w)
}

/// Tries A/+, A/−, B/+, B/− in order; `None` only if every call is a
/// complete negative.
pub fn find_witness_with_stats(
    l: &PolarizedLattice,
    inv: &MukaiInvariants,
) -> Result<(Option<Witness>, SearchStats), DecideError> {
    check_match(l, inv)?;
    check_hypothesis(l, inv)?;
    let mut stats = SearchStats::default();
    for (series, sign) in SEARCH_ORDER {
        let (m, cs) = series_problem(l, inv, series, sign)?;
        let (rep, s) = qsolve::represent_with(&l.gamma, &l.delta, &m, &cs, qsolve::Strategy::OrbitWalk)?;
        stats.absorb(&s);
        match rep {
            Representation::Witness { x, y } => {
                let z = LatticeVector { x, y };
                if check_series(l, inv, &z, series) != Some(sign) {
                    return Err(DecideError::SynthesisFailure {
                        step: "witness check",
                        detail: format!("solver returned {z}, which fails series {series}/{sign}"),
                    });
                }
                return Ok((Some(Witness { series, sign, z }), stats));
            }
            Representation::NoSolution | Representation::IncompatibleConstraints => {}
        }
    }
    Ok((None, stats))
}

fn fail(step: &'static str, detail: String) -> DecideError {
    DecideError::SynthesisFailure { step, detail }
}

/// Derives `(p₁, q₁, d₂, D)` from a witness and assembles the chain.
pub fn certificate(
    l: &PolarizedLattice,
    inv: &MukaiInvariants,
    series: Series,
    sign: Sign,
    z: &LatticeVector,
) -> Result<Certificate, DecideError> {
    check_match(l, inv)?;
    if check_series(l, inv, z, series) != Some(sign) {
        return Err(fail(
            "series check",
            format!("{z} is not a series {series}/{sign} witness"),
        ));
    }
    let data = series_data(l, inv, series)?;
    let witness = z
        .div_exact(&data.k)
        .ok_or_else(|| fail("p1, q1", format!("{} does not divide {z}", data.k)))?;
    let (p1, q1) = (witness.x, witness.y);
    if !q1.is_multiple_of(&data.gamma_e) {
        return Err(fail("q1", format!("q1 = {q1} is not divisible by {}", data.gamma_e)));
    }
    let num = &p1 - &l.mu * &q1;
    if !num.is_multiple_of(&data.denom) {
        return Err(fail("d2", format!("{} does not divide p1 − μq1 = {num}", data.denom)));
    }
    let mut d2 = (num / &data.denom).mod_floor(&data.norm);
    if d2.is_zero() {
        d2 = data.norm.clone();
    }
    let h = l.polarization();
    let twist = z
        .sub(&h.scale(&d2))
        .div_exact(&data.norm)
        .ok_or_else(|| fail("D", format!("{} does not divide h1 − d2·H̃", data.norm)))?;
    if !l.contains(&twist) {
        return Err(fail("D", format!("D = {twist} is not in N")));
    }

    let source = MukaiVector::new(inv.c.clone() * &inv.a, h.scale(&inv.d()), inv.c.clone() * &inv.b);
    let mut steps = vec![Morphism::NuInverse {
        d1: inv.d_a.clone(),
        d2: inv.d_b.clone(),
    }];
    if series == Series::A {
        steps.push(Morphism::Reflection);
    }
    steps.push(Morphism::Nu {
        d1: BigInt::one(),
        d2: d2.clone(),
    });
    steps.push(Morphism::Twist { d: twist.clone() });
    steps.push(Morphism::Tyurin { sign, h1: z.clone() });
    let chain = Chain::build(source, steps, l).map_err(|e| fail("chain", e.to_string()))?;
    moduli::validate_chain(&chain, l).map_err(|e: ChainError| fail("chain validation", e.to_string()))?;
    Ok(Certificate {
        series,
        sign,
        witness: z.clone(),
        p1,
        q1,
        d2,
        twist,
        lattice: l.clone(),
        chain,
    })
}

/// Verdict together with the search effort.
pub fn decide_with_stats(input: &DecisionInput) -> Result<(Verdict, SearchStats), DecideError> {
    let inv = arith::invariants(&input.mukai)?;
    let l = &input.lattice;
    check_match(l, &inv)?;
    let n = arith::n_of_v(&input.mukai.r, &input.mukai.s, &l.gamma);
    if input.full_picard_general && !n.is_one() {
        return Ok((Verdict::No(format!("n(v) = {n} ≠ 1")), SearchStats::default()));
    }
    if let Err(DecideError::HypothesisViolated { gcd }) = check_hypothesis(l, &inv) {
        return Ok((
            Verdict::Unknown(format!(
                "hypothesis gcd(c, dγ) = 1 fails (gcd = {gcd}) for a sublattice"
            )),
            SearchStats::default(),
        ));
    }
    let (found, stats) = find_witness_with_stats(l, &inv)?;
    let verdict = match found {
        Some(w) => Verdict::Yes(Box::new(certificate(l, &inv, w.series, w.sign, &w.z)?)),
        None if input.full_picard_general => Verdict::No("no series witness exists in N(X)".into()),
        None => Verdict::Unknown("no witness in given sublattice".into()),
    };
    Ok((verdict, stats))
}

pub fn decide(input: &DecisionInput) -> Result<Verdict, DecideError> {
    decide_with_stats(input).map(|(v, _)| v)
}

/// Witness of maximal absolute coordinate, for reporting.
pub fn witness_size(z: &LatticeVector) -> BigInt {
    z.x.abs().max(z.y.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn inv(r: i64, s: i64, d: i64) -> MukaiInvariants {
        arith::invariants(&MukaiInput::new(r, s, d)).unwrap()
    }

    #[test]
    fn check_series_examples() {
        let i = inv(2, 1, 1);
        let l = PolarizedLattice::new(2, 1, 1, 1);
        assert_eq!(
            check_series(&l, &i, &LatticeVector::new(3, -1), Series::A),
            Some(Sign::Plus)
        );
        let l = PolarizedLattice::new(2, 2, 2, 1);
        assert_eq!(
            check_series(&l, &i, &LatticeVector::new(2, 0), Series::B),
            Some(Sign::Plus)
        );
        assert_eq!(check_series(&l, &i, &LatticeVector::zero(), Series::A), None);
        assert_eq!(check_series(&l, &i, &LatticeVector::zero(), Series::B), None);
    }

    #[test]
    fn find_witness_examples() {
        let i = inv(2, 1, 1);
        let cases = [
            ((2, 1, 1, 1), Series::A, Sign::Plus, (3, -1)),
            ((2, 2, 2, 1), Series::B, Sign::Plus, (2, 0)),
            ((2, 1, 9, 1), Series::A, Sign::Minus, (-1, -1)),
        ];
        for ((n, g, d, mu), series, sign, (x, y)) in cases {
            let l = PolarizedLattice::new(n, g, d, mu);
            let w = find_witness(&l, &i).unwrap().unwrap();
            assert_eq!(
                w,
                Witness {
                    series,
                    sign,
                    z: LatticeVector::new(x, y)
                }
            );
        }
    }

    #[test]
    fn certificate_series_a() {
        let i = inv(2, 1, 1);
        let l = PolarizedLattice::new(2, 1, 1, 1);
        let c = certificate(&l, &i, Series::A, Sign::Plus, &LatticeVector::new(3, -1)).unwrap();
        assert_eq!((c.p1.clone(), c.q1.clone(), c.d2.clone()), (b(3), b(-1), b(1)));
        assert_eq!(c.twist, LatticeVector::new(-1, -1));
        assert_eq!(c.chain.len(), 5);
        let twist_step = &c.chain.steps[3];
        assert_eq!(twist_step.source, MukaiVector::new(1, l.polarization(), 2));
        assert_eq!(
            twist_step.target.vector().unwrap(),
            &MukaiVector::new(1, LatticeVector::new(3, -1), 1)
        );
    }

    #[test]
    fn certificate_series_b() {
        let i = inv(2, 1, 1);
        let l = PolarizedLattice::new(2, 2, 2, 1);
        let c = certificate(&l, &i, Series::B, Sign::Plus, &l.polarization()).unwrap();
        assert_eq!(c.d2, b(1));
        assert!(c.twist.is_zero());
        assert_eq!(c.chain.len(), 4);
        assert_eq!(c.chain.steps[3].source, MukaiVector::new(2, l.polarization(), 1));
    }

    #[test]
    fn certificate_negative_sign() {
        let i = inv(2, 1, 1);
        let l = PolarizedLattice::new(2, 1, 9, 1);
        let z = LatticeVector::new(-1, -1);
        let c = certificate(&l, &i, Series::A, Sign::Minus, &z).unwrap();
        assert_eq!(c.chain.steps[4].source, MukaiVector::new(1, z, -1));
    }

    #[test]
    fn verdicts() {
        let yes = decide(&DecisionInput {
            mukai: MukaiInput::new(2, 1, 1),
            lattice: PolarizedLattice::new(2, 1, 1, 1),
            full_picard_general: true,
        })
        .unwrap();
        assert_eq!(yes.label(), "yes");

        let l = lattice::enumerate(&b(4), &b(40))
            .into_iter()
            .find(|l| l.gamma == b(2))
            .unwrap();
        let no = decide(&DecisionInput {
            mukai: MukaiInput::new(2, 2, 1),
            lattice: l,
            full_picard_general: true,
        })
        .unwrap();
        assert_eq!(no, Verdict::No("n(v) = 2 ≠ 1".into()));
    }

    #[test]
    fn no_witness_is_unknown_for_sublattices() {
        let i = inv(2, 3, 1);
        let l = PolarizedLattice::new(6, 1, 25, 1);
        assert_eq!(find_witness(&l, &i).unwrap(), None);
        let mk = |full| DecisionInput {
            mukai: MukaiInput::new(2, 3, 1),
            lattice: l.clone(),
            full_picard_general: full,
        };
        assert_eq!(
            decide(&mk(false)).unwrap(),
            Verdict::Unknown("no witness in given sublattice".into())
        );
        assert_eq!(decide(&mk(true)).unwrap().label(), "no");
    }

    #[test]
    fn verdict_json_round_trip() {
        let v = decide(&DecisionInput {
            mukai: MukaiInput::new(2, 1, 1),
            lattice: PolarizedLattice::new(2, 1, 9, 1),
            full_picard_general: true,
        })
        .unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.starts_with(r#"{"verdict":"yes","certificate":{"series":"A","sign":-1"#));
        let back: Verdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn request_accepts_gram_lattices() {
        let req: DecisionRequest =
            serde_json::from_str(r#"{"r":2,"s":1,"d":1,"lattice":{"gram":[[4,1],[1,0]],"h":[1,0]},"full":true}"#)
                .unwrap();
        let input = req.into_input().unwrap();
        assert_eq!(input.lattice, PolarizedLattice::new(2, 1, 1, 1));
    }
}
