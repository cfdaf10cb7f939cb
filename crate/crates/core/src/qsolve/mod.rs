//! Exact solver for `γx² − δy² = m` under linear congruences on `(x, y)`.
//!
//! The decision is complete: a `NoSolution` answer is a proof, not the result
//! of a bounded search. When `γδ` is a square the form splits and the solution
//! set is finite. Otherwise the solutions form finitely many orbits under the
//! automorphism group `{±Uᵏ}`; orbit representatives come from the reduced
//! cycles of indefinite forms, and congruence conditions are periodic along
//! each orbit because `U` has finite order modulo the constraint modulus.

pub mod forms;
pub mod oracle;
pub mod pell;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use forms::{Form, Mat2};
pub use oracle::{enumerate_bounded, enumerate_bounded_by_x};
pub use pell::{pell_fundamental, Pell, PellUnit};

/// Witnesses with `|y|` up to this bound are replaced by the global minimum
/// found by a direct scan over `y`.
pub const MINIMIZE_SCAN_LIMIT: u64 = 1 << 16;

/// Upper bound on the order of the automorphism modulo the constraint modulus.
const MAX_WALK: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("target m must be nonzero")]
    ZeroTarget,
    #[error("form coefficients must be positive (γ = {gamma}, δ = {delta})")]
    InvalidForm { gamma: BigInt, delta: BigInt },
    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),
    #[error("automorphism order modulo {modulus} exceeds {limit}")]
    WalkTooLong { modulus: BigInt, limit: u64 },
}

/// One linear congruence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "var", rename_all = "snake_case")]
pub enum Constraint {
    /// `x ≡ residue (mod modulus)`.
    X {
        #[serde(with = "crate::intser")]
        residue: BigInt,
        #[serde(with = "crate::intser")]
        modulus: BigInt,
    },
    /// `y ≡ residue (mod modulus)`.
    Y {
        #[serde(with = "crate::intser")]
        residue: BigInt,
        #[serde(with = "crate::intser")]
        modulus: BigInt,
    },
    /// `x ≡ μ·y (mod modulus)`.
    Coupled {
        #[serde(with = "crate::intser")]
        mu: BigInt,
        #[serde(with = "crate::intser")]
        modulus: BigInt,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        ConstraintSet::default()
    }

    pub fn x_mod(mut self, residue: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Self {
        self.constraints.push(Constraint::X {
            residue: residue.into(),
            modulus: modulus.into(),
        });
        self
    }

    pub fn y_mod(mut self, residue: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Self {
        self.constraints.push(Constraint::Y {
            residue: residue.into(),
            modulus: modulus.into(),
        });
        self
    }

    pub fn coupled(mut self, mu: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Self {
        self.constraints.push(Constraint::Coupled {
            mu: mu.into(),
            modulus: modulus.into(),
        });
        self
    }

    /// Direct check of every congruence.
    pub fn admits(&self, x: &BigInt, y: &BigInt) -> bool {
        self.constraints.iter().all(|c| match c {
            Constraint::X { residue, modulus } => (x - residue).is_multiple_of(modulus),
            Constraint::Y { residue, modulus } => (y - residue).is_multiple_of(modulus),
            Constraint::Coupled { mu, modulus } => (x - mu * y).is_multiple_of(modulus),
        })
    }

    pub fn compile(&self) -> Result<Option<Compiled>, SolveError> {
        let mut x = (BigInt::zero(), BigInt::one());
        let mut y = (BigInt::zero(), BigInt::one());
        let mut coupled: Option<(BigInt, BigInt)> = None;
        for c in &self.constraints {
            let modulus = match c {
                Constraint::X { modulus, .. } | Constraint::Y { modulus, .. } | Constraint::Coupled { modulus, .. } => {
                    modulus
                }
            };
            if !modulus.is_positive() {
                return Err(SolveError::InvalidConstraints(format!(
                    "modulus {modulus} is not positive"
                )));
            }
            match c {
                Constraint::X { residue, modulus } => match crt(&x, &(residue.clone(), modulus.clone())) {
                    Some(r) => x = r,
                    None => return Ok(None),
                },
                Constraint::Y { residue, modulus } => match crt(&y, &(residue.clone(), modulus.clone())) {
                    Some(r) => y = r,
                    None => return Ok(None),
                },
                Constraint::Coupled { mu, modulus } => {
                    if coupled.is_some() {
                        return Err(SolveError::InvalidConstraints(
                            "at most one coupled congruence is supported".into(),
                        ));
                    }
                    coupled = Some((mu.mod_floor(modulus), modulus.clone()));
                }
            }
        }
        let (mu, big_m) = coupled.unwrap_or((BigInt::zero(), BigInt::one()));
        // x = rx + mx·s, y = ry + my·t, x − μy ≡ 0 (mod M).
        let g = x.1.gcd(&(&mu * &y.1)).gcd(&big_m);
        if !(&mu * &y.0 - &x.0).is_multiple_of(&g) {
            return Ok(None);
        }
        let modulus = x.1.lcm(&y.1).lcm(&big_m);
        Ok(Some(Compiled {
            rx: x.0,
            mx: x.1,
            ry: y.0,
            my: y.1,
            mu,
            big_m,
            modulus,
        }))
    }
}

/// `x ≡ r₁ (m₁)` and `x ≡ r₂ (m₂)` merged into one congruence.
fn crt(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> Option<(BigInt, BigInt)> {
    let g = a.1.extended_gcd(&b.1);
    let diff = &b.0 - &a.0;
    if !diff.is_multiple_of(&g.gcd) {
        return None;
    }
    let lcm = &a.1 / &g.gcd * &b.1;
    let r = (&a.0 + &a.1 * (diff / &g.gcd) * &g.x).mod_floor(&lcm);
    Some((r, lcm))
}

/// A constraint set normalised to `x ≡ rx (mx)`, `y ≡ ry (my)`, `x ≡ μy (M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub rx: BigInt,
    pub mx: BigInt,
    pub ry: BigInt,
    pub my: BigInt,
    pub mu: BigInt,
    pub big_m: BigInt,
    /// `lcm(mx, my, M)`: every congruence is periodic with this modulus.
    pub modulus: BigInt,
}

impl Compiled {
    pub fn admits(&self, x: &BigInt, y: &BigInt) -> bool {
        (x - &self.rx).is_multiple_of(&self.mx)
            && (y - &self.ry).is_multiple_of(&self.my)
            && (x - &self.mu * y).is_multiple_of(&self.big_m)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rx.is_zero() && self.ry.is_zero()
    }

    /// Basis (as matrix columns) of the admissible sublattice `Λ ⊆ ℤ²` for a
    /// homogeneous constraint set: `(lcm(mx, M), 0)` and `(t, b₂)`.
    pub fn sublattice_basis(&self) -> Option<Mat2> {
        if !self.is_homogeneous() {
            return None;
        }
        let a1 = self.mx.lcm(&self.big_m);
        let g = self.mx.gcd(&self.big_m);
        let b2 = self.my.lcm(&(&g / self.mu.gcd(&g)));
        let t = crt(
            &(BigInt::zero(), self.mx.clone()),
            &((&self.mu * &b2).mod_floor(&self.big_m), self.big_m.clone()),
        )
        .expect("compatible by construction")
        .0;
        Some([[a1, t], [BigInt::zero(), b2]])
    }
}

/// Result of a solver call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Representation {
    Witness {
        x: BigInt,
        y: BigInt,
    },
    /// Complete negative answer.
    NoSolution,
    /// The congruences alone have no common solution.
    IncompatibleConstraints,
}

impl Representation {
    pub fn witness(&self) -> Option<(BigInt, BigInt)> {
        match self {
            Representation::Witness { x, y } => Some((x.clone(), y.clone())),
            _ => None,
        }
    }

    pub fn is_solvable(&self) -> bool {
        matches!(self, Representation::Witness { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Orbit representatives of the original form, filtered by walking each
    /// orbit modulo the constraint modulus.
    #[default]
    OrbitWalk,
    /// Substitute the admissible sublattice into the form and solve the
    /// transformed form without constraints. Homogeneous constraints only;
    /// other sets fall back to [`Strategy::OrbitWalk`].
    Substitution,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub square_discriminant: bool,
    pub orbit_reps: usize,
    pub roots_tested: usize,
    pub cycle_len: usize,
    pub walk_order: u64,
}

/// Ordering used to pick a canonical witness: smallest `|y|`, then `|x|`, then
/// `y ≤ 0`, then `x ≥ 0`.
pub fn witness_cmp(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> Ordering {
    let key = |v: &(BigInt, BigInt)| (v.1.abs(), v.0.abs(), v.1.is_positive(), v.0.is_negative());
    key(a).cmp(&key(b))
}

fn better(best: &mut Option<(BigInt, BigInt)>, cand: (BigInt, BigInt)) {
    match best {
        Some(cur) if witness_cmp(&cand, cur) != Ordering::Less => {}
        _ => *best = Some(cand),
    }
}

pub fn represent(gamma: &BigInt, delta: &BigInt, m: &BigInt, cs: &ConstraintSet) -> Result<Representation, SolveError> {
    represent_with(gamma, delta, m, cs, Strategy::OrbitWalk).map(|(r, _)| r)
}

pub fn represent_with(
    gamma: &BigInt,
    delta: &BigInt,
    m: &BigInt,
    cs: &ConstraintSet,
    strategy: Strategy,
) -> Result<(Representation, SolveStats), SolveError> {
    if m.is_zero() {
        return Err(SolveError::ZeroTarget);
    }
    if !gamma.is_positive() || !delta.is_positive() {
        return Err(SolveError::InvalidForm {
            gamma: gamma.clone(),
            delta: delta.clone(),
        });
    }
    let mut stats = SolveStats::default();
    let compiled = match cs.compile()? {
        Some(c) => c,
        None => return Ok((Representation::IncompatibleConstraints, stats)),
    };
    let g = gamma.gcd(delta);
    if !m.is_multiple_of(&g) {
        return Ok((Representation::NoSolution, stats));
    }
    let (g0, d0, m0) = (gamma / &g, delta / &g, m / &g);

    let unit = match pell_fundamental(&(&g0 * &d0)) {
        Pell::SquareDiscriminant => {
            stats.square_discriminant = true;
            let best = forms::split_form_solutions(&g0, &d0, &m0)
                .into_iter()
                .filter(|(x, y)| compiled.admits(x, y))
                .min_by(witness_cmp);
            return Ok((to_repr(best), stats));
        }
        Pell::Unit(u) => u,
    };
    let aut: Mat2 = [[unit.t.clone(), &d0 * &unit.u], [&g0 * &unit.u, unit.t.clone()]];
    let order = order_mod(&aut, &compiled.modulus)?;
    stats.walk_order = order;
    let form = Form::new(g0.clone(), 0, -d0.clone());

    let candidates = match (strategy, compiled.sublattice_basis()) {
        (Strategy::Substitution, Some(basis)) => substitution_candidates(&form, &m0, &basis, &compiled, &mut stats),
        _ => walk_candidates(&form, &m0, &aut, order, &compiled, &mut stats),
    };
    let period = forms::mat_pow(&aut, order);
    let mut best = None;
    for c in candidates {
        better(&mut best, descend(&period, c));
    }
    if let Some(w) = &best {
        if let Some(found) = minimize_by_scan(&g0, &d0, &m0, &compiled, &w.1.abs()) {
            best = Some(found);
        }
    }
    Ok((to_repr(best), stats))
}

fn to_repr(best: Option<(BigInt, BigInt)>) -> Representation {
    match best {
        Some((x, y)) => Representation::Witness { x, y },
        None => Representation::NoSolution,
    }
}

/// Order of `U` in `SL₂(ℤ/L)`.
fn order_mod(u: &Mat2, modulus: &BigInt) -> Result<u64, SolveError> {
    if modulus.is_one() {
        return Ok(1);
    }
    let reduce = |p: Mat2| -> Mat2 { p.map(|row| row.map(|e| e.mod_floor(modulus))) };
    let base = reduce(u.clone());
    let id = forms::identity();
    let mut p = base.clone();
    let mut k = 1u64;
    while p != id {
        p = reduce(forms::mat_mul(&p, &base));
        k += 1;
        if k > MAX_WALK {
            return Err(SolveError::WalkTooLong {
                modulus: modulus.clone(),
                limit: MAX_WALK,
            });
        }
    }
    Ok(k)
}

/// Walks `±Uᵏ·v (mod L)` for every orbit representative `v` and returns the
/// admissible orbit elements closest to the representative.
fn walk_candidates(
    form: &Form,
    m: &BigInt,
    aut: &Mat2,
    order: u64,
    compiled: &Compiled,
    stats: &mut SolveStats,
) -> Vec<(BigInt, BigInt)> {
    const PER_ORBIT: usize = 4;
    let (reps, ostats) = forms::orbit_representatives(form, m);
    stats.orbit_reps = reps.len();
    stats.roots_tested = ostats.roots_tested;
    stats.cycle_len = ostats.cycle_len;
    let l = &compiled.modulus;
    let aut_mod = aut.clone().map(|row| row.map(|e| e.mod_floor(l)));
    let aut_inv = forms::inverse_sl2(aut);
    let mut out = Vec::new();
    for rep in reps {
        // (|e|, e, sign) for each admissible exponent e ∈ (−order/2, order/2].
        let mut hits: Vec<(u64, i64, bool)> = Vec::new();
        let mut w = (rep.x.mod_floor(l), rep.y.mod_floor(l));
        for k in 0..order {
            let e = if 2 * k <= order {
                k as i64
            } else {
                k as i64 - order as i64
            };
            let key = e.unsigned_abs();
            if compiled.admits(&w.0, &w.1) {
                hits.push((key, e, false));
            }
            if compiled.admits(&-&w.0, &-&w.1) {
                hits.push((key, e, true));
            }
            let next = forms::apply(&aut_mod, &w);
            w = (next.0.mod_floor(l), next.1.mod_floor(l));
        }
        hits.sort();
        for (_, e, negate) in hits.into_iter().take(PER_ORBIT) {
            let step = if e >= 0 {
                forms::mat_pow(aut, e as u64)
            } else {
                forms::mat_pow(&aut_inv, e.unsigned_abs())
            };
            let (x, y) = forms::apply(&step, &(rep.x.clone(), rep.y.clone()));
            out.push(if negate { (-x, -y) } else { (x, y) });
        }
    }
    out
}

/// Substitutes `(x, y) = B·(k, l)` and solves the transformed form with no
/// constraints.
fn substitution_candidates(
    form: &Form,
    m: &BigInt,
    basis: &Mat2,
    compiled: &Compiled,
    stats: &mut SolveStats,
) -> Vec<(BigInt, BigInt)> {
    let sub = form.transform(basis);
    let content = sub.content();
    if !m.is_multiple_of(&content) {
        return Vec::new();
    }
    let reduced = sub.divide(&content);
    let (reps, ostats) = forms::orbit_representatives(&reduced, &(m / &content));
    stats.orbit_reps = reps.len();
    stats.roots_tested = ostats.roots_tested;
    stats.cycle_len = ostats.cycle_len;
    reps.into_iter()
        .flat_map(|r| {
            let (x, y) = forms::apply(basis, &(r.x, r.y));
            debug_assert!(compiled.admits(&x, &y));
            [(-&x, -&y), (x, y)]
        })
        .collect()
}

/// Moves along `W^k·v` (W ≡ I mod L preserves every congruence) while the
/// witness ordering improves.
fn descend(period: &Mat2, mut v: (BigInt, BigInt)) -> (BigInt, BigInt) {
    let inv = forms::inverse_sl2(period);
    loop {
        let fwd = forms::apply(period, &v);
        let back = forms::apply(&inv, &v);
        let step = if witness_cmp(&fwd, &back) == Ordering::Less {
            fwd
        } else {
            back
        };
        if witness_cmp(&step, &v) == Ordering::Less {
            v = step;
        } else {
            return v;
        }
    }
}

/// Global minimum under [`witness_cmp`] among all admissible solutions with
/// `|y| ≤ y_max`, found by scanning `y` upwards.
fn minimize_by_scan(
    gamma: &BigInt,
    delta: &BigInt,
    m: &BigInt,
    compiled: &Compiled,
    y_max: &BigInt,
) -> Option<(BigInt, BigInt)> {
    let limit = y_max.to_u64().filter(|&v| v <= MINIMIZE_SCAN_LIMIT)?;
    for ya in 0..=limit {
        let ya = BigInt::from(ya);
        let rhs = m + delta * &ya * &ya;
        if rhs.is_negative() || !rhs.is_multiple_of(gamma) {
            continue;
        }
        let sq = &rhs / gamma;
        let x = sq.sqrt();
        if &x * &x != sq {
            continue;
        }
        let mut best = None;
        for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let cand = (&x * sx, &ya * sy);
            if compiled.admits(&cand.0, &cand.1) {
                better(&mut best, cand);
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn solve(g: i64, d: i64, m: i64, cs: &ConstraintSet) -> Representation {
        represent(&b(g), &b(d), &b(m), cs).unwrap()
    }

    fn w(x: i64, y: i64) -> Representation {
        Representation::Witness { x: b(x), y: b(y) }
    }

    #[test]
    fn unconstrained_difference_of_squares() {
        // Among (±3, ±1) the canonical choice is (3, −1).
        assert_eq!(solve(1, 1, 8, &ConstraintSet::new()), w(3, -1));
    }

    #[test]
    fn parity_obstruction_is_a_complete_no() {
        let cs = ConstraintSet::new().coupled(1, 2);
        assert_eq!(solve(2, 2, 4, &cs), Representation::NoSolution);
        assert_eq!(solve(2, 2, -4, &cs), Representation::NoSolution);
    }

    #[test]
    fn coupled_congruence_with_negative_target() {
        let cs = ConstraintSet::new().coupled(1, 4);
        assert_eq!(solve(1, 9, -8, &cs), w(-1, -1));
    }

    #[test]
    fn zero_target_is_rejected() {
        assert_eq!(
            represent(&b(1), &b(2), &b(0), &ConstraintSet::new()),
            Err(SolveError::ZeroTarget)
        );
    }

    #[test]
    fn incompatible_constraints_are_tagged() {
        let cs = ConstraintSet::new().x_mod(0, 4).x_mod(1, 2);
        assert_eq!(solve(1, 2, 7, &cs), Representation::IncompatibleConstraints);
        // x ≡ 1 (2), y ≡ 0 (2) and x ≡ y (2) are jointly impossible.
        let cs = ConstraintSet::new().x_mod(1, 2).y_mod(0, 2).coupled(1, 2);
        assert_eq!(solve(1, 2, 7, &cs), Representation::IncompatibleConstraints);
    }

    #[test]
    fn large_unit_solutions_are_found() {
        // The only solution of x² − 109y² = 1 with y ≡ 100 (mod 1000) and
        // |y| minimal is the fundamental unit itself.
        let cs = ConstraintSet::new().y_mod(100, 1000);
        let (x, y) = solve(1, 109, 1, &cs).witness().unwrap();
        assert_eq!(x.to_string(), "158070671986249");
        assert_eq!(y.to_string(), "15140424455100");
        // Every solution has y even, so an odd y is a complete no.
        let cs = ConstraintSet::new().y_mod(1, 2);
        assert_eq!(solve(1, 109, 1, &cs), Representation::NoSolution);
    }

    #[test]
    fn inhomogeneous_residues() {
        // x² − 2y² = −1 with x ≡ 3 (mod 5).
        let cs = ConstraintSet::new().x_mod(3, 5);
        let (x, y) = solve(1, 2, -1, &cs).witness().unwrap();
        assert_eq!(&x * &x - b(2) * &y * &y, b(-1));
        assert_eq!(x.mod_floor(&b(5)), b(3));
    }

    #[test]
    fn sublattice_basis_has_the_right_index() {
        for (mx, my, mu, big_m) in [(1, 1, 1, 4), (2, 3, 1, 4), (3, 6, 5, 12), (4, 2, 3, 8), (1, 5, 0, 1)] {
            let cs = ConstraintSet::new().x_mod(0, mx).y_mod(0, my).coupled(mu, big_m);
            let comp = cs.compile().unwrap().unwrap();
            let basis = comp.sublattice_basis().unwrap();
            let l = comp.modulus.to_i64().unwrap();
            let count = (0..l)
                .flat_map(|x| (0..l).map(move |y| (x, y)))
                .filter(|&(x, y)| cs.admits(&b(x), &b(y)))
                .count() as i64;
            let det = (&basis[0][0] * &basis[1][1]).to_i64().unwrap();
            assert_eq!(count * det, l * l);
            assert!(cs.admits(&basis[0][0], &basis[1][0]));
            assert!(cs.admits(&basis[0][1], &basis[1][1]));
        }
    }

    #[test]
    fn strategies_agree_on_a_small_grid() {
        for g in 1..=6i64 {
            for d in 1..=6i64 {
                for m in -20..=20i64 {
                    if m == 0 {
                        continue;
                    }
                    for (mx, my, mu, big_m) in [(1, 1, 0, 1), (2, 1, 1, 2), (1, 3, 1, 4), (3, 2, 2, 3)] {
                        let cs = ConstraintSet::new().x_mod(0, mx).y_mod(0, my).coupled(mu, big_m);
                        let (a, _) = represent_with(&b(g), &b(d), &b(m), &cs, Strategy::OrbitWalk).unwrap();
                        let (s, _) = represent_with(&b(g), &b(d), &b(m), &cs, Strategy::Substitution).unwrap();
                        assert_eq!(a.is_solvable(), s.is_solvable(), "γ={g} δ={d} m={m} cs={cs:?}");
                    }
                }
            }
        }
    }
}
