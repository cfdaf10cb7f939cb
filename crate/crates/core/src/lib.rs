//! Decision procedure for `M_X(r, H, s) ≅ X` over rank-2 Picard data.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: gcd decomposition of the Mukai data `(r, s, d)`.
//! * [`lattice`]: the rank-2 even lattice `N ∋ H̃` in its `(γ, δ, μ)` presentation.
//! * [`qsolve`]: exact solver for `γx² − δy² = m` under congruence constraints.
//! * [`moduli`]: symbolic Mukai vectors and the universal morphisms between moduli spaces.
//! * [`decide`]: series witnesses, certificate synthesis and the final verdict.
//! * [`mukai_model`]: an independent period-level check in the `U ⊕ U` model.
//! * [`scan`]: grid enumeration shared by the CLI and the acceptance suite.
//!
//! All integers are [`num_bigint::BigInt`]; nothing overflows silently.

pub mod arith;
pub mod decide;
pub mod intser;
pub mod lattice;
pub mod moduli;
pub mod mukai_model;
pub mod qsolve;
pub mod scan;

pub use arith::{MukaiInput, MukaiInvariants};
pub use decide::{decide, Certificate, DecisionInput, Series, Verdict};
pub use lattice::{LatticeVector, PolarizedLattice};
pub use moduli::{Chain, Morphism, MukaiVector};
pub use num_bigint::BigInt;

/// Shorthand for building a [`BigInt`] from a machine integer.
pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}
