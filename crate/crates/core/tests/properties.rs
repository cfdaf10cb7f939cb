use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use k3iso_core::arith::{self, gamma_split, ArithError, MukaiInput};
use k3iso_core::decide::{self, DecisionInput, Series, Verdict};
use k3iso_core::lattice::{self, LatticeVector, PolarizedLattice};
use k3iso_core::moduli::{apply, validate_chain, Morphism, MukaiVector, Target};
use k3iso_core::mukai_model::build_v;
use k3iso_core::qsolve::{self, pell, ConstraintSet};

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

fn pool() -> &'static [PolarizedLattice] {
    use std::sync::OnceLock;
    static POOL: OnceLock<Vec<PolarizedLattice>> = OnceLock::new();
    POOL.get_or_init(|| (1..=60i64).flat_map(|n| lattice::enumerate(&b(n), &b(50))).collect())
}

fn lattice_and_vector() -> impl Strategy<Value = (PolarizedLattice, LatticeVector)> {
    (0..pool().len(), -200i64..=200, -200i64..=200).prop_map(|(i, y, k)| {
        let l = pool()[i].clone();
        let z = LatticeVector {
            x: &l.mu * b(y) + b(k) * l.modulus(),
            y: b(y),
        };
        (l, z)
    })
}

fn vector_in(l: &PolarizedLattice, y: i64, k: i64) -> LatticeVector {
    LatticeVector {
        x: &l.mu * b(y) + b(k) * l.modulus(),
        y: b(y),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn invariants_reconstruct_r_s_and_h_square(r in 1i64..=50, s in 1i64..=50, d in 1i64..=12) {
        match arith::invariants(&MukaiInput::new(r, s, d)) {
            Ok(i) => {
                prop_assert_eq!(&i.a1 * &i.d_a * &i.d_a * &i.c, b(r));
                prop_assert_eq!(&i.b1 * &i.d_b * &i.d_b * &i.c, b(s));
                prop_assert_eq!(&i.n_half * b(d * d), b(r * s));
                prop_assert!(i.a.gcd(&i.b).is_one());
                prop_assert_eq!(i.d(), b(d));
            }
            Err(ArithError::NotPrimitive { .. }) | Err(ArithError::NotDivisible { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn gamma_two_divides_two(r in 1i64..=50, s in 1i64..=50, pick in 0usize..64) {
        let Ok(i) = arith::invariants(&MukaiInput::new(r, s, 1)) else { return Ok(()) };
        let two_ab = b(2) * &i.a1 * &i.b1;
        let divisors: Vec<BigInt> = (1..=200i64).map(b).filter(|g| two_ab.is_multiple_of(g)).collect();
        let gamma = &divisors[pick % divisors.len()];
        let split = gamma_split(gamma, &i.a1, &i.b1).unwrap();
        prop_assert!(split.gamma_2 == b(1) || split.gamma_2 == b(2));
        prop_assert_eq!(&split.gamma_a * &split.gamma_b * &split.gamma_2, gamma.clone());
    }

    #[test]
    fn pairing_with_polarization_and_f((l, z) in lattice_and_vector()) {
        prop_assert_eq!(l.pairing(&l.polarization(), &z).unwrap(), &l.gamma * &z.x);
        prop_assert_eq!(l.pairing(&l.orthogonal_generator(), &z).unwrap(), -(&l.delta * &z.y));
        prop_assert!(l.square(&z).unwrap().is_even());
    }

    #[test]
    fn both_signs_of_mu_validate(i in 0..pool().len()) {
        let l = &pool()[i];
        let flipped = PolarizedLattice { mu: l.modulus() - &l.mu, ..l.clone() };
        prop_assert!(flipped.validate().is_ok());
        prop_assert_eq!(flipped.canonical(), l.clone());
        let g = l.gram().unwrap();
        let back = lattice::from_gram(g, (BigInt::one(), BigInt::zero())).unwrap();
        prop_assert_eq!(&back.lattice, l);
    }

    #[test]
    fn nu_preserves_primitivity_exactly_under_gcd_conditions(
        r in 1i64..=12, s in 1i64..=12, d1 in 1i64..=6, d2 in 1i64..=6,
    ) {
        // (r, H̃, s) on the lattice with H̃² = 2rs.
        let l = PolarizedLattice::new(r * s, 1, 1, 1);
        let src = MukaiVector::new(r, l.polarization(), s);
        prop_assert!(src.mukai_square(&l).unwrap().is_zero());
        let raw = MukaiVector::new(d1 * d1 * r, l.polarization().scale(&b(d1 * d2)), d2 * d2 * s);
        let conditions = d1.gcd(&s) == 1 && d2.gcd(&r) == 1 && d1.gcd(&d2) == 1;
        prop_assert_eq!(raw.is_primitive(&l).unwrap(), conditions);
        prop_assert!(raw.mukai_square(&l).unwrap().is_zero());
        let nu = Morphism::Nu { d1: b(d1), d2: b(d2) };
        match apply(&nu, &src, &l) {
            Ok(Target::Vector(w)) => {
                prop_assert!(conditions);
                prop_assert_eq!(&w, &raw);
                let back = apply(&Morphism::NuInverse { d1: b(d1), d2: b(d2) }, &w, &l).unwrap();
                prop_assert_eq!(back, Target::Vector(src));
            }
            Ok(Target::X) => prop_assert!(false, "ν is not terminal"),
            Err(_) => prop_assert!(!conditions),
        }
    }

    #[test]
    fn mukai_square_under_reflection_twist_and_scaling(
        (l, ell) in lattice_and_vector(), rho in 1i64..=9, sigma in 1i64..=9,
        dy in -20i64..=20, dk in -20i64..=20, d1 in 1i64..=6, d2 in 1i64..=6,
    ) {
        let v = MukaiVector::new(rho, ell.clone(), sigma);
        let sq = v.mukai_square(&l).unwrap();
        let d = vector_in(&l, dy, dk);
        match apply(&Morphism::Twist { d }, &v, &l).unwrap() {
            Target::Vector(w) => prop_assert_eq!(w.mukai_square(&l).unwrap(), sq.clone()),
            Target::X => prop_assert!(false),
        }
        let swapped = MukaiVector::new(sigma, ell.clone(), rho);
        prop_assert_eq!(swapped.mukai_square(&l).unwrap(), sq.clone());
        let scaled = MukaiVector::new(d1 * d1 * rho, ell.scale(&b(d1 * d2)), d2 * d2 * sigma);
        prop_assert_eq!(scaled.mukai_square(&l).unwrap(), sq * b(d1 * d2 * d1 * d2));
    }

    #[test]
    fn model_vectors_are_isotropic(a in 1i64..=8, bb in 1i64..=8, c in 1i64..=6, d1 in 1i64..=6, d2 in 1i64..=6) {
        if let Ok(v) = build_v(&b(a), &b(bb), &b(c), &b(d1), &b(d2)) {
            prop_assert!(v.square().is_zero());
            prop_assert_eq!(v.e1, b(d1 * d1 * a * c));
            prop_assert_eq!(v.e2, b(d2 * d2 * bb * c));
        }
    }

    #[test]
    fn solver_witnesses_verify(
        gamma in 1i64..=60, delta in 1i64..=60, m in -500i64..=500,
        mx in 1i64..=6, rx in 0i64..6, my in 1i64..=6, ry in 0i64..6,
    ) {
        prop_assume!(m != 0);
        let cs = ConstraintSet::new().x_mod(rx % mx, mx).y_mod(ry % my, my);
        let rep = qsolve::represent(&b(gamma), &b(delta), &b(m), &cs).unwrap();
        if let Some((x, y)) = rep.witness() {
            prop_assert_eq!(b(gamma) * &x * &x - b(delta) * &y * &y, b(m));
            prop_assert!(cs.admits(&x, &y));
        } else {
            prop_assert!(qsolve::enumerate_bounded(&b(gamma), &b(delta), &b(m), &cs, 2000).is_empty());
        }
    }

    #[test]
    fn pell_unit_acts_on_solutions(gamma in 1i64..=60, delta in 1i64..=60, x in -300i64..=300, y in -300i64..=300) {
        let Some(unit) = pell::pell_fundamental(&b(gamma * delta)).unit() else { return Ok(()) };
        let value = |x: &BigInt, y: &BigInt| b(gamma) * x * x - b(delta) * y * y;
        let (x1, y1) = pell::act(&unit, &b(gamma), &b(delta), &b(x), &b(y));
        prop_assert_eq!(value(&x1, &y1), value(&b(x), &b(y)));
    }
}

/// Cells of a small grid, where every decision is cheap.
fn cells() -> &'static [(MukaiInput, PolarizedLattice)] {
    use std::sync::OnceLock;
    static CELLS: OnceLock<Vec<(MukaiInput, PolarizedLattice)>> = OnceLock::new();
    CELLS.get_or_init(|| {
        let mut out = Vec::new();
        for r in 1..=6i64 {
            for s in 1..=6i64 {
                for d in 1..=3i64 {
                    let m = MukaiInput::new(r, s, d);
                    let Ok(inv) = arith::invariants(&m) else { continue };
                    for l in lattice::enumerate(&inv.n_half, &b(60)) {
                        out.push((m.clone(), l));
                    }
                }
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn certificates_satisfy_their_identities(i in 0..cells().len()) {
        let (mukai, l) = cells()[i].clone();
        let input = DecisionInput { mukai: mukai.clone(), lattice: l.clone(), full_picard_general: true };
        let first = decide::decide(&input).unwrap();
        let again = decide::decide(&input).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
        let Verdict::Yes(c) = first else { return Ok(()) };
        let inv = arith::invariants(&mukai).unwrap();
        let split = gamma_split(&l.gamma, &inv.a1, &inv.b1).unwrap();
        let (norm, gamma_e) = match c.series {
            Series::A => (inv.b1c(), &split.gamma_b),
            Series::B => (inv.a1c(), &split.gamma_a),
        };
        let z = &c.witness;
        // h̃₁ = d₂H̃ + norm·D.
        let rebuilt = l.polarization().scale(&c.d2).add(&c.twist.scale(&norm));
        prop_assert_eq!(&rebuilt, z);
        // Congruence cascade.
        prop_assert!(z.y.is_multiple_of(&norm));
        prop_assert!(z.x.is_multiple_of(&(&norm / gamma_e)));
        prop_assert!(c.d2.is_positive() && c.d2 <= norm);
        let h = l.polarization().scale(&mukai.d);
        prop_assert_eq!(&c.chain.source, &MukaiVector::new(mukai.r.clone(), h, mukai.s.clone()));
        let report = validate_chain(&c.chain, &l).unwrap();
        let sign = c.sign.as_int();
        let h_sq = l.square(z).unwrap();
        let end = MukaiVector::new(&sign * &h_sq / 2, z.clone(), sign);
        prop_assert_eq!(&c.chain.steps.last().unwrap().source, &end);
        prop_assert_eq!(report.steps, c.chain.len());
    }
}
