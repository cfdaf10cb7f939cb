//! Grid enumeration of decision cells.
//!
//! A cell is `(r, s, d, γ, δ, μ)` with valid Mukai data and a valid lattice of
//! matching `n_half` and canonical `μ`. Cells come out in lexicographic order;
//! evaluation of one cell never affects another.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, MukaiInput};
use crate::decide::{self, check_series, DecisionInput, Series, Sign, Verdict, SEARCH_ORDER};
use crate::lattice::{self, LatticeVector, PolarizedLattice};
use crate::qsolve::{self, ConstraintSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("bound {name} must be at least 1, got {value}")]
    NonPositiveBound { name: &'static str, value: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub r: (i64, i64),
    pub s: (i64, i64),
    pub d: (i64, i64),
    pub max_n_half: i64,
    pub max_gamma_delta: i64,
    pub full_picard_general: bool,
    /// Keep only cells whose certificate is in this series.
    pub series: Option<Series>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<(), ScanError> {
        for (name, (lo, hi)) in [("r", self.r), ("s", self.s), ("d", self.d)] {
            if lo < 1 {
                return Err(ScanError::NonPositiveBound { name, value: lo });
            }
            if hi < 1 {
                return Err(ScanError::NonPositiveBound { name, value: hi });
            }
        }
        for (name, v) in [
            ("max_n_half", self.max_n_half),
            ("max_gamma_delta", self.max_gamma_delta),
        ] {
            if v < 1 {
                return Err(ScanError::NonPositiveBound { name, value: v });
            }
        }
        Ok(())
    }

    /// Series filter applied to finished rows.
    pub fn keeps(&self, row: &Row) -> bool {
        self.series.is_none() || row.series == self.series
    }

    /// All cells in `(r, s, d, γ, δ, μ)` order. An inverted range yields none.
    pub fn cells(&self) -> Result<Vec<Cell>, ScanError> {
        self.validate()?;
        let mut out = Vec::new();
        for r in self.r.0..=self.r.1 {
            for s in self.s.0..=self.s.1 {
                for d in self.d.0..=self.d.1 {
                    let mukai = MukaiInput::new(r, s, d);
                    let Ok(inv) = arith::invariants(&mukai) else {
                        continue;
                    };
                    if inv.n_half > BigInt::from(self.max_n_half) {
                        continue;
                    }
                    for l in lattice::enumerate(&inv.n_half, &BigInt::from(self.max_gamma_delta)) {
                        out.push(Cell {
                            mukai: mukai.clone(),
                            lattice: l,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub mukai: MukaiInput,
    pub lattice: PolarizedLattice,
}

/// Column names of [`Row`], in serialization order.
pub const ROW_COLUMNS: [&str; 21] = [
    "r",
    "s",
    "d",
    "n_half",
    "gamma",
    "delta",
    "mu",
    "verdict",
    "series",
    "sign",
    "d2",
    "witness_x",
    "witness_y",
    "witness_size",
    "solver_calls",
    "orbit_reps",
    "roots_tested",
    "max_walk_order",
    "reason",
    "oracle",
    "error",
];

/// One output line. Optional fields are empty for non-yes verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    #[serde(with = "crate::intser")]
    pub r: BigInt,
    #[serde(with = "crate::intser")]
    pub s: BigInt,
    #[serde(with = "crate::intser")]
    pub d: BigInt,
    #[serde(with = "crate::intser")]
    pub n_half: BigInt,
    #[serde(with = "crate::intser")]
    pub gamma: BigInt,
    #[serde(with = "crate::intser")]
    pub delta: BigInt,
    #[serde(with = "crate::intser")]
    pub mu: BigInt,
    pub verdict: String,
    pub series: Option<Series>,
    pub sign: Option<i64>,
    #[serde(with = "crate::intser::option")]
    pub d2: Option<BigInt>,
    #[serde(with = "crate::intser::option")]
    pub witness_x: Option<BigInt>,
    #[serde(with = "crate::intser::option")]
    pub witness_y: Option<BigInt>,
    /// `max(|x|, |y|)` of the witness.
    #[serde(with = "crate::intser::option")]
    pub witness_size: Option<BigInt>,
    pub solver_calls: usize,
    pub orbit_reps: usize,
    pub roots_tested: usize,
    pub max_walk_order: u64,
    pub reason: String,
    /// Agreement with the bounded oracle, when requested.
    pub oracle: Option<bool>,
    pub error: Option<String>,
}

impl Row {
    fn blank(cell: &Cell) -> Row {
        Row {
            r: cell.mukai.r.clone(),
            s: cell.mukai.s.clone(),
            d: cell.mukai.d.clone(),
            n_half: cell.lattice.n_half.clone(),
            gamma: cell.lattice.gamma.clone(),
            delta: cell.lattice.delta.clone(),
            mu: cell.lattice.mu.clone(),
            verdict: "error".into(),
            series: None,
            sign: None,
            d2: None,
            witness_x: None,
            witness_y: None,
            witness_size: None,
            solver_calls: 0,
            orbit_reps: 0,
            roots_tested: 0,
            max_walk_order: 0,
            reason: String::new(),
            oracle: None,
            error: None,
        }
    }
}

/// Decides one cell. Failures produce an error row, never a partial one.
/// With `oracle_bound`, the verdict is also compared to [`oracle_witness`].
pub fn evaluate(cell: &Cell, full: bool, oracle_bound: Option<u64>) -> Row {
    let mut row = Row::blank(cell);
    let input = DecisionInput {
        mukai: cell.mukai.clone(),
        lattice: cell.lattice.clone(),
        full_picard_general: full,
    };
    let (verdict, stats) = match decide::decide_with_stats(&input) {
        Ok(v) => v,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.verdict = verdict.label().into();
    row.reason = verdict.reason();
    row.solver_calls = stats.solver_calls;
    row.orbit_reps = stats.orbit_reps;
    row.roots_tested = stats.roots_tested;
    row.max_walk_order = stats.max_walk_order;
    if let Verdict::Yes(c) = &verdict {
        row.series = Some(c.series);
        row.sign = Some(c.sign.value());
        row.d2 = Some(c.d2.clone());
        row.witness_x = Some(c.witness.x.clone());
        row.witness_y = Some(c.witness.y.clone());
        row.witness_size = Some(decide::witness_size(&c.witness));
    }
    if let Some(bound) = oracle_bound {
        row.oracle = Some(oracle_agrees(cell, &verdict, bound));
    }
    row
}

/// Independent witness search: every `(x, y)` in the box `|x|, |y| ≤ B`
/// solving `γx² − δy² = ±2e₁c·M` with `x ≡ μy (mod M)`, filtered by the
/// direct series check. Order: A/+, A/−, B/+, B/−, then lexicographic.
pub fn oracle_witness(
    l: &PolarizedLattice,
    inv: &arith::MukaiInvariants,
    bound: u64,
) -> Option<(Series, Sign, LatticeVector)> {
    let m = l.modulus();
    let coupled = ConstraintSet::new().coupled(l.mu.clone(), m.clone());
    for (series, sign) in SEARCH_ORDER {
        let norm = match series {
            Series::A => &inv.b1 * &inv.c,
            Series::B => &inv.a1 * &inv.c,
        };
        let target = sign.as_int() * BigInt::from(2) * norm * &m;
        for (x, y) in qsolve::enumerate_bounded_by_x(&l.gamma, &l.delta, &target, &coupled, bound) {
            let z = LatticeVector { x, y };
            if check_series(l, inv, &z, series) == Some(sign) {
                return Some((series, sign, z));
            }
        }
    }
    None
}

/// Verdict agrees with the bounded oracle under the completeness protocol:
/// a box hit forces yes; a yes outside the box must carry a verifying witness.
pub fn oracle_agrees(cell: &Cell, verdict: &Verdict, bound: u64) -> bool {
    let Ok(inv) = arith::invariants(&cell.mukai) else {
        return false;
    };
    let l = &cell.lattice;
    let n = arith::n_of_v(&cell.mukai.r, &cell.mukai.s, &l.gamma);
    match verdict {
        Verdict::Yes(c) => check_series(l, &inv, &c.witness, c.series) == Some(c.sign),
        Verdict::No(_) if !n.is_one() => true,
        Verdict::No(_) | Verdict::Unknown(_) => {
            let applicable = inv.c.gcd(&(inv.d() * &l.gamma)).is_one();
            !applicable || oracle_witness(l, &inv, bound).is_none()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(r: i64, s: i64, d: i64, n: i64, gd: i64) -> ScanSpec {
        ScanSpec {
            r: (1, r),
            s: (1, s),
            d: (1, d),
            max_n_half: n,
            max_gamma_delta: gd,
            full_picard_general: true,
            series: None,
        }
    }

    #[test]
    fn cells_are_lexicographic_and_valid() {
        let cells = spec(3, 3, 2, 10, 20).cells().unwrap();
        assert!(!cells.is_empty());
        let key = |c: &Cell| {
            (
                c.mukai.r.clone(),
                c.mukai.s.clone(),
                c.mukai.d.clone(),
                c.lattice.gamma.clone(),
                c.lattice.delta.clone(),
                c.lattice.mu.clone(),
            )
        };
        for w in cells.windows(2) {
            assert!(key(&w[0]) < key(&w[1]));
        }
        for c in &cells {
            c.lattice.validate().unwrap();
        }
    }

    #[test]
    fn columns_follow_the_row_fields() {
        let cell = spec(2, 1, 1, 2, 2).cells().unwrap().remove(0);
        let json = serde_json::to_value(evaluate(&cell, true, None)).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys, ROW_COLUMNS);
    }

    #[test]
    fn empty_range_has_no_cells() {
        let mut sp = spec(2, 2, 1, 2, 10);
        sp.r = (3, 2);
        assert!(sp.cells().unwrap().is_empty());
        sp.r = (0, 2);
        assert!(sp.cells().is_err());
    }

    #[test]
    fn worked_cells_have_their_verdicts() {
        let sp = ScanSpec {
            r: (2, 2),
            s: (1, 1),
            d: (1, 1),
            max_n_half: 2,
            max_gamma_delta: 10,
            full_picard_general: true,
            series: None,
        };
        let rows: Vec<Row> = sp
            .cells()
            .unwrap()
            .iter()
            .map(|c| evaluate(c, true, Some(200)))
            .collect();
        let find = |g: i64, d: i64| {
            rows.iter()
                .find(|r| r.gamma == BigInt::from(g) && r.delta == BigInt::from(d))
                .unwrap()
        };
        let a = find(1, 1);
        assert_eq!(
            (a.verdict.as_str(), a.series, a.sign),
            ("yes", Some(Series::A), Some(1))
        );
        let b = find(2, 2);
        assert_eq!((b.verdict.as_str(), b.series), ("yes", Some(Series::B)));
        let c = find(1, 9);
        assert_eq!((c.verdict.as_str(), c.sign), ("yes", Some(-1)));
        assert!(rows.iter().all(|r| r.oracle == Some(true)));
    }
}
