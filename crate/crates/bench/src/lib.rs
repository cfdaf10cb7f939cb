//! Fixed inputs shared by the benchmarks.

use k3iso_core::scan::{Cell, ScanSpec};
use k3iso_core::{DecisionInput, MukaiInput, PolarizedLattice};

/// The three small certified instances over `v = (2, H̃, 1)`.
pub fn worked_inputs() -> Vec<(&'static str, DecisionInput)> {
    [("A+", 1, 1), ("B+", 2, 2), ("A-", 1, 9)]
        .into_iter()
        .map(|(name, gamma, delta)| {
            let input = DecisionInput {
                mukai: MukaiInput::new(2, 1, 1),
                lattice: PolarizedLattice::new(2, gamma, delta, 1),
                full_picard_general: true,
            };
            (name, input)
        })
        .collect()
}

/// Every valid cell with `r, s ≤ max_rs`, `d ≤ 2` and `γδ ≤ max_gamma_delta`.
pub fn grid(max_rs: i64, max_gamma_delta: i64) -> Vec<Cell> {
    ScanSpec {
        r: (1, max_rs),
        s: (1, max_rs),
        d: (1, 2),
        max_n_half: i64::MAX,
        max_gamma_delta,
        full_picard_general: true,
        series: None,
    }
    .cells()
    .expect("bounds are positive")
}
