//! Fixed inputs shared by the benchmarks, built outside the timed loops.

use std::sync::Arc;

use zmtile::sweep::SweepLayout;
use zmtile::tiling::TileSet;
use zmtile::{ClassSet, Modulus, Rational, StepFunction};

pub fn modulus(m: u64) -> Arc<Modulus> {
    Arc::new(Modulus::new(m).expect("valid modulus"))
}

/// Deterministic step function with small integer coefficients.
pub fn sample_step(m: u64) -> StepFunction {
    let md = modulus(m);
    let coeffs = (0..md.divisor_count())
        .map(|i| Rational::from((i as i64 * 7 + 3) % 5 - 2))
        .collect();
    StepFunction::new(md, coeffs).expect("coefficient count matches")
}

/// Candidate `counter` of sweep row `row` at M = 11025.
pub fn sweep_candidate(row: usize, counter: u64) -> ClassSet {
    let layout = SweepLayout::new(modulus(11025)).expect("sweep modulus");
    layout.candidate(row, counter)
}

/// The tile {0, 1, ..., n-1} of Z_M.
pub fn interval(m: u64, n: u64) -> TileSet {
    TileSet::new(modulus(m), &(0..n).collect::<Vec<_>>()).expect("valid tile")
}
