//! Inputs shared by the benchmarks.

use mvlsw::{build_eq3_fixture, rmvlsw, InnovationGenerator, MvLswArray, TimeSeriesMatrix};

/// The trivariate test spectrum of length `t` and one draw from it.
pub fn fixture_and_draw(t: usize, seed: u64) -> (MvLswArray, TimeSeriesMatrix) {
    let s = build_eq3_fixture(t).expect("dyadic length");
    let x = rmvlsw(&s, &InnovationGenerator::gaussian(seed)).expect("valid fixture");
    (s, x)
}
