//! Seeded random piecewise-polynomial test functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::GridSpec;
use crate::measure::Measure;
use crate::poly::{MomentSystem, Piece, PiecewisePolyFn};

/// One random function: on every grid cube of scale `m` with positive mass,
/// coefficients uniform in `[-1, 1]` in the cube's frame.
pub fn random_piecewise(grid: &GridSpec, mu: &Measure, sys: &MomentSystem, m: i64, rng: &mut ChaCha8Rng) -> PiecewisePolyFn {
    let pieces = mu
        .support_cubes(grid, m)
        .into_iter()
        .map(|q| {
            let c = (0..sys.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            Piece::on_cube(&q, c)
        })
        .collect();
    PiecewisePolyFn::new(sys.clone(), pieces).expect("grid cubes of one scale are disjoint")
}

/// `count` probes from a fixed seed.
pub fn random_probes(
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    m: i64,
    count: usize,
    seed: u64,
) -> Vec<PiecewisePolyFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_piecewise(grid, mu, sys, m, &mut rng)).collect()
}
