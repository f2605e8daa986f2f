use serde::Serialize;

use super::{DyadicCube, GridSpec, SuperCube};
use crate::dyadic::DyadicRational;

/// Index of the first Halton point used; fixes the sample sequence.
pub const HALTON_SKIP: u64 = 17;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `count` Halton points (bases 2, 3, 5, ...) in the cube `b`, starting at
/// index [`HALTON_SKIP`]. Coordinates are exact dyadic values of the binary64
/// samples.
pub fn halton_points(b: &DyadicCube, count: usize) -> Vec<Vec<DyadicRational>> {
    let n = b.dimension();
    assert!(n <= PRIMES.len(), "halton sampling supports up to {} axes", PRIMES.len());
    let side = b.side_f64();
    let lo: Vec<f64> = b.corner.iter().map(DyadicRational::to_f64).collect();
    (0..count as u64)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let u = radical_inverse(i + HALTON_SKIP, PRIMES[k]);
                    DyadicRational::from_f64(lo[k] + u * side).expect("finite sample")
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TilingViolation {
    pub point: Vec<DyadicRational>,
    /// Number of computed tops containing the point (should be 1).
    pub containing: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TilingReport {
    pub tops: Vec<SuperCube>,
    pub hits: Vec<usize>,
    pub samples: usize,
    pub violations: Vec<TilingViolation>,
}

impl TilingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GridSpec {
    /// Checks that each of `count` quasi-random points of `sample_box` lies in
    /// exactly one top, and that it is the top reported by `top_of_point`.
    pub fn verify_top_tiling(&self, sample_box: &DyadicCube, count: usize) -> TilingReport {
        assert!(count >= 1, "count must be positive");
        let tops = self.tops();
        let mut hits = vec![0usize; tops.len()];
        let mut violations = Vec::new();
        for x in halton_points(sample_box, count) {
            let containing: Vec<usize> = tops
                .iter()
                .enumerate()
                .filter(|(_, t)| t.contains(&x))
                .map(|(i, _)| i)
                .collect();
            if containing.len() == 1 && tops[containing[0]] == self.top_of_point(&x) {
                hits[containing[0]] += 1;
            } else {
                violations.push(TilingViolation {
                    point: x,
                    containing: containing.len(),
                });
            }
        }
        TilingReport {
            tops,
            hits,
            samples: count,
            violations,
        }
    }
}
