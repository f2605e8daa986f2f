use nalgebra::{DMatrix, DVector};

use super::basis::AlpertBasis;
use super::{RANK_FLOOR, RANK_REL};
use crate::error::WaveletError;
use crate::grid::{DyadicCube, Interval, SuperCube};
use crate::linalg::pivoted_solve;
use crate::measure::{moments_of, Measure};
use crate::poly::{Frame, MomentSystem, Piece, PiecewisePolyFn};

/// Wavelet coefficients `<f, h_a>_mu` and the piece `△_Q f`.
pub fn project_delta(f: &PiecewisePolyFn, basis: &AlpertBasis, mu: &Measure) -> (Vec<f64>, PiecewisePolyFn) {
    let coeffs = delta_coefficients(f, basis, mu);
    let piece = basis.combine(&coeffs);
    (coeffs, piece)
}

/// Only the coefficients of [`project_delta`].
pub fn delta_coefficients(f: &PiecewisePolyFn, basis: &AlpertBasis, mu: &Measure) -> Vec<f64> {
    if basis.dim() == 0 {
        return Vec::new();
    }
    let sys = basis.system();
    let mut g = Vec::with_capacity(basis.coefficients().nrows());
    for c in basis.children() {
        g.extend(moments_of(f, &c.intervals(), sys, &Frame::of_cube(c), mu));
    }
    let g = DVector::from_vec(g);
    (basis.coefficients().transpose() * g).iter().copied().collect()
}

/// Frame used for the projection onto a region: the cube's own frame for a
/// finite cube, the center and largest side of a finite box, and for an
/// unbounded region the bounding box of the measure nodes inside it.
pub fn region_frame(region: &SuperCube, mu: &Measure) -> Frame {
    if region.is_finite() {
        let lo: Vec<_> = region.factors().iter().map(|iv| iv.lo().unwrap().clone()).collect();
        let (l, h) = (region.factors()[0].lo().unwrap(), region.factors()[0].hi().unwrap());
        let side = h - l;
        let e = side.mantissa().bits() as i64 - 1 + side.exponent();
        if side == crate::dyadic::DyadicRational::pow2(e) {
            let cube = DyadicCube::new(e, lo);
            if cube.intervals() == region.factors() {
                return Frame::of_cube(&cube);
            }
        }
        let center = region
            .factors()
            .iter()
            .map(|iv| {
                let (a, b) = iv.bounds_f64();
                0.5 * (a + b)
            })
            .collect();
        let scale = region
            .factors()
            .iter()
            .map(|iv| {
                let (a, b) = iv.bounds_f64();
                b - a
            })
            .fold(0.0, f64::max);
        return Frame { center, scale };
    }
    node_box_frame(region, mu).unwrap_or_else(|| mu.support_frame())
}

/// Center and largest side of the bounding box of the nodes of `mu` in `region`.
fn node_box_frame(region: &SuperCube, mu: &Measure) -> Option<Frame> {
    let n = region.dimension();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    mu.for_each_node(region.factors(), |x, _| {
        for k in 0..n {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    });
    if !lo[0].is_finite() {
        return None;
    }
    let scale = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { mu.support_frame().scale };
    Some(Frame {
        center: lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect(),
        scale,
    })
}

/// `E_region f` together with the rank of the region Gram matrix.
pub fn project_e_with_rank(
    f: &PiecewisePolyFn,
    region: &SuperCube,
    mu: &Measure,
    sys: &MomentSystem,
) -> Result<(PiecewisePolyFn, usize), WaveletError> {
    if region.dimension() != sys.dim() || mu.dimension() != sys.dim() {
        return Err(WaveletError::SystemMismatch {
            system: sys.dim(),
            function: region.dimension(),
        });
    }
    if mu.mass_in(region) <= 0.0 {
        return Ok((PiecewisePolyFn::zero(sys.clone()), 0));
    }
    let frame = region_frame(region, mu);
    let factors: Vec<Interval> = region.factors().to_vec();
    let d = sys.len();
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut e = vec![0.0; d];
    mu.for_each_node(&factors, |x, w| {
        sys.eval_into(&frame, x, &mut e);
        for j in 0..d {
            for k in 0..d {
                gram[(j, k)] += w * e[j] * e[k];
            }
        }
    });
    let b = DVector::from_vec(moments_of(f, &factors, sys, &frame, mu));
    let scale = (0..d).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let (c, rank) = pivoted_solve(&gram, &b, RANK_REL, RANK_FLOOR * scale);
    let piece = Piece::new(factors, frame, c.iter().copied().collect());
    Ok((PiecewisePolyFn::from_disjoint(sys.clone(), vec![piece]), rank))
}

/// Orthogonal projection of `f` onto `span{1_region e_j}` in `L^2(mu)`.
///
/// Members that are `mu`-dependent on earlier ones are dropped, so the
/// result is written in the leading independent members of the system.
pub fn project_e(
    f: &PiecewisePolyFn,
    region: &SuperCube,
    mu: &Measure,
    sys: &MomentSystem,
) -> Result<PiecewisePolyFn, WaveletError> {
    project_e_with_rank(f, region, mu, sys).map(|(p, _)| p)
}
