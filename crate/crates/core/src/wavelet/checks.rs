use serde::Serialize;

use super::basis::{build_alpert_basis, AlpertBasis};
use super::projection::{project_delta, project_e};
use crate::error::WaveletError;
use crate::grid::{DyadicCube, GridSpec, SuperCube};
use crate::measure::{moments_of, Measure};
use crate::poly::{multi_indices, Frame, MomentSystem, SystemFunction};

/// `max |sum_{Q ⊊ I ⊆ P} △_I f - (E_Q f - E_P f)|` at the measure nodes of `Q`,
/// over all probes. Requires `Q ⊊ P`, both in the grid.
pub fn check_telescoping(
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    p: &DyadicCube,
    q: &DyadicCube,
    probes: &[crate::poly::PiecewisePolyFn],
) -> Result<f64, WaveletError> {
    grid.check_cube(p)?;
    grid.check_cube(q)?;
    if q.scale >= p.scale || !p.contains_cube(q) {
        return Err(WaveletError::NotNested {
            q: q.to_string(),
            p: p.to_string(),
        });
    }
    let bases: Vec<AlpertBasis> = (q.scale + 1..=p.scale)
        .map(|m| build_alpert_basis(grid, &grid.ancestor(q, m), mu, sys))
        .collect::<Result<_, _>>()?;
    let mut nodes = Vec::new();
    mu.for_each_node(&q.intervals(), |x, _| nodes.push(x.to_vec()));
    let mut worst = 0.0f64;
    for f in probes {
        let deltas: Vec<_> = bases.iter().map(|b| project_delta(f, b, mu).1).collect();
        let eq = project_e(f, &SuperCube::from(q), mu, sys)?;
        let ep = project_e(f, &SuperCube::from(p), mu, sys)?;
        for x in &nodes {
            let lhs: f64 = deltas.iter().map(|d| d.eval(x)).sum();
            let rhs = eq.eval(x) - ep.eval(x);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentVanishing {
    /// `max |∫ h_a phi_i dmu|`
    pub max_abs: f64,
    /// the same, each term divided by `‖phi_i 1_Q‖_mu`
    pub max_scaled: f64,
}

/// Moments of the basis functions against the full system on the cube.
pub fn check_moment_vanishing(basis: &AlpertBasis, mu: &Measure, sys: &MomentSystem) -> MomentVanishing {
    let q = basis.cube();
    let frame = Frame::of_cube(q);
    let region = q.intervals();
    let d = sys.len();
    let mut norms = vec![0.0; d];
    let mut e = vec![0.0; d];
    mu.for_each_node(&region, |x, w| {
        sys.eval_into(&frame, x, &mut e);
        for (n, v) in norms.iter_mut().zip(&e) {
            *n += w * v * v;
        }
    });
    let mut out = MomentVanishing {
        max_abs: 0.0,
        max_scaled: 0.0,
    };
    for h in basis.functions() {
        for (i, m) in moments_of(h, &region, sys, &frame, mu).into_iter().enumerate() {
            out.max_abs = out.max_abs.max(m.abs());
            if norms[i] > 0.0 {
                out.max_scaled = out.max_scaled.max(m.abs() / norms[i].sqrt());
            }
        }
    }
    out
}

/// Pointwise size of `E_I f` against the `L^1` average of `f`, and the
/// Cauchy-Schwarz ratio of the `L^1` and `L^2` averages.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EBound {
    pub sup_e: f64,
    pub l1_average: f64,
    pub l2_average: f64,
    /// `sup |E_I f| / (|I|^{-1} ∫_I |f|)`
    pub r1: f64,
    /// `(|I|^{-1} ∫_I |f|) / (|I|^{-1} ∫_I f^2)^{1/2}`, at most 1
    pub r2: f64,
}

/// The sup is taken over the measure nodes of `I`.
pub fn e_bound_report(
    f: &crate::poly::PiecewisePolyFn,
    cube: &DyadicCube,
    mu: &Measure,
    sys: &MomentSystem,
) -> Result<EBound, WaveletError> {
    let mass = mu.mass(cube);
    if mass <= 0.0 {
        return Err(WaveletError::ZeroMass(cube.to_string()));
    }
    let e = project_e(f, &SuperCube::from(cube), mu, sys)?;
    let (mut l1, mut l2, mut sup) = (0.0, 0.0, 0.0f64);
    mu.for_each_node(&cube.intervals(), |x, w| {
        let v = f.eval(x);
        l1 += w * v.abs();
        l2 += w * v * v;
        sup = sup.max(e.eval(x).abs());
    });
    let (l1, l2) = (l1 / mass, (l2 / mass).sqrt());
    if l1 <= f64::MIN_POSITIVE {
        return Err(WaveletError::VanishingOnCube(cube.to_string()));
    }
    Ok(EBound {
        sup_e: sup,
        l1_average: l1,
        l2_average: l2,
        r1: sup / l1,
        r2: l1 / l2,
    })
}

/// Lattice points per axis in [`finite_type_estimate`].
pub const FINITE_TYPE_LATTICE: usize = 5;

fn derivative(phi: &SystemFunction, alpha: &[u32], x: &[f64], h: f64) -> f64 {
    if let Some(v) = phi.analytic_derivative(alpha, x) {
        return v;
    }
    let Some(k) = alpha.iter().position(|&a| a > 0) else {
        return phi.eval(x);
    };
    let mut lower = alpha.to_vec();
    lower[k] -= 1;
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[k] += h;
    xm[k] -= h;
    (derivative(phi, &lower, &xp, h) - derivative(phi, &lower, &xm, h)) / (2.0 * h)
}

/// `min_Q min_{a ∈ lattice(Q)} sum_{|alpha| < kappa} |∂^alpha phi(a)| ℓ(Q)^{|alpha|}`.
///
/// Derivatives are analytic when the function provides them, otherwise
/// central differences with step `2^-20 ℓ(Q)`. The lattice has
/// [`FINITE_TYPE_LATTICE`] points per axis starting at the lower corner.
pub fn finite_type_estimate(phi: &SystemFunction, kappa: usize, cubes: &[DyadicCube]) -> f64 {
    let mut best = f64::INFINITY;
    for q in cubes {
        let n = q.dimension();
        let side = q.side_f64();
        let h = side * 2f64.powi(-20);
        let lo: Vec<f64> = q.corner.iter().map(|c| c.to_f64()).collect();
        let alphas = multi_indices(n, kappa);
        let mut idx = vec![0usize; n];
        'lattice: loop {
            let x: Vec<f64> = (0..n)
                .map(|k| lo[k] + side * idx[k] as f64 / FINITE_TYPE_LATTICE as f64)
                .collect();
            let s: f64 = alphas
                .iter()
                .map(|a| {
                    let order: u32 = a.iter().sum();
                    derivative(phi, a, &x, h).abs() * side.powi(order as i32)
                })
                .sum();
            best = best.min(s);
            let mut k = 0;
            loop {
                if k == n {
                    break 'lattice;
                }
                idx[k] += 1;
                if idx[k] < FINITE_TYPE_LATTICE {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
    best
}
