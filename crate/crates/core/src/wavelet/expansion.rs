use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{build_alpert_basis, AlpertBasis};
use super::projection::{delta_coefficients, project_e_with_rank};
use crate::dyadic::DyadicRational;
use crate::error::WaveletError;
use crate::grid::{DyadicCube, GridSpec, SuperCube, TopSignature, MAX_SCALE};
use crate::measure::{norm_sq, Measure, MeasureKind};
use crate::poly::{Frame, MomentSystem, Piece, PiecewisePolyFn};

/// Relative `L^2(mu)` residual above which a leaf does not resolve `f`.
pub const RESOLUTION_TOL: f64 = 1e-9;

/// Scales `fine..=coarse` of the wavelet pieces `△_Q`, `ℓ(Q) = 2^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleWindow {
    pub fine: i64,
    pub coarse: i64,
}

impl ScaleWindow {
    pub fn new(fine: i64, coarse: i64) -> Result<Self, WaveletError> {
        if fine > coarse {
            return Err(WaveletError::BadWindow { fine, coarse });
        }
        for m in [fine - 1, coarse] {
            if m.abs() > MAX_SCALE {
                return Err(WaveletError::ScaleOutOfRange { scale: m });
            }
        }
        Ok(Self { fine, coarse })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopPart {
    pub top: SuperCube,
    /// `E_top f`
    pub function: PiecewisePolyFn,
    pub rank: usize,
}

impl TopPart {
    pub fn signature(&self) -> TopSignature {
        self.top.signature().expect("top part holds a top")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubePart {
    pub cube: DyadicCube,
    pub coeffs: Vec<f64>,
}

/// Result of [`expand`]: the top projections and the wavelet coefficients of
/// every cube in the window with a nonzero wavelet space, coarse to fine.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTree {
    pub system: MomentSystem,
    pub window: ScaleWindow,
    pub tops: Vec<TopPart>,
    pub cubes: Vec<CubePart>,
}

impl CoefficientTree {
    pub fn cube_coeffs(&self, q: &DyadicCube) -> Option<&[f64]> {
        self.cubes.iter().find(|c| &c.cube == q).map(|c| c.coeffs.as_slice())
    }

    pub fn coefficient_count(&self) -> usize {
        self.cubes.iter().map(|c| c.coeffs.len()).sum()
    }

    /// `sum |f̂_a|^2` over all cubes.
    pub fn coefficient_energy(&self) -> f64 {
        self.cubes.iter().flat_map(|c| &c.coeffs).map(|a| a * a).sum()
    }

    /// `(scale, max |f̂|, l2 norm)` per scale, fine to coarse.
    pub fn magnitude_by_scale(&self) -> Vec<(i64, f64, f64)> {
        let mut rows: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for c in &self.cubes {
            let e = rows.entry(c.cube.scale).or_default();
            for a in &c.coeffs {
                e.0 = e.0.max(a.abs());
                e.1 += a * a;
            }
        }
        rows.into_iter().map(|(m, (mx, s))| (m, mx, s.sqrt())).collect()
    }
}

fn portion_box(mu: &Measure, top: &SuperCube) -> Option<(Vec<DyadicRational>, Vec<DyadicRational>, bool)> {
    let n = mu.dimension();
    let mut lo: Option<Vec<DyadicRational>> = None;
    let mut hi: Vec<DyadicRational> = Vec::new();
    let mut merge = |a: &[DyadicRational], b: &[DyadicRational]| match &mut lo {
        None => {
            lo = Some(a.to_vec());
            hi = b.to_vec();
        }
        Some(l) => {
            for k in 0..n {
                if a[k] < l[k] {
                    l[k] = a[k].clone();
                }
                if b[k] > hi[k] {
                    hi[k] = b[k].clone();
                }
            }
        }
    };
    let closed = match mu.kind() {
        MeasureKind::Atoms(atoms) => {
            for a in atoms.iter().filter(|a| top.contains(&a.point)) {
                merge(&a.point, &a.point);
            }
            true
        }
        MeasureKind::Cells(cells) => {
            for c in cells.iter().filter(|c| c.density > 0.0) {
                if let Some(b) = crate::grid::intersect_boxes(&c.cell.intervals(), top.factors()) {
                    let l: Vec<_> = b.iter().map(|iv| iv.lo().unwrap().clone()).collect();
                    let h: Vec<_> = b.iter().map(|iv| iv.hi().unwrap().clone()).collect();
                    merge(&l, &h);
                }
            }
            false
        }
    };
    lo.map(|l| (l, hi, closed))
}

/// Checks that the support inside every top lies in one cube of scale `m`.
pub fn check_encloses(grid: &GridSpec, mu: &Measure, m: i64) -> Result<(), WaveletError> {
    if m.abs() > MAX_SCALE {
        return Err(WaveletError::ScaleOutOfRange { scale: m });
    }
    for top in grid.tops() {
        let Some((lo, hi, closed)) = portion_box(mu, &top) else {
            continue;
        };
        let q = grid.cube_at(&lo, m);
        let mut count = 1usize;
        for k in 0..lo.len() {
            let up = q.upper(k);
            let inside = if closed { hi[k] < up } else { hi[k] <= up };
            if !inside {
                let s = grid.axis_offset(k, m);
                let last = if closed { &hi[k] - &s } else { &(&hi[k] - &s) - &DyadicRational::pow2(-200) };
                let first = &lo[k] - &s;
                let span: num_bigint::BigInt = last.floor_div_pow2(m) - first.floor_div_pow2(m) + 1;
                count = count.saturating_mul(span.try_into().unwrap_or(usize::MAX));
            }
        }
        if count > 1 {
            return Err(WaveletError::CoarseScaleTooSmall {
                scale: m,
                top: top.to_string(),
                cubes: count,
            });
        }
    }
    Ok(())
}

/// Smallest `m >= from` whose cubes enclose the support inside every top.
pub fn minimal_enclosing_scale(grid: &GridSpec, mu: &Measure, from: i64) -> Result<i64, WaveletError> {
    (from.max(-MAX_SCALE)..=MAX_SCALE)
        .find(|&m| check_encloses(grid, mu, m).is_ok())
        .ok_or(WaveletError::NoEnclosingScale)
}

/// Cubes of scale `m` with positive mass, for `m` in the window, coarse
/// first. The scale-`coarse` cubes are the roots; deeper levels are their
/// massive children.
pub fn window_levels(grid: &GridSpec, mu: &Measure, window: ScaleWindow) -> Vec<Vec<DyadicCube>> {
    let mut levels = vec![mu.support_cubes(grid, window.coarse)];
    for _ in window.fine..window.coarse {
        let next: Vec<DyadicCube> = levels
            .last()
            .unwrap()
            .iter()
            .flat_map(|q| grid.children(q))
            .filter(|c| mu.mass(c) > 0.0)
            .collect();
        levels.push(next);
    }
    levels
}

fn check_dims(grid: &GridSpec, mu: &Measure, sys: &MomentSystem, f: Option<&PiecewisePolyFn>) -> Result<(), WaveletError> {
    let n = grid.dimension();
    let fd = f.map_or(n, |f| f.system().dim());
    for found in [mu.dimension(), sys.dim(), fd] {
        if found != n {
            return Err(WaveletError::SystemMismatch {
                system: n,
                function: found,
            });
        }
    }
    Ok(())
}

/// Verifies that `f 1_L` already lies in the span of the system on every
/// leaf `L` of scale `fine - 1`.
pub(crate) fn check_resolution(
    f: &PiecewisePolyFn,
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    window: ScaleWindow,
) -> Result<(), WaveletError> {
    let total = norm_sq(f, mu).sqrt();
    for leaf in mu.support_cubes(grid, window.fine - 1) {
        let (e, _) = project_e_with_rank(f, &SuperCube::from(&leaf), mu, sys)?;
        let mut r = 0.0;
        mu.for_each_node(&leaf.intervals(), |x, w| {
            let v = f.eval(x) - e.eval(x);
            r += w * v * v;
        });
        let r = r.sqrt();
        if r > RESOLUTION_TOL * total.max(f64::MIN_POSITIVE) {
            return Err(WaveletError::FineScaleTooCoarse {
                scale: window.fine,
                cube: leaf.to_string(),
                residual: r,
            });
        }
    }
    Ok(())
}

fn expand_impl(
    f: &PiecewisePolyFn,
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    window: ScaleWindow,
    parallel: bool,
) -> Result<CoefficientTree, WaveletError> {
    check_dims(grid, mu, sys, Some(f))?;
    let window = ScaleWindow::new(window.fine, window.coarse)?;
    check_encloses(grid, mu, window.coarse)?;
    check_resolution(f, grid, mu, sys, window)?;

    let mut tops = Vec::new();
    for top in grid.tops() {
        if mu.mass_in(&top) > 0.0 {
            let (function, rank) = project_e_with_rank(f, &top, mu, sys)?;
            tops.push(TopPart { top, function, rank });
        }
    }

    let part = |q: &DyadicCube| -> Result<Option<CubePart>, WaveletError> {
        let basis = build_alpert_basis(grid, q, mu, sys)?;
        if basis.dim() == 0 {
            return Ok(None);
        }
        Ok(Some(CubePart {
            cube: q.clone(),
            coeffs: delta_coefficients(f, &basis, mu),
        }))
    };
    let mut cubes = Vec::new();
    for level in window_levels(grid, mu, window) {
        let parts: Vec<Result<Option<CubePart>, WaveletError>> = if parallel {
            level.par_iter().map(part).collect()
        } else {
            level.iter().map(part).collect()
        };
        for p in parts {
            if let Some(c) = p? {
                cubes.push(c);
            }
        }
    }
    Ok(CoefficientTree {
        system: sys.clone(),
        window,
        tops,
        cubes,
    })
}

/// Finite Alpert expansion `f = sum_tops E_top f + sum_{Q in window} △_Q f`.
///
/// Preconditions: `window.coarse` encloses the support inside every top, and
/// `f 1_L` is in the span of the system on each leaf of scale `fine - 1`.
pub fn expand(
    f: &PiecewisePolyFn,
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    window: ScaleWindow,
) -> Result<CoefficientTree, WaveletError> {
    expand_impl(f, grid, mu, sys, window, false)
}

/// [`expand`] with each scale processed in parallel; same output.
pub fn expand_parallel(
    f: &PiecewisePolyFn,
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    window: ScaleWindow,
) -> Result<CoefficientTree, WaveletError> {
    expand_impl(f, grid, mu, sys, window, true)
}

/// Rebuilds the function from a tree, as pieces on the leaves of scale
/// `fine - 1`.
pub fn reconstruct(
    tree: &CoefficientTree,
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
) -> Result<PiecewisePolyFn, WaveletError> {
    check_dims(grid, mu, sys, None)?;
    if tree.tops.is_empty() && tree.cubes.is_empty() {
        return Ok(PiecewisePolyFn::zero(sys.clone()));
    }
    let window = tree.window;
    let mut bases: BTreeMap<DyadicCube, (AlpertBasis, &[f64])> = BTreeMap::new();
    for c in &tree.cubes {
        if c.cube.scale < window.fine || c.cube.scale > window.coarse {
            return Err(WaveletError::ScaleOutOfRange { scale: c.cube.scale });
        }
        let basis = build_alpert_basis(grid, &c.cube, mu, sys)?;
        if basis.dim() != c.coeffs.len() {
            return Err(WaveletError::SystemMismatch {
                system: basis.dim(),
                function: c.coeffs.len(),
            });
        }
        bases.insert(c.cube.clone(), (basis, &c.coeffs));
    }

    let mut pieces = Vec::new();
    for leaf in mu.support_cubes(grid, window.fine - 1) {
        let frame = Frame::of_cube(&leaf);
        let mut acc = vec![0.0; sys.len()];
        let mut add = |coeffs: &[f64], from: &Frame| {
            for (a, c) in acc.iter_mut().zip(sys.reframe(coeffs, from, &frame)) {
                *a += c;
            }
        };
        if let Some(tp) = tree.tops.iter().find(|t| t.top.contains(&leaf.corner)) {
            if let Some(p) = tp.function.pieces().first() {
                add(&p.coeffs, &p.frame);
            }
        }
        for m in window.fine..=window.coarse {
            let q = grid.ancestor(&leaf, m);
            let Some((basis, coeffs)) = bases.get(&q) else {
                continue;
            };
            let child = grid.ancestor(&leaf, m - 1);
            if let Some(ci) = basis.child_index(&child) {
                add(&basis.combine_on_child(ci, coeffs), &Frame::of_cube(&child));
            }
        }
        pieces.push(Piece::on_cube(&leaf, acc));
    }
    Ok(PiecewisePolyFn::from_disjoint(sys.clone(), pieces))
}

/// Relative gap `|‖f‖^2 - sum_tops ‖E_top f‖^2 - sum |f̂|^2| / ‖f‖^2`.
pub fn parseval_gap(f: &PiecewisePolyFn, tree: &CoefficientTree, mu: &Measure) -> f64 {
    let total = norm_sq(f, mu);
    let tops: f64 = tree.tops.iter().map(|t| norm_sq(&t.function, mu)).sum();
    let gap = (total - tops - tree.coefficient_energy()).abs();
    if total > 0.0 {
        gap / total
    } else {
        gap
    }
}
