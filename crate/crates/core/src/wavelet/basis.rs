use nalgebra::DMatrix;

use super::{RANK_FLOOR, RANK_REL};
use crate::error::WaveletError;
use crate::grid::{DyadicCube, GridSpec};
use crate::linalg::{null_space, revealed_rank, sym_eigen_desc};
use crate::measure::Measure;
use crate::poly::{Frame, MomentSystem, Piece, PiecewisePolyFn};

/// Orthonormal basis of the space of functions that agree with a member of
/// the system's span on every child of `cube` and have vanishing moments
/// against the whole system on `cube`.
#[derive(Clone, Debug)]
pub struct AlpertBasis {
    cube: DyadicCube,
    system: MomentSystem,
    /// children of `cube` with positive mass, in grid child order
    children: Vec<DyadicCube>,
    /// generator coefficients, one column per basis function; rows are
    /// `(child, member)` pairs, child-major
    coefficients: DMatrix<f64>,
    functions: Vec<PiecewisePolyFn>,
}

impl AlpertBasis {
    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn system(&self) -> &MomentSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[PiecewisePolyFn] {
        &self.functions
    }

    pub fn children(&self) -> &[DyadicCube] {
        &self.children
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    /// Position of `child` among the massive children.
    pub fn child_index(&self, child: &DyadicCube) -> Option<usize> {
        self.children.iter().position(|c| c == child)
    }

    /// Generator coefficients of `sum_a w_a h_a` on child `ci`.
    pub fn combine_on_child(&self, ci: usize, weights: &[f64]) -> Vec<f64> {
        let d = self.system.len();
        (0..d)
            .map(|j| {
                let row = ci * d + j;
                weights
                    .iter()
                    .enumerate()
                    .map(|(a, w)| self.coefficients[(row, a)] * w)
                    .sum()
            })
            .collect()
    }

    /// `sum_a w_a h_a` as a piecewise function on the children.
    pub fn combine(&self, weights: &[f64]) -> PiecewisePolyFn {
        let pieces = self
            .children
            .iter()
            .enumerate()
            .map(|(ci, c)| Piece::on_cube(c, self.combine_on_child(ci, weights)))
            .collect();
        PiecewisePolyFn::from_disjoint(self.system.clone(), pieces)
    }
}

/// Canonicalizing weight used to fix a basis independent of how the
/// generators are parametrized: the basis diagonalizes `<psi h_a, h_b>_mu`.
fn canonical_weight(u: &[f64]) -> f64 {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut v = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        let c = 0.5 + ((k as f64 + 1.0) * GOLDEN).fract();
        v += c * uk + 0.31 * (1.5 - c) * uk * uk;
        for &ul in &u[k + 1..] {
            v += 0.173 * uk * ul;
        }
    }
    v
}

struct Sample {
    child: usize,
    e: Vec<f64>,
}

/// Builds the weighted Alpert basis on `q`.
///
/// Generators are the system members on each child of positive mass. The
/// coefficient null space of the moment matrix (rows: system members in the
/// frame of `q`) is orthonormalized under the `mu` Gram matrix with the rank
/// rule `lambda > RANK_REL * lambda_max`, `lambda > RANK_FLOOR * max diag`.
/// The result is then rotated to diagonalize a fixed multiplication operator
/// (descending Ritz values) and each function is signed so that its first
/// significant nodal value is positive.
pub fn build_alpert_basis(
    grid: &GridSpec,
    q: &DyadicCube,
    mu: &Measure,
    sys: &MomentSystem,
) -> Result<AlpertBasis, WaveletError> {
    grid.check_cube(q)?;
    if sys.dim() != grid.dimension() || mu.dimension() != grid.dimension() {
        return Err(WaveletError::SystemMismatch {
            system: sys.dim(),
            function: mu.dimension(),
        });
    }
    let d = sys.len();
    let children: Vec<DyadicCube> = grid.children(q).into_iter().filter(|c| mu.mass(c) > 0.0).collect();
    let g = children.len() * d;
    let frame_q = Frame::of_cube(q);

    let mut samples = Vec::new();
    let mut gram = DMatrix::<f64>::zeros(g, g);
    let mut moments = DMatrix::<f64>::zeros(d, g);
    let mut weight = DMatrix::<f64>::zeros(g, g);
    let mut phi = vec![0.0; d];
    let mut u = vec![0.0; q.dimension()];
    for (ci, child) in children.iter().enumerate() {
        let frame_c = Frame::of_cube(child);
        mu.for_each_node(&child.intervals(), |x, w| {
            let e = sys.eval(&frame_c, x);
            sys.eval_into(&frame_q, x, &mut phi);
            frame_q.local(x, &mut u);
            let psi = canonical_weight(&u);
            let base = ci * d;
            for j in 0..d {
                for k in 0..d {
                    gram[(base + j, base + k)] += w * e[j] * e[k];
                    weight[(base + j, base + k)] += w * psi * e[j] * e[k];
                }
                for i in 0..d {
                    moments[(i, base + j)] += w * phi[i] * e[j];
                }
            }
            samples.push(Sample { child: ci, e });
        });
    }

    let empty = |children| AlpertBasis {
        cube: q.clone(),
        system: sys.clone(),
        children,
        coefficients: DMatrix::zeros(g, 0),
        functions: Vec::new(),
    };
    if g == 0 || samples.is_empty() {
        return Ok(empty(children));
    }

    let nulls = null_space(&moments, RANK_REL);
    if nulls.ncols() == 0 {
        return Ok(empty(children));
    }
    let compressed = nulls.transpose() * &gram * &nulls;
    let (vals, vecs) = sym_eigen_desc(&compressed);
    let scale = (0..g).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let r = revealed_rank(&vals, RANK_REL, RANK_FLOOR * scale);
    if r == 0 {
        return Ok(empty(children));
    }
    let mut b0 = &nulls * vecs.columns(0, r);
    for (a, mut col) in b0.column_iter_mut().enumerate() {
        col /= vals[a].sqrt();
    }

    let ritz = b0.transpose() * &weight * &b0;
    let (rvals, rvecs) = sym_eigen_desc(&ritz);
    let mut basis = &b0 * rvecs;

    for mut col in basis.column_iter_mut() {
        let values: Vec<f64> = samples
            .iter()
            .map(|s| (0..d).map(|j| col[s.child * d + j] * s.e[j]).sum::<f64>())
            .collect();
        let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(first) = values.iter().find(|v| v.abs() >= 1e-3 * vmax) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
    }

    // ties in the Ritz values fall back to lexicographic coefficient order
    let spread = rvals.first().map_or(0.0, |v| v.abs()) + rvals.last().map_or(0.0, |v| v.abs());
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| {
        if (rvals[i] - rvals[j]).abs() > 1e-10 * spread.max(1e-300) {
            rvals[j].total_cmp(&rvals[i])
        } else {
            let (ci, cj) = (basis.column(i), basis.column(j));
            ci.iter()
                .zip(cj.iter())
                .map(|(a, b)| b.total_cmp(a))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let coefficients = DMatrix::from_fn(g, r, |row, c| basis[(row, order[c])]);

    let functions = (0..r)
        .map(|a| {
            let pieces = children
                .iter()
                .enumerate()
                .map(|(ci, c)| Piece::on_cube(c, (0..d).map(|j| coefficients[(ci * d + j, a)]).collect()))
                .collect();
            PiecewisePolyFn::from_disjoint(sys.clone(), pieces)
        })
        .collect();

    Ok(AlpertBasis {
        cube: q.clone(),
        system: sys.clone(),
        children,
        coefficients,
        functions,
    })
}
