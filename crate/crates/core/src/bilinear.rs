//! The bilinear form `<T(f sigma), g>_omega` for atomic measures, computed
//! directly, split into four wavelet terms at scale `2^N`, and in the tops
//! form where the scale-`2^N` averages are replaced by top projections.
//!
//! Cell measures are replaced by atoms at their cell centers before any
//! kernel is applied. Scalars are real.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::DyadicRational;
use crate::error::{BilinearError, WaveletError};
use crate::grid::{DyadicCube, GridSpec, SuperCube};
use crate::measure::Measure;
use crate::poly::{Frame, MomentSystem, PiecewisePolyFn};
use crate::wavelet::{
    build_alpert_basis, check_encloses, check_resolution, delta_coefficients, project_e, window_levels, AlpertBasis,
    ScaleWindow,
};

pub type KernelFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelKind {
    /// `1 / (x - y)`, one dimension
    Hilbert,
    /// `(x_j - y_j) / |x - y|^n`
    Riesz(usize),
    Custom { id: String, eval: KernelFn },
}

#[derive(Clone)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// value used when `x == y`
    pub diagonal: f64,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            KernelKind::Hilbert => "hilbert".to_string(),
            KernelKind::Riesz(j) => format!("riesz({j})"),
            KernelKind::Custom { id, .. } => format!("custom({id})"),
        };
        f.debug_struct("KernelSpec").field("kind", &kind).field("diagonal", &self.diagonal).finish()
    }
}

impl KernelSpec {
    pub fn hilbert() -> Self {
        Self {
            kind: KernelKind::Hilbert,
            diagonal: 0.0,
        }
    }

    pub fn riesz(component: usize) -> Self {
        Self {
            kind: KernelKind::Riesz(component),
            diagonal: 0.0,
        }
    }

    pub fn custom(id: impl Into<String>, eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: KernelKind::Custom {
                id: id.into(),
                eval: Arc::new(eval),
            },
            diagonal: 0.0,
        }
    }

    /// Registered custom kernels: `"gaussian"` is `exp(-|x-y|^2)`,
    /// `"odd-cubic"` is `(x_0 - y_0) / (1 + |x-y|^3)`.
    pub fn custom_by_id(id: &str) -> Option<Self> {
        match id {
            "gaussian" => Some(Self::custom(id, |x, y| {
                (-x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp()
            })),
            "odd-cubic" => Some(Self::custom(id, |x, y| {
                let r = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                (x[0] - y[0]) / (1.0 + r * r * r)
            })),
            _ => None,
        }
    }

    pub fn with_diagonal(mut self, v: f64) -> Self {
        self.diagonal = v;
        self
    }

    pub fn check_dimension(&self, n: usize) -> Result<(), BilinearError> {
        match self.kind {
            KernelKind::Hilbert if n != 1 => Err(BilinearError::KernelDimension { expected: 1, found: n }),
            KernelKind::Riesz(j) if j >= n => Err(BilinearError::KernelDimension { expected: j + 1, found: n }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        if x == y {
            return self.diagonal;
        }
        match &self.kind {
            KernelKind::Hilbert => 1.0 / (x[0] - y[0]),
            KernelKind::Riesz(j) => {
                let r = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                (x[*j] - y[*j]) / r.powi(x.len() as i32)
            }
            KernelKind::Custom { eval, .. } => eval(x, y),
        }
    }
}

/// Split scale `N` (cubes of side `2^N`) and the finest wavelet scale.
///
/// The wavelet layer uses `△_I` with `fine <= scale(I) <= N`, whose ranges
/// live on cubes of side below `2^N`; `fine = N + 1` leaves it empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationWindow {
    pub split: i64,
    pub fine: i64,
}

impl TruncationWindow {
    pub fn new(split: i64, fine: i64) -> Result<Self, BilinearError> {
        if fine > split + 1 {
            return Err(BilinearError::BadWindow { fine, split });
        }
        ScaleWindow::new(fine.min(split), split)?;
        Ok(Self { split, fine })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourTerm {
    /// `<T(△f sigma), △g>`
    pub delta_delta: f64,
    /// `<T(Ef sigma), Eg>`
    pub e_e: f64,
    /// `<T(△f sigma), Eg>`
    pub delta_e: f64,
    /// `<T(Ef sigma), △g>`
    pub e_delta: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TopsForm {
    pub delta_delta: f64,
    /// `<T(E_top f sigma), △g>`
    pub top_delta: f64,
    /// `<T(△f sigma), E_top g>`
    pub delta_top: f64,
    pub top_top: f64,
    pub total: f64,
    /// scale of the coarsest wavelet layer
    pub coarse: i64,
    pub top_terms_f: usize,
    pub top_terms_g: usize,
}

/// `T(f sigma)(x) = sum_y K(x, y) f(y) sigma({y})`.
pub fn apply_t(f: &PiecewisePolyFn, sigma: &Measure, kernel: &KernelSpec, x: &[f64]) -> f64 {
    let sigma = sigma.discretize();
    sigma
        .atom_list()
        .iter()
        .map(|a| kernel.eval(x, a.coords()) * f.eval(a.coords()) * a.mass)
        .sum()
}

struct Pairing {
    /// `K(x, y) sigma(y) omega(x)`, rows over omega atoms
    weights: Vec<Vec<f64>>,
}

impl Pairing {
    fn new(sigma: &Measure, omega: &Measure, kernel: &KernelSpec) -> Self {
        let weights = omega
            .atom_list()
            .par_iter()
            .map(|x| {
                sigma
                    .atom_list()
                    .iter()
                    .map(|y| kernel.eval(x.coords(), y.coords()) * y.mass * x.mass)
                    .collect()
            })
            .collect();
        Self { weights }
    }

    fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(v)
            .map(|(row, vx)| vx * row.iter().zip(u).map(|(k, uy)| k * uy).sum::<f64>())
            .sum()
    }

    fn abs_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(v)
            .map(|(row, vx)| vx.abs() * row.iter().zip(u).map(|(k, uy)| k.abs() * uy.abs()).sum::<f64>())
            .sum()
    }
}

fn values(f: &PiecewisePolyFn, mu: &Measure) -> Vec<f64> {
    mu.atom_list().iter().map(|a| f.eval(a.coords())).collect()
}

/// `<T(f sigma), g>_omega` by direct summation.
pub fn form_direct(
    f: &PiecewisePolyFn,
    g: &PiecewisePolyFn,
    sigma: &Measure,
    omega: &Measure,
    kernel: &KernelSpec,
) -> Result<f64, BilinearError> {
    kernel.check_dimension(sigma.dimension())?;
    let (s, o) = (sigma.discretize(), omega.discretize());
    Ok(Pairing::new(&s, &o, kernel).form(&values(f, &s), &values(g, &o)))
}

/// `sum |K(x,y)| |f(y)| |g(x)| sigma(y) omega(x)`, the scale used for
/// relative agreement of the three forms.
pub fn form_scale(
    f: &PiecewisePolyFn,
    g: &PiecewisePolyFn,
    sigma: &Measure,
    omega: &Measure,
    kernel: &KernelSpec,
) -> f64 {
    let (s, o) = (sigma.discretize(), omega.discretize());
    Pairing::new(&s, &o, kernel).abs_form(&values(f, &s), &values(g, &o))
}

/// Values at the atoms of `sum_{fine <= scale(Q) <= coarse} △_Q f`.
fn delta_layer(
    f: &PiecewisePolyFn,
    grid: &GridSpec,
    mu: &Measure,
    sys: &MomentSystem,
    fine: i64,
    coarse: i64,
) -> Result<Vec<f64>, WaveletError> {
    let mut out = vec![0.0; mu.atom_list().len()];
    if fine > coarse {
        return Ok(out);
    }
    let cubes: Vec<DyadicCube> = window_levels(grid, mu, ScaleWindow { fine, coarse }).into_iter().flatten().collect();
    let parts: Vec<(AlpertBasis, Vec<f64>)> = cubes
        .par_iter()
        .map(|q| {
            let b = build_alpert_basis(grid, q, mu, sys)?;
            let c = delta_coefficients(f, &b, mu);
            Ok((b, c))
        })
        .collect::<Result<_, WaveletError>>()?;
    let parts: BTreeMap<&DyadicCube, (AlpertBasis, Vec<f64>)> = cubes.iter().zip(parts).collect();
    for (v, a) in out.iter_mut().zip(mu.atom_list()) {
        for m in fine..=coarse {
            let Some((basis, coeffs)) = parts.get(&grid.cube_at(&a.point, m)) else {
                continue;
            };
            if basis.dim() == 0 {
                continue;
            }
            let child = grid.cube_at(&a.point, m - 1);
            if let Some(ci) = basis.child_index(&child) {
                let c = basis.combine_on_child(ci, coeffs);
                let e = sys.eval(&Frame::of_cube(&child), a.coords());
                *v += c.iter().zip(&e).map(|(c, e)| c * e).sum::<f64>();
            }
        }
    }
    Ok(out)
}

/// Values at the atoms of `sum_{scale(I) = m} E_I f`.
fn e_layer(f: &PiecewisePolyFn, grid: &GridSpec, mu: &Measure, sys: &MomentSystem, m: i64) -> Result<Vec<f64>, WaveletError> {
    let mut cache: BTreeMap<DyadicCube, PiecewisePolyFn> = BTreeMap::new();
    let mut out = Vec::with_capacity(mu.atom_list().len());
    for a in mu.atom_list() {
        let q = grid.cube_at(&a.point, m);
        if !cache.contains_key(&q) {
            let e = project_e(f, &SuperCube::from(&q), mu, sys)?;
            cache.insert(q.clone(), e);
        }
        out.push(cache[&q].eval(a.coords()));
    }
    Ok(out)
}

/// Values at the atoms of `sum_t E_top_t f` and the number of summands.
fn top_layer(f: &PiecewisePolyFn, grid: &GridSpec, mu: &Measure, sys: &MomentSystem) -> Result<(Vec<f64>, usize), WaveletError> {
    let mut parts = Vec::new();
    for top in grid.tops() {
        if mu.mass_in(&top) > 0.0 {
            let e = project_e(f, &top, mu, sys)?;
            parts.push((top, e));
        }
    }
    let vals = mu
        .atom_list()
        .iter()
        .map(|a| parts.iter().filter(|(t, _)| t.contains(&a.point)).map(|(_, e)| e.eval(a.coords())).sum())
        .collect();
    Ok((vals, parts.len()))
}

struct Prepared {
    sigma: Measure,
    omega: Measure,
    pairing: Pairing,
}

#[allow(clippy::too_many_arguments)]
fn prepare(
    f: &PiecewisePolyFn,
    g: &PiecewisePolyFn,
    sigma: &Measure,
    omega: &Measure,
    kernel: &KernelSpec,
    grid: &GridSpec,
    sys: &MomentSystem,
    window: TruncationWindow,
) -> Result<Prepared, BilinearError> {
    let n = grid.dimension();
    kernel.check_dimension(n)?;
    let window = TruncationWindow::new(window.split, window.fine)?;
    let sigma = sigma.discretize();
    let omega = omega.discretize();
    for (mu, which) in [(&sigma, "sigma"), (&omega, "omega")] {
        if mu.dimension() != n {
            return Err(WaveletError::SystemMismatch {
                system: n,
                function: mu.dimension(),
            }
            .into());
        }
        let extent = mu.extent();
        if extent > DyadicRational::pow2(window.split) {
            return Err(BilinearError::SplitTooSmall {
                scale: window.split,
                extent: extent.to_f64(),
                which,
            });
        }
    }
    let leaves = ScaleWindow {
        fine: window.fine,
        coarse: window.split.max(window.fine),
    };
    check_resolution(f, grid, &sigma, sys, leaves)?;
    check_resolution(g, grid, &omega, sys, leaves)?;
    let pairing = Pairing::new(&sigma, &omega, kernel);
    Ok(Prepared { sigma, omega, pairing })
}

/// The four-term split of the form at scale `2^N`.
#[allow(clippy::too_many_arguments)]
pub fn form_four_term(
    f: &PiecewisePolyFn,
    g: &PiecewisePolyFn,
    sigma: &Measure,
    omega: &Measure,
    kernel: &KernelSpec,
    grid: &GridSpec,
    sys: &MomentSystem,
    window: TruncationWindow,
) -> Result<FourTerm, BilinearError> {
    let p = prepare(f, g, sigma, omega, kernel, grid, sys, window)?;
    let n_split = window.split;
    let fd = delta_layer(f, grid, &p.sigma, sys, window.fine, n_split)?;
    let fe = e_layer(f, grid, &p.sigma, sys, n_split)?;
    let gd = delta_layer(g, grid, &p.omega, sys, window.fine, n_split)?;
    let ge = e_layer(g, grid, &p.omega, sys, n_split)?;
    let t = FourTerm {
        delta_delta: p.pairing.form(&fd, &gd),
        e_e: p.pairing.form(&fe, &ge),
        delta_e: p.pairing.form(&fd, &ge),
        e_delta: p.pairing.form(&fe, &gd),
        total: 0.0,
    };
    Ok(FourTerm {
        total: t.delta_delta + t.e_e + t.delta_e + t.e_delta,
        ..t
    })
}

/// The tops form: the wavelet layer is extended from `N` up to the smallest
/// scale `M >= N` enclosing both supports inside every top, and the averages
/// become the top projections.
#[allow(clippy::too_many_arguments)]
pub fn form_tops(
    f: &PiecewisePolyFn,
    g: &PiecewisePolyFn,
    sigma: &Measure,
    omega: &Measure,
    kernel: &KernelSpec,
    grid: &GridSpec,
    sys: &MomentSystem,
    window: TruncationWindow,
) -> Result<TopsForm, BilinearError> {
    let p = prepare(f, g, sigma, omega, kernel, grid, sys, window)?;
    let coarse = (window.split..=crate::grid::MAX_SCALE)
        .find(|&m| check_encloses(grid, &p.sigma, m).is_ok() && check_encloses(grid, &p.omega, m).is_ok())
        .ok_or(WaveletError::NoEnclosingScale)?;
    let fd = delta_layer(f, grid, &p.sigma, sys, window.fine, coarse)?;
    let gd = delta_layer(g, grid, &p.omega, sys, window.fine, coarse)?;
    let (ft, nf) = top_layer(f, grid, &p.sigma, sys)?;
    let (gt, ng) = top_layer(g, grid, &p.omega, sys)?;
    let n = grid.dimension();
    for count in [nf, ng] {
        if count > 1 << n {
            return Err(BilinearError::TooManyTops { count, n });
        }
    }
    let t = TopsForm {
        delta_delta: p.pairing.form(&fd, &gd),
        top_delta: p.pairing.form(&ft, &gd),
        delta_top: p.pairing.form(&fd, &gt),
        top_top: p.pairing.form(&ft, &gt),
        total: 0.0,
        coarse,
        top_terms_f: nf,
        top_terms_g: ng,
    };
    Ok(TopsForm {
        total: t.delta_delta + t.top_delta + t.delta_top + t.top_top,
        ..t
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn one(sys: &MomentSystem) -> PiecewisePolyFn {
        PiecewisePolyFn::constant(sys.clone(), vec![crate::grid::Interval::FullLine], 1.0)
    }

    #[test]
    fn apply_t_examples() {
        let sys = MomentSystem::monomials(1, 1).unwrap();
        let delta0 = Measure::atoms(vec![(vec![d("0")], 1.0)]).unwrap();
        let k = KernelSpec::hilbert();
        assert_eq!(apply_t(&one(&sys), &delta0, &k, &[1.0]), 1.0);
        assert_eq!(apply_t(&one(&sys), &delta0, &k, &[0.0]), 0.0);
        let pair = Measure::atoms(vec![(vec![d("-1")], 1.0), (vec![d("1")], 1.0)]).unwrap();
        assert_eq!(apply_t(&one(&sys), &pair, &k, &[0.0]), 0.0);
    }

    #[test]
    fn direct_form_antisymmetry() {
        let sys = MomentSystem::monomials(1, 1).unwrap();
        let s = Measure::atoms(vec![(vec![d("0")], 1.0)]).unwrap();
        let o = Measure::atoms(vec![(vec![d("1")], 1.0)]).unwrap();
        let k = KernelSpec::hilbert();
        let a = form_direct(&one(&sys), &one(&sys), &s, &o, &k).unwrap();
        let b = form_direct(&one(&sys), &one(&sys), &o, &s, &k).unwrap();
        assert_eq!(a, 1.0);
        assert_eq!(b, -1.0);
        let zero = PiecewisePolyFn::zero(sys);
        assert_eq!(form_direct(&zero, &one(&MomentSystem::monomials(1, 1).unwrap()), &s, &o, &k).unwrap(), 0.0);
    }

    #[test]
    fn single_atoms_four_term() {
        let sys = MomentSystem::monomials(1, 1).unwrap();
        let s = Measure::atoms(vec![(vec![d("1/4")], 1.0)]).unwrap();
        let o = Measure::atoms(vec![(vec![d("3/4")], 1.0)]).unwrap();
        let k = KernelSpec::hilbert();
        let g = GridSpec::standard(1);
        let w = TruncationWindow::new(0, -3).unwrap();
        let t = form_four_term(&one(&sys), &one(&sys), &s, &o, &k, &g, &sys, w).unwrap();
        let direct = form_direct(&one(&sys), &one(&sys), &s, &o, &k).unwrap();
        assert_eq!(t.delta_delta, 0.0);
        assert!((t.total - direct).abs() < 1e-12);
        assert!((direct - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hilbert_needs_one_dimension() {
        assert!(KernelSpec::hilbert().check_dimension(2).is_err());
        assert!(KernelSpec::riesz(1).check_dimension(2).is_ok());
        assert!(KernelSpec::riesz(2).check_dimension(2).is_err());
    }
}
