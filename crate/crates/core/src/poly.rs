//! Moment systems and piecewise-polynomial functions on dyadic cells.
//!
//! A [`MomentSystem`] is the finite family of functions the wavelets must be
//! orthogonal to: monomials of total degree `< kappa`, or a user family
//! `{phi_1 = 1, phi_2, ...}`. Functions are stored piecewise as coefficient
//! vectors over the system. Monomials are evaluated in the centered and
//! rescaled coordinates `(x - c) / s` of a [`Frame`]; custom functions ignore
//! the frame.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::grid::{intersect_boxes, DyadicCube, Interval};

pub type MultiIndex = Vec<u32>;

/// All `beta` in `Z_+^n` with `|beta| < kappa`, graded then lexicographic
/// (most significant axis first).
pub fn multi_indices(n: usize, kappa: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for degree in 0..kappa as u32 {
        let mut level = Vec::new();
        fill_degree(n, degree, &mut Vec::with_capacity(n), &mut level);
        level.sort_by(|a, b| b.cmp(a));
        out.extend(level);
    }
    out
}

fn fill_degree(n: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if cur.len() + 1 == n {
        cur.push(remaining);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for k in 0..=remaining {
        cur.push(k);
        fill_degree(n, remaining - k, cur, out);
        cur.pop();
    }
}

/// Affine coordinates `(x - center) / scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl Frame {
    pub fn of_cube(q: &DyadicCube) -> Self {
        Self {
            center: q.center_f64(),
            scale: q.side_f64(),
        }
    }

    pub fn unit(n: usize) -> Self {
        Self {
            center: vec![0.0; n],
            scale: 1.0,
        }
    }

    pub fn local(&self, x: &[f64], out: &mut [f64]) {
        for ((o, xi), c) in out.iter_mut().zip(x).zip(&self.center) {
            *o = (xi - c) / self.scale;
        }
    }
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type DerivFn = Arc<dyn Fn(&[u32], &[f64]) -> f64 + Send + Sync>;

/// One member of a custom system.
#[derive(Clone)]
pub struct SystemFunction {
    pub name: String,
    eval: EvalFn,
    derivative: Option<DerivFn>,
    /// Declared order of differentiability.
    pub smoothness: usize,
}

impl SystemFunction {
    pub fn new(name: impl Into<String>, smoothness: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            derivative: None,
            smoothness,
        }
    }

    /// Attach analytic partial derivatives `d^alpha phi (x)`.
    pub fn with_derivative(mut self, d: impl Fn(&[u32], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn analytic_derivative(&self, alpha: &[u32], x: &[f64]) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(alpha, x))
    }

    pub fn has_derivatives(&self) -> bool {
        self.derivative.is_some()
    }

    /// The monomial `x^beta` in absolute coordinates.
    pub fn monomial(beta: MultiIndex) -> Self {
        let name = format!("x^{beta:?}");
        let b = beta.clone();
        let deg = beta.iter().sum::<u32>() as usize;
        SystemFunction::new(name, deg + 1, move |x| monomial_value(&b, x)).with_derivative(move |alpha, x| {
            let mut v = 1.0;
            for ((&bk, &ak), &xk) in beta.iter().zip(alpha).zip(x) {
                if ak > bk {
                    return 0.0;
                }
                let falling: f64 = (0..ak).map(|j| (bk - j) as f64).product();
                v *= falling * xk.powi((bk - ak) as i32);
            }
            v
        })
    }
}

impl fmt::Debug for SystemFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemFunction")
            .field("name", &self.name)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

fn monomial_value(beta: &[u32], x: &[f64]) -> f64 {
    beta.iter().zip(x).map(|(&b, &v)| v.powi(b as i32)).product()
}

enum SystemKind {
    Monomials {
        dim: usize,
        kappa: usize,
        exponents: Vec<MultiIndex>,
        lookup: HashMap<MultiIndex, usize>,
    },
    Custom {
        dim: usize,
        id: String,
        functions: Vec<SystemFunction>,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("moment system needs at least one function")]
    Empty,
    #[error("first function of a custom system must be the constant 1 (got {0} at a probe point)")]
    FirstNotConstant(f64),
    #[error("kappa must be positive")]
    ZeroKappa,
    #[error("unknown custom system `{0}`")]
    Unknown(String),
}

/// The annihilated function family, cheap to clone.
#[derive(Clone)]
pub struct MomentSystem(Arc<SystemKind>);

impl MomentSystem {
    pub fn monomials(dim: usize, kappa: usize) -> Result<Self, SystemError> {
        if kappa == 0 {
            return Err(SystemError::ZeroKappa);
        }
        let exponents = multi_indices(dim, kappa);
        let lookup = exponents.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        Ok(Self(Arc::new(SystemKind::Monomials {
            dim,
            kappa,
            exponents,
            lookup,
        })))
    }

    pub fn custom(dim: usize, id: impl Into<String>, functions: Vec<SystemFunction>) -> Result<Self, SystemError> {
        let first = functions.first().ok_or(SystemError::Empty)?;
        let probes = [0.0, 1.0, -1.5, 3.25, -7.125, 0.3];
        for &p in &probes {
            let x = vec![p; dim];
            let v = first.eval(&x);
            if (v - 1.0).abs() > 1e-14 {
                return Err(SystemError::FirstNotConstant(v));
            }
        }
        Ok(Self(Arc::new(SystemKind::Custom {
            dim,
            id: id.into(),
            functions,
        })))
    }

    /// Monomial callbacks `x^beta` (absolute coordinates) as a custom system.
    pub fn custom_monomials(dim: usize, kappa: usize) -> Result<Self, SystemError> {
        if kappa == 0 {
            return Err(SystemError::ZeroKappa);
        }
        let fns = multi_indices(dim, kappa).into_iter().map(SystemFunction::monomial).collect();
        Self::custom(dim, format!("monomial-callbacks:{kappa}"), fns)
    }

    /// `{1, e^x}` on the line.
    pub fn exponential() -> Self {
        let one = SystemFunction::new("1", usize::MAX, |_| 1.0)
            .with_derivative(|a, _| if a[0] == 0 { 1.0 } else { 0.0 });
        let exp = SystemFunction::new("exp", usize::MAX, |x| x[0].exp()).with_derivative(|_, x| x[0].exp());
        Self::custom(1, "exp", vec![one, exp]).expect("valid system")
    }

    /// Resolve a system by its identifier: `exp`, `monomial-callbacks:K`, `monomials:K`.
    pub fn by_id(dim: usize, id: &str) -> Result<Self, SystemError> {
        if id == "exp" && dim == 1 {
            return Ok(Self::exponential());
        }
        let parse_k = |s: &str| s.parse::<usize>().map_err(|_| SystemError::Unknown(id.to_string()));
        if let Some(k) = id.strip_prefix("monomial-callbacks:") {
            return Self::custom_monomials(dim, parse_k(k)?);
        }
        if let Some(k) = id.strip_prefix("monomials:") {
            return Self::monomials(dim, parse_k(k)?);
        }
        Err(SystemError::Unknown(id.to_string()))
    }

    pub fn id(&self) -> String {
        match &*self.0 {
            SystemKind::Monomials { kappa, .. } => format!("monomials:{kappa}"),
            SystemKind::Custom { id, .. } => id.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match &*self.0 {
            SystemKind::Monomials { dim, .. } | SystemKind::Custom { dim, .. } => *dim,
        }
    }

    /// Number of functions `d`.
    pub fn len(&self) -> usize {
        match &*self.0 {
            SystemKind::Monomials { exponents, .. } => exponents.len(),
            SystemKind::Custom { functions, .. } => functions.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kappa(&self) -> Option<usize> {
        match &*self.0 {
            SystemKind::Monomials { kappa, .. } => Some(*kappa),
            SystemKind::Custom { .. } => None,
        }
    }

    pub fn exponents(&self) -> Option<&[MultiIndex]> {
        match &*self.0 {
            SystemKind::Monomials { exponents, .. } => Some(exponents),
            SystemKind::Custom { .. } => None,
        }
    }

    pub fn is_frame_dependent(&self) -> bool {
        matches!(&*self.0, SystemKind::Monomials { .. })
    }

    /// Largest per-axis polynomial degree of a member, when polynomial.
    pub fn max_degree(&self) -> Option<usize> {
        self.kappa().map(|k| k - 1)
    }

    /// The `i`-th member as a callback in absolute coordinates of `frame`.
    pub fn function(&self, i: usize, frame: &Frame) -> SystemFunction {
        match &*self.0 {
            SystemKind::Monomials { exponents, .. } => {
                let beta = exponents[i].clone();
                let f = frame.clone();
                let fd = frame.clone();
                let b2 = beta.clone();
                SystemFunction::new(format!("xt^{beta:?}"), usize::MAX, move |x| {
                    let mut u = vec![0.0; x.len()];
                    f.local(x, &mut u);
                    monomial_value(&beta, &u)
                })
                .with_derivative(move |alpha, x| {
                    let mut u = vec![0.0; x.len()];
                    fd.local(x, &mut u);
                    let mut v = 1.0;
                    for ((&bk, &ak), &uk) in b2.iter().zip(alpha).zip(&u) {
                        if ak > bk {
                            return 0.0;
                        }
                        let falling: f64 = (0..ak).map(|j| (bk - j) as f64).product();
                        v *= falling * uk.powi((bk - ak) as i32) / fd.scale.powi(ak as i32);
                    }
                    v
                })
            }
            SystemKind::Custom { functions, .. } => functions[i].clone(),
        }
    }

    /// Evaluate every member at `x`.
    pub fn eval_into(&self, frame: &Frame, x: &[f64], out: &mut [f64]) {
        match &*self.0 {
            SystemKind::Monomials { dim, kappa, exponents, .. } => {
                let n = *dim;
                let mut pows = vec![1.0; n * kappa];
                for k in 0..n {
                    let u = (x[k] - frame.center[k]) / frame.scale;
                    for p in 1..*kappa {
                        pows[k * kappa + p] = pows[k * kappa + p - 1] * u;
                    }
                }
                for (o, beta) in out.iter_mut().zip(exponents) {
                    *o = beta
                        .iter()
                        .enumerate()
                        .map(|(k, &b)| pows[k * kappa + b as usize])
                        .product();
                }
            }
            SystemKind::Custom { functions, .. } => {
                for (o, f) in out.iter_mut().zip(functions) {
                    *o = f.eval(x);
                }
            }
        }
    }

    pub fn eval(&self, frame: &Frame, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(frame, x, &mut out);
        out
    }

    /// Re-express coefficients given in `from` coordinates in `to` coordinates.
    pub fn reframe(&self, coeffs: &[f64], from: &Frame, to: &Frame) -> Vec<f64> {
        let SystemKind::Monomials { exponents, lookup, .. } = &*self.0 else {
            return coeffs.to_vec();
        };
        if from == to {
            return coeffs.to_vec();
        }
        // u_from = a * u_to + b_k
        let a = to.scale / from.scale;
        let b: Vec<f64> = to
            .center
            .iter()
            .zip(&from.center)
            .map(|(ct, cf)| (ct - cf) / from.scale)
            .collect();
        let mut out = vec![0.0; coeffs.len()];
        for (beta, &c) in exponents.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for_each_below(beta, &mut |gamma| {
                let mut w = c;
                for k in 0..beta.len() {
                    let (bk, gk) = (beta[k], gamma[k]);
                    w *= binomial(bk, gk) * a.powi(gk as i32) * b[k].powi((bk - gk) as i32);
                }
                out[lookup[gamma]] += w;
            });
        }
        out
    }
}

fn for_each_below(beta: &[u32], f: &mut dyn FnMut(&MultiIndex)) {
    let mut gamma = vec![0u32; beta.len()];
    loop {
        f(&gamma);
        let mut k = 0;
        loop {
            if k == beta.len() {
                return;
            }
            if gamma[k] < beta[k] {
                gamma[k] += 1;
                break;
            }
            gamma[k] = 0;
            k += 1;
        }
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl fmt::Debug for MomentSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MomentSystem({}, dim {}, d = {})", self.id(), self.dim(), self.len())
    }
}

impl PartialEq for MomentSystem {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.id() == other.id() && self.dim() == other.dim())
    }
}

/// One polynomial piece: `1_region * sum_i coeffs[i] e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    region: Vec<Interval>,
    bounds: Vec<(f64, f64)>,
    pub frame: Frame,
    pub coeffs: Vec<f64>,
}

impl Piece {
    pub fn new(region: Vec<Interval>, frame: Frame, coeffs: Vec<f64>) -> Self {
        let bounds = region.iter().map(Interval::bounds_f64).collect();
        Self {
            region,
            bounds,
            frame,
            coeffs,
        }
    }

    pub fn on_cube(q: &DyadicCube, coeffs: Vec<f64>) -> Self {
        Self::new(q.intervals(), Frame::of_cube(q), coeffs)
    }

    pub fn region(&self) -> &[Interval] {
        &self.region
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.bounds.iter().zip(x).all(|((lo, hi), v)| lo <= v && v < hi)
    }

    /// Polynomial value at `x`, ignoring the region.
    pub fn value(&self, system: &MomentSystem, x: &[f64], scratch: &mut [f64]) -> f64 {
        system.eval_into(&self.frame, x, scratch);
        scratch.iter().zip(&self.coeffs).map(|(e, c)| e * c).sum()
    }
}

/// A function `sum_p 1_{region_p} poly_p` with pairwise disjoint regions.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolyFn {
    system: MomentSystem,
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("piece {index} has {found} coefficients, system has {expected}")]
    CoefficientCount { index: usize, expected: usize, found: usize },
    #[error("pieces {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("piece {index} has dimension {found}, system has {expected}")]
    Dimension { index: usize, expected: usize, found: usize },
}

impl PiecewisePolyFn {
    pub fn new(system: MomentSystem, pieces: Vec<Piece>) -> Result<Self, PolyError> {
        for (i, p) in pieces.iter().enumerate() {
            if p.coeffs.len() != system.len() {
                return Err(PolyError::CoefficientCount {
                    index: i,
                    expected: system.len(),
                    found: p.coeffs.len(),
                });
            }
            if p.region.len() != system.dim() {
                return Err(PolyError::Dimension {
                    index: i,
                    expected: system.dim(),
                    found: p.region.len(),
                });
            }
        }
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if intersect_boxes(&pieces[i].region, &pieces[j].region).is_some() {
                    return Err(PolyError::Overlap(i, j));
                }
            }
        }
        Ok(Self { system, pieces })
    }

    pub(crate) fn from_disjoint(system: MomentSystem, pieces: Vec<Piece>) -> Self {
        Self { system, pieces }
    }

    pub fn zero(system: MomentSystem) -> Self {
        Self {
            system,
            pieces: Vec::new(),
        }
    }

    /// Pieces on cubes, coefficients in each cube's own frame.
    pub fn from_cells(system: MomentSystem, cells: Vec<(DyadicCube, Vec<f64>)>) -> Result<Self, PolyError> {
        let pieces = cells.into_iter().map(|(q, c)| Piece::on_cube(&q, c)).collect();
        Self::new(system, pieces)
    }

    /// The constant `value` on `region`.
    pub fn constant(system: MomentSystem, region: Vec<Interval>, value: f64) -> Self {
        let mut coeffs = vec![0.0; system.len()];
        coeffs[0] = value;
        let n = system.dim();
        Self {
            pieces: vec![Piece::new(region, Frame::unit(n), coeffs)],
            system,
        }
    }

    pub fn system(&self) -> &MomentSystem {
        &self.system
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.coeffs.iter().all(|&c| c == 0.0))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.system.len()];
        self.pieces
            .iter()
            .find(|p| p.contains_f64(x))
            .map_or(0.0, |p| p.value(&self.system, x, &mut scratch))
    }

    /// `self * s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.pieces {
            for c in &mut p.coeffs {
                *c *= s;
            }
        }
        out
    }
}
