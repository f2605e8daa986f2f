//! Positive measures with bounded support: weighted atoms or piecewise
//! constant densities on dyadic cells.
//!
//! Geometry is exact. Integrals against cell densities use a tensor
//! Gauss-Legendre rule on each (cell ∩ region) box, which is exact for the
//! polynomial integrands that arise (degree `<= 2q - 1` per axis).

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::dyadic::{point_to_f64, DyadicRational};
use crate::error::MeasureError;
use crate::grid::{box_contains, intersect_boxes, DyadicCube, GridSpec, Interval, SuperCube};
use crate::poly::{Frame, MomentSystem, MultiIndex, PiecewisePolyFn};

/// Default Gauss-Legendre points per axis for cell densities.
pub const DEFAULT_QUADRATURE_ORDER: usize = 6;

#[derive(Clone, Debug)]
pub struct Atom {
    pub point: Vec<DyadicRational>,
    pub mass: f64,
    coords: Vec<f64>,
}

impl Atom {
    pub fn new(point: Vec<DyadicRational>, mass: f64) -> Self {
        let coords = point_to_f64(&point);
        Self { point, mass, coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub cell: DyadicCube,
    pub density: f64,
}

#[derive(Clone, Debug)]
pub enum MeasureKind {
    Atoms(Vec<Atom>),
    Cells(Vec<Cell>),
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(q: usize) -> Self {
        assert!(q >= 1);
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        for i in 0..q {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[q - 1 - i] = x;
            weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Clone, Debug)]
pub struct Measure {
    dim: usize,
    kind: MeasureKind,
    support_box: DyadicCube,
    rule: GaussRule,
}

impl Measure {
    pub fn atoms(items: Vec<(Vec<DyadicRational>, f64)>) -> Result<Self, MeasureError> {
        let dim = items.first().ok_or(MeasureError::Empty)?.0.len();
        let mut atoms = Vec::with_capacity(items.len());
        for (i, (p, m)) in items.into_iter().enumerate() {
            if p.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(MeasureError::InvalidMass { index: i, mass: m });
            }
            atoms.push(Atom::new(p, m));
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i].point == atoms[j].point {
                    return Err(MeasureError::DuplicateAtom(i, j));
                }
            }
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if !total.is_finite() {
            return Err(MeasureError::NonPositiveMass);
        }
        let lo: Vec<DyadicRational> = (0..dim)
            .map(|k| atoms.iter().map(|a| &a.point[k]).min().unwrap().clone())
            .collect();
        let hi: Vec<DyadicRational> = (0..dim)
            .map(|k| atoms.iter().map(|a| &a.point[k]).max().unwrap().clone())
            .collect();
        let support_box = bounding_cube(lo, &hi, true);
        Ok(Self {
            dim,
            kind: MeasureKind::Atoms(atoms),
            support_box,
            rule: GaussRule::new(DEFAULT_QUADRATURE_ORDER),
        })
    }

    pub fn cells(items: Vec<(DyadicCube, f64)>) -> Result<Self, MeasureError> {
        let dim = items.first().ok_or(MeasureError::Empty)?.0.dimension();
        let mut cells = Vec::with_capacity(items.len());
        for (i, (c, d)) in items.into_iter().enumerate() {
            if c.dimension() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    found: c.dimension(),
                });
            }
            if !(d.is_finite() && d >= 0.0) {
                return Err(MeasureError::InvalidDensity { index: i, density: d });
            }
            cells.push(Cell { cell: c, density: d });
        }
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                if intersect_boxes(&cells[i].cell.intervals(), &cells[j].cell.intervals()).is_some() {
                    return Err(MeasureError::OverlappingCells(i, j));
                }
            }
        }
        let total: f64 = cells.iter().map(|c| c.density * volume(&c.cell.intervals())).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(MeasureError::NonPositiveMass);
        }
        let lo: Vec<DyadicRational> = (0..dim)
            .map(|k| cells.iter().map(|c| &c.cell.corner[k]).min().unwrap().clone())
            .collect();
        let hi: Vec<DyadicRational> = (0..dim)
            .map(|k| cells.iter().map(|c| c.cell.upper(k)).max().unwrap())
            .collect();
        let support_box = bounding_cube(lo, &hi, false);
        Ok(Self {
            dim,
            kind: MeasureKind::Cells(cells),
            support_box,
            rule: GaussRule::new(DEFAULT_QUADRATURE_ORDER),
        })
    }

    /// Lebesgue measure on a single cube.
    pub fn lebesgue(q: DyadicCube) -> Self {
        Self::cells(vec![(q, 1.0)]).expect("unit density on a cube")
    }

    /// Use `q` Gauss points per axis for cell integrals.
    pub fn with_quadrature_order(mut self, q: usize) -> Self {
        self.rule = GaussRule::new(q);
        self
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, MeasureKind::Atoms(_))
    }

    pub fn atom_list(&self) -> &[Atom] {
        match &self.kind {
            MeasureKind::Atoms(a) => a,
            MeasureKind::Cells(_) => &[],
        }
    }

    pub fn support_box(&self) -> &DyadicCube {
        &self.support_box
    }

    /// Frame of the support box, used for top-level polynomials.
    pub fn support_frame(&self) -> Frame {
        Frame::of_cube(&self.support_box)
    }

    /// Largest side of the exact bounding box of the support.
    pub fn extent(&self) -> DyadicRational {
        let (lo, hi): (Vec<&DyadicRational>, Vec<DyadicRational>) = match &self.kind {
            MeasureKind::Atoms(atoms) => (
                (0..self.dim).map(|k| atoms.iter().map(|a| &a.point[k]).min().unwrap()).collect(),
                (0..self.dim).map(|k| atoms.iter().map(|a| &a.point[k]).max().unwrap().clone()).collect(),
            ),
            MeasureKind::Cells(cells) => {
                let live: Vec<&Cell> = cells.iter().filter(|c| c.density > 0.0).collect();
                (
                    (0..self.dim).map(|k| live.iter().map(|c| &c.cell.corner[k]).min().unwrap()).collect(),
                    (0..self.dim).map(|k| live.iter().map(|c| c.cell.upper(k)).max().unwrap()).collect(),
                )
            }
        };
        lo.iter().zip(&hi).map(|(l, h)| h - *l).max().unwrap()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_in(&SuperCube::top(vec![Interval::FullLine; self.dim]))
    }

    /// `|Q|_mu` for a cube or top.
    pub fn mass_in(&self, q: &SuperCube) -> f64 {
        self.mass_box(q.factors())
    }

    pub fn mass(&self, q: &DyadicCube) -> f64 {
        self.mass_box(&q.intervals())
    }

    pub fn mass_box(&self, region: &[Interval]) -> f64 {
        match &self.kind {
            MeasureKind::Atoms(atoms) => atoms
                .iter()
                .filter(|a| box_contains(region, &a.point))
                .map(|a| a.mass)
                .sum(),
            MeasureKind::Cells(cells) => cells
                .iter()
                .filter(|c| c.density > 0.0)
                .filter_map(|c| intersect_boxes(&c.cell.intervals(), region).map(|b| c.density * volume(&b)))
                .sum(),
        }
    }

    /// Visit every integration node in `region` with its weight.
    pub fn for_each_node(&self, region: &[Interval], mut f: impl FnMut(&[f64], f64)) {
        match &self.kind {
            MeasureKind::Atoms(atoms) => {
                for a in atoms.iter().filter(|a| box_contains(region, &a.point)) {
                    f(&a.coords, a.mass);
                }
            }
            MeasureKind::Cells(cells) => {
                let mut x = vec![0.0; self.dim];
                for c in cells.iter().filter(|c| c.density > 0.0) {
                    let Some(b) = intersect_boxes(&c.cell.intervals(), region) else {
                        continue;
                    };
                    let bounds: Vec<(f64, f64)> = b.iter().map(Interval::bounds_f64).collect();
                    self.tensor_nodes(&bounds, c.density, &mut x, &mut f);
                }
            }
        }
    }

    fn tensor_nodes(&self, bounds: &[(f64, f64)], density: f64, x: &mut [f64], f: &mut impl FnMut(&[f64], f64)) {
        let q = self.rule.nodes.len();
        let n = bounds.len();
        let mut idx = vec![0usize; n];
        let half: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (hi - lo)).collect();
        let mid: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (hi + lo)).collect();
        loop {
            let mut w = density;
            for k in 0..n {
                x[k] = mid[k] + half[k] * self.rule.nodes[idx[k]];
                w *= half[k] * self.rule.weights[idx[k]];
            }
            f(x, w);
            let mut k = 0;
            loop {
                if k == n {
                    return;
                }
                idx[k] += 1;
                if idx[k] < q {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// `∫_region F dmu` by the node rule.
    pub fn integrate(&self, region: &[Interval], mut integrand: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut s = 0.0;
        self.for_each_node(region, |x, w| s += w * integrand(x));
        s
    }

    /// `∫_Q ((x - center) / scale_len)^beta dmu`, in closed form for cells.
    pub fn moment(&self, q: &SuperCube, beta: &[u32], center: &[f64], scale_len: f64) -> f64 {
        match &self.kind {
            MeasureKind::Atoms(atoms) => atoms
                .iter()
                .filter(|a| q.contains(&a.point))
                .map(|a| {
                    a.mass
                        * beta
                            .iter()
                            .zip(a.coords.iter().zip(center))
                            .map(|(&b, (x, c))| ((x - c) / scale_len).powi(b as i32))
                            .product::<f64>()
                })
                .sum(),
            MeasureKind::Cells(cells) => cells
                .iter()
                .filter_map(|c| intersect_boxes(&c.cell.intervals(), q.factors()).map(|b| (c.density, b)))
                .map(|(d, b)| {
                    d * b
                        .iter()
                        .zip(beta.iter().zip(center))
                        .map(|(iv, (&bk, &ck))| {
                            let (lo, hi) = iv.bounds_f64();
                            let (u0, u1) = ((lo - ck) / scale_len, (hi - ck) / scale_len);
                            let p = bk as i32 + 1;
                            scale_len * (u1.powi(p) - u0.powi(p)) / p as f64
                        })
                        .product::<f64>()
                })
                .sum(),
        }
    }

    /// `|2Q|_mu / |Q|_mu` with the concentric double; `None` when `|Q|_mu = 0`.
    pub fn doubling_ratio(&self, q: &DyadicCube) -> Option<f64> {
        let m = self.mass(q);
        (m > 0.0).then(|| self.mass_box(&q.doubled()) / m)
    }

    /// Atoms at cell centers carrying the cell masses.
    pub fn discretize(&self) -> Measure {
        match &self.kind {
            MeasureKind::Atoms(_) => self.clone(),
            MeasureKind::Cells(cells) => {
                let items = cells
                    .iter()
                    .filter(|c| c.density > 0.0)
                    .map(|c| {
                        let half = c.cell.side().mul_pow2(-1);
                        let center = c.cell.corner.iter().map(|x| x + &half).collect();
                        (center, c.density * volume(&c.cell.intervals()))
                    })
                    .collect();
                Measure::atoms(items).expect("cells with positive mass")
            }
        }
    }

    /// Sample points of the support: atoms, or cell centers.
    pub fn sample_points(&self, limit: usize) -> Vec<Vec<DyadicRational>> {
        match &self.kind {
            MeasureKind::Atoms(atoms) => atoms.iter().take(limit).map(|a| a.point.clone()).collect(),
            MeasureKind::Cells(cells) => cells
                .iter()
                .filter(|c| c.density > 0.0)
                .take(limit)
                .map(|c| {
                    let half = c.cell.side().mul_pow2(-1);
                    c.cell.corner.iter().map(|x| x + &half).collect()
                })
                .collect(),
        }
    }

    /// Cubes of scale `m` of `grid` with positive mass, sorted.
    pub fn support_cubes(&self, grid: &GridSpec, m: i64) -> Vec<DyadicCube> {
        let mut out: Vec<DyadicCube> = match &self.kind {
            MeasureKind::Atoms(atoms) => atoms.iter().map(|a| grid.cube_at(&a.point, m)).collect(),
            MeasureKind::Cells(cells) => cells
                .iter()
                .filter(|c| c.density > 0.0)
                .flat_map(|c| grid.cubes_meeting(&c.cell.intervals(), m))
                .collect(),
        };
        out.sort();
        out.dedup();
        out.retain(|q| self.mass(q) > 0.0);
        out
    }

    /// Normalizers `1/sqrt(|I|_mu)` along the towers of support sample points.
    pub fn reverse_doubling_report(&self, grid: &GridSpec, scales: RangeInclusive<i64>) -> ReverseDoublingReport {
        let mut rows = Vec::new();
        let mut towers = Vec::new();
        for (idx, x) in self.sample_points(8).into_iter().enumerate() {
            let mut norms = Vec::new();
            for m in scales.clone() {
                let q = grid.cube_at(&x, m);
                let mass = self.mass(&q);
                let normalizer = if mass > 0.0 { 1.0 / mass.sqrt() } else { f64::INFINITY };
                norms.push(normalizer);
                rows.push(ReverseDoublingRow {
                    point: idx,
                    scale: m,
                    mass,
                    normalizer,
                });
            }
            let non_increasing = norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            let (first, last) = (norms[0], *norms.last().unwrap());
            towers.push(TowerTrend {
                point: idx,
                non_increasing,
                first,
                last,
                decay: last / first,
            });
        }
        ReverseDoublingReport { rows, towers }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReverseDoublingRow {
    pub point: usize,
    pub scale: i64,
    pub mass: f64,
    pub normalizer: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerTrend {
    pub point: usize,
    pub non_increasing: bool,
    pub first: f64,
    pub last: f64,
    pub decay: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReverseDoublingReport {
    pub rows: Vec<ReverseDoublingRow>,
    pub towers: Vec<TowerTrend>,
}

/// Exact volume of a finite box, converted at the end.
pub fn volume(b: &[Interval]) -> f64 {
    let mut v = DyadicRational::from_int(1);
    for iv in b {
        match (iv.lo(), iv.hi()) {
            (Some(lo), Some(hi)) => v = &v * &(hi - lo),
            _ => return f64::INFINITY,
        }
    }
    v.to_f64()
}

fn bounding_cube(lo: Vec<DyadicRational>, hi: &[DyadicRational], closed: bool) -> DyadicCube {
    let extent = lo.iter().zip(hi).map(|(l, h)| h - l).max().unwrap();
    let mut m = -62;
    loop {
        let side = DyadicRational::pow2(m);
        if (closed && extent < side) || (!closed && extent <= side) {
            break;
        }
        m += 1;
    }
    DyadicCube::new(m, lo)
}

/// `∫ f g dmu`, splitting at every pair of pieces.
pub fn inner_product(f: &PiecewisePolyFn, g: &PiecewisePolyFn, mu: &Measure) -> f64 {
    let (sf, sg) = (f.system(), g.system());
    let mut a = vec![0.0; sf.len()];
    let mut b = vec![0.0; sg.len()];
    let mut total = 0.0;
    for p in f.pieces() {
        for r in g.pieces() {
            let Some(region) = intersect_boxes(p.region(), r.region()) else {
                continue;
            };
            mu.for_each_node(&region, |x, w| {
                total += w * p.value(sf, x, &mut a) * r.value(sg, x, &mut b);
            });
        }
    }
    total
}

/// `‖f‖^2_{L^2(mu)}`.
pub fn norm_sq(f: &PiecewisePolyFn, mu: &Measure) -> f64 {
    let sys = f.system();
    let mut a = vec![0.0; sys.len()];
    let mut total = 0.0;
    for p in f.pieces() {
        mu.for_each_node(p.region(), |x, w| {
            let v = p.value(sys, x, &mut a);
            total += w * v * v;
        });
    }
    total
}

/// `∫_region f e_j dmu` for every member `e_j` of `sys` in `frame`.
pub fn moments_of(f: &PiecewisePolyFn, region: &[Interval], sys: &MomentSystem, frame: &Frame, mu: &Measure) -> Vec<f64> {
    let fs = f.system();
    let d = sys.len();
    let mut out = vec![0.0; d];
    let mut a = vec![0.0; fs.len()];
    let mut e = vec![0.0; d];
    for p in f.pieces() {
        let Some(b) = intersect_boxes(p.region(), region) else {
            continue;
        };
        mu.for_each_node(&b, |x, w| {
            let v = w * p.value(fs, x, &mut a);
            sys.eval_into(frame, x, &mut e);
            for (o, ej) in out.iter_mut().zip(&e) {
                *o += v * ej;
            }
        });
    }
    out
}

/// Exponents `beta` with `x^beta ∈ L^2(1_top mu)`. Bounded support makes every
/// `|beta| < kappa` admissible; a null top admits none.
pub fn admissible_top_exponents(mu: &Measure, top: &SuperCube, kappa: usize) -> Vec<MultiIndex> {
    if mu.mass_in(top) <= 0.0 {
        return Vec::new();
    }
    crate::poly::multi_indices(mu.dimension(), kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn unit() -> DyadicCube {
        DyadicCube::new(0, vec![d("0")])
    }

    fn lebesgue01() -> Measure {
        Measure::lebesgue(unit())
    }

    #[test]
    fn gauss_rule_exactness() {
        let r = GaussRule::new(6);
        for p in 0..12 {
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn mass_examples() {
        let mu = lebesgue01();
        assert_eq!(mu.mass(&DyadicCube::new(-1, vec![d("0")])), 0.5);
        let atoms = Measure::atoms(vec![(vec![d("1/4")], 1.0), (vec![d("3/4")], 2.0)]).unwrap();
        assert_eq!(atoms.mass(&DyadicCube::new(-1, vec![d("1/2")])), 2.0);
        let top = GridSpec::standard(1).top_of_point(&[d("0")]);
        assert_eq!(atoms.mass_in(&top), 3.0);
        assert_eq!(mu.mass_in(&top), 1.0);
    }

    #[test]
    fn moment_examples() {
        let mu = lebesgue01();
        let q = SuperCube::from(unit());
        assert!((mu.moment(&q, &[1], &[0.0], 1.0) - 0.5).abs() < 1e-15);
        assert!((mu.moment(&q, &[2], &[0.0], 1.0) - 1.0 / 3.0).abs() < 1e-15);
        let atom = Measure::atoms(vec![(vec![d("1/4")], 1.0)]).unwrap();
        assert_eq!(atom.moment(&q, &[1], &[0.5], 1.0), -0.25);
        assert_eq!(mu.moment(&q, &[0], &[0.3], 2.0), mu.mass(&unit()));
    }

    #[test]
    fn inner_product_examples() {
        let sys = MomentSystem::monomials(1, 2).unwrap();
        let mu = lebesgue01();
        let one = PiecewisePolyFn::from_cells(sys.clone(), vec![(unit(), vec![1.0, 0.0])]).unwrap();
        assert!((inner_product(&one, &one, &mu) - 1.0).abs() < 1e-15);
        let haar = PiecewisePolyFn::from_cells(
            sys.clone(),
            vec![
                (DyadicCube::new(-1, vec![d("0")]), vec![1.0, 0.0]),
                (DyadicCube::new(-1, vec![d("1/2")]), vec![-1.0, 0.0]),
            ],
        )
        .unwrap();
        assert!(inner_product(&haar, &one, &mu).abs() < 1e-15);
        // x on [0,1) in the cell frame: 1/2 + u
        let x = PiecewisePolyFn::from_cells(sys, vec![(unit(), vec![0.5, 1.0])]).unwrap();
        assert!((inner_product(&x, &one, &mu) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn doubling_examples() {
        let big = Measure::lebesgue(DyadicCube::new(4, vec![d("-8"), d("-8")]));
        let q = DyadicCube::new(0, vec![d("0"), d("0")]);
        assert!((big.doubling_ratio(&q).unwrap() - 4.0).abs() < 1e-14);
        let atom = Measure::atoms(vec![(vec![d("1/4")], 1.0)]).unwrap();
        assert_eq!(atom.doubling_ratio(&unit()), Some(1.0));
        assert_eq!(atom.doubling_ratio(&DyadicCube::new(0, vec![d("5")])), None);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(Measure::atoms(vec![]).unwrap_err(), MeasureError::Empty);
        assert!(matches!(
            Measure::atoms(vec![(vec![d("0")], 1.0), (vec![d("0")], 2.0)]),
            Err(MeasureError::DuplicateAtom(0, 1))
        ));
        assert!(matches!(
            Measure::atoms(vec![(vec![d("0")], -1.0)]),
            Err(MeasureError::InvalidMass { .. })
        ));
        assert!(matches!(
            Measure::cells(vec![(unit(), 1.0), (DyadicCube::new(-1, vec![d("1/2")]), 1.0)]),
            Err(MeasureError::OverlappingCells(0, 1))
        ));
        assert_eq!(Measure::cells(vec![(unit(), 0.0)]).unwrap_err(), MeasureError::NonPositiveMass);
    }

    #[test]
    fn reverse_doubling_examples() {
        let g = GridSpec::standard(1);
        let big = Measure::lebesgue(DyadicCube::new(20, vec![d("0")]));
        let rep = big.reverse_doubling_report(&g, 0..=10);
        for w in rep.rows.windows(3).filter(|w| w[0].point == w[2].point) {
            assert!((w[2].normalizer / w[0].normalizer - 0.5).abs() < 1e-12);
        }
        let atom = Measure::atoms(vec![(vec![d("3/8")], 2.0)]).unwrap();
        let rep = atom.reverse_doubling_report(&g, -3..=5);
        assert!(rep.rows.iter().all(|r| (r.normalizer - 0.5f64.sqrt()).abs() < 1e-15));
        let two = Measure::atoms(vec![(vec![d("1/8")], 1.0), (vec![d("5/2")], 3.0)]).unwrap();
        let rep = two.reverse_doubling_report(&g, 0..=6);
        for r in rep.rows.iter().filter(|r| r.scale >= 2) {
            assert!((r.normalizer - 0.5).abs() < 1e-15);
        }
        assert!(rep.towers.iter().all(|t| t.non_increasing));
    }

    #[test]
    fn admissible_exponents() {
        let atom = Measure::atoms(vec![(vec![d("3/8")], 2.0)]).unwrap();
        let g = GridSpec::standard(1);
        let tops = g.tops();
        assert_eq!(admissible_top_exponents(&atom, &tops[1], 2), vec![vec![0], vec![1]]);
        assert_eq!(admissible_top_exponents(&atom, &tops[1], 1), vec![vec![0]]);
        assert!(admissible_top_exponents(&atom, &tops[0], 3).is_empty());
    }
}
