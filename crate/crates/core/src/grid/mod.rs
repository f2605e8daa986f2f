//! Generalized dyadic grids in `R^n`, their cubes, towers and tops.
//!
//! A grid is a product of axes. Each axis carries the offset of its unit
//! tiling and the infinite sequence of nesting bits that fixes which way each
//! cube grows into its parent. Bit sequences are stored as a finite prefix
//! plus an eventually periodic tail, so the tops (the unions of towers) have
//! exactly computable boundaries.

mod axis;
mod cube;
mod tiling;

pub use axis::{BitTail, GridAxis};
pub use cube::{
    box_contains, intersect_boxes, supercube_relation, DyadicCube, Interval, Relation, SuperCube, Theta,
    TopSignature,
};
pub use tiling::{halton_points, TilingReport, TilingViolation, HALTON_SKIP};

use crate::dyadic::DyadicRational;
use crate::error::GridError;

/// Scales accepted by finite enumeration.
pub const MAX_SCALE: i64 = 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self, GridError> {
        if axes.is_empty() {
            return Err(GridError::InvalidSpec("grid dimension must be positive".into()));
        }
        Ok(Self { axes })
    }

    /// The standard grid `D_0` in dimension `n`.
    pub fn standard(n: usize) -> Self {
        assert!(n > 0, "grid dimension must be positive");
        Self {
            axes: vec![GridAxis::standard(); n],
        }
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    /// `s_m` on axis `k`.
    pub fn axis_offset(&self, k: usize, m: i64) -> DyadicRational {
        self.axes[k].offset(m)
    }

    fn check_dim(&self, n: usize) -> Result<(), GridError> {
        if n != self.dimension() {
            return Err(GridError::DimensionMismatch {
                expected: self.dimension(),
                found: n,
            });
        }
        Ok(())
    }

    /// The scale-`m` cube containing `x`.
    pub fn cube_at(&self, x: &[DyadicRational], m: i64) -> DyadicCube {
        assert_eq!(x.len(), self.dimension(), "point dimension");
        let corner = self
            .axes
            .iter()
            .zip(x)
            .map(|(axis, v)| {
                let s = axis.offset(m);
                &(v - &s).floor_to_pow2(m) + &s
            })
            .collect();
        DyadicCube::new(m, corner)
    }

    pub fn contains_cube(&self, q: &DyadicCube) -> bool {
        q.dimension() == self.dimension()
            && self
                .axes
                .iter()
                .zip(&q.corner)
                .all(|(axis, c)| (c - &axis.offset(q.scale)).is_multiple_of_pow2(q.scale))
    }

    pub fn check_cube(&self, q: &DyadicCube) -> Result<(), GridError> {
        self.check_dim(q.dimension())?;
        if !self.contains_cube(q) {
            return Err(GridError::NotInGrid(q.to_string()));
        }
        Ok(())
    }

    /// The `2^n` children of `q`, ordered by child index (bit `k` set means
    /// the upper half along axis `k`).
    pub fn children(&self, q: &DyadicCube) -> Vec<DyadicCube> {
        debug_assert!(self.contains_cube(q));
        let n = self.dimension();
        let half = DyadicRational::pow2(q.scale - 1);
        (0..1usize << n)
            .map(|idx| {
                let corner = q
                    .corner
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if idx >> k & 1 == 1 { c + &half } else { c.clone() })
                    .collect();
                DyadicCube::new(q.scale - 1, corner)
            })
            .collect()
    }

    pub fn parent(&self, q: &DyadicCube) -> DyadicCube {
        debug_assert!(self.contains_cube(q));
        self.cube_at(&q.corner, q.scale + 1)
    }

    /// Ancestor of `q` at scale `m >= q.scale`.
    pub fn ancestor(&self, q: &DyadicCube, m: i64) -> DyadicCube {
        debug_assert!(m >= q.scale);
        self.cube_at(&q.corner, m)
    }

    /// The tower `I_1 ⊂ I_2 ⊂ ...` of cubes containing `x`.
    pub fn tower<'g>(&'g self, x: &[DyadicRational]) -> Tower<'g> {
        Tower {
            grid: self,
            point: x.to_vec(),
            next: 1,
        }
    }

    /// The tops of the grid, at most `2^n` of them.
    ///
    /// Axes with eventually constant bits split into `(-inf, a)` and `[a, inf)`;
    /// all other axes contribute the full line. Order: axis 0 varies slowest,
    /// left ray before right ray.
    pub fn tops(&self) -> Vec<SuperCube> {
        let mut out: Vec<Vec<Interval>> = vec![Vec::new()];
        for axis in &self.axes {
            let choices = match axis.boundary() {
                Some(a) => vec![Interval::LeftRay(a.clone()), Interval::RightRay(a)],
                None => vec![Interval::FullLine],
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c.clone());
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(SuperCube::top).collect()
    }

    /// The unique top containing `x`.
    pub fn top_of_point(&self, x: &[DyadicRational]) -> SuperCube {
        assert_eq!(x.len(), self.dimension(), "point dimension");
        SuperCube::top(
            self.axes
                .iter()
                .zip(x)
                .map(|(axis, v)| match axis.boundary() {
                    Some(a) if *v < a => Interval::LeftRay(a),
                    Some(a) => Interval::RightRay(a),
                    None => Interval::FullLine,
                })
                .collect(),
        )
    }

    /// Index into [`GridSpec::tops`] of the top containing `x`.
    pub fn top_index(&self, x: &[DyadicRational]) -> usize {
        let mut idx = 0;
        for (axis, v) in self.axes.iter().zip(x) {
            if let Some(a) = axis.boundary() {
                idx = 2 * idx + usize::from(*v >= a);
            }
        }
        idx
    }

    /// Returns `a` when the grid is `D_0 + a`.
    ///
    /// Requires a boundary on every axis and checks the offset congruences
    /// `s_m = a mod 2^m` for every scale in `[-MAX_SCALE, MAX_SCALE]`.
    pub fn is_translate_of_standard(&self) -> Option<Vec<DyadicRational>> {
        let a: Vec<DyadicRational> = self.axes.iter().map(GridAxis::boundary).collect::<Option<_>>()?;
        for (axis, ak) in self.axes.iter().zip(&a) {
            for m in -MAX_SCALE..=MAX_SCALE {
                if axis.offset(m) != ak.mod_pow2(m) {
                    return None;
                }
            }
        }
        Some(a)
    }

    /// Cubes of scale `m` meeting the finite box `b` (half-open), in
    /// lexicographic corner order.
    pub fn cubes_meeting(&self, b: &[Interval], m: i64) -> Vec<DyadicCube> {
        let side = DyadicRational::pow2(m);
        let mut per_axis: Vec<Vec<DyadicRational>> = Vec::with_capacity(self.dimension());
        for (axis, iv) in self.axes.iter().zip(b) {
            let (Some(lo), Some(hi)) = (iv.lo(), iv.hi()) else {
                panic!("cubes_meeting needs a finite box");
            };
            let s = axis.offset(m);
            let mut c = &(lo - &s).floor_to_pow2(m) + &s;
            let mut corners = Vec::new();
            while &c < hi {
                corners.push(c.clone());
                c = &c + &side;
            }
            per_axis.push(corners);
        }
        let mut out: Vec<Vec<DyadicRational>> = vec![Vec::new()];
        for corners in per_axis {
            out = out
                .into_iter()
                .flat_map(|p| {
                    corners.iter().map(move |c| {
                        let mut q = p.clone();
                        q.push(c.clone());
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(|c| DyadicCube::new(m, c)).collect()
    }
}

/// Lazy tower of a point; yields scales `1, 2, 3, ...`.
pub struct Tower<'g> {
    grid: &'g GridSpec,
    point: Vec<DyadicRational>,
    next: i64,
}

impl Iterator for Tower<'_> {
    type Item = DyadicCube;

    fn next(&mut self) -> Option<DyadicCube> {
        let q = self.grid.cube_at(&self.point, self.next);
        self.next += 1;
        Some(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn all_one() -> GridSpec {
        GridSpec::new(vec![GridAxis::new(d("0"), vec![], BitTail::AllOne).unwrap()]).unwrap()
    }

    fn periodic() -> GridSpec {
        GridSpec::new(vec![
            GridAxis::new(d("0"), vec![], BitTail::Periodic(vec![true, false])).unwrap(),
        ])
        .unwrap()
    }

    fn c1(scale: i64, x: &str) -> DyadicCube {
        DyadicCube::new(scale, vec![d(x)])
    }

    #[test]
    fn cube_at_examples() {
        let std1 = GridSpec::standard(1);
        let x = DyadicRational::from_f64(0.3).unwrap();
        assert_eq!(std1.cube_at(&[x], 0), c1(0, "0"));
        assert_eq!(std1.cube_at(&[d("1")], 0), c1(0, "1"));
        assert_eq!(all_one().cube_at(&[d("0")], 2), c1(2, "-1"));
    }

    #[test]
    fn children_and_parent_examples() {
        let std1 = GridSpec::standard(1);
        assert_eq!(std1.children(&c1(0, "0")), vec![c1(-1, "0"), c1(-1, "1/2")]);
        let std2 = GridSpec::standard(2);
        let unit = DyadicCube::new(0, vec![d("0"), d("0")]);
        assert_eq!(std2.children(&unit).len(), 4);
        let shifted = GridSpec::new(vec![GridAxis::new(d("1/2"), vec![], BitTail::AllZero).unwrap()]).unwrap();
        assert_eq!(shifted.children(&c1(0, "1/2")), vec![c1(-1, "1/2"), c1(-1, "1")]);

        assert_eq!(std1.parent(&c1(-1, "0")), c1(0, "0"));
        assert_eq!(all_one().parent(&c1(0, "0")), c1(1, "-1"));
        let q = DyadicCube::new(0, vec![d("1"), d("0")]);
        assert_eq!(std2.parent(&q), DyadicCube::new(1, vec![d("0"), d("0")]));
    }

    #[test]
    fn tower_examples() {
        let std1 = GridSpec::standard(1);
        let x = DyadicRational::from_f64(0.3).unwrap();
        let t: Vec<_> = std1.tower(&[x]).take(3).collect();
        assert_eq!(t, vec![c1(1, "0"), c1(2, "0"), c1(3, "0")]);
        let x = DyadicRational::from_f64(-0.3).unwrap();
        let t: Vec<_> = std1.tower(&[x]).take(2).collect();
        assert_eq!(t, vec![c1(1, "-2"), c1(2, "-4")]);
        let t: Vec<_> = all_one().tower(&[d("0")]).take(3).collect();
        assert_eq!(t, vec![c1(1, "-1"), c1(2, "-1"), c1(3, "-1")]);
    }

    #[test]
    fn tops_examples() {
        let quads = GridSpec::standard(2).tops();
        assert_eq!(quads.len(), 4);
        assert!(quads.iter().all(|t| t.factors().iter().all(|f| {
            matches!(f, Interval::LeftRay(a) | Interval::RightRay(a) if a.is_zero())
        })));
        assert_eq!(
            all_one().tops(),
            vec![
                SuperCube::top(vec![Interval::LeftRay(d("-1"))]),
                SuperCube::top(vec![Interval::RightRay(d("-1"))]),
            ]
        );
        assert_eq!(periodic().tops(), vec![SuperCube::top(vec![Interval::FullLine])]);
    }

    #[test]
    fn top_of_point_examples() {
        let std1 = GridSpec::standard(1);
        assert_eq!(std1.top_of_point(&[d("5")]), SuperCube::top(vec![Interval::RightRay(d("0"))]));
        assert_eq!(std1.top_of_point(&[d("-5")]), SuperCube::top(vec![Interval::LeftRay(d("0"))]));
        assert_eq!(all_one().top_of_point(&[d("-1")]), SuperCube::top(vec![Interval::RightRay(d("-1"))]));
        for x in ["-3", "-1", "0", "7/8"] {
            let p = [d(x)];
            assert_eq!(all_one().tops()[all_one().top_index(&p)], all_one().top_of_point(&p));
        }
    }

    #[test]
    fn translate_examples() {
        assert_eq!(GridSpec::standard(2).is_translate_of_standard(), Some(vec![d("0"), d("0")]));
        assert_eq!(all_one().is_translate_of_standard(), Some(vec![d("-1")]));
        assert_eq!(periodic().is_translate_of_standard(), None);
    }

    #[test]
    fn cubes_meeting_box() {
        let g = all_one();
        let b = vec![Interval::Finite { lo: d("0"), hi: d("5/2") }];
        let cubes = g.cubes_meeting(&b, 1);
        assert_eq!(cubes, vec![c1(1, "-1"), c1(1, "1")]);
        assert_eq!(GridSpec::standard(2).cubes_meeting(&[b[0].clone(), b[0].clone()], 0).len(), 9);
    }

    #[test]
    fn membership_in_grid() {
        assert!(all_one().contains_cube(&c1(1, "-1")));
        assert!(!all_one().contains_cube(&c1(1, "0")));
        assert!(GridSpec::standard(1).check_cube(&c1(-2, "3/4")).is_ok());
    }
}
