use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::GridError;

/// One axis factor of a box or supercube, using the half-open convention.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interval {
    /// `[lo, hi)`
    Finite { lo: DyadicRational, hi: DyadicRational },
    /// `(-inf, a)`
    LeftRay(DyadicRational),
    /// `[a, inf)`
    RightRay(DyadicRational),
    FullLine,
}

impl Interval {
    fn from_bounds(lo: Option<DyadicRational>, hi: Option<DyadicRational>) -> Option<Self> {
        match (lo, hi) {
            (Some(lo), Some(hi)) => (lo < hi).then_some(Interval::Finite { lo, hi }),
            (None, Some(hi)) => Some(Interval::LeftRay(hi)),
            (Some(lo), None) => Some(Interval::RightRay(lo)),
            (None, None) => Some(Interval::FullLine),
        }
    }

    pub fn lo(&self) -> Option<&DyadicRational> {
        match self {
            Interval::Finite { lo, .. } | Interval::RightRay(lo) => Some(lo),
            _ => None,
        }
    }

    pub fn hi(&self) -> Option<&DyadicRational> {
        match self {
            Interval::Finite { hi, .. } | Interval::LeftRay(hi) => Some(hi),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Interval::Finite { .. })
    }

    pub fn contains(&self, x: &DyadicRational) -> bool {
        self.lo().is_none_or(|lo| lo <= x) && self.hi().is_none_or(|hi| x < hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = match (self.lo(), other.lo()) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (a, b) => a.or(b).cloned(),
        };
        let hi = match (self.hi(), other.hi()) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (a, b) => a.or(b).cloned(),
        };
        Interval::from_bounds(lo, hi)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = match (self.lo(), other.lo()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => b <= a,
        };
        let hi_ok = match (self.hi(), other.hi()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        lo_ok && hi_ok
    }

    /// Bounds as binary64, infinite for rays.
    pub fn bounds_f64(&self) -> (f64, f64) {
        (
            self.lo().map_or(f64::NEG_INFINITY, DyadicRational::to_f64),
            self.hi().map_or(f64::INFINITY, DyadicRational::to_f64),
        )
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Finite { lo, hi } => write!(f, "[{}, {})", lo.to_f64(), hi.to_f64()),
            Interval::LeftRay(a) => write!(f, "(-inf, {})", a.to_f64()),
            Interval::RightRay(a) => write!(f, "[{}, inf)", a.to_f64()),
            Interval::FullLine => write!(f, "(-inf, inf)"),
        }
    }
}

/// Intersection of two boxes given as per-axis factors.
pub fn intersect_boxes(a: &[Interval], b: &[Interval]) -> Option<Vec<Interval>> {
    a.iter().zip(b).map(|(x, y)| x.intersect(y)).collect()
}

pub fn box_contains(b: &[Interval], x: &[DyadicRational]) -> bool {
    b.iter().zip(x).all(|(i, v)| i.contains(v))
}

/// A finite cube `prod_k [corner_k, corner_k + 2^scale)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    pub scale: i64,
    pub corner: Vec<DyadicRational>,
}

impl DyadicCube {
    pub fn new(scale: i64, corner: Vec<DyadicRational>) -> Self {
        Self { scale, corner }
    }

    pub fn dimension(&self) -> usize {
        self.corner.len()
    }

    pub fn side(&self) -> DyadicRational {
        DyadicRational::pow2(self.scale)
    }

    pub fn side_f64(&self) -> f64 {
        crate::dyadic::scale_by_pow2(1.0, self.scale)
    }

    pub fn upper(&self, k: usize) -> DyadicRational {
        &self.corner[k] + &self.side()
    }

    pub fn center_f64(&self) -> Vec<f64> {
        let half = self.side().mul_pow2(-1);
        self.corner.iter().map(|c| (c + &half).to_f64()).collect()
    }

    pub fn contains(&self, x: &[DyadicRational]) -> bool {
        let side = self.side();
        self.corner
            .iter()
            .zip(x)
            .all(|(c, v)| c <= v && *v < c + &side)
    }

    pub fn contains_cube(&self, other: &DyadicCube) -> bool {
        other.scale <= self.scale && self.contains(&other.corner)
    }

    pub fn intervals(&self) -> Vec<Interval> {
        let side = self.side();
        self.corner
            .iter()
            .map(|c| Interval::Finite {
                lo: c.clone(),
                hi: c + &side,
            })
            .collect()
    }

    /// Concentric cube with twice the side length.
    pub fn doubled(&self) -> Vec<Interval> {
        let half = self.side().mul_pow2(-1);
        let side = self.side();
        self.corner
            .iter()
            .map(|c| {
                let lo = c - &half;
                let hi = &lo + &side.mul_pow2(1);
                Interval::Finite { lo, hi }
            })
            .collect()
    }
}

/// Coarse to fine, then lexicographic corners.
impl Ord for DyadicCube {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .scale
            .cmp(&self.scale)
            .then_with(|| self.corner.cmp(&other.corner))
    }
}

impl PartialOrd for DyadicCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals().iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Per-axis endpoint of a top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta {
    NegInf,
    PosInf,
    /// the axis factor is the whole line
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TopSignature(pub Vec<Theta>);

/// A finite cube of a grid or one of its infinite tops.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuperCube {
    factors: Vec<Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Disjoint,
    Subset,
    Superset,
    Equal,
}

impl SuperCube {
    /// A top: every factor must be a ray or the full line.
    pub fn top(factors: Vec<Interval>) -> Self {
        debug_assert!(factors.iter().all(|f| !f.is_finite()));
        Self { factors }
    }

    pub fn factors(&self) -> &[Interval] {
        &self.factors
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn is_top(&self) -> bool {
        self.factors.iter().all(|f| !f.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(Interval::is_finite)
    }

    pub fn contains(&self, x: &[DyadicRational]) -> bool {
        box_contains(&self.factors, x)
    }

    /// Signature of a top; `None` for finite cubes.
    pub fn signature(&self) -> Option<TopSignature> {
        self.factors
            .iter()
            .map(|f| match f {
                Interval::LeftRay(_) => Some(Theta::NegInf),
                Interval::RightRay(_) => Some(Theta::PosInf),
                Interval::FullLine => Some(Theta::Both),
                Interval::Finite { .. } => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(TopSignature)
    }

    /// Nesting relation between two members of one supergrid.
    pub fn relation(&self, other: &SuperCube) -> Result<Relation, GridError> {
        if self.dimension() != other.dimension() {
            return Err(GridError::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        if intersect_boxes(&self.factors, &other.factors).is_none() {
            return Ok(Relation::Disjoint);
        }
        let sub = self
            .factors
            .iter()
            .zip(&other.factors)
            .all(|(a, b)| a.is_subset_of(b));
        let sup = self
            .factors
            .iter()
            .zip(&other.factors)
            .all(|(a, b)| b.is_subset_of(a));
        match (sub, sup) {
            (true, true) => Ok(Relation::Equal),
            (true, false) => Ok(Relation::Subset),
            (false, true) => Ok(Relation::Superset),
            (false, false) => Err(GridError::ProperOverlap {
                left: self.to_string(),
                right: other.to_string(),
            }),
        }
    }
}

impl From<&DyadicCube> for SuperCube {
    fn from(q: &DyadicCube) -> Self {
        Self {
            factors: q.intervals(),
        }
    }
}

impl From<DyadicCube> for SuperCube {
    fn from(q: DyadicCube) -> Self {
        SuperCube::from(&q)
    }
}

impl fmt::Display for SuperCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Free-function form of [`SuperCube::relation`].
pub fn supercube_relation(q: &SuperCube, q2: &SuperCube) -> Result<Relation, GridError> {
    q.relation(q2)
}
