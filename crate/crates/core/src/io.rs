//! JSON documents for grids, measures, functions, systems, kernels and
//! coefficient trees, plus a writer with fixed 17-digit floats.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bilinear::KernelSpec;
use crate::dyadic::DyadicRational;
use crate::error::{GridError, MeasureError};
use crate::grid::{BitTail, DyadicCube, GridAxis, GridSpec, Interval, SuperCube};
use crate::measure::{Measure, MeasureKind};
use crate::poly::{Frame, MomentSystem, Piece, PiecewisePolyFn, PolyError, SystemError};
use crate::wavelet::{CoefficientTree, CubePart, ScaleWindow, TopPart};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("{0}")]
    Invalid(String),
}

fn bit(b: &u8) -> Result<bool, SchemaError> {
    match b {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(SchemaError::Invalid(format!("bit must be 0 or 1, found {b}"))),
    }
}

fn bits(v: &[bool]) -> Vec<u8> {
    v.iter().map(|&b| u8::from(b)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailDoc {
    Zero,
    One,
    Periodic(Vec<u8>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDoc {
    pub offset: DyadicRational,
    #[serde(default)]
    pub prefix: Vec<u8>,
    pub tail: TailDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    pub dimension: usize,
    pub axes: Vec<AxisDoc>,
}

impl GridDoc {
    pub fn build(&self) -> Result<GridSpec, SchemaError> {
        if self.axes.len() != self.dimension {
            return Err(GridError::DimensionMismatch {
                expected: self.dimension,
                found: self.axes.len(),
            }
            .into());
        }
        let axes = self
            .axes
            .iter()
            .map(|a| {
                let prefix = a.prefix.iter().map(bit).collect::<Result<Vec<_>, _>>()?;
                let tail = match &a.tail {
                    TailDoc::Zero => BitTail::AllZero,
                    TailDoc::One => BitTail::AllOne,
                    TailDoc::Periodic(p) => BitTail::periodic(p.iter().map(bit).collect::<Result<_, _>>()?)?,
                };
                Ok(GridAxis::new(a.offset.clone(), prefix, tail)?)
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        Ok(GridSpec::new(axes)?)
    }

    pub fn from_grid(g: &GridSpec) -> Self {
        Self {
            schema: Some(SCHEMA_VERSION),
            dimension: g.dimension(),
            axes: g
                .axes()
                .iter()
                .map(|a| AxisDoc {
                    offset: a.base_offset().clone(),
                    prefix: bits(a.prefix()),
                    tail: match a.tail() {
                        BitTail::AllZero => TailDoc::Zero,
                        BitTail::AllOne => TailDoc::One,
                        BitTail::Periodic(p) => TailDoc::Periodic(bits(p)),
                    },
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureItem {
    Atom { point: Vec<DyadicRational>, mass: f64 },
    Cell { cell: DyadicCube, density: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureType {
    Atoms,
    Cells,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    #[serde(rename = "type")]
    pub kind: MeasureType,
    pub items: Vec<MeasureItem>,
}

impl MeasureDoc {
    pub fn build(&self) -> Result<Measure, SchemaError> {
        match self.kind {
            MeasureType::Atoms => {
                let items = self
                    .items
                    .iter()
                    .map(|i| match i {
                        MeasureItem::Atom { point, mass } => Ok((point.clone(), *mass)),
                        MeasureItem::Cell { .. } => Err(SchemaError::Invalid("cell item in an atom measure".into())),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Measure::atoms(items)?)
            }
            MeasureType::Cells => {
                let items = self
                    .items
                    .iter()
                    .map(|i| match i {
                        MeasureItem::Cell { cell, density } => Ok((cell.clone(), *density)),
                        MeasureItem::Atom { .. } => Err(SchemaError::Invalid("atom item in a cell measure".into())),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Measure::cells(items)?)
            }
        }
    }

    pub fn from_measure(mu: &Measure) -> Self {
        let (kind, items) = match mu.kind() {
            MeasureKind::Atoms(atoms) => (
                MeasureType::Atoms,
                atoms
                    .iter()
                    .map(|a| MeasureItem::Atom {
                        point: a.point.clone(),
                        mass: a.mass,
                    })
                    .collect(),
            ),
            MeasureKind::Cells(cells) => (
                MeasureType::Cells,
                cells
                    .iter()
                    .map(|c| MeasureItem::Cell {
                        cell: c.cell.clone(),
                        density: c.density,
                    })
                    .collect(),
            ),
        };
        Self {
            schema: Some(SCHEMA_VERSION),
            kind,
            items,
        }
    }
}

/// Moment system reference: `{"kappa": K}` for monomials or `{"id": ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemDoc {
    Monomials { kappa: usize },
    Id { id: String },
}

impl SystemDoc {
    pub fn build(&self, dim: usize) -> Result<MomentSystem, SchemaError> {
        Ok(match self {
            SystemDoc::Monomials { kappa } => MomentSystem::monomials(dim, *kappa)?,
            SystemDoc::Id { id } => MomentSystem::by_id(dim, id)?,
        })
    }

    pub fn from_system(sys: &MomentSystem) -> Self {
        match (sys.is_frame_dependent(), sys.kappa()) {
            (true, Some(kappa)) => SystemDoc::Monomials { kappa },
            _ => SystemDoc::Id { id: sys.id() },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameDoc {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl From<&Frame> for FrameDoc {
    fn from(f: &Frame) -> Self {
        Self {
            center: f.center.clone(),
            scale: f.scale,
        }
    }
}

impl From<&FrameDoc> for Frame {
    fn from(f: &FrameDoc) -> Self {
        Frame {
            center: f.center.clone(),
            scale: f.scale,
        }
    }
}

/// One piece: on a grid cell (coefficients in the cell frame), or on a
/// general region with an explicit frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PieceDoc {
    Cell {
        cell: DyadicCube,
        coeffs: Vec<f64>,
    },
    Region {
        region: Vec<Interval>,
        frame: FrameDoc,
        coeffs: Vec<f64>,
    },
}

impl PieceDoc {
    fn build(&self) -> Piece {
        match self {
            PieceDoc::Cell { cell, coeffs } => Piece::on_cube(cell, coeffs.clone()),
            PieceDoc::Region { region, frame, coeffs } => Piece::new(region.clone(), frame.into(), coeffs.clone()),
        }
    }

    fn from_piece(p: &Piece) -> Self {
        let region = p.region();
        if let Some(Interval::Finite { lo, hi }) = region.first() {
            let side = hi - lo;
            let m = side.exponent();
            if side.mantissa() == &num_bigint::BigInt::from(1) {
                let cell = DyadicCube::new(m, region.iter().filter_map(|iv| iv.lo().cloned()).collect());
                if cell.intervals() == region && Frame::of_cube(&cell) == p.frame {
                    return PieceDoc::Cell {
                        cell,
                        coeffs: p.coeffs.clone(),
                    };
                }
            }
        }
        PieceDoc::Region {
            region: region.to_vec(),
            frame: (&p.frame).into(),
            coeffs: p.coeffs.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDoc>,
    pub pieces: Vec<PieceDoc>,
}

impl FunctionDoc {
    /// Builds the function over `sys`; an embedded system must agree with it.
    pub fn build(&self, sys: &MomentSystem) -> Result<PiecewisePolyFn, SchemaError> {
        if let Some(doc) = &self.system {
            let own = doc.build(sys.dim())?;
            if own != *sys {
                return Err(SchemaError::Invalid(format!(
                    "function is written over {}, the run uses {}",
                    own.id(),
                    sys.id()
                )));
            }
        }
        Ok(PiecewisePolyFn::new(sys.clone(), self.pieces.iter().map(PieceDoc::build).collect())?)
    }

    /// Builds the function over the embedded system.
    pub fn build_own(&self, dim: usize) -> Result<PiecewisePolyFn, SchemaError> {
        let sys = self
            .system
            .as_ref()
            .ok_or_else(|| SchemaError::Invalid("function has no system".into()))?
            .build(dim)?;
        self.build(&sys)
    }

    pub fn from_function(f: &PiecewisePolyFn) -> Self {
        Self {
            schema: Some(SCHEMA_VERSION),
            system: Some(SystemDoc::from_system(f.system())),
            pieces: f.pieces().iter().map(PieceDoc::from_piece).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopDoc {
    pub top: SuperCube,
    pub rank: usize,
    pub frame: FrameDoc,
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeDoc {
    pub schema: u32,
    pub dimension: usize,
    pub system: SystemDoc,
    pub window: ScaleWindow,
    pub tops: Vec<TopDoc>,
    pub cubes: Vec<CubePart>,
}

impl TreeDoc {
    pub fn from_tree(t: &CoefficientTree) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            dimension: t.system.dim(),
            system: SystemDoc::from_system(&t.system),
            window: t.window,
            tops: t
                .tops
                .iter()
                .map(|tp| {
                    let p = tp.function.pieces().first();
                    TopDoc {
                        top: tp.top.clone(),
                        rank: tp.rank,
                        frame: p.map_or_else(|| (&Frame::unit(t.system.dim())).into(), |p| (&p.frame).into()),
                        coeffs: p.map_or_else(|| vec![0.0; t.system.len()], |p| p.coeffs.clone()),
                    }
                })
                .collect(),
            cubes: t.cubes.clone(),
        }
    }

    pub fn build(&self) -> Result<CoefficientTree, SchemaError> {
        if self.schema != SCHEMA_VERSION {
            return Err(SchemaError::Invalid(format!("unsupported schema {}", self.schema)));
        }
        let system = self.system.build(self.dimension)?;
        let tops = self
            .tops
            .iter()
            .map(|t| {
                if !t.top.is_top() || t.coeffs.len() != system.len() {
                    return Err(SchemaError::Invalid(format!("malformed top part {}", t.top)));
                }
                let piece = Piece::new(t.top.factors().to_vec(), (&t.frame).into(), t.coeffs.clone());
                Ok(TopPart {
                    top: t.top.clone(),
                    function: PiecewisePolyFn::new(system.clone(), vec![piece])?,
                    rank: t.rank,
                })
            })
            .collect::<Result<_, SchemaError>>()?;
        Ok(CoefficientTree {
            system,
            window: self.window,
            tops,
            cubes: self.cubes.clone(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKindDoc {
    Hilbert,
    Riesz,
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelDoc {
    pub kind: KernelKindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<f64>,
}

impl KernelDoc {
    pub fn build(&self) -> Result<KernelSpec, SchemaError> {
        let k = match self.kind {
            KernelKindDoc::Hilbert => KernelSpec::hilbert(),
            KernelKindDoc::Riesz => KernelSpec::riesz(
                self.component
                    .ok_or_else(|| SchemaError::Invalid("riesz kernel needs a component".into()))?,
            ),
            KernelKindDoc::Custom => {
                let id = self
                    .id
                    .as_deref()
                    .ok_or_else(|| SchemaError::Invalid("custom kernel needs an id".into()))?;
                KernelSpec::custom_by_id(id).ok_or_else(|| SchemaError::Invalid(format!("unknown kernel id {id}")))?
            }
        };
        Ok(k.with_diagonal(self.diagonal.unwrap_or(0.0)))
    }
}

/// JSON formatter writing every float with 17 significant digits.
pub struct Fixed17;

impl serde_json::ser::Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Serializes with [`Fixed17`] floats; output is byte-stable.
pub fn to_json_fixed<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17);
    value.serialize(&mut ser).expect("serializing into memory");
    out.push(b'\n');
    String::from_utf8(out).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_doc_round_trip() {
        let s = r#"{"dimension":2,"axes":[{"offset":"1/2","prefix":[1,0],"tail":"one"},{"offset":"0","tail":{"periodic":[1,0]}}]}"#;
        let doc: GridDoc = serde_json::from_str(s).unwrap();
        let g = doc.build().unwrap();
        assert_eq!(g.tops().len(), 2);
        let again = GridDoc::from_grid(&g).build().unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn measure_doc_round_trip() {
        let s = r#"{"type":"cells","items":[{"cell":{"scale":-1,"corner":["0"]},"density":2.0}]}"#;
        let mu = serde_json::from_str::<MeasureDoc>(s).unwrap().build().unwrap();
        assert_eq!(mu.total_mass(), 1.0);
        let a = r#"{"type":"atoms","items":[{"point":["1/4"],"mass":1.5}]}"#;
        let mu = serde_json::from_str::<MeasureDoc>(a).unwrap().build().unwrap();
        assert!(mu.is_atomic());
        let bad = r#"{"type":"atoms","items":[{"cell":{"scale":0,"corner":["0"]},"density":1}]}"#;
        assert!(serde_json::from_str::<MeasureDoc>(bad).unwrap().build().is_err());
    }

    #[test]
    fn fixed_floats() {
        assert_eq!(to_json_fixed(&vec![0.1f64, -2.0]), "[1.0000000000000001e-1,-2.0000000000000000e0]\n");
        let back: Vec<f64> = serde_json::from_str("[1.0000000000000001e-1]").unwrap();
        assert_eq!(back[0], 0.1);
    }

    #[test]
    fn kernel_doc() {
        let k: KernelDoc = serde_json::from_str(r#"{"kind":"riesz","component":1}"#).unwrap();
        assert!(k.build().unwrap().check_dimension(2).is_ok());
        let k: KernelDoc = serde_json::from_str(r#"{"kind":"custom","id":"nope"}"#).unwrap();
        assert!(k.build().is_err());
    }
}
