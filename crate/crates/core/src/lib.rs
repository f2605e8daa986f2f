//! Generalized dyadic grids with infinite top cubes, weighted Alpert wavelets
//! for locally finite measures, and the tops form of two-weight bilinear
//! decompositions.
//!
//! ```
//! use tops_core::grid::GridSpec;
//!
//! // the standard grid in the plane has the four quadrants as tops
//! assert_eq!(GridSpec::standard(2).tops().len(), 4);
//! ```

pub mod bilinear;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod poly;
pub mod probe;
pub mod wavelet;

pub use dyadic::DyadicRational;
pub use error::{BilinearError, GridError, MeasureError, WaveletError};
pub use grid::{DyadicCube, GridSpec, SuperCube};
pub use measure::Measure;
pub use poly::{MomentSystem, PiecewisePolyFn};
