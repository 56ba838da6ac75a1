//! Similarity alignment (Umeyama), Weiszfeld geometric median, per-axis
//! scale fitting and generalized-Procrustes templates.
//!
//! Point sets are stored one point per row and transforms follow the row
//! convention `Z = s·X·R + 1·Tᵀ`.

mod gpa;
mod median;
mod points;
mod scales;
mod umeyama;

use thiserror::Error;

pub use gpa::{gpa_template, procrustes_distance};
pub use median::{geometric_median, weiszfeld, MedianTrace, WeiszfeldParams};
pub use points::PointMatrix;
pub use scales::{fit_axis_scales, Axis, AxisScales};
pub use umeyama::{umeyama, SimilarityTransform};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point configuration is degenerate: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("dimension mismatch: {0} vs {1} points")]
    DimensionMismatch(usize, usize),
    #[error("geometric median of an empty set")]
    EmptyInput,
    #[error("{0} column of the source shape has zero norm")]
    ZeroAxisNorm(Axis),
    #[error("least-squares scale along {0} is not positive ({1})")]
    NonPositiveScale(Axis, f64),
    #[error("non-finite coordinate in point matrix")]
    NonFinite,
}
