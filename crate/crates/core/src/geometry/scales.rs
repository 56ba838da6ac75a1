use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{GeometryError, PointMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Non-uniform per-axis scale factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisScales {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl AxisScales {
    pub fn uniform() -> Self {
        Self { sx: 1.0, sy: 1.0, sz: 1.0 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }

    pub fn diagonal(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::new(self.sx, self.sy, self.sz))
    }
}

/// Independent 1-D least squares per axis: `s_a = ⟨src_a, dst_a⟩ / ⟨src_a, src_a⟩`.
pub fn fit_axis_scales(src: &PointMatrix, dst: &PointMatrix) -> Result<AxisScales, GeometryError> {
    if src.n() != dst.n() {
        return Err(GeometryError::DimensionMismatch(src.n(), dst.n()));
    }
    let mut out = [0.0; 3];
    for (a, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
        let ss: f64 = src.column(a).map(|v| v * v).sum();
        if ss == 0.0 {
            return Err(GeometryError::ZeroAxisNorm(axis));
        }
        let sd: f64 = src.column(a).zip(dst.column(a)).map(|(s, d)| s * d).sum();
        let s = sd / ss;
        if !(s > 0.0) || !s.is_finite() {
            return Err(GeometryError::NonPositiveScale(axis, s));
        }
        out[a] = s;
    }
    Ok(AxisScales { sx: out[0], sy: out[1], sz: out[2] })
}
