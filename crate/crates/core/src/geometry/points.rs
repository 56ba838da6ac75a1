use std::ops::Index;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// An n×3 matrix of points, one per row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct PointMatrix(Vec<Vector3<f64>>);

impl PointMatrix {
    pub fn new(rows: Vec<Vector3<f64>>) -> Self {
        Self(rows)
    }

    pub fn from_rows(rows: &[[f64; 3]]) -> Self {
        Self(rows.iter().map(|r| Vector3::from(*r)).collect())
    }

    pub fn rows(&self) -> &[Vector3<f64>] {
        &self.0
    }

    pub fn rows_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(|v| v.is_finite()))
    }

    pub fn to_rows(&self) -> Vec<[f64; 3]> {
        self.0.iter().map(|r| [r.x, r.y, r.z]).collect()
    }

    /// Row subset in the given order.
    pub fn select(&self, rows: &[usize]) -> PointMatrix {
        PointMatrix(rows.iter().map(|&i| self.0[i]).collect())
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let sum: Vector3<f64> = self.0.iter().sum();
        sum / self.0.len() as f64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn map(&self, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> PointMatrix {
        PointMatrix(self.0.iter().map(f).collect())
    }

    pub fn translated(&self, t: &Vector3<f64>) -> PointMatrix {
        self.map(|r| r + t)
    }

    pub fn scaled(&self, k: f64) -> PointMatrix {
        self.map(|r| r * k)
    }

    /// `self · m` in row convention.
    pub fn mul_matrix(&self, m: &nalgebra::Matrix3<f64>) -> PointMatrix {
        let mt = m.transpose();
        self.map(|r| mt * r)
    }

    /// Zero centroid and unit Frobenius norm.
    pub fn normalized(&self) -> PointMatrix {
        let c = self.centroid();
        let centered = self.map(|r| r - c);
        let norm = centered.frobenius_norm();
        centered.scaled(1.0 / norm)
    }

    /// Row-major flattening into ℝ^{3n}.
    pub fn flatten(&self) -> Vec<f64> {
        self.0.iter().flat_map(|r| [r.x, r.y, r.z]).collect()
    }

    pub fn from_flat(flat: &[f64]) -> PointMatrix {
        assert_eq!(flat.len() % 3, 0);
        PointMatrix(flat.chunks_exact(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect())
    }

    pub fn column(&self, axis: usize) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(move |r| r[axis])
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn distance(&self, other: &PointMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest per-row Euclidean deviation.
    pub fn max_row_distance(&self, other: &PointMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for PointMatrix {
    type Output = Vector3<f64>;

    fn index(&self, i: usize) -> &Vector3<f64> {
        &self.0[i]
    }
}

impl From<Vec<[f64; 3]>> for PointMatrix {
    fn from(rows: Vec<[f64; 3]>) -> Self {
        PointMatrix::from_rows(&rows)
    }
}

impl From<PointMatrix> for Vec<[f64; 3]> {
    fn from(m: PointMatrix) -> Self {
        m.to_rows()
    }
}
