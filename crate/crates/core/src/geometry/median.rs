use serde::{Deserialize, Serialize};

use super::{GeometryError, PointMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeiszfeldParams {
    /// Stop once an update moves the iterate by less than this (Euclidean).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WeiszfeldParams {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct MedianTrace {
    pub point: Vec<f64>,
    /// Objective Σ‖y − pᵢ‖ at the start point and after every accepted step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn objective(y: &[f64], points: &[&[f64]]) -> f64 {
    points.iter().map(|p| dist(y, p)).sum()
}

/// Weiszfeld iteration with the Vardi–Zhang modification for iterates that
/// land on data points. Starts from the centroid. A step that would raise the
/// objective (possible only through rounding) is rejected and ends the run.
pub fn weiszfeld(points: &[&[f64]], params: WeiszfeldParams) -> Result<MedianTrace, GeometryError> {
    let Some(first) = points.first() else {
        return Err(GeometryError::EmptyInput);
    };
    let dim = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(GeometryError::DimensionMismatch(dim, p.len()));
    }
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(GeometryError::NonFinite);
    }

    let mut y = vec![0.0; dim];
    for p in points {
        for (acc, v) in y.iter_mut().zip(p.iter()) {
            *acc += v;
        }
    }
    let n = points.len() as f64;
    y.iter_mut().for_each(|v| *v /= n);

    let mut f = objective(&y, points);
    let mut trace = vec![f];
    let mut converged = false;
    let mut iterations = 0;

    let mut weighted = vec![0.0; dim];
    let mut pull = vec![0.0; dim];
    while iterations < params.max_iter {
        iterations += 1;
        weighted.fill(0.0);
        pull.fill(0.0);
        let mut weight_sum = 0.0;
        let mut coincident = 0usize;
        for p in points {
            let d = dist(&y, p);
            let scale = p.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if d <= f64::EPSILON * scale {
                coincident += 1;
                continue;
            }
            let w = 1.0 / d;
            weight_sum += w;
            for k in 0..dim {
                weighted[k] += w * p[k];
                pull[k] += w * (p[k] - y[k]);
            }
        }
        if weight_sum == 0.0 {
            converged = true;
            break;
        }
        let candidate: Vec<f64> = if coincident == 0 {
            weighted.iter().map(|v| v / weight_sum).collect()
        } else {
            let r = pull.iter().map(|v| v * v).sum::<f64>().sqrt();
            let eta = coincident as f64;
            if r <= eta {
                // the data point under the iterate is itself optimal
                converged = true;
                break;
            }
            let gamma = eta / r;
            weighted
                .iter()
                .zip(&y)
                .map(|(w, yk)| (1.0 - gamma) * (w / weight_sum) + gamma * yk)
                .collect()
        };
        let f_new = objective(&candidate, points);
        if f_new > f {
            converged = true;
            break;
        }
        let step = dist(&candidate, &y);
        y = candidate;
        f = f_new;
        trace.push(f);
        if step < params.tol {
            converged = true;
            break;
        }
    }

    Ok(MedianTrace {
        point: y,
        objective: trace,
        iterations,
        converged,
    })
}

/// Geometric median of whole point matrices, each treated as one point in ℝ^{3n}.
pub fn geometric_median(shapes: &[PointMatrix], params: WeiszfeldParams) -> Result<PointMatrix, GeometryError> {
    let Some(first) = shapes.first() else {
        return Err(GeometryError::EmptyInput);
    };
    if let Some(s) = shapes.iter().find(|s| s.n() != first.n()) {
        return Err(GeometryError::DimensionMismatch(first.n(), s.n()));
    }
    let flat: Vec<Vec<f64>> = shapes.iter().map(PointMatrix::flatten).collect();
    let refs: Vec<&[f64]> = flat.iter().map(Vec::as_slice).collect();
    let trace = weiszfeld(&refs, params)?;
    if !trace.converged {
        log::warn!("geometric median stopped after {} iterations without converging", trace.iterations);
    }
    Ok(PointMatrix::from_flat(&trace.point))
}
