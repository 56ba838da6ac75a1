use super::{umeyama, GeometryError, PointMatrix};

/// Generalized Procrustes mean shape.
///
/// Starts from frame 0 (centered, unit Frobenius norm); each round aligns
/// every frame to the current mean, averages, and re-normalizes.
pub fn gpa_template(frames: &[PointMatrix], iters: usize) -> Result<PointMatrix, GeometryError> {
    let Some(first) = frames.first() else {
        return Err(GeometryError::EmptyInput);
    };
    if let Some(f) = frames.iter().find(|f| f.n() != first.n()) {
        return Err(GeometryError::DimensionMismatch(first.n(), f.n()));
    }
    if first.n() < 3 {
        return Err(GeometryError::DegenerateConfiguration("fewer than three points"));
    }
    let mut mean = first.normalized();
    if !mean.is_finite() {
        return Err(GeometryError::DegenerateConfiguration("first frame has zero spread"));
    }
    for _ in 0..iters {
        let mut acc = vec![nalgebra::Vector3::zeros(); mean.n()];
        for frame in frames {
            let aligned = umeyama(frame, &mean)?.apply(frame);
            for (a, r) in acc.iter_mut().zip(aligned.rows()) {
                *a += r;
            }
        }
        let k = frames.len() as f64;
        mean = PointMatrix::new(acc.into_iter().map(|a| a / k).collect()).normalized();
    }
    Ok(mean)
}

/// Residual Frobenius norm after normalizing both shapes and aligning `a`
/// onto `b` with the optimal similarity transform.
pub fn procrustes_distance(a: &PointMatrix, b: &PointMatrix) -> Result<f64, GeometryError> {
    let a = a.normalized();
    let b = b.normalized();
    let t = umeyama(&a, &b)?;
    Ok(t.residual(&a, &b).sqrt())
}
