use nalgebra::{Matrix3, Vector3, SVD};

use super::{GeometryError, PointMatrix};

/// Relative threshold below which the second singular value of the
/// cross-covariance counts as zero.
const RANK_TOLERANCE: f64 = 1e-12;

/// Rotation, translation and isotropic scale applied as `Z = s·X·R + 1·Tᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub scale: f64,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, points: &PointMatrix) -> PointMatrix {
        let rt = self.rotation.transpose();
        points.map(|x| self.scale * (rt * x) + self.translation)
    }

    /// Squared Frobenius residual `‖s·X·R + 1Tᵀ − Y‖²`.
    pub fn residual(&self, src: &PointMatrix, dst: &PointMatrix) -> f64 {
        let z = self.apply(src);
        z.rows().iter().zip(dst.rows()).map(|(a, b)| (a - b).norm_squared()).sum()
    }
}

/// Least-squares similarity transform taking `src` onto `dst`, with the
/// reflection correction that keeps `det(R) = +1`.
pub fn umeyama(src: &PointMatrix, dst: &PointMatrix) -> Result<SimilarityTransform, GeometryError> {
    if src.n() != dst.n() {
        return Err(GeometryError::DimensionMismatch(src.n(), dst.n()));
    }
    if src.n() < 3 {
        return Err(GeometryError::DegenerateConfiguration("fewer than three points"));
    }
    if !src.is_finite() || !dst.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let n = src.n() as f64;
    let mu_src = src.centroid();
    let mu_dst = dst.centroid();

    let mut var_src = 0.0;
    let mut cov = Matrix3::zeros();
    for (x, y) in src.rows().iter().zip(dst.rows()) {
        let xc = x - mu_src;
        let yc = y - mu_dst;
        var_src += xc.norm_squared();
        cov += yc * xc.transpose();
    }
    var_src /= n;
    cov /= n;

    if var_src <= f64::MIN_POSITIVE {
        return Err(GeometryError::DegenerateConfiguration("source points coincide"));
    }

    let svd = SVD::new(cov, true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(GeometryError::DegenerateConfiguration("SVD did not converge")),
    };
    let sv = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if !(sv[order[0]] > 0.0) || sv[order[1]] <= RANK_TOLERANCE * sv[order[0]] {
        return Err(GeometryError::DegenerateConfiguration(
            "cross-covariance rank below two",
        ));
    }

    let mut sign = Vector3::new(1.0, 1.0, 1.0);
    if (u * v_t).determinant() < 0.0 {
        sign[order[2]] = -1.0;
    }
    // column convention: dst ≈ c·Rc·src + t, with Rc = U·S·Vᵀ
    let rc = u * Matrix3::from_diagonal(&sign) * v_t;
    let scale = sv.component_mul(&sign).sum() / var_src;
    let translation = mu_dst - scale * (rc * mu_src);

    Ok(SimilarityTransform {
        rotation: rc.transpose(),
        translation,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tetra() -> PointMatrix {
        PointMatrix::from_rows(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    }

    fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
        let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let angle = rng.gen_range(-3.0..3.0);
        Rotation3::from_scaled_axis(axis.normalize() * angle).into_inner()
    }

    fn random_points(rng: &mut impl Rng, n: usize) -> PointMatrix {
        PointMatrix::new(
            (0..n)
                .map(|_| Vector3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
                .collect(),
        )
    }

    #[test]
    fn identity_alignment() {
        let x = tetra();
        let t = umeyama(&x, &x).unwrap();
        assert_abs_diff_eq!(t.rotation, Matrix3::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.scale, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.translation, Vector3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn recovers_scaled_rotated_translated_copy() {
        let x = tetra();
        let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2).into_inner();
        let truth = SimilarityTransform {
            rotation: rz,
            translation: Vector3::new(1.0, 2.0, 3.0),
            scale: 2.0,
        };
        let y = truth.apply(&x);
        let t = umeyama(&x, &y).unwrap();
        assert_abs_diff_eq!(t.scale, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.rotation, rz, epsilon = 1e-9);
        assert_abs_diff_eq!(t.translation, Vector3::new(1.0, 2.0, 3.0), epsilon = 1e-9);
    }

    #[test]
    fn coincident_source_is_degenerate() {
        let x = PointMatrix::from_rows(&[[1.0, 1.0, 1.0]; 4]);
        assert!(matches!(umeyama(&x, &tetra()), Err(GeometryError::DegenerateConfiguration(_))));
    }

    #[test]
    fn collinear_source_is_degenerate() {
        let x = PointMatrix::from_rows(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        assert!(matches!(umeyama(&x, &tetra()), Err(GeometryError::DegenerateConfiguration(_))));
    }

    #[test]
    fn planar_configuration_is_accepted() {
        let x = PointMatrix::from_rows(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [1.2, 2.0, 0.0], [-1.2, 2.0, 0.0]]);
        let rot = Rotation3::from_euler_angles(0.3, -0.2, 1.1).into_inner();
        let truth = SimilarityTransform { rotation: rot, translation: Vector3::new(4.0, 0.5, -1.0), scale: 0.7 };
        let t = umeyama(&x, &truth.apply(&x)).unwrap();
        assert_abs_diff_eq!(t.rotation, rot, epsilon = 1e-9);
        assert_abs_diff_eq!(t.rotation.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_sizes() {
        let a = tetra();
        let b = a.select(&[0, 1, 2]);
        assert_eq!(umeyama(&a, &b), Err(GeometryError::DimensionMismatch(4, 3)));
    }

    #[test]
    fn reflected_target_still_proper_rotation() {
        let x = tetra();
        let y = x.map(|r| Vector3::new(-r.x, r.y, r.z));
        let t = umeyama(&x, &y).unwrap();
        assert_abs_diff_eq!(t.rotation.determinant(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!((t.rotation.transpose() * t.rotation), Matrix3::identity(), epsilon = 1e-9);
    }

    #[test]
    fn local_optimality_under_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(4..20);
            let src = random_points(&mut rng, n);
            let dst = random_points(&mut rng, n);
            let best = umeyama(&src, &dst).unwrap();
            let e0 = best.residual(&src, &dst);
            let small = Rotation3::from_scaled_axis(Vector3::new(
                rng.gen_range(-1e-3..1e-3),
                rng.gen_range(-1e-3..1e-3),
                rng.gen_range(-1e-3..1e-3),
            ))
            .into_inner();
            let candidates = [
                SimilarityTransform { rotation: best.rotation * small, ..best },
                SimilarityTransform { scale: best.scale * 1.01, ..best },
                SimilarityTransform { scale: best.scale * 0.99, ..best },
                SimilarityTransform {
                    translation: best.translation + Vector3::new(1e-3, -1e-3, 5e-4),
                    ..best
                },
            ];
            for c in candidates {
                assert!(c.residual(&src, &dst) >= e0 - 1e-12 * e0.max(1.0));
            }
        }
    }

    #[test]
    fn rotation_equivariance_of_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(4..15);
            let src = random_points(&mut rng, n);
            let dst = random_points(&mut rng, n);
            let q = random_rotation(&mut rng);
            let base = umeyama(&src, &dst).unwrap();
            let rotated = umeyama(&src.mul_matrix(&q), &dst).unwrap();
            assert_abs_diff_eq!(rotated.rotation, q.transpose() * base.rotation, epsilon = 1e-9);
        }
    }
}
