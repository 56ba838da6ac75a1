//! Synthetic signers: parametric upper bodies with a full 478-point face,
//! two 21-point hands, and simple rigid or signing motion. Used to build
//! fixtures and to exercise retargeting with known ground truth.
//!
//! Bodies are built in pixel units with y pointing down and the root
//! (mid-shoulders) at the origin. Smaller z is closer to the camera.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::PointMatrix;
use crate::landmarks::layout::{face, torso, FACE_JOINTS, HAND_JOINTS, TOTAL_JOINTS};
use crate::landmarks::{JointLayout, Part, PoseFrame, PoseSequence};
use crate::retarget::PartSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyShape {
    pub shoulder_half_width: f64,
    pub hip_half_width: f64,
    pub torso_height: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    /// Nose height above the root.
    pub neck: f64,
    pub face_width: f64,
    pub face_height: f64,
    pub face_depth: f64,
    pub hand_size: f64,
    /// Seed for the free-form face mesh points.
    pub face_seed: u64,
}

impl Default for BodyShape {
    fn default() -> Self {
        Self {
            shoulder_half_width: 45.0,
            hip_half_width: 32.0,
            torso_height: 110.0,
            upper_arm: 55.0,
            forearm: 48.0,
            neck: 48.0,
            face_width: 30.0,
            face_height: 38.0,
            face_depth: 22.0,
            hand_size: 18.0,
            face_seed: 7,
        }
    }
}

impl BodyShape {
    /// Plausible random proportions around the default body.
    pub fn random(rng: &mut impl Rng) -> Self {
        let d = Self::default();
        let mut j = |v: f64| v * rng.gen_range(0.8..1.25);
        Self {
            shoulder_half_width: j(d.shoulder_half_width),
            hip_half_width: j(d.hip_half_width),
            torso_height: j(d.torso_height),
            upper_arm: j(d.upper_arm),
            forearm: j(d.forearm),
            neck: j(d.neck),
            face_width: j(d.face_width),
            face_height: j(d.face_height),
            face_depth: j(d.face_depth),
            hand_size: j(d.hand_size),
            face_seed: rng.gen(),
        }
    }

    /// Uniformly scaled copy.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            shoulder_half_width: self.shoulder_half_width * k,
            hip_half_width: self.hip_half_width * k,
            torso_height: self.torso_height * k,
            upper_arm: self.upper_arm * k,
            forearm: self.forearm * k,
            neck: self.neck * k,
            face_width: self.face_width * k,
            face_height: self.face_height * k,
            face_depth: self.face_depth * k,
            hand_size: self.hand_size * k,
            face_seed: self.face_seed,
        }
    }

    /// Rest pose: 529 rows, root at the origin.
    pub fn rest_pose(&self) -> PointMatrix {
        self.pose(&Articulation::default())
    }

    /// Pose with the given arm, hand and head articulation.
    pub fn pose(&self, art: &Articulation) -> PointMatrix {
        let layout = JointLayout;
        let mut pts = vec![Vector3::zeros(); TOTAL_JOINTS];
        let sw = self.shoulder_half_width;
        let th = self.torso_height;
        pts[torso::LEFT_SHOULDER] = Vector3::new(sw, 0.0, 2.0);
        pts[torso::RIGHT_SHOULDER] = Vector3::new(-sw, 0.0, -2.0);
        pts[torso::LEFT_HIP] = Vector3::new(self.hip_half_width, th, 9.0);
        pts[torso::RIGHT_HIP] = Vector3::new(-self.hip_half_width, th, 6.0);
        pts[torso::NOSE] = Vector3::new(0.0, -self.neck, -self.face_depth);

        for (side, sign) in [(0usize, 1.0f64), (1, -1.0)] {
            let shoulder = pts[if side == 0 { torso::LEFT_SHOULDER } else { torso::RIGHT_SHOULDER }];
            let lift = art.arm_lift[side];
            let reach = art.arm_reach[side];
            // upper arm hangs down and slightly outward, forearm swings up toward the chest
            let elbow_dir = Vector3::new(sign * 0.35, 0.92, -0.2 - 0.3 * reach).normalize();
            let elbow = shoulder + elbow_dir * self.upper_arm;
            let fore_dir = Vector3::new(-sign * (0.55 + 0.3 * reach), -0.4 - 0.9 * lift, -0.6).normalize();
            let wrist = elbow + fore_dir * self.forearm;
            let (e, w) = if side == 0 {
                (torso::LEFT_ELBOW, torso::LEFT_WRIST)
            } else {
                (torso::RIGHT_ELBOW, torso::RIGHT_WRIST)
            };
            pts[e] = elbow;
            pts[w] = wrist;
            let hand = self.hand(wrist, sign, art.finger_curl[side]);
            let start = if side == 0 { layout.left_hand(0) } else { layout.right_hand(0) };
            pts[start..start + HAND_JOINTS].copy_from_slice(&hand);
        }

        let face_pts = self.face_mesh(art.mouth_open, art.gaze);
        // rotate the head about the nose tip and hang the mesh on the torso nose
        let head_rot = Rotation3::from_euler_angles(art.head[0], art.head[1], art.head[2]);
        let tip = face_pts[face::NOSE_TIP];
        let nose = pts[torso::NOSE];
        for (i, p) in face_pts.iter().enumerate() {
            pts[layout.face(i)] = nose + head_rot * (p - tip);
        }
        PointMatrix::new(pts)
    }

    fn hand(&self, wrist: Vector3<f64>, sign: f64, curl: f64) -> [Vector3<f64>; HAND_JOINTS] {
        let s = self.hand_size;
        let mut out = [Vector3::zeros(); HAND_JOINTS];
        out[0] = wrist;
        // thumb then four fingers, fanning upward from the palm
        let bases = [(-0.45, -0.25), (-0.3, -0.9), (-0.05, -1.0), (0.2, -0.95), (0.42, -0.8)];
        for (f, (bx, by)) in bases.iter().enumerate() {
            let dir = Vector3::new(sign * bx, *by, -0.15).normalize();
            let base = wrist + dir * s * 0.9;
            let tip_dir = (dir + Vector3::new(0.0, 0.0, -curl)).normalize();
            for k in 0..4 {
                let seg = if f == 0 { 0.28 } else { 0.32 };
                out[1 + 4 * f + k] = base + tip_dir * s * seg * k as f64 + dir * s * 0.05 * k as f64;
            }
        }
        out
    }

    fn face_mesh(&self, mouth_open: f64, gaze: [f64; 2]) -> Vec<Vector3<f64>> {
        let (a, b, c) = (self.face_width, self.face_height, self.face_depth);
        let surface = |u: f64, v: f64, bulge: f64| {
            let z = -c * (1.0 - u * u - v * v).max(0.0).sqrt() - bulge * c;
            Vector3::new(a * u, b * v, z)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.face_seed);
        let mut pts: Vec<Vector3<f64>> = (0..FACE_JOINTS)
            .map(|_| {
                let r = 0.92 * rng.gen::<f64>().sqrt();
                let t = rng.gen_range(0.0..2.0 * PI);
                let (u, v) = (r * t.cos(), r * t.sin());
                let v = if v > 0.35 { v + 0.15 * mouth_open } else { v };
                surface(u, v, 0.0)
            })
            .collect();

        pts[face::NOSE_TIP] = surface(0.0, 0.15, 0.35);
        for (idx, v, bulge) in [(168, -0.3, 0.05), (6, -0.15, 0.12), (197, -0.02, 0.2), (195, 0.06, 0.27)] {
            pts[idx] = surface(0.0, v, bulge);
        }
        for (idx, u, v) in [(127, -0.95, -0.1), (356, 0.95, -0.1), (21, -0.8, -0.5), (251, 0.8, -0.5)] {
            pts[idx] = surface(u, v, 0.0);
        }
        let eye = |center: f64, k: usize, flip: bool| {
            let t = if flip { PI - PI * k as f64 / 8.0 } else { PI * k as f64 / 8.0 };
            (center + 0.2 * t.cos(), -0.2 + 0.07 * t.sin())
        };
        for (k, &idx) in face::RIGHT_EYE_CONTOUR.iter().enumerate() {
            let (u, v) = eye(-0.35, k, true);
            pts[idx] = surface(u, v, 0.0);
        }
        for (k, &idx) in face::LEFT_EYE_CONTOUR.iter().enumerate() {
            let (u, v) = eye(0.35, k, false);
            pts[idx] = surface(u, v, 0.0);
        }
        for (center_idx, cu) in [(face::RIGHT_IRIS_CENTER, -0.35), (face::LEFT_IRIS_CENTER, 0.35)] {
            let (gu, gv) = (cu + 0.08 * gaze[0], -0.2 + 0.03 * gaze[1]);
            pts[center_idx] = surface(gu, gv, 0.01);
            for k in 0..4 {
                let t = PI * 0.5 * k as f64;
                pts[center_idx + 1 + k] = surface(gu + 0.045 * t.cos(), gv + 0.045 * t.sin(), 0.01);
            }
        }
        pts
    }
}

/// Non-rigid pose parameters. Index 0 is the left side.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Articulation {
    pub arm_lift: [f64; 2],
    pub arm_reach: [f64; 2],
    pub finger_curl: [f64; 2],
    /// Head Euler angles (roll, pitch, yaw) in radians.
    pub head: [f64; 3],
    pub mouth_open: f64,
    pub gaze: [f64; 2],
}

fn principal_rotation(points: &PointMatrix) -> Matrix3<f64> {
    let c = points.centroid();
    let mut cov = Matrix3::zeros();
    for r in points.rows() {
        let d = r - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    // assign each eigenvector to the axis it points along most
    let mut basis = Matrix3::zeros();
    let mut taken = [false; 3];
    for axis in 0..3 {
        let (best, _) = (0..3)
            .filter(|&k| !taken[k])
            .map(|k| (k, eig.eigenvectors.column(k)[axis].abs()))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        taken[best] = true;
        let mut v = eig.eigenvectors.column(best).into_owned();
        if v[axis] < 0.0 {
            v = -v;
        }
        basis.set_row(axis, &v.transpose());
    }
    if basis.determinant() < 0.0 {
        let r = basis.row(2).into_owned();
        basis.set_row(2, &(-r));
    }
    basis
}

/// Rotates each part about its rigid-subset centroid so the rigid subset's
/// principal axes coincide with x, y, z, then re-attaches the face at the
/// torso nose. Per-axis stretches of such a body are exactly representable
/// by the per-axis scale model.
pub fn principal_align(pose: &PointMatrix, rigid_face: &[usize]) -> PointMatrix {
    let layout = JointLayout;
    let torso_part = PartSpec::torso_hands();
    let head_part = PartSpec::head(rigid_face).expect("valid rigid face subset");
    let mut rows: Vec<Vector3<f64>> = pose.rows().to_vec();

    let torso_rigid = pose.select(torso_part.rigid());
    let rot = principal_rotation(&torso_rigid);
    let c = torso_rigid.centroid();
    for r in rows.iter_mut() {
        *r = c + rot * (*r - c);
    }

    let face_rigid = PointMatrix::new(head_part.rigid().iter().map(|&i| rows[i]).collect());
    let rot = principal_rotation(&face_rigid);
    let c = face_rigid.centroid();
    for i in layout.range(Part::Face) {
        rows[i] = c + rot * (rows[i] - c);
    }
    let shift = rows[layout.nose()] - rows[layout.face_nose_tip()];
    for i in layout.range(Part::Face) {
        rows[i] += shift;
    }
    // keep the root at the origin
    let root = (rows[torso::LEFT_SHOULDER] + rows[torso::RIGHT_SHOULDER]) * 0.5;
    PointMatrix::new(rows.into_iter().map(|r| r - root).collect())
}

/// Stretches each part about its rigid-subset centroid by a per-axis factor.
pub fn stretch_parts(pose: &PointMatrix, rigid_face: &[usize], head: [f64; 3], torso_hands: [f64; 3]) -> PointMatrix {
    let mut rows = pose.rows().to_vec();
    for (part, k) in [(PartSpec::head(rigid_face).expect("valid rigid face subset"), head), (PartSpec::torso_hands(), torso_hands)] {
        let c = pose.select(part.rigid()).centroid();
        for &i in part.landmarks() {
            let d = pose[i] - c;
            rows[i] = c + Vector3::new(d.x * k[0], d.y * k[1], d.z * k[2]);
        }
    }
    PointMatrix::new(rows)
}

/// Frame `i` rotation: zero at frame 0, smooth sway afterwards.
pub fn sway(i: usize, amplitude: f64) -> Matrix3<f64> {
    let t = i as f64;
    Rotation3::from_euler_angles(
        amplitude * 0.4 * (0.21 * t).sin(),
        amplitude * 0.7 * (0.13 * t).sin(),
        amplitude * (0.17 * t).sin(),
    )
    .into_inner()
}

fn to_sequence(poses: Vec<PointMatrix>, size: (u32, u32), fps: f64) -> PoseSequence {
    let (w, h) = (size.0 as f64, size.1 as f64);
    let frames = poses
        .into_iter()
        .enumerate()
        .map(|(i, p)| PoseFrame::new(i as u64, p.rows().iter().map(|r| [r.x / w, r.y / h, r.z / w]).collect()))
        .collect();
    PoseSequence::new(frames, size.0, size.1, fps).expect("synthetic sequence is well formed")
}

/// Whole-body rotations of `pose` about its root, which is placed at `root`.
/// Frame 0 is unrotated.
pub fn rigid_sequence(pose: &PointMatrix, root: [f64; 3], frames: usize, amplitude: f64, size: (u32, u32), fps: f64) -> PoseSequence {
    let root = Vector3::from(root);
    let own_root = (pose[torso::LEFT_SHOULDER] + pose[torso::RIGHT_SHOULDER]) * 0.5;
    let poses = (0..frames)
        .map(|i| {
            let q = sway(i, amplitude);
            pose.map(|r| root + q * (r - own_root))
        })
        .collect();
    to_sequence(poses, size, fps)
}

/// Signing-like motion: arms and fingers articulate, the head nods and turns,
/// the mouth opens, and the whole body drifts slightly.
pub fn signing_sequence(shape: &BodyShape, root: [f64; 3], frames: usize, size: (u32, u32), fps: f64, seed: u64) -> PoseSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: [f64; 6] = std::array::from_fn(|_| rng.gen_range(0.0..2.0 * PI));
    let root = Vector3::from(root);
    let poses = (0..frames)
        .map(|i| {
            let t = i as f64 / fps;
            let w = 2.0 * PI * t;
            let art = Articulation {
                arm_lift: [0.5 + 0.5 * (0.9 * w + phase[0]).sin(), 0.4 + 0.4 * (0.7 * w + phase[1]).sin()],
                arm_reach: [0.5 + 0.5 * (0.5 * w + phase[2]).cos(), 0.5 + 0.3 * (0.6 * w).cos()],
                finger_curl: [0.6 + 0.5 * (1.3 * w + phase[3]).sin(), 0.6 + 0.5 * (1.1 * w).cos()],
                head: [0.05 * (0.4 * w).sin(), 0.12 * (0.5 * w + phase[4]).sin(), 0.15 * (0.3 * w).sin()],
                mouth_open: 0.5 + 0.5 * (2.0 * w + phase[5]).sin(),
                gaze: [(0.8 * w).sin(), (0.6 * w).cos()],
            };
            let q = sway(i, 0.04);
            let drift = Vector3::new(2.0 * (0.2 * w).sin(), 1.5 * (0.25 * w).cos(), 0.0);
            shape.pose(&art).map(|r| root + drift + q * r)
        })
        .collect();
    to_sequence(poses, size, fps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_pose_root_at_origin_and_nose_attached() {
        let p = BodyShape::default().rest_pose();
        let layout = JointLayout;
        let root = (p[torso::LEFT_SHOULDER] + p[torso::RIGHT_SHOULDER]) * 0.5;
        assert!(root.norm() < 1e-12);
        assert_eq!(p[layout.nose()], p[layout.face_nose_tip()]);
        assert!(p.is_finite());
    }

    #[test]
    fn principal_alignment_diagonalizes_rigid_covariances() {
        let p = principal_align(&BodyShape::default().rest_pose(), &face::DEFAULT_RIGID);
        for part in [PartSpec::torso_hands(), PartSpec::head(&face::DEFAULT_RIGID).unwrap()] {
            let r = p.select(part.rigid());
            let c = r.centroid();
            let mut cov = Matrix3::zeros();
            for x in r.rows() {
                cov += (x - c) * (x - c).transpose();
            }
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert!(cov[(i, j)].abs() < 1e-9 * cov.norm(), "{cov}");
            }
        }
        let layout = JointLayout;
        assert!((p[layout.nose()] - p[layout.face_nose_tip()]).norm() < 1e-12);
    }

    #[test]
    fn rigid_sequence_first_frame_unrotated() {
        let pose = BodyShape::default().rest_pose();
        let seq = rigid_sequence(&pose, [128.0, 100.0, 0.0], 3, 0.2, (256, 256), 30.0);
        let f0 = seq.frame_pixels(&seq.frames()[0]);
        assert!((f0[torso::LEFT_SHOULDER][0] - (128.0 + pose[torso::LEFT_SHOULDER].x)).abs() < 1e-12);
        for f in seq.frames() {
            let r = seq.to_pixels(f.root());
            assert!((r[0] - 128.0).abs() < 1e-9 && (r[1] - 100.0).abs() < 1e-9);
        }
    }
}
