//! Transfers a source signer's motion onto a target signer's body.
//!
//! Two parts are handled independently: the head (full face mesh, aligned on
//! a rigid face subset) and the torso with both hands (aligned on shoulders
//! and hips). Per part, every frame's rigid subset is aligned to a template;
//! the geometric medians of the aligned source and target subsets give the
//! per-axis scales that turn source proportions into target proportions.
//! A source frame is aligned, scaled per axis, then rotated back and divided
//! by the target's median alignment scale. The head is hung on the torso's
//! nose and the unified skeleton is moved onto the target's median root.
//!
//! All geometry runs in 256-crop pixels; sequences must be square.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    fit_axis_scales, geometric_median, gpa_template, umeyama, AxisScales, GeometryError, PointMatrix,
    SimilarityTransform, WeiszfeldParams,
};
use crate::landmarks::layout::{face, torso, FACE_JOINTS, TORSO_JOINTS};
use crate::landmarks::{JointLayout, Landmark, Part, PartStatus, PoseFrame, PoseSequence};
use crate::stats::{lower_median, lower_median3};

#[derive(Debug, Error)]
pub enum RetargetError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{part:?}: {which} sequence has {found} usable frames, need at least 2")]
    InsufficientFrames {
        part: PartKind,
        which: &'static str,
        found: usize,
    },
    #[error("sequence contains no frames")]
    EmptySequence,
    #[error("{which} sequence is {width}x{height}; retargeting needs square 256-crop frames")]
    NotSquare {
        which: &'static str,
        width: u32,
        height: u32,
    },
    #[error("source frame {frame}: {part} is missing (fill gaps before retargeting)")]
    MissingSourcePart { frame: u64, part: Part },
    #[error("{0:?}: rigid subset is degenerate in every source frame")]
    AllFramesDegenerate(PartKind),
    #[error("invalid part specification: {0}")]
    InvalidPart(String),
    #[error("calibration has no entry for {0:?}")]
    MissingCalibration(PartKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartKind {
    Head,
    TorsoHands,
}

/// Landmarks handled together and the rigid subset that drives their alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PartSpec {
    kind: PartKind,
    landmarks: Vec<usize>,
    rigid: Vec<usize>,
    rigid_positions: Vec<usize>,
}

impl PartSpec {
    fn build(kind: PartKind, landmarks: Vec<usize>, rigid: Vec<usize>) -> Result<Self, RetargetError> {
        if rigid.len() < 3 {
            return Err(RetargetError::InvalidPart(format!(
                "{kind:?} rigid subset has {} landmarks, need at least 3",
                rigid.len()
            )));
        }
        let mut rigid_positions = Vec::with_capacity(rigid.len());
        for &r in &rigid {
            let pos = landmarks
                .iter()
                .position(|&l| l == r)
                .ok_or_else(|| RetargetError::InvalidPart(format!("rigid landmark {r} is outside the {kind:?} part")))?;
            if rigid_positions.contains(&pos) {
                return Err(RetargetError::InvalidPart(format!("rigid landmark {r} listed twice")));
            }
            rigid_positions.push(pos);
        }
        Ok(Self {
            kind,
            landmarks,
            rigid,
            rigid_positions,
        })
    }

    /// Full face mesh; `rigid_mesh` are face-mesh indices (0..478).
    pub fn head(rigid_mesh: &[usize]) -> Result<Self, RetargetError> {
        let layout = JointLayout;
        if let Some(&bad) = rigid_mesh.iter().find(|&&i| i >= FACE_JOINTS) {
            return Err(RetargetError::InvalidPart(format!("face mesh index {bad} out of range")));
        }
        Self::build(
            PartKind::Head,
            layout.range(Part::Face).collect(),
            rigid_mesh.iter().map(|&i| layout.face(i)).collect(),
        )
    }

    /// Nine torso joints followed by both hands; rigid subset is shoulders and hips.
    pub fn torso_hands() -> Self {
        let layout = JointLayout;
        let landmarks = layout
            .range(Part::Torso)
            .chain(layout.range(Part::LeftHand))
            .chain(layout.range(Part::RightHand))
            .collect();
        let rigid = vec![torso::LEFT_SHOULDER, torso::RIGHT_SHOULDER, torso::LEFT_HIP, torso::RIGHT_HIP];
        Self::build(PartKind::TorsoHands, landmarks, rigid).expect("torso rigid subset is valid")
    }

    pub fn kind(&self) -> PartKind {
        self.kind
    }

    /// Global landmark indices, in part order.
    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    /// Global indices of the rigid subset.
    pub fn rigid(&self) -> &[usize] {
        &self.rigid
    }

    /// Rigid subset as positions within [`Self::landmarks`].
    pub fn rigid_positions(&self) -> &[usize] {
        &self.rigid_positions
    }

    /// Tracker parts that must be present to retarget this part.
    pub fn source_parts(&self) -> &'static [Part] {
        match self.kind {
            PartKind::Head => &[Part::Face],
            PartKind::TorsoHands => &[Part::Torso, Part::LeftHand, Part::RightHand],
        }
    }

    fn rigid_part(&self) -> Part {
        match self.kind {
            PartKind::Head => Part::Face,
            PartKind::TorsoHands => Part::Torso,
        }
    }

    /// Part landmarks of `frame` in pixel units of `seq`.
    pub fn extract(&self, seq: &PoseSequence, frame: &PoseFrame) -> PointMatrix {
        PointMatrix::new(self.landmarks.iter().map(|&i| Vector3::from(seq.to_pixels(frame.landmark(i)))).collect())
    }

    fn extract_rigid(&self, seq: &PoseSequence, frame: &PoseFrame) -> PointMatrix {
        PointMatrix::new(self.rigid.iter().map(|&i| Vector3::from(seq.to_pixels(frame.landmark(i)))).collect())
    }
}

pub fn default_parts(rigid_face: &[usize]) -> Result<Vec<PartSpec>, RetargetError> {
    Ok(vec![PartSpec::head(rigid_face)?, PartSpec::torso_hands()])
}

/// Calibration of one part for one source/target pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartCalibration {
    pub kind: PartKind,
    /// Global indices of the rigid subset the matrices below refer to.
    pub rigid: Vec<usize>,
    pub template: PointMatrix,
    pub source_median: PointMatrix,
    pub target_median: PointMatrix,
    pub axis_scales: AxisScales,
    /// Median of the target's per-frame alignment scales.
    pub target_median_scale: f64,
    pub source_frames: usize,
    pub target_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetargetCalibration {
    pub parts: Vec<PartCalibration>,
    /// Target's median root joint, 256-crop pixels.
    pub median_root: [f64; 3],
}

impl RetargetCalibration {
    pub fn part(&self, kind: PartKind) -> Result<&PartCalibration, RetargetError> {
        self.parts
            .iter()
            .find(|p| p.kind == kind)
            .ok_or(RetargetError::MissingCalibration(kind))
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    pub gpa_iters: usize,
    pub weiszfeld: WeiszfeldParams,
    /// Templates to use instead of building one from the target.
    pub templates: BTreeMap<PartKind, PointMatrix>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            gpa_iters: 10,
            weiszfeld: WeiszfeldParams::default(),
            templates: BTreeMap::new(),
        }
    }
}

fn ensure_square(seq: &PoseSequence, which: &'static str) -> Result<(), RetargetError> {
    if seq.width != seq.height {
        return Err(RetargetError::NotSquare {
            which,
            width: seq.width,
            height: seq.height,
        });
    }
    Ok(())
}

struct Aligned {
    shapes: Vec<PointMatrix>,
    scales: Vec<f64>,
}

fn align_all(frames: &[PointMatrix], template: &PointMatrix) -> Result<Aligned, RetargetError> {
    let results: Vec<_> = frames.par_iter().map(|f| umeyama(f, template).map(|t| (t.apply(f), t.scale))).collect();
    let mut out = Aligned { shapes: Vec::new(), scales: Vec::new() };
    for r in results {
        match r {
            Ok((shape, scale)) => {
                out.shapes.push(shape);
                out.scales.push(scale);
            }
            Err(GeometryError::DegenerateConfiguration(why)) => log::debug!("skipping frame: {why}"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Per-part templates, median shapes, axis scales and the target's median
/// scale and root. Both sequences must already be in 256-crop space.
pub fn calibrate(
    source: &PoseSequence,
    target: &PoseSequence,
    parts: &[PartSpec],
    opts: &CalibrationOptions,
) -> Result<RetargetCalibration, RetargetError> {
    ensure_square(source, "source")?;
    ensure_square(target, "target")?;
    if source.is_empty() || target.is_empty() {
        return Err(RetargetError::EmptySequence);
    }

    let mut calibrated = Vec::with_capacity(parts.len());
    for part in parts {
        let rigid_frames = |seq: &PoseSequence| -> Vec<PointMatrix> {
            seq.frames()
                .iter()
                .filter(|f| f.is_available(part.rigid_part()))
                .map(|f| part.extract_rigid(seq, f))
                .collect()
        };
        let target_rigid = rigid_frames(target);
        let source_rigid = rigid_frames(source);
        let insufficient = |which, found| RetargetError::InsufficientFrames { part: part.kind, which, found };
        if target_rigid.len() < 2 {
            return Err(insufficient("target", target_rigid.len()));
        }
        if source_rigid.len() < 2 {
            return Err(insufficient("source", source_rigid.len()));
        }

        let template = match opts.templates.get(&part.kind) {
            Some(t) if t.n() != part.rigid.len() => {
                return Err(GeometryError::DimensionMismatch(part.rigid.len(), t.n()).into())
            }
            Some(t) => t.clone(),
            None => gpa_template(&target_rigid, opts.gpa_iters)?,
        };

        let target_aligned = align_all(&target_rigid, &template)?;
        let source_aligned = align_all(&source_rigid, &template)?;
        if target_aligned.shapes.len() < 2 {
            return Err(insufficient("target", target_aligned.shapes.len()));
        }
        if source_aligned.shapes.len() < 2 {
            return Err(insufficient("source", source_aligned.shapes.len()));
        }

        let source_median = geometric_median(&source_aligned.shapes, opts.weiszfeld)?;
        let target_median = geometric_median(&target_aligned.shapes, opts.weiszfeld)?;
        let axis_scales = fit_axis_scales(&source_median, &target_median)?;
        let target_median_scale = lower_median(&target_aligned.scales).expect("at least two finite scales");

        calibrated.push(PartCalibration {
            kind: part.kind,
            rigid: part.rigid.clone(),
            template,
            source_median,
            target_median,
            axis_scales,
            target_median_scale,
            source_frames: source_aligned.shapes.len(),
            target_frames: target_aligned.shapes.len(),
        });
    }

    let roots: Vec<Landmark> = target
        .frames()
        .iter()
        .filter(|f| f.is_available(Part::Torso))
        .map(|f| target.to_pixels(f.root()))
        .collect();
    let median_root = lower_median3(&roots).ok_or(RetargetError::InsufficientFrames {
        part: PartKind::TorsoHands,
        which: "target",
        found: 0,
    })?;

    Ok(RetargetCalibration {
        parts: calibrated,
        median_root,
    })
}

/// Applies a frame's alignment, the per-axis scales, then undoes the rotation
/// and the target's median scale. The alignment translation is not restored.
pub fn apply_part_transform(points: &PointMatrix, alignment: &SimilarityTransform, cal: &PartCalibration) -> PointMatrix {
    let aligned = alignment.apply(points);
    let scales = Vector3::from(cal.axis_scales.as_array());
    let inv = 1.0 / cal.target_median_scale;
    let r = alignment.rotation;
    // (Z' · Rᵀ) per row is R · z'
    aligned.map(|z| inv * (r * z.component_mul(&scales)))
}

/// Retargets one part of one frame. `points` are the part's landmarks in
/// part order, 256-crop pixels.
pub fn retarget_part_frame(points: &PointMatrix, part: &PartSpec, cal: &PartCalibration) -> Result<PointMatrix, RetargetError> {
    if points.n() != part.landmarks.len() {
        return Err(GeometryError::DimensionMismatch(part.landmarks.len(), points.n()).into());
    }
    let alignment = umeyama(&points.select(&part.rigid_positions), &cal.template)?;
    Ok(apply_part_transform(points, &alignment, cal))
}

/// Joins a retargeted head (face-mesh order) and torso+hands (torso, left
/// hand, right hand) into one skeleton: the head's nose tip is moved onto the
/// torso nose, then everything is translated so the root lands on the
/// calibration's median root. Output is in pixel units with frame index 0.
pub fn unify_frame(head: &PointMatrix, torso_hands: &PointMatrix, cal: &RetargetCalibration) -> PoseFrame {
    let layout = JointLayout;
    let attach = torso_hands[torso::NOSE] - head[face::NOSE_TIP];
    let root = (torso_hands[torso::LEFT_SHOULDER] + torso_hands[torso::RIGHT_SHOULDER]) * 0.5;
    let shift = Vector3::from(cal.median_root) - root;

    let mut landmarks = vec![[0.0; 3]; layout.total()];
    let put = |dst: &mut [Landmark], v: Vector3<f64>| {
        dst[0] = [v.x, v.y, v.z];
    };
    for (i, r) in torso_hands.rows().iter().enumerate() {
        let global = if i < TORSO_JOINTS {
            i
        } else {
            // hands follow the torso joints in part order
            layout.range(Part::LeftHand).start + (i - TORSO_JOINTS)
        };
        put(&mut landmarks[global..], r + shift);
    }
    for (i, r) in head.rows().iter().enumerate() {
        put(&mut landmarks[layout.face(i)..], r + attach + shift);
    }
    PoseFrame::new(0, landmarks)
}

/// Frame whose rigid subset could not be aligned; it reused a neighbor's transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateFrame {
    pub frame_index: u64,
    pub part: PartKind,
}

#[derive(Debug, Clone)]
pub struct RetargetOutput {
    pub sequence: PoseSequence,
    pub calibration: RetargetCalibration,
    pub degenerate: Vec<DegenerateFrame>,
}

#[derive(Debug, Clone)]
pub struct RetargetOptions {
    pub calibration: CalibrationOptions,
    /// Face-mesh indices of the rigid head subset.
    pub rigid_face: Vec<usize>,
}

impl Default for RetargetOptions {
    fn default() -> Self {
        Self {
            calibration: CalibrationOptions::default(),
            rigid_face: face::DEFAULT_RIGID.to_vec(),
        }
    }
}

/// Calibrates once, then retargets every source frame onto the target.
pub fn retarget_sequence(
    source: &PoseSequence,
    target: &PoseSequence,
    opts: &RetargetOptions,
) -> Result<RetargetOutput, RetargetError> {
    if source.is_empty() || target.is_empty() {
        return Err(RetargetError::EmptySequence);
    }
    let parts = default_parts(&opts.rigid_face)?;
    let calibration = calibrate(source, target, &parts, &opts.calibration)?;
    let (sequence, degenerate) = retarget_with_calibration(source, &parts, &calibration, target.width)?;
    Ok(RetargetOutput {
        sequence,
        calibration,
        degenerate,
    })
}

/// Retargets `source` with an existing calibration. Output frames are
/// `out_size`×`out_size`, keep the source's indices and fps, and mark parts
/// that reused a neighbor's alignment as filled.
pub fn retarget_with_calibration(
    source: &PoseSequence,
    parts: &[PartSpec],
    calibration: &RetargetCalibration,
    out_size: u32,
) -> Result<(PoseSequence, Vec<DegenerateFrame>), RetargetError> {
    ensure_square(source, "source")?;
    if source.is_empty() {
        return Err(RetargetError::EmptySequence);
    }
    let head = parts
        .iter()
        .find(|p| p.kind == PartKind::Head)
        .ok_or(RetargetError::MissingCalibration(PartKind::Head))?;
    let body = parts
        .iter()
        .find(|p| p.kind == PartKind::TorsoHands)
        .ok_or(RetargetError::MissingCalibration(PartKind::TorsoHands))?;

    for frame in source.frames() {
        for part in [head, body] {
            if let Some(&missing) = part.source_parts().iter().find(|&&p| !frame.is_available(p)) {
                return Err(RetargetError::MissingSourcePart {
                    frame: frame.frame_index,
                    part: missing,
                });
            }
        }
    }

    let mut degenerate = Vec::new();
    let mut per_part: Vec<Vec<PointMatrix>> = Vec::new();
    let mut reused: Vec<Vec<bool>> = Vec::new();
    for part in [head, body] {
        let cal = calibration.part(part.kind)?;
        let points: Vec<PointMatrix> = source.frames().par_iter().map(|f| part.extract(source, f)).collect();
        let alignments: Vec<Option<SimilarityTransform>> = points
            .par_iter()
            .map(|p| match umeyama(&p.select(&part.rigid_positions), &cal.template) {
                Ok(t) => Ok(Some(t)),
                Err(GeometryError::DegenerateConfiguration(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_, _>>()?;

        let first = alignments
            .iter()
            .flatten()
            .next()
            .copied()
            .ok_or(RetargetError::AllFramesDegenerate(part.kind))?;
        let mut last = first;
        let mut filled = Vec::with_capacity(alignments.len());
        let mut flags = Vec::with_capacity(alignments.len());
        for (frame, a) in source.frames().iter().zip(&alignments) {
            match a {
                Some(t) => {
                    last = *t;
                    flags.push(false);
                }
                None => {
                    degenerate.push(DegenerateFrame {
                        frame_index: frame.frame_index,
                        part: part.kind,
                    });
                    flags.push(true);
                }
            }
            filled.push(last);
        }
        let out: Vec<PointMatrix> = points
            .par_iter()
            .zip(filled.par_iter())
            .map(|(p, t)| apply_part_transform(p, t, cal))
            .collect();
        per_part.push(out);
        reused.push(flags);
    }

    let scale = out_size as f64;
    let frames: Vec<PoseFrame> = source
        .frames()
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            let unified = unify_frame(&per_part[0][i], &per_part[1][i], calibration);
            let normalized: Vec<Landmark> = unified.landmarks().iter().map(|l| l.map(|v| v / scale)).collect();
            let mut frame = PoseFrame::new(src.frame_index, normalized);
            if reused[0][i] {
                frame.set_status(Part::Face, PartStatus::Filled);
            }
            if reused[1][i] {
                for p in [Part::Torso, Part::LeftHand, Part::RightHand] {
                    frame.set_status(p, PartStatus::Filled);
                }
            }
            frame
        })
        .collect();
    let seq = PoseSequence::new(frames, out_size, out_size, source.fps).expect("source ordering preserved");
    Ok((seq, degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{principal_align, rigid_sequence, stretch_parts, BodyShape};
    use nalgebra::Rotation3;

    fn rigid_fixture(shape: &BodyShape, frames: usize) -> PoseSequence {
        let pose = principal_align(&shape.rest_pose(), &face::DEFAULT_RIGID);
        rigid_sequence(&pose, [128.0, 90.0, 0.0], frames, 0.25, (256, 256), 30.0)
    }

    #[test]
    fn part_spec_validation() {
        assert!(PartSpec::head(&[1, 2]).is_err());
        assert!(PartSpec::head(&[1, 2, 478]).is_err());
        assert!(PartSpec::head(&[1, 2, 2]).is_err());
        let h = PartSpec::head(&face::DEFAULT_RIGID).unwrap();
        assert_eq!(h.landmarks().len(), 478);
        assert_eq!(h.rigid_positions()[0], 168);
        let t = PartSpec::torso_hands();
        assert_eq!(t.landmarks().len(), 51);
        assert_eq!(t.rigid_positions(), &[1, 2, 7, 8]);
    }

    #[test]
    fn self_calibration_is_neutral() {
        let seq = rigid_fixture(&BodyShape::default(), 12);
        let cal = calibrate(&seq, &seq, &default_parts(&face::DEFAULT_RIGID).unwrap(), &CalibrationOptions::default()).unwrap();
        for p in &cal.parts {
            assert_eq!(p.source_median, p.target_median);
            for s in p.axis_scales.as_array() {
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
        assert!((cal.median_root[0] - 128.0).abs() < 1e-9);
    }

    #[test]
    fn stretched_target_recovers_axis_scale() {
        let shape = BodyShape::default();
        let pose = principal_align(&shape.rest_pose(), &face::DEFAULT_RIGID);
        let stretched = stretch_parts(&pose, &face::DEFAULT_RIGID, [1.0, 1.5, 1.0], [1.0, 1.5, 1.0]);
        let source = rigid_sequence(&pose, [128.0, 90.0, 0.0], 10, 0.2, (256, 256), 30.0);
        let target = rigid_sequence(&stretched, [120.0, 80.0, 0.0], 10, 0.2, (256, 256), 30.0);
        let cal = calibrate(&source, &target, &default_parts(&face::DEFAULT_RIGID).unwrap(), &CalibrationOptions::default()).unwrap();
        for p in &cal.parts {
            let [sx, sy, sz] = p.axis_scales.as_array();
            // template carries the target's overall size; only the ratio is pinned
            assert!((sy / sx - 1.5).abs() < 1e-6, "{:?}: {:?}", p.kind, p.axis_scales);
            assert!((sz / sx - 1.0).abs() < 1e-6, "{:?}: {:?}", p.kind, p.axis_scales);
        }
    }

    #[test]
    fn single_frame_target_is_insufficient() {
        let seq = rigid_fixture(&BodyShape::default(), 5);
        let one = PoseSequence::new(vec![seq.frames()[0].clone()], 256, 256, 30.0).unwrap();
        let err = calibrate(&seq, &one, &default_parts(&face::DEFAULT_RIGID).unwrap(), &CalibrationOptions::default());
        assert!(matches!(err, Err(RetargetError::InsufficientFrames { which: "target", found: 1, .. })));
    }

    fn calibrated() -> (PoseSequence, RetargetCalibration, Vec<PartSpec>) {
        let seq = rigid_fixture(&BodyShape::default(), 10);
        let parts = default_parts(&face::DEFAULT_RIGID).unwrap();
        let cal = calibrate(&seq, &seq, &parts, &CalibrationOptions::default()).unwrap();
        (seq, cal, parts)
    }

    #[test]
    fn part_frame_scale_and_translation_invariant() {
        let (seq, cal, parts) = calibrated();
        for part in &parts {
            let pc = cal.part(part.kind()).unwrap();
            let x = part.extract(&seq, &seq.frames()[3]);
            let base = retarget_part_frame(&x, part, pc).unwrap();
            let scaled = retarget_part_frame(&x.scaled(3.0), part, pc).unwrap();
            let moved = retarget_part_frame(&x.translated(&Vector3::new(10.0, -5.0, 2.0)), part, pc).unwrap();
            assert!(base.max_row_distance(&scaled) < 1e-9);
            assert!(base.max_row_distance(&moved) < 1e-9);
        }
    }

    #[test]
    fn part_frame_rotation_equivariant() {
        let (seq, cal, parts) = calibrated();
        let q = Rotation3::from_euler_angles(0.4, -1.1, 2.0).into_inner();
        for part in &parts {
            let pc = cal.part(part.kind()).unwrap();
            let x = part.extract(&seq, &seq.frames()[5]);
            let base = retarget_part_frame(&x, part, pc).unwrap().mul_matrix(&q);
            let rotated = retarget_part_frame(&x.mul_matrix(&q), part, pc).unwrap();
            assert!(base.max_row_distance(&rotated) < 1e-8);
        }
    }

    #[test]
    fn unify_attaches_head_at_torso_nose() {
        let mut head = vec![[0.0; 3]; 478];
        head[face::NOSE_TIP] = [5.0, 5.0, 5.0];
        let mut body = vec![[0.0; 3]; 51];
        body[torso::NOSE] = [1.0, 1.0, 1.0];
        body[torso::LEFT_SHOULDER] = [2.0, 0.0, 0.0];
        body[torso::RIGHT_SHOULDER] = [-2.0, 0.0, 0.0];
        let cal = RetargetCalibration { parts: vec![], median_root: [0.0; 3] };
        let f = unify_frame(&PointMatrix::from_rows(&head), &PointMatrix::from_rows(&body), &cal);
        let layout = JointLayout;
        assert_eq!(f.landmark(layout.face_nose_tip()), [1.0, 1.0, 1.0]);
        // every other head point moved by (-4, -4, -4)
        assert_eq!(f.landmark(layout.face(0)), [-4.0, -4.0, -4.0]);
        assert_eq!(f.root(), [0.0; 3]);
        assert_eq!(f.landmark(layout.left_hand(0)), body[9]);
    }

    #[test]
    fn unify_moves_root_onto_median_root() {
        let head = PointMatrix::from_rows(&vec![[3.0, 1.0, 2.0]; 478]);
        let mut body = vec![[7.0, 8.0, 9.0]; 51];
        body[torso::LEFT_SHOULDER] = [12.5, 3.0, 1.0];
        body[torso::RIGHT_SHOULDER] = [-1.25, 7.0, -2.0];
        let cal = RetargetCalibration { parts: vec![], median_root: [100.0, 60.5, -3.0] };
        let f = unify_frame(&head, &PointMatrix::from_rows(&body), &cal);
        let root = f.root();
        for k in 0..3 {
            assert!((root[k] - cal.median_root[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_source() {
        let seq = rigid_fixture(&BodyShape::default(), 4);
        let empty = PoseSequence::new(vec![], 256, 256, 30.0).unwrap();
        assert!(matches!(retarget_sequence(&empty, &seq, &RetargetOptions::default()), Err(RetargetError::EmptySequence)));
    }

    #[test]
    fn non_square_rejected() {
        let seq = rigid_fixture(&BodyShape::default(), 4);
        let wide = PoseSequence::new(seq.frames().to_vec(), 320, 256, 30.0).unwrap();
        assert!(matches!(
            retarget_sequence(&wide, &seq, &RetargetOptions::default()),
            Err(RetargetError::NotSquare { which: "source", .. })
        ));
    }

    #[test]
    fn degenerate_frame_reuses_previous_alignment() {
        let (seq, _, _) = calibrated();
        let mut frames = seq.frames().to_vec();
        // collapse the torso rigid subset of frame 4
        let p = frames[4].landmark(torso::LEFT_SHOULDER);
        let mut torso_pts = frames[4].part(Part::Torso).to_vec();
        for i in [torso::LEFT_SHOULDER, torso::RIGHT_SHOULDER, torso::LEFT_HIP, torso::RIGHT_HIP] {
            torso_pts[i] = p;
        }
        frames[4].set_part(Part::Torso, &torso_pts, PartStatus::Detected);
        let broken = PoseSequence::new(frames, 256, 256, 30.0).unwrap();
        let out = retarget_sequence(&broken, &seq, &RetargetOptions::default()).unwrap();
        assert_eq!(out.degenerate, vec![DegenerateFrame { frame_index: 4, part: PartKind::TorsoHands }]);
        assert_eq!(out.sequence.frames()[4].status(Part::Torso), PartStatus::Filled);
        assert_eq!(out.sequence.frames()[4].status(Part::Face), PartStatus::Detected);
    }
}
