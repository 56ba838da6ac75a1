//! Crop boxes for target and source signers and the induced landmark remap
//! into the 256×256 working frame.
//!
//! The target box is the x/y envelope of all landmarks over the whole
//! sequence. The source box is sized so that the source's median shoulder
//! width and torso height occupy the same fraction of the box as the target's
//! do of its 256-pixel crop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{midpoint, Landmark, Part, PoseFrame, PoseSequence};
use crate::stats::{lower_median, lower_median3};

/// Side of the square working frame.
pub const OUT_SIZE: u32 = 256;
/// Largest pixel coordinate of the working frame; box corners map to 0 and this.
pub const OUT_EXTENT: f64 = (OUT_SIZE - 1) as f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CropError {
    #[error("sequence has no usable landmarks")]
    EmptySequence,
    #[error("crop box has zero extent ({0})")]
    DegenerateBox(&'static str),
    #[error("median shoulder distance is {0:.3} px (must exceed 1 px)")]
    DegenerateShoulders(f64),
    #[error("median shoulder-to-hip distance is {0:.3} px (must exceed 1 px)")]
    DegenerateTorso(f64),
}

/// Axis-aligned box in source-frame pixels plus the affine remap it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropSpec {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub out_size: u32,
    pub scale_x: f64,
    pub scale_y: f64,
    pub offset_x: f64,
    pub offset_y: f64,
    /// True when the box reaches outside the original frame.
    #[serde(default)]
    pub exceeds_frame: bool,
}

impl CropSpec {
    pub fn from_box(x_min: f64, y_min: f64, x_max: f64, y_max: f64, frame: (u32, u32)) -> Result<Self, CropError> {
        if !(x_max > x_min) {
            return Err(CropError::DegenerateBox("x"));
        }
        if !(y_max > y_min) {
            return Err(CropError::DegenerateBox("y"));
        }
        let scale_x = OUT_EXTENT / (x_max - x_min);
        let scale_y = OUT_EXTENT / (y_max - y_min);
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
            out_size: OUT_SIZE,
            scale_x,
            scale_y,
            offset_x: -x_min * scale_x,
            offset_y: -y_min * scale_y,
            exceeds_frame: x_min < 0.0 || y_min < 0.0 || x_max > frame.0 as f64 || y_max > frame.1 as f64,
        })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn z_scale(&self) -> f64 {
        0.5 * (self.scale_x + self.scale_y)
    }

    /// Source pixels to working-frame pixels.
    pub fn remap(&self, p: Landmark) -> Landmark {
        [
            (p[0] - self.x_min) / self.width() * OUT_EXTENT,
            (p[1] - self.y_min) / self.height() * OUT_EXTENT,
            p[2] * self.z_scale(),
        ]
    }

    pub fn unmap(&self, q: Landmark) -> Landmark {
        [
            q[0] / OUT_EXTENT * self.width() + self.x_min,
            q[1] / OUT_EXTENT * self.height() + self.y_min,
            q[2] / self.z_scale(),
        ]
    }
}

/// Target-derived framing proportions (all distances in 256-crop pixels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionProfile {
    /// Median horizontal shoulder distance.
    pub h_m: f64,
    /// Median vertical distance from mid-shoulders to mid-hips.
    pub v_m: f64,
    pub x_pct: f64,
    pub y_pct: f64,
    /// Median root height as a fraction of the crop height; used to anchor
    /// the source box vertically.
    pub root_rel_y: f64,
}

struct TorsoMeasure {
    shoulder_dx: f64,
    torso_dy: f64,
    root: Landmark,
}

fn measure(frame: &PoseFrame, to_px: impl Fn(Landmark) -> Landmark) -> Option<TorsoMeasure> {
    if !frame.is_available(Part::Torso) {
        return None;
    }
    let layout = crate::landmarks::JointLayout;
    let (ls, rs) = layout.shoulders();
    let (lh, rh) = layout.hips();
    let [ls, rs, lh, rh] = [ls, rs, lh, rh].map(|i| to_px(frame.landmark(i)));
    let root = midpoint(ls, rs);
    let hips = midpoint(lh, rh);
    Some(TorsoMeasure {
        shoulder_dx: (ls[0] - rs[0]).abs(),
        torso_dy: (root[1] - hips[1]).abs(),
        root,
    })
}

fn medians(measures: &[TorsoMeasure]) -> Result<(f64, f64, Landmark), CropError> {
    let dx: Vec<f64> = measures.iter().map(|m| m.shoulder_dx).collect();
    let dy: Vec<f64> = measures.iter().map(|m| m.torso_dy).collect();
    let roots: Vec<Landmark> = measures.iter().map(|m| m.root).collect();
    match (lower_median(&dx), lower_median(&dy), lower_median3(&roots)) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(CropError::EmptySequence),
    }
}

/// Envelope of every available landmark's pixel x/y over all frames.
pub fn target_crop(seq: &PoseSequence) -> Result<CropSpec, CropError> {
    let mut bounds = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for frame in seq.frames() {
        for part in Part::ALL.into_iter().filter(|&p| frame.is_available(p)) {
            for &l in frame.part(part) {
                let p = seq.to_pixels(l);
                bounds[0] = bounds[0].min(p[0]);
                bounds[1] = bounds[1].min(p[1]);
                bounds[2] = bounds[2].max(p[0]);
                bounds[3] = bounds[3].max(p[1]);
            }
        }
    }
    if !bounds[0].is_finite() {
        return Err(CropError::EmptySequence);
    }
    CropSpec::from_box(bounds[0], bounds[1], bounds[2], bounds[3], (seq.width, seq.height))
}

/// Median shoulder width and torso height of the target after remapping into
/// its 256-crop. `target` is the uncropped sequence.
pub fn proportion_profile(target: &PoseSequence, crop: &CropSpec) -> Result<ProportionProfile, CropError> {
    let measures: Vec<TorsoMeasure> = target
        .frames()
        .iter()
        .filter_map(|f| measure(f, |l| crop.remap(target.to_pixels(l))))
        .collect();
    let (h_m, v_m, root) = medians(&measures)?;
    if h_m <= 1.0 {
        return Err(CropError::DegenerateShoulders(h_m));
    }
    if v_m <= 1.0 {
        return Err(CropError::DegenerateTorso(v_m));
    }
    Ok(ProportionProfile {
        h_m,
        v_m,
        x_pct: h_m / OUT_EXTENT,
        y_pct: v_m / OUT_EXTENT,
        root_rel_y: root[1] / OUT_EXTENT,
    })
}

/// Fixed box for the source such that its median shoulder width (measured in
/// original pixels) is the same fraction `x_pct` of the box width, and
/// likewise for torso height. Centered horizontally on the source's median
/// root; vertically placed so the root sits at the target's relative height.
pub fn source_crop(source: &PoseSequence, profile: &ProportionProfile) -> Result<CropSpec, CropError> {
    let measures: Vec<TorsoMeasure> = source
        .frames()
        .iter()
        .filter_map(|f| measure(f, |l| source.to_pixels(l)))
        .collect();
    let (dx, dy, root) = medians(&measures)?;
    if dx <= 1.0 {
        return Err(CropError::DegenerateShoulders(dx));
    }
    if dy <= 1.0 {
        return Err(CropError::DegenerateTorso(dy));
    }
    let width = dx / profile.x_pct;
    let height = dy / profile.y_pct;
    let x_min = root[0] - 0.5 * width;
    let y_min = root[1] - profile.root_rel_y * height;
    let spec = CropSpec::from_box(x_min, y_min, x_min + width, y_min + height, (source.width, source.height))?;
    if spec.exceeds_frame {
        log::warn!(
            "source crop box ({:.1}, {:.1})-({:.1}, {:.1}) exceeds the {}x{} frame",
            spec.x_min,
            spec.y_min,
            spec.x_max,
            spec.y_max,
            source.width,
            source.height
        );
    }
    Ok(spec)
}

/// Remaps every landmark into the 256-crop. The result is a 256×256
/// sequence, so its normalized coordinates are crop pixels / 256.
pub fn apply_crop(seq: &PoseSequence, crop: &CropSpec) -> PoseSequence {
    let out_size = crop.out_size;
    let out = out_size as f64;
    let frames = seq
        .frames()
        .iter()
        .map(|frame| {
            let mut f = frame.clone();
            for part in Part::ALL.into_iter().filter(|&p| frame.is_available(p)) {
                let pts: Vec<Landmark> = frame
                    .part(part)
                    .iter()
                    .map(|&l| crop.remap(seq.to_pixels(l)).map(|v| v / out))
                    .collect();
                f.set_part(part, &pts, frame.status(part));
            }
            f
        })
        .collect();
    PoseSequence::new(frames, out_size, out_size, seq.fps).expect("frame order and fps already validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::layout::{torso, TOTAL_JOINTS};

    /// Frame with every landmark at `fill` (pixels), shoulders/hips set explicitly.
    fn frame(index: u64, w: f64, h: f64, fill: [f64; 2], shoulders: [[f64; 2]; 2], hips: [[f64; 2]; 2]) -> PoseFrame {
        let mut pts = vec![[fill[0] / w, fill[1] / h, 0.0]; TOTAL_JOINTS];
        pts[torso::LEFT_SHOULDER] = [shoulders[0][0] / w, shoulders[0][1] / h, 0.0];
        pts[torso::RIGHT_SHOULDER] = [shoulders[1][0] / w, shoulders[1][1] / h, 0.0];
        pts[torso::LEFT_HIP] = [hips[0][0] / w, hips[0][1] / h, 0.0];
        pts[torso::RIGHT_HIP] = [hips[1][0] / w, hips[1][1] / h, 0.0];
        PoseFrame::new(index, pts)
    }

    fn seq(frames: Vec<PoseFrame>, w: u32, h: u32) -> PoseSequence {
        PoseSequence::new(frames, w, h, 30.0).unwrap()
    }

    #[test]
    fn single_frame_envelope() {
        let f = frame(0, 640.0, 480.0, [200.0, 200.0], [[100.0, 50.0], [300.0, 60.0]], [[150.0, 400.0], [250.0, 390.0]]);
        let c = target_crop(&seq(vec![f], 640, 480)).unwrap();
        assert_eq!((c.x_min, c.y_min, c.x_max, c.y_max), (100.0, 50.0, 300.0, 400.0));
    }

    #[test]
    fn second_frame_extends_envelope() {
        let a = frame(0, 640.0, 480.0, [200.0, 200.0], [[100.0, 50.0], [300.0, 60.0]], [[150.0, 400.0], [250.0, 390.0]]);
        let b = frame(1, 640.0, 480.0, [200.0, 200.0], [[100.0, 50.0], [350.0, 60.0]], [[150.0, 400.0], [250.0, 390.0]]);
        let c = target_crop(&seq(vec![a, b], 640, 480)).unwrap();
        assert_eq!(c.x_max, 350.0);
    }

    #[test]
    fn missing_frame_ignored_in_envelope() {
        let a = frame(0, 640.0, 480.0, [200.0, 200.0], [[100.0, 50.0], [300.0, 60.0]], [[150.0, 400.0], [250.0, 390.0]]);
        let mut b = frame(1, 640.0, 480.0, [600.0, 470.0], [[10.0, 5.0], [630.0, 6.0]], [[0.0, 479.0], [639.0, 479.0]]);
        for p in Part::ALL {
            b.mark_missing(p);
        }
        let c = target_crop(&seq(vec![a, b], 640, 480)).unwrap();
        assert_eq!((c.x_min, c.y_min, c.x_max, c.y_max), (100.0, 50.0, 300.0, 400.0));
    }

    #[test]
    fn empty_sequence() {
        assert_eq!(target_crop(&seq(vec![], 10, 10)), Err(CropError::EmptySequence));
    }

    #[test]
    fn remap_corners_and_center() {
        let c = CropSpec::from_box(100.0, 50.0, 300.0, 400.0, (640, 480)).unwrap();
        assert_eq!(c.remap([100.0, 50.0, 0.0]), [0.0, 0.0, 0.0]);
        assert_eq!(c.remap([300.0, 400.0, 0.0]), [255.0, 255.0, 0.0]);
        assert_eq!(c.remap([200.0, 225.0, 0.0])[..2], [127.5, 127.5]);
        let p = [123.4, 321.0, -17.0];
        let back = c.unmap(c.remap(p));
        for k in 0..3 {
            assert!((back[k] - p[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn full_square_frame_is_pure_rescale() {
        let c = CropSpec::from_box(0.0, 0.0, 512.0, 512.0, (512, 512)).unwrap();
        assert_eq!(c.remap([512.0, 256.0, 100.0]), [255.0, 127.5, 100.0 * 255.0 / 512.0]);
        assert!(!c.exceeds_frame);
    }

    fn profile_with(h_m: f64) -> ProportionProfile {
        ProportionProfile { h_m, v_m: 100.0, x_pct: h_m / 255.0, y_pct: 100.0 / 255.0, root_rel_y: 0.25 }
    }

    #[test]
    fn shoulder_medians() {
        let crop = CropSpec::from_box(0.0, 0.0, 255.0, 255.0, (256, 256)).unwrap();
        let frames = [90.0, 110.0, 100.0]
            .iter()
            .enumerate()
            .map(|(i, d)| frame(i as u64, 256.0, 256.0, [128.0; 2], [[128.0 + d / 2.0, 50.0], [128.0 - d / 2.0, 50.0]], [[140.0, 170.0], [116.0, 170.0]]))
            .collect();
        let p = proportion_profile(&seq(frames, 256, 256), &crop).unwrap();
        assert!((p.h_m - 100.0).abs() < 1e-12);
        assert!((p.x_pct - 100.0 / 255.0).abs() < 1e-12);
        assert!((p.v_m - 120.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_shoulders() {
        let crop = CropSpec::from_box(0.0, 0.0, 255.0, 255.0, (256, 256)).unwrap();
        let f = frame(0, 256.0, 256.0, [128.0; 2], [[128.0, 50.0], [128.0, 50.0]], [[140.0, 170.0], [116.0, 170.0]]);
        assert!(matches!(proportion_profile(&seq(vec![f], 256, 256), &crop), Err(CropError::DegenerateShoulders(_))));
    }

    #[test]
    fn source_box_width_from_proportion() {
        // 200 px shoulders at 100/255 of the box: 200 · 255 / 100 = 510
        let f = frame(0, 2000.0, 2000.0, [1000.0; 2], [[1100.0, 500.0], [900.0, 500.0]], [[1050.0, 700.0], [950.0, 700.0]]);
        let c = source_crop(&seq(vec![f], 2000, 2000), &profile_with(100.0)).unwrap();
        assert!((c.width() - 510.0).abs() < 1e-9);
        assert!((c.x_min - (1000.0 - 255.0)).abs() < 1e-9);
        // root at 25% of the box height, box height 200 / (100/255) = 510
        assert!((c.y_min - (500.0 - 0.25 * 510.0)).abs() < 1e-9);
    }

    #[test]
    fn source_box_fixed_point() {
        let f = frame(0, 2000.0, 2000.0, [1000.0; 2], [[1100.0, 500.0], [900.0, 500.0]], [[1050.0, 700.0], [950.0, 700.0]]);
        let c = source_crop(&seq(vec![f], 2000, 2000), &profile_with(200.0)).unwrap();
        assert!((c.width() - 255.0).abs() < 1e-9);
    }

    #[test]
    fn oversized_source_box_is_flagged() {
        let f = frame(0, 300.0, 300.0, [150.0; 2], [[250.0, 100.0], [50.0, 100.0]], [[200.0, 200.0], [100.0, 200.0]]);
        let c = source_crop(&seq(vec![f], 300, 300), &profile_with(20.0)).unwrap();
        assert!(c.exceeds_frame);
    }

    #[test]
    fn z_scaled_by_mean_axis_scale() {
        let f = frame(0, 400.0, 200.0, [100.0; 2], [[110.0, 50.0], [90.0, 50.0]], [[105.0, 90.0], [95.0, 90.0]]);
        let s = seq(vec![f], 400, 200);
        let c = CropSpec::from_box(0.0, 0.0, 400.0, 200.0, (400, 200)).unwrap();
        let mut g = s.frames()[0].clone();
        g.landmarks_mut()[0] = [0.5, 0.5, 0.1];
        let out = apply_crop(&PoseSequence::new(vec![g], 400, 200, 30.0).unwrap(), &c);
        let z_px = out.to_pixels(out.frames()[0].landmark(0))[2];
        let expected = 0.1 * 400.0 * 0.5 * (255.0 / 400.0 + 255.0 / 200.0);
        assert!((z_px - expected).abs() < 1e-9);
    }
}
