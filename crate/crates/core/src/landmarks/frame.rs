use serde::{Deserialize, Serialize};

use super::layout::{JointLayout, Part, TOTAL_JOINTS};
use super::LandmarkError;

/// Coordinate value held by every slot of a missing part.
pub const MISSING: f64 = f64::NAN;

pub type Landmark = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartStatus {
    Detected,
    /// Copied from another frame (tracker dropout or degenerate alignment).
    Filled,
    Missing,
}

impl PartStatus {
    pub fn is_available(self) -> bool {
        self != PartStatus::Missing
    }
}

/// One frame of 529 landmarks with per-part validity.
#[derive(Debug, Clone)]
pub struct PoseFrame {
    pub frame_index: u64,
    landmarks: Vec<Landmark>,
    status: [PartStatus; 4],
}

impl PoseFrame {
    /// All parts detected. Panics if `landmarks.len() != 529`.
    pub fn new(frame_index: u64, landmarks: Vec<Landmark>) -> Self {
        assert_eq!(landmarks.len(), TOTAL_JOINTS, "a pose frame holds exactly 529 landmarks");
        Self {
            frame_index,
            landmarks,
            status: [PartStatus::Detected; 4],
        }
    }

    pub fn empty(frame_index: u64) -> Self {
        Self {
            frame_index,
            landmarks: vec![[MISSING; 3]; TOTAL_JOINTS],
            status: [PartStatus::Missing; 4],
        }
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn landmark(&self, index: usize) -> Landmark {
        self.landmarks[index]
    }

    pub fn status(&self, part: Part) -> PartStatus {
        self.status[part.slot()]
    }

    pub fn is_available(&self, part: Part) -> bool {
        self.status(part).is_available()
    }

    pub fn part(&self, part: Part) -> &[Landmark] {
        &self.landmarks[JointLayout.range(part)]
    }

    /// Overwrites a part. `points` must have the part's length.
    pub fn set_part(&mut self, part: Part, points: &[Landmark], status: PartStatus) {
        let range = JointLayout.range(part);
        assert_eq!(points.len(), range.len());
        if status == PartStatus::Missing {
            self.landmarks[range].fill([MISSING; 3]);
        } else {
            self.landmarks[range].copy_from_slice(points);
        }
        self.status[part.slot()] = status;
    }

    pub fn set_status(&mut self, part: Part, status: PartStatus) {
        if status == PartStatus::Missing {
            self.landmarks[JointLayout.range(part)].fill([MISSING; 3]);
        }
        self.status[part.slot()] = status;
    }

    pub fn mark_missing(&mut self, part: Part) {
        self.set_status(part, PartStatus::Missing);
    }

    /// Midpoint of the two shoulders. NaN if the torso is missing.
    pub fn root(&self) -> Landmark {
        let (l, r) = JointLayout.shoulders();
        midpoint(self.landmarks[l], self.landmarks[r])
    }

    /// Landmarks scaled by `(sx, sy, sz)`.
    pub fn scaled(&self, sx: f64, sy: f64, sz: f64) -> PoseFrame {
        let mut out = self.clone();
        for l in &mut out.landmarks {
            *l = [l[0] * sx, l[1] * sy, l[2] * sz];
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn landmarks_mut(&mut self) -> &mut [Landmark] {
        &mut self.landmarks
    }
}

pub fn midpoint(a: Landmark, b: Landmark) -> Landmark {
    [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5, (a[2] + b[2]) * 0.5]
}

impl PartialEq for PoseFrame {
    /// Bitwise on coordinates so the NaN sentinel compares equal to itself.
    fn eq(&self, other: &Self) -> bool {
        self.frame_index == other.frame_index
            && self.status == other.status
            && self
                .landmarks
                .iter()
                .zip(&other.landmarks)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()))
    }
}

/// Ordered frames sharing one frame geometry.
///
/// Coordinates are tracker-normalized: pixel x = x·width, pixel y = y·height,
/// and z lives on the x scale (pixel z = z·width).
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    frames: Vec<PoseFrame>,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
}

impl PoseSequence {
    pub fn new(frames: Vec<PoseFrame>, width: u32, height: u32, fps: f64) -> Result<Self, LandmarkError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(LandmarkError::InvalidHeader(format!("fps must be positive, got {fps}")));
        }
        if width == 0 || height == 0 {
            return Err(LandmarkError::InvalidHeader(format!(
                "frame size must be positive, got {width}x{height}"
            )));
        }
        if let Some(w) = frames.windows(2).find(|w| w[1].frame_index <= w[0].frame_index) {
            return Err(LandmarkError::NonIncreasingFrames {
                previous: w[0].frame_index,
                next: w[1].frame_index,
            });
        }
        Ok(Self {
            frames,
            width,
            height,
            fps,
        })
    }

    pub fn layout(&self) -> JointLayout {
        JointLayout
    }

    pub fn frames(&self) -> &[PoseFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn into_frames(self) -> Vec<PoseFrame> {
        self.frames
    }

    /// Converts one normalized landmark to pixels of this sequence's frame.
    pub fn to_pixels(&self, l: Landmark) -> Landmark {
        let (w, h) = (self.width as f64, self.height as f64);
        [l[0] * w, l[1] * h, l[2] * w]
    }

    pub fn from_pixels(&self, p: Landmark) -> Landmark {
        let (w, h) = (self.width as f64, self.height as f64);
        [p[0] / w, p[1] / h, p[2] / w]
    }

    /// Every landmark of `frame` in pixel units.
    pub fn frame_pixels(&self, frame: &PoseFrame) -> Vec<Landmark> {
        frame.landmarks().iter().map(|&l| self.to_pixels(l)).collect()
    }
}

/// Replaces missing parts with the most recent available value of that part.
/// Leading gaps are back-filled from the first detection.
pub fn fill_missing(seq: &PoseSequence) -> Result<PoseSequence, LandmarkError> {
    let mut frames = seq.frames.clone();
    for part in Part::ALL {
        let first = frames
            .iter()
            .position(|f| f.status(part) == PartStatus::Detected)
            .or_else(|| frames.iter().position(|f| f.is_available(part)))
            .ok_or(LandmarkError::PartNeverDetected(part))?;
        let mut last: Vec<Landmark> = frames[first].part(part).to_vec();
        for frame in frames.iter_mut() {
            if frame.is_available(part) {
                last.copy_from_slice(frame.part(part));
            } else {
                frame.set_part(part, &last, PartStatus::Filled);
            }
        }
    }
    PoseSequence::new(frames, seq.width, seq.height, seq.fps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_with(index: u64, value: f64) -> PoseFrame {
        PoseFrame::new(index, vec![[value, value, value]; TOTAL_JOINTS])
    }

    #[test]
    fn hold_last_value() {
        let mut mid = frame_with(1, 9.0);
        mid.mark_missing(Part::LeftHand);
        let seq = PoseSequence::new(vec![frame_with(0, 1.0), mid, frame_with(2, 2.0)], 10, 10, 30.0).unwrap();
        let filled = fill_missing(&seq).unwrap();
        let f = &filled.frames()[1];
        assert_eq!(f.status(Part::LeftHand), PartStatus::Filled);
        assert!(f.part(Part::LeftHand).iter().all(|l| *l == [1.0; 3]));
        // other parts of the gap frame are untouched
        assert!(f.part(Part::Face).iter().all(|l| *l == [9.0; 3]));
        assert_eq!(filled.frames()[0], seq.frames()[0]);
        assert_eq!(filled.frames()[2], seq.frames()[2]);
    }

    #[test]
    fn leading_gap_back_filled() {
        let mut a = frame_with(0, 0.0);
        a.mark_missing(Part::Face);
        let mut b = frame_with(1, 0.0);
        b.mark_missing(Part::Face);
        let seq = PoseSequence::new(vec![a, b, frame_with(2, 5.0)], 10, 10, 30.0).unwrap();
        let filled = fill_missing(&seq).unwrap();
        for f in &filled.frames()[..2] {
            assert_eq!(f.status(Part::Face), PartStatus::Filled);
            assert!(f.part(Part::Face).iter().all(|l| *l == [5.0; 3]));
        }
    }

    #[test]
    fn never_detected_part() {
        let mut a = frame_with(0, 0.0);
        a.mark_missing(Part::LeftHand);
        let seq = PoseSequence::new(vec![a], 10, 10, 30.0).unwrap();
        assert!(matches!(
            fill_missing(&seq),
            Err(LandmarkError::PartNeverDetected(Part::LeftHand))
        ));
    }

    #[test]
    fn root_is_exact_shoulder_midpoint() {
        let mut f = frame_with(0, 0.0);
        f.landmarks_mut()[1] = [1.0, 2.0, 3.0];
        f.landmarks_mut()[2] = [3.0, 6.0, -1.0];
        assert_eq!(f.root(), [2.0, 4.0, 1.0]);
    }

    #[test]
    fn frame_order_enforced() {
        let err = PoseSequence::new(vec![frame_with(3, 0.0), frame_with(3, 0.0)], 1, 1, 30.0);
        assert!(matches!(err, Err(LandmarkError::NonIncreasingFrames { .. })));
    }
}
