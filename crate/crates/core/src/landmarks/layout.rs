//! Fixed 529-joint upper-body layout: 9 pose joints, a 478-point face mesh
//! (with iris refinement) and two 21-point hands, stored as one flat index.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub const TORSO_JOINTS: usize = 9;
pub const FACE_JOINTS: usize = 478;
pub const HAND_JOINTS: usize = 21;
pub const TOTAL_JOINTS: usize = TORSO_JOINTS + FACE_JOINTS + 2 * HAND_JOINTS;

/// Torso joint slots, in storage order.
pub mod torso {
    pub const NOSE: usize = 0;
    pub const LEFT_SHOULDER: usize = 1;
    pub const RIGHT_SHOULDER: usize = 2;
    pub const LEFT_ELBOW: usize = 3;
    pub const RIGHT_ELBOW: usize = 4;
    pub const LEFT_WRIST: usize = 5;
    pub const RIGHT_WRIST: usize = 6;
    pub const LEFT_HIP: usize = 7;
    pub const RIGHT_HIP: usize = 8;

    /// Pose-tracker (33-point) indices of the nine retained joints.
    pub const POSE_TRACKER_SOURCE: [usize; 9] = [0, 11, 12, 13, 14, 15, 16, 23, 24];
}

/// Face-mesh local indices (0..478).
pub mod face {
    /// Tip of the nose in the face mesh.
    pub const NOSE_TIP: usize = 1;
    pub const RIGHT_IRIS_CENTER: usize = 468;
    pub const LEFT_IRIS_CENTER: usize = 473;

    /// Closed contour of the subject's left eye, in drawing order.
    pub const LEFT_EYE_CONTOUR: [usize; 16] = [
        263, 249, 390, 373, 374, 380, 381, 382, 362, 398, 384, 385, 386, 387, 388, 466,
    ];
    /// Closed contour of the subject's right eye, in drawing order.
    pub const RIGHT_EYE_CONTOUR: [usize; 16] = [
        33, 7, 163, 144, 145, 153, 154, 155, 133, 173, 157, 158, 159, 160, 161, 246,
    ];

    /// Landmarks on the nose bridge, eye corners and temples. These move
    /// least under expression and mouth motion.
    pub const DEFAULT_RIGID: [usize; 12] = [168, 6, 197, 195, 33, 133, 362, 263, 127, 356, 21, 251];
}

/// Standard 21-point hand topology.
pub const HAND_BONES: [(usize, usize); 21] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (0, 5),
    (5, 6),
    (6, 7),
    (7, 8),
    (5, 9),
    (9, 10),
    (10, 11),
    (11, 12),
    (9, 13),
    (13, 14),
    (14, 15),
    (15, 16),
    (13, 17),
    (0, 17),
    (17, 18),
    (18, 19),
    (19, 20),
];

/// Shoulder girdle, both arms and the hip line.
pub const TORSO_BONES: [(usize, usize); 6] = [
    (torso::LEFT_SHOULDER, torso::RIGHT_SHOULDER),
    (torso::LEFT_SHOULDER, torso::LEFT_ELBOW),
    (torso::LEFT_ELBOW, torso::LEFT_WRIST),
    (torso::RIGHT_SHOULDER, torso::RIGHT_ELBOW),
    (torso::RIGHT_ELBOW, torso::RIGHT_WRIST),
    (torso::LEFT_HIP, torso::RIGHT_HIP),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Torso,
    Face,
    LeftHand,
    RightHand,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::Torso, Part::Face, Part::LeftHand, Part::RightHand];

    /// Key used in the JSONL interchange records.
    pub fn key(self) -> &'static str {
        match self {
            Part::Torso => "torso",
            Part::Face => "face",
            Part::LeftHand => "lhand",
            Part::RightHand => "rhand",
        }
    }

    pub fn len(self) -> usize {
        match self {
            Part::Torso => TORSO_JOINTS,
            Part::Face => FACE_JOINTS,
            Part::LeftHand | Part::RightHand => HAND_JOINTS,
        }
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Torso => "torso",
            Part::Face => "face",
            Part::LeftHand => "left_hand",
            Part::RightHand => "right_hand",
        })
    }
}

/// Maps parts onto the flat 0..529 index space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JointLayout;

impl JointLayout {
    pub fn holistic() -> Self {
        JointLayout
    }

    pub fn total(&self) -> usize {
        TOTAL_JOINTS
    }

    pub fn range(&self, part: Part) -> Range<usize> {
        let start = match part {
            Part::Torso => 0,
            Part::Face => TORSO_JOINTS,
            Part::LeftHand => TORSO_JOINTS + FACE_JOINTS,
            Part::RightHand => TORSO_JOINTS + FACE_JOINTS + HAND_JOINTS,
        };
        start..start + part.len()
    }

    pub fn part_of(&self, index: usize) -> Option<Part> {
        Part::ALL.into_iter().find(|&p| self.range(p).contains(&index))
    }

    pub fn torso(&self, joint: usize) -> usize {
        debug_assert!(joint < TORSO_JOINTS);
        joint
    }

    pub fn face(&self, mesh_index: usize) -> usize {
        debug_assert!(mesh_index < FACE_JOINTS);
        TORSO_JOINTS + mesh_index
    }

    pub fn left_hand(&self, joint: usize) -> usize {
        self.range(Part::LeftHand).start + joint
    }

    pub fn right_hand(&self, joint: usize) -> usize {
        self.range(Part::RightHand).start + joint
    }

    pub fn nose(&self) -> usize {
        self.torso(torso::NOSE)
    }

    pub fn shoulders(&self) -> (usize, usize) {
        (torso::LEFT_SHOULDER, torso::RIGHT_SHOULDER)
    }

    pub fn hips(&self) -> (usize, usize) {
        (torso::LEFT_HIP, torso::RIGHT_HIP)
    }

    pub fn face_nose_tip(&self) -> usize {
        self.face(face::NOSE_TIP)
    }

    pub fn left_eye_contour(&self) -> impl Iterator<Item = usize> + '_ {
        face::LEFT_EYE_CONTOUR.iter().map(|&i| self.face(i))
    }

    pub fn right_eye_contour(&self) -> impl Iterator<Item = usize> + '_ {
        face::RIGHT_EYE_CONTOUR.iter().map(|&i| self.face(i))
    }

    /// (left, right) iris centers.
    pub fn pupils(&self) -> (usize, usize) {
        (self.face(face::LEFT_IRIS_CENTER), self.face(face::RIGHT_IRIS_CENTER))
    }
}
