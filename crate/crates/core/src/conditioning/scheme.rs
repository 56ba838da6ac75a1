use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ConditioningError;
use crate::crop::OUT_EXTENT;
use crate::landmarks::layout::{HAND_BONES, TORSO_BONES};
use crate::landmarks::{JointLayout, Landmark, Part, PoseFrame};

pub type Rgb = [u8; 3];

/// Blue value per body part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartBlue {
    pub torso: u8,
    pub left_hand: u8,
    pub right_hand: u8,
    pub head: u8,
}

impl Default for PartBlue {
    fn default() -> Self {
        Self {
            torso: 64,
            left_hand: 128,
            right_hand: 192,
            head: 255,
        }
    }
}

impl PartBlue {
    pub fn for_part(&self, part: Part) -> u8 {
        match part {
            Part::Torso => self.torso,
            Part::Face => self.head,
            Part::LeftHand => self.left_hand,
            Part::RightHand => self.right_hand,
        }
    }

    pub fn values(&self) -> [u8; 4] {
        [self.torso, self.left_hand, self.right_hand, self.head]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bone {
    pub from: usize,
    pub to: usize,
    /// Colors of the interpolated points, from `from` toward `to`.
    pub colors: Vec<Rgb>,
}

/// Fixed per-joint colors: red and green from a template body's normalized
/// x/y, blue from the joint's part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorScheme {
    pub joint_colors: Vec<Rgb>,
    pub part_blue: PartBlue,
    pub interp_points: usize,
    pub bones: Vec<Bone>,
    /// Template pose the colors were derived from, 256-crop pixels.
    pub template: Vec<Landmark>,
}

/// Round half away from zero and clamp into a byte.
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Color of interpolated point `k` (1-based) of `m` on a bone.
pub fn interpolate_color(a: Rgb, b: Rgb, k: usize, m: usize) -> Rgb {
    let t = k as f64 / (m + 1) as f64;
    std::array::from_fn(|c| quantize((1.0 - t) * a[c] as f64 + t * b[c] as f64))
}

/// Torso skeleton edges and both hands' topology, as global joint indices.
pub fn default_bones() -> Vec<(usize, usize)> {
    let layout = JointLayout;
    let mut bones: Vec<(usize, usize)> = TORSO_BONES.iter().map(|&(a, b)| (layout.torso(a), layout.torso(b))).collect();
    bones.extend(HAND_BONES.iter().map(|&(a, b)| (layout.left_hand(a), layout.left_hand(b))));
    bones.extend(HAND_BONES.iter().map(|&(a, b)| (layout.right_hand(a), layout.right_hand(b))));
    bones
}

/// Builds the scheme from a template pose stored in a 256×256 sequence
/// (normalized coordinates are crop pixels / 256). Colliding colors within a
/// part are nudged by +1 in red (then green), in joint-index order.
pub fn build_color_scheme(template: &PoseFrame, blue: PartBlue, interp_points: usize) -> Result<ColorScheme, ConditioningError> {
    let layout = JointLayout;
    if let Some(&part) = Part::ALL.iter().find(|&&p| !template.is_available(p)) {
        return Err(ConditioningError::MissingLandmarks(part));
    }
    let px: Vec<Landmark> = template.landmarks().iter().map(|l| l.map(|v| v * super::CANVAS as f64)).collect();

    let mut used = HashSet::new();
    let mut joint_colors = Vec::with_capacity(px.len());
    for (i, p) in px.iter().enumerate() {
        let part = layout.part_of(i).expect("index within layout");
        let norm = |v: f64| (v / OUT_EXTENT).clamp(0.0, 1.0);
        let base: Rgb = [quantize(norm(p[0]) * 255.0), quantize(norm(p[1]) * 255.0), blue.for_part(part)];
        let mut c = base;
        while !used.insert(c) {
            c[0] = c[0].wrapping_add(1);
            if c[0] == base[0] {
                c[1] = c[1].wrapping_add(1);
            }
        }
        joint_colors.push(c);
    }

    let bones = default_bones()
        .into_iter()
        .map(|(from, to)| Bone {
            from,
            to,
            colors: (1..=interp_points)
                .map(|k| interpolate_color(joint_colors[from], joint_colors[to], k, interp_points))
                .collect(),
        })
        .collect();

    Ok(ColorScheme {
        joint_colors,
        part_blue: blue,
        interp_points,
        bones,
        template: px,
    })
}
