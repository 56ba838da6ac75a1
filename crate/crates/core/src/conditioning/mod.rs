//! Conditioning images: the color-coded body representation (CCBR) and the
//! gaze map, rendered on a 256×256 canvas.

mod raster;
mod scheme;

pub use raster::{draw_line, fill_disk, rasterize_ccbr, rasterize_gaze};
pub use scheme::{build_color_scheme, default_bones, interpolate_color, quantize, Bone, ColorScheme, PartBlue, Rgb};

use std::io::Write;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{JointLayout, Landmark, Part, PoseFrame, PoseSequence};
use crate::stats::lower_median;

/// Side of the conditioning canvas in pixels.
pub const CANVAS: u32 = 256;

#[derive(Debug, Error)]
pub enum ConditioningError {
    #[error("frame is missing landmarks for {0}")]
    MissingLandmarks(Part),
    #[error("sequence must be {CANVAS}x{CANVAS}, got {0}x{1}")]
    WrongCanvas(u32, u32),
    #[error("no frames to derive a template from")]
    EmptySequence,
    #[error("raw buffer holds {found} bytes, expected {expected}")]
    RawSize { expected: usize, found: usize },
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderParams {
    pub joint_radius: f64,
    pub face_radius: f64,
    pub pupil_radius: f64,
    pub line_width: u32,
    pub left_pupil: Rgb,
    pub right_pupil: Rgb,
    /// Fail on frames with a missing part instead of leaving it out.
    pub strict: bool,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            joint_radius: 2.0,
            face_radius: 1.0,
            pupil_radius: 2.0,
            line_width: 1,
            left_pupil: [255, 0, 0],
            right_pupil: [0, 255, 0],
            strict: false,
        }
    }
}

/// Per-joint lower median over the available frames of a 256×256 sequence.
pub fn median_pose(seq: &PoseSequence) -> Result<PoseFrame, ConditioningError> {
    if seq.is_empty() {
        return Err(ConditioningError::EmptySequence);
    }
    let layout = JointLayout;
    let mut out = PoseFrame::empty(0);
    for part in Part::ALL {
        let frames: Vec<&PoseFrame> = seq.frames().iter().filter(|f| f.is_available(part)).collect();
        if frames.is_empty() {
            return Err(ConditioningError::MissingLandmarks(part));
        }
        let points: Vec<Landmark> = layout
            .range(part)
            .map(|i| {
                std::array::from_fn(|c| {
                    let vals: Vec<f64> = frames.iter().map(|f| f.landmark(i)[c]).collect();
                    lower_median(&vals).unwrap_or(f64::NAN)
                })
            })
            .collect();
        out.set_part(part, &points, crate::landmarks::PartStatus::Detected);
    }
    Ok(out)
}

/// One conditioning frame: CCBR and gaze images.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningFrame {
    pub frame_index: u64,
    pub ccbr: RgbImage,
    pub gaze: RgbImage,
}

pub const RAW_CHANNELS: usize = 6;
pub const RAW_FRAME_BYTES: usize = (CANVAS * CANVAS) as usize * RAW_CHANNELS;

impl ConditioningFrame {
    /// Row-major 256×256×6 buffer: CCBR RGB then gaze RGB per pixel.
    pub fn to_raw(&self) -> Vec<u8> {
        let mut raw = Vec::with_capacity(RAW_FRAME_BYTES);
        for (c, g) in self.ccbr.pixels().zip(self.gaze.pixels()) {
            raw.extend_from_slice(&c.0);
            raw.extend_from_slice(&g.0);
        }
        raw
    }

    pub fn from_raw(frame_index: u64, raw: &[u8]) -> Result<Self, ConditioningError> {
        if raw.len() != RAW_FRAME_BYTES {
            return Err(ConditioningError::RawSize {
                expected: RAW_FRAME_BYTES,
                found: raw.len(),
            });
        }
        let mut ccbr = RgbImage::new(CANVAS, CANVAS);
        let mut gaze = RgbImage::new(CANVAS, CANVAS);
        for ((px, c), g) in raw.chunks_exact(RAW_CHANNELS).zip(ccbr.pixels_mut()).zip(gaze.pixels_mut()) {
            c.0.copy_from_slice(&px[..3]);
            g.0.copy_from_slice(&px[3..]);
        }
        Ok(Self { frame_index, ccbr, gaze })
    }
}

pub fn compose_conditioning(frame: &PoseFrame, scheme: &ColorScheme, params: &RenderParams) -> Result<ConditioningFrame, ConditioningError> {
    Ok(ConditioningFrame {
        frame_index: frame.frame_index,
        ccbr: rasterize_ccbr(frame, scheme, params)?,
        gaze: rasterize_gaze(frame, params)?,
    })
}

/// Renders every frame of a 256×256 sequence in parallel.
pub fn render_sequence(seq: &PoseSequence, scheme: &ColorScheme, params: &RenderParams) -> Result<Vec<ConditioningFrame>, ConditioningError> {
    if (seq.width, seq.height) != (CANVAS, CANVAS) {
        return Err(ConditioningError::WrongCanvas(seq.width, seq.height));
    }
    seq.frames().par_iter().map(|f| compose_conditioning(f, scheme, params)).collect()
}

/// PNG bytes with fixed encoder settings so equal images give equal files.
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>, ConditioningError> {
    let mut buf = Vec::new();
    PngEncoder::new_with_quality(&mut buf, CompressionType::Default, FilterType::Adaptive).write_image(
        img.as_raw(),
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
    )?;
    Ok(buf)
}

pub fn write_png(img: &RgbImage, mut out: impl Write) -> Result<(), ConditioningError> {
    out.write_all(&encode_png(img)?)?;
    Ok(())
}
