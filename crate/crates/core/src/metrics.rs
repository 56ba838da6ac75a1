//! Average pixel distance between videos and the skeleton cycle error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{Part, PoseSequence};
use crate::stats::CompensatedSum;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("video has no frames")]
    EmptyVideo,
    #[error("frame {frame} is {found:?}, expected {expected:?}")]
    DimensionMismatch {
        frame: usize,
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sequences differ in frame size: {0:?} vs {1:?}")]
    SizeMismatch((u32, u32), (u32, u32)),
    #[error("no joint is available in both sequences")]
    NoCommonJoints,
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered RGB frames of one size.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFrames(Vec<RgbImage>);

impl VideoFrames {
    pub fn new(frames: Vec<RgbImage>) -> Result<Self, MetricsError> {
        let first = frames.first().ok_or(MetricsError::EmptyVideo)?.dimensions();
        if let Some((frame, img)) = frames.iter().enumerate().find(|(_, f)| f.dimensions() != first) {
            return Err(MetricsError::DimensionMismatch {
                frame,
                expected: first,
                found: img.dimensions(),
            });
        }
        Ok(Self(frames))
    }

    /// Loads every `.png` in `dir`, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Self, MetricsError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        paths.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")));
        paths.sort();
        let frames = paths
            .into_iter()
            .map(|p| match image::open(&p) {
                Ok(img) => Ok(img.to_rgb8()),
                Err(source) => Err(MetricsError::Image { path: p, source }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(frames)
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.0[0].dimensions()
    }
}

/// Per-pixel distances averaged over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    #[default]
    Gray,
    Viridis,
}

/// Largest possible RGB distance between two 8-bit pixels.
pub const MAX_PIXEL_DISTANCE: f64 = 441.672_955_930_063_7; // 255·√3

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

impl Heatmap {
    pub fn render(&self, colormap: Colormap) -> RgbImage {
        let mut img = RgbImage::new(self.width, self.height);
        for (px, &v) in img.pixels_mut().zip(&self.values) {
            let t = (v / MAX_PIXEL_DISTANCE).clamp(0.0, 1.0);
            px.0 = match colormap {
                Colormap::Gray => [(t * 255.0).round() as u8; 3],
                Colormap::Viridis => {
                    let pos = t * (VIRIDIS.len() - 1) as f64;
                    let k = (pos.floor() as usize).min(VIRIDIS.len() - 2);
                    let f = pos - k as f64;
                    std::array::from_fn(|c| ((1.0 - f) * VIRIDIS[k][c] + f * VIRIDIS[k + 1][c]).round() as u8)
                }
            };
        }
        img
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApdReport {
    pub apd: f64,
    pub per_frame: Vec<f64>,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    #[serde(skip)]
    pub heatmap: Heatmap,
}

impl ApdReport {
    /// `frame,apd` rows.
    pub fn write_curve(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "frame,apd")?;
        for (t, v) in self.per_frame.iter().enumerate() {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

fn pixel_distance(a: [u8; 3], b: [u8; 3]) -> f64 {
    a.iter()
        .zip(&b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Average pixel distance with per-frame curve and time-averaged heatmap.
pub fn apd(a: &VideoFrames, b: &VideoFrames) -> Result<ApdReport, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.dimensions() != b.dimensions() {
        return Err(MetricsError::SizeMismatch(a.dimensions(), b.dimensions()));
    }
    let (width, height) = a.dimensions();
    let pixels = (width * height) as usize;

    let distances: Vec<Vec<f64>> = a
        .frames()
        .par_iter()
        .zip(b.frames())
        .map(|(fa, fb)| fa.pixels().zip(fb.pixels()).map(|(p, q)| pixel_distance(p.0, q.0)).collect())
        .collect();

    let frame_sums: Vec<CompensatedSum> = distances.iter().map(|d| d.iter().copied().collect()).collect();
    let per_frame = frame_sums.iter().map(|s| s.total() / pixels as f64).collect();
    let mut total = CompensatedSum::default();
    for s in &frame_sums {
        total.merge(*s);
    }

    let t = a.len() as f64;
    let values = (0..pixels)
        .map(|p| distances.iter().map(|d| d[p]).collect::<CompensatedSum>().total() / t)
        .collect();

    Ok(ApdReport {
        apd: total.total() / (pixels as f64 * t),
        per_frame,
        frames: a.len(),
        width,
        height,
        heatmap: Heatmap { width, height, values },
    })
}

/// Mean per-joint Euclidean distance over joints available in both
/// sequences, in pixels of the (shared) frame size.
pub fn skeleton_cycle_error(original: &PoseSequence, cycled: &PoseSequence) -> Result<f64, MetricsError> {
    if original.len() != cycled.len() {
        return Err(MetricsError::LengthMismatch(original.len(), cycled.len()));
    }
    let (sa, sb) = ((original.width, original.height), (cycled.width, cycled.height));
    if sa != sb {
        return Err(MetricsError::SizeMismatch(sa, sb));
    }
    let layout = original.layout();
    let mut sum = CompensatedSum::default();
    let mut count = 0usize;
    for (fa, fb) in original.frames().iter().zip(cycled.frames()) {
        for part in Part::ALL {
            if !(fa.is_available(part) && fb.is_available(part)) {
                continue;
            }
            for i in layout.range(part) {
                let (p, q) = (original.to_pixels(fa.landmark(i)), cycled.to_pixels(fb.landmark(i)));
                sum.add(p.iter().zip(&q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(MetricsError::NoCommonJoints);
    }
    Ok(sum.total() / count as f64)
}
