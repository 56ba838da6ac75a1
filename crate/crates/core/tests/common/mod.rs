#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;
use reenact_core::conditioning::{
    build_color_scheme, compose_conditioning, encode_png, median_pose, PartBlue, RenderParams,
};
use reenact_core::crop::{apply_crop, target_crop};
use reenact_core::pipeline::artifacts::read_sequence;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Frames of the cropped target fixture that the goldens cover; frame 12
/// has no face.
pub const GOLDEN_FRAMES: [usize; 3] = [0, 12, 29];

/// `(file name, image)` for every golden render.
pub fn golden_renders() -> Vec<(String, RgbImage)> {
    let target = read_sequence(&fixture("target.jsonl")).expect("fixture parses");
    let cropped = apply_crop(&target, &target_crop(&target).expect("fixture crops"));
    let scheme = build_color_scheme(&median_pose(&cropped).unwrap(), PartBlue::default(), 4).unwrap();
    let mut out = Vec::new();
    for i in GOLDEN_FRAMES {
        let f = compose_conditioning(&cropped.frames()[i], &scheme, &RenderParams::default()).unwrap();
        out.push((format!("ccbr_{i:06}.png"), f.ccbr));
        out.push((format!("gaze_{i:06}.png"), f.gaze));
    }
    out
}

/// Compares renders with the committed PNGs, or rewrites them when
/// `UPDATE_GOLDENS` is set. Returns the names that differ.
pub fn check_goldens() -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDENS").is_some();
    let mut mismatched = Vec::new();
    for (name, img) in golden_renders() {
        let path = golden_dir().join(&name);
        let bytes = encode_png(&img).unwrap();
        if update {
            fs::write(&path, &bytes).unwrap();
        } else if fs::read(&path).ok().as_deref() != Some(bytes.as_slice()) {
            mismatched.push(name);
        }
    }
    mismatched
}
