use image::{Rgb as Pixel, RgbImage};

use super::scheme::{ColorScheme, Rgb};
use super::{ConditioningError, RenderParams, CANVAS};
use crate::landmarks::{JointLayout, Landmark, Part, PoseFrame};

/// Fills every pixel whose center lies within `radius` of `(x, y)`.
pub fn fill_disk(img: &mut RgbImage, x: f64, y: f64, radius: f64, color: Rgb) {
    if !(x.is_finite() && y.is_finite()) {
        return;
    }
    let (w, h) = (img.width() as i64, img.height() as i64);
    let r2 = radius * radius;
    let x0 = (x - radius).floor().max(0.0) as i64;
    let y0 = (y - radius).floor().max(0.0) as i64;
    let x1 = ((x + radius).ceil() as i64).min(w - 1);
    let y1 = ((y + radius).ceil() as i64).min(h - 1);
    for j in y0..=y1 {
        for i in x0..=x1 {
            let (dx, dy) = (i as f64 - x, j as f64 - y);
            if dx * dx + dy * dy <= r2 {
                img.put_pixel(i as u32, j as u32, Pixel(color));
            }
        }
    }
}

/// Integer Bresenham segment, stamped with a `width`×`width` square.
pub fn draw_line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), width: u32, color: Rgb) {
    if ![a.0, a.1, b.0, b.1].iter().all(|v| v.is_finite()) {
        return;
    }
    let (mut x, mut y) = (a.0.round() as i64, a.1.round() as i64);
    let (x1, y1) = (b.0.round() as i64, b.1.round() as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let (sx, sy) = (if x < x1 { 1 } else { -1 }, if y < y1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        stamp(img, x, y, width, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn stamp(img: &mut RgbImage, x: i64, y: i64, width: u32, color: Rgb) {
    let lo = (width.max(1) as i64 - 1) / 2;
    let hi = width.max(1) as i64 - 1 - lo;
    for j in y - lo..=y + hi {
        for i in x - lo..=x + hi {
            if i >= 0 && j >= 0 && i < img.width() as i64 && j < img.height() as i64 {
                img.put_pixel(i as u32, j as u32, Pixel(color));
            }
        }
    }
}

fn canvas_point(l: Landmark) -> (f64, f64) {
    (l[0] * CANVAS as f64, l[1] * CANVAS as f64)
}

fn check_parts(frame: &PoseFrame, parts: &[Part], strict: bool) -> Result<(), ConditioningError> {
    match parts.iter().find(|&&p| !frame.is_available(p)) {
        Some(&p) if strict => Err(ConditioningError::MissingLandmarks(p)),
        _ => Ok(()),
    }
}

/// Color-coded body representation of one 256×256 frame.
///
/// Bones are drawn as disks at the interpolated points first; joints go on
/// top in the order torso, face, left hand, right hand.
pub fn rasterize_ccbr(frame: &PoseFrame, scheme: &ColorScheme, params: &RenderParams) -> Result<RgbImage, ConditioningError> {
    let layout = JointLayout;
    check_parts(frame, &Part::ALL, params.strict)?;
    let mut img = RgbImage::new(CANVAS, CANVAS);
    let available = |i: usize| layout.part_of(i).is_some_and(|p| frame.is_available(p));

    for bone in &scheme.bones {
        if !(available(bone.from) && available(bone.to)) {
            continue;
        }
        let (a, b) = (canvas_point(frame.landmark(bone.from)), canvas_point(frame.landmark(bone.to)));
        let m = bone.colors.len();
        for (k, &color) in bone.colors.iter().enumerate() {
            let t = (k + 1) as f64 / (m + 1) as f64;
            fill_disk(&mut img, a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1), params.joint_radius, color);
        }
    }

    for part in Part::ALL {
        if !frame.is_available(part) {
            continue;
        }
        let radius = if part == Part::Face { params.face_radius } else { params.joint_radius };
        for i in layout.range(part) {
            let (x, y) = canvas_point(frame.landmark(i));
            fill_disk(&mut img, x, y, radius, scheme.joint_colors[i]);
        }
    }
    Ok(img)
}

/// Eye contours as closed white polylines plus the two pupils.
pub fn rasterize_gaze(frame: &PoseFrame, params: &RenderParams) -> Result<RgbImage, ConditioningError> {
    let layout = JointLayout;
    check_parts(frame, &[Part::Face], params.strict)?;
    let mut img = RgbImage::new(CANVAS, CANVAS);
    if !frame.is_available(Part::Face) {
        return Ok(img);
    }
    let contours: [Vec<usize>; 2] = [layout.left_eye_contour().collect(), layout.right_eye_contour().collect()];
    for contour in &contours {
        for (k, &i) in contour.iter().enumerate() {
            let j = contour[(k + 1) % contour.len()];
            let (a, b) = (canvas_point(frame.landmark(i)), canvas_point(frame.landmark(j)));
            draw_line(&mut img, a, b, params.line_width, [255, 255, 255]);
        }
    }
    let (left, right) = layout.pupils();
    for (idx, color) in [(left, params.left_pupil), (right, params.right_pupil)] {
        let (x, y) = canvas_point(frame.landmark(idx));
        fill_disk(&mut img, x, y, params.pupil_radius, color);
    }
    Ok(img)
}
