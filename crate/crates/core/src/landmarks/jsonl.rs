//! JSON Lines interchange: one frame per line,
//! `{"frame","w","h","fps"(first line),"torso","face","lhand","rhand"}` with
//! `null` marking an undetected part.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::frame::{Landmark, PartStatus, PoseFrame, PoseSequence};
use super::layout::Part;
use super::LandmarkError;

#[derive(Deserialize)]
struct RecordIn {
    frame: u64,
    w: u32,
    h: u32,
    #[serde(default)]
    fps: Option<f64>,
    #[serde(default)]
    torso: Option<Vec<[Option<f64>; 3]>>,
    #[serde(default)]
    face: Option<Vec<[Option<f64>; 3]>>,
    #[serde(default)]
    lhand: Option<Vec<[Option<f64>; 3]>>,
    #[serde(default)]
    rhand: Option<Vec<[Option<f64>; 3]>>,
}

impl RecordIn {
    fn part(&self, part: Part) -> Option<&Vec<[Option<f64>; 3]>> {
        match part {
            Part::Torso => self.torso.as_ref(),
            Part::Face => self.face.as_ref(),
            Part::LeftHand => self.lhand.as_ref(),
            Part::RightHand => self.rhand.as_ref(),
        }
    }
}

#[derive(Serialize)]
struct RecordOut<'a> {
    frame: u64,
    w: u32,
    h: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    fps: Option<f64>,
    torso: Option<&'a [Landmark]>,
    face: Option<&'a [Landmark]>,
    lhand: Option<&'a [Landmark]>,
    rhand: Option<&'a [Landmark]>,
}

/// Python's `json` module writes bare `NaN`/`Infinity` tokens. They are
/// rewritten to `null` (outside string literals) so the part can be flagged
/// missing instead of rejecting the whole line.
fn neutralize_non_finite(line: &str) -> std::borrow::Cow<'_, str> {
    if !line.contains("NaN") && !line.contains("Infinity") {
        return line.into();
    }
    let mut out = String::with_capacity(line.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        let token = ["-Infinity", "Infinity", "NaN"].into_iter().find(|t| rest.starts_with(t));
        match token {
            Some(t) => {
                out.push_str("null");
                rest = &rest[t.len()..];
            }
            None => {
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    out.into()
}

pub fn parse_sequence(bytes: &[u8]) -> Result<PoseSequence, LandmarkError> {
    let text = std::str::from_utf8(bytes).map_err(|e| LandmarkError::MalformedRecord {
        line: 0,
        reason: format!("input is not UTF-8: {e}"),
    })?;
    let mut frames = Vec::new();
    let mut header: Option<(u32, u32, f64)> = None;
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| LandmarkError::MalformedRecord { line: line_no, reason };
        let record: RecordIn =
            serde_json::from_str(&neutralize_non_finite(raw)).map_err(|e| malformed(e.to_string()))?;
        match header {
            None => {
                let fps = record
                    .fps
                    .ok_or_else(|| malformed("first record must carry \"fps\"".into()))?;
                header = Some((record.w, record.h, fps));
            }
            Some((w, h, _)) if (w, h) != (record.w, record.h) => {
                return Err(malformed(format!(
                    "frame size {}x{} differs from first record's {w}x{h}",
                    record.w, record.h
                )));
            }
            Some(_) => {}
        }

        let mut frame = PoseFrame::empty(record.frame);
        for part in Part::ALL {
            let Some(points) = record.part(part) else { continue };
            if points.len() != part.len() {
                return Err(LandmarkError::LayoutMismatch {
                    line: line_no,
                    part,
                    expected: part.len(),
                    found: points.len(),
                });
            }
            let finite: Option<Vec<Landmark>> = points
                .iter()
                .map(|p| match p {
                    [Some(x), Some(y), Some(z)] if x.is_finite() && y.is_finite() && z.is_finite() => {
                        Some([*x, *y, *z])
                    }
                    _ => None,
                })
                .collect();
            match finite {
                Some(pts) => frame.set_part(part, &pts, PartStatus::Detected),
                None => log::debug!("line {line_no}: non-finite {part} coordinates, part marked missing"),
            }
        }
        frames.push(frame);
    }
    let (w, h, fps) = header.ok_or(LandmarkError::EmptySequence)?;
    PoseSequence::new(frames, w, h, fps)
}

/// Writes the sequence as JSON Lines. Coordinates use the shortest decimal
/// form that round-trips to the same `f64`. Filled parts are written as data;
/// the detected/filled distinction is not part of the file format.
pub fn write_sequence<W: Write>(seq: &PoseSequence, mut out: W) -> std::io::Result<()> {
    for (i, frame) in seq.frames().iter().enumerate() {
        let part = |p: Part| frame.is_available(p).then(|| frame.part(p));
        let record = RecordOut {
            frame: frame.frame_index,
            w: seq.width,
            h: seq.height,
            fps: (i == 0).then_some(seq.fps),
            torso: part(Part::Torso),
            face: part(Part::Face),
            lhand: part(Part::LeftHand),
            rhand: part(Part::RightHand),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn serialize_sequence(seq: &PoseSequence) -> Vec<u8> {
    let mut buf = Vec::new();
    write_sequence(seq, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::layout::TOTAL_JOINTS;

    fn part_json(n: usize, v: &str) -> String {
        let triple = format!("[{v},{v},{v}]");
        format!("[{}]", vec![triple; n].join(","))
    }

    fn record(frame: u64, fps: bool, hand_len: usize, face_value: &str) -> String {
        format!(
            "{{\"frame\":{frame},\"w\":640,\"h\":480,{}\"torso\":{},\"face\":{},\"lhand\":{},\"rhand\":{}}}",
            if fps { "\"fps\":25.0," } else { "" },
            part_json(9, "0.5"),
            part_json(478, face_value),
            part_json(hand_len, "0.25"),
            part_json(21, "0.75"),
        )
    }

    #[test]
    fn single_valid_record() {
        let seq = parse_sequence(record(0, true, 21, "0.1").as_bytes()).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!((seq.width, seq.height, seq.fps), (640, 480, 25.0));
        let f = &seq.frames()[0];
        assert!(Part::ALL.iter().all(|&p| f.status(p) == PartStatus::Detected));
        assert_eq!(f.landmarks().len(), TOTAL_JOINTS);
    }

    #[test]
    fn short_hand_is_layout_mismatch() {
        let text = format!("{}\n{}\n", record(0, true, 21, "0.1"), record(1, false, 20, "0.1"));
        match parse_sequence(text.as_bytes()) {
            Err(LandmarkError::LayoutMismatch { line, part, found, .. }) => {
                assert_eq!((line, part, found), (2, Part::LeftHand, 20));
            }
            other => panic!("expected LayoutMismatch, got {other:?}"),
        }
    }

    #[test]
    fn nan_face_flags_part_missing() {
        let seq = parse_sequence(record(0, true, 21, "NaN").as_bytes()).unwrap();
        let f = &seq.frames()[0];
        assert_eq!(f.status(Part::Face), PartStatus::Missing);
        assert_eq!(f.status(Part::Torso), PartStatus::Detected);
        assert!(f.part(Part::Face).iter().all(|l| l[0].is_nan()));
    }

    #[test]
    fn bad_json_reports_line() {
        let text = format!("{}\n{{\"frame\": oops}}\n", record(0, true, 21, "0.1"));
        assert!(matches!(
            parse_sequence(text.as_bytes()),
            Err(LandmarkError::MalformedRecord { line: 2, .. })
        ));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_sequence(b""), Err(LandmarkError::EmptySequence)));
        assert!(matches!(parse_sequence(b"\n\n"), Err(LandmarkError::EmptySequence)));
    }

    #[test]
    fn missing_fps_on_first_line() {
        assert!(matches!(
            parse_sequence(record(0, false, 21, "0.1").as_bytes()),
            Err(LandmarkError::MalformedRecord { line: 1, .. })
        ));
    }

    #[test]
    fn non_finite_tokens_inside_strings_untouched() {
        assert_eq!(neutralize_non_finite(r#"{"a":"NaN","b":NaN,"c":-Infinity}"#), r#"{"a":"NaN","b":null,"c":null}"#);
    }

    #[test]
    fn null_part_round_trips_as_missing() {
        let mut f = PoseFrame::new(4, vec![[0.125, 0.5, -0.03125]; TOTAL_JOINTS]);
        f.mark_missing(Part::RightHand);
        let seq = PoseSequence::new(vec![f], 320, 240, 30.0).unwrap();
        let bytes = serialize_sequence(&seq);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("\"rhand\":null"));
        assert!(text.ends_with('\n'));
        assert_eq!(parse_sequence(&bytes).unwrap(), seq);
    }
}
