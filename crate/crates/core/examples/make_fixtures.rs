//! Regenerates the bundled landmark fixtures.
//!
//! cargo run -p reenact-core --example make_fixtures -- crates/core/tests/fixtures

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reenact_core::landmarks::{serialize_sequence, Part, PoseSequence};
use reenact_core::synth::{signing_sequence, BodyShape};

fn with_dropouts(seq: PoseSequence, drops: &[(usize, Part)]) -> PoseSequence {
    let (w, h, fps) = (seq.width, seq.height, seq.fps);
    let mut frames = seq.into_frames();
    for &(i, part) in drops {
        frames[i].mark_missing(part);
    }
    PoseSequence::new(frames, w, h, fps).expect("indices unchanged")
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/tests/fixtures".into()));
    std::fs::create_dir_all(&dir)?;

    let source_shape = BodyShape::default();
    let source = signing_sequence(&source_shape, [320.0, 200.0, 0.0], 30, (640, 480), 25.0, 11);
    let source = with_dropouts(source, &[(7, Part::LeftHand), (8, Part::LeftHand), (19, Part::RightHand)]);

    let target_shape = BodyShape::random(&mut ChaCha8Rng::seed_from_u64(23)).scaled(1.3);
    let target = signing_sequence(&target_shape, [380.0, 260.0, 0.0], 30, (720, 576), 25.0, 29);
    let target = with_dropouts(target, &[(12, Part::Face)]);

    std::fs::write(dir.join("source.jsonl"), serialize_sequence(&source))?;
    std::fs::write(dir.join("target.jsonl"), serialize_sequence(&target))?;
    Ok(())
}
