//! Landmark data model and the JSONL interchange format.

mod frame;
mod jsonl;
pub mod layout;

use thiserror::Error;

pub use frame::{fill_missing, midpoint, Landmark, PartStatus, PoseFrame, PoseSequence, MISSING};
pub use jsonl::{parse_sequence, serialize_sequence, write_sequence};
pub use layout::{JointLayout, Part};

#[derive(Debug, Error)]
pub enum LandmarkError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: {part} has {found} landmarks, expected {expected}")]
    LayoutMismatch {
        line: usize,
        part: Part,
        expected: usize,
        found: usize,
    },
    #[error("sequence contains no frames")]
    EmptySequence,
    #[error("{0} is missing in every frame")]
    PartNeverDetected(Part),
    #[error("frame indices must strictly increase ({previous} then {next})")]
    NonIncreasingFrames { previous: u64, next: u64 },
    #[error("invalid sequence header: {0}")]
    InvalidHeader(String),
}
