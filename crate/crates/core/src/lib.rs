//! Pose retargeting between signers, color-coded conditioning images and
//! evaluation metrics for sign language reenactment.

pub mod conditioning;
pub mod crop;
pub mod geometry;
pub mod landmarks;
pub mod metrics;
pub mod pipeline;
pub mod retarget;
pub mod stats;
pub mod synth;
