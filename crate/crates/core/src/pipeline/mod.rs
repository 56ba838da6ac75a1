//! End-to-end run: crop, calibrate, retarget, render conditioning, evaluate.
//!
//! Every stage writes into `<output>/<stage>.partial/` and renames it to
//! `<output>/<stage>/` once complete, so a failed stage leaves its partial
//! outputs behind under the `.partial` name. A `manifest.json` records input
//! hashes, the effective config, per-stage timings and output hashes.

pub mod artifacts;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditioning::{
    build_color_scheme, median_pose, render_sequence, ColorScheme, ConditioningError, PartBlue, RenderParams,
};
use crate::crop::{apply_crop, proportion_profile, source_crop, target_crop, CropError, CropSpec, ProportionProfile};
use crate::geometry::WeiszfeldParams;
use crate::landmarks::layout::face;
use crate::landmarks::{fill_missing, LandmarkError, PoseSequence};
use crate::metrics::{apd, skeleton_cycle_error, ApdReport, Colormap, MetricsError, VideoFrames};
use crate::retarget::{
    calibrate, default_parts, retarget_sequence, retarget_with_calibration, CalibrationOptions, DegenerateFrame,
    RetargetCalibration, RetargetError, RetargetOptions,
};
use artifacts::{hash_file, hash_tree, read_rigid_face, read_sequence, write_conditioning, write_json, write_sequence_file};

pub const STAGES: [&str; 5] = ["crop", "calibrate", "retarget", "render-conditioning", "evaluate"];

/// Failure inside one stage.
#[derive(Debug, Error)]
pub enum StageFailure {
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Landmarks(#[from] LandmarkError),
    #[error(transparent)]
    Crop(#[from] CropError),
    #[error(transparent)]
    Retarget(#[from] RetargetError),
    #[error(transparent)]
    Conditioning(#[from] ConditioningError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: StageFailure,
    },
    #[error("cannot build thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeParams {
    pub part_blue: PartBlue,
    /// Interpolated points per bone.
    pub interp_points: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            part_blue: PartBlue::default(),
            interp_points: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub source: PathBuf,
    pub target: PathBuf,
    pub output: PathBuf,
    /// JSON array of face-mesh indices; the built-in rigid subset if absent.
    #[serde(default)]
    pub rigid_face: Option<PathBuf>,
    /// Worker threads; all cores if absent.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default = "default_gpa_iters")]
    pub gpa_iters: usize,
    #[serde(default)]
    pub weiszfeld: WeiszfeldParams,
    #[serde(default)]
    pub scheme: SchemeParams,
    #[serde(default)]
    pub render: RenderParams,
    /// Also export 256×256×6 raw conditioning buffers.
    #[serde(default)]
    pub export_raw: bool,
    #[serde(default)]
    pub heatmap_colormap: Colormap,
}

fn default_gpa_iters() -> usize {
    10
}

impl PipelineConfig {
    pub fn new(source: impl Into<PathBuf>, target: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            output: output.into(),
            rigid_face: None,
            jobs: None,
            gpa_iters: default_gpa_iters(),
            weiszfeld: WeiszfeldParams::default(),
            scheme: SchemeParams::default(),
            render: RenderParams::default(),
            export_raw: false,
            heatmap_colormap: Colormap::default(),
        }
    }

    /// Reads TOML or JSON (by extension). Relative paths are taken relative
    /// to the config file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?,
            _ => toml::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?,
        };
        if let Some(base) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            fix(&mut cfg.source);
            fix(&mut cfg.target);
            fix(&mut cfg.output);
            if let Some(r) = cfg.rigid_face.as_mut() {
                fix(r);
            }
        }
        Ok(cfg)
    }

    /// Checks inputs and parameters without running anything. Returns the
    /// rigid face subset to use.
    pub fn validate(&self) -> Result<Vec<usize>, PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        for (name, p) in [("source", &self.source), ("target", &self.target)] {
            if !p.is_file() {
                return bad(format!("{name} file {} does not exist", p.display()));
            }
        }
        let rigid = match &self.rigid_face {
            Some(p) if !p.is_file() => return bad(format!("rigid face file {} does not exist", p.display())),
            Some(p) => read_rigid_face(p).map_err(|e| PipelineError::Config(e.to_string()))?,
            None => face::DEFAULT_RIGID.to_vec(),
        };
        default_parts(&rigid).map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if !(self.weiszfeld.tol > 0.0) || self.weiszfeld.max_iter == 0 {
            return bad("weiszfeld tol and max_iter must be positive".into());
        }
        let r = &self.render;
        if [r.joint_radius, r.face_radius, r.pupil_radius].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("render radii must be finite and non-negative".into());
        }
        if r.line_width == 0 {
            return bad("render line_width must be at least 1".into());
        }
        if self.output.exists() && !self.output.is_dir() {
            return bad(format!("output {} is not a directory", self.output.display()));
        }
        Ok(rigid)
    }

    fn retarget_options(&self, rigid_face: &[usize]) -> RetargetOptions {
        RetargetOptions {
            calibration: CalibrationOptions {
                gpa_iters: self.gpa_iters,
                weiszfeld: self.weiszfeld,
                templates: BTreeMap::new(),
            },
            rigid_face: rigid_face.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    pub elapsed_ms: u128,
    /// Output hashes keyed by path relative to the stage directory.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub inputs: BTreeMap<String, InputRecord>,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    /// Every output hash, keyed `<stage>/<path>`.
    pub fn output_hashes(&self) -> BTreeMap<String, String> {
        self.stages
            .iter()
            .flat_map(|s| s.outputs.iter().map(move |(k, v)| (format!("{}/{k}", s.name), v.clone())))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CropRecord {
    pub target: CropSpec,
    pub source: CropSpec,
    pub profile: ProportionProfile,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    /// Mean per-joint distance after source → target → source, crop pixels.
    pub cycle_error: f64,
    /// Pixel distance between CCBR renders of the source and the cycled source.
    pub ccbr_apd: ApdReport,
    pub degenerate_frames: Vec<DegenerateFrame>,
}

/// Crops both inputs into 256-space.
pub fn crop_pair(source: &PoseSequence, target: &PoseSequence) -> Result<(PoseSequence, PoseSequence, CropRecord), CropError> {
    let t = target_crop(target)?;
    let profile = proportion_profile(target, &t)?;
    let s = source_crop(source, &profile)?;
    Ok((
        apply_crop(source, &s),
        apply_crop(target, &t),
        CropRecord {
            target: t,
            source: s,
            profile,
        },
    ))
}

struct Runner<'a> {
    output: &'a Path,
    stages: Vec<StageRecord>,
}

impl Runner<'_> {
    fn stage<T>(
        &mut self,
        name: &'static str,
        body: impl FnOnce(&Path) -> Result<T, StageFailure>,
    ) -> Result<T, PipelineError> {
        let done = self.output.join(name);
        let partial = self.output.join(format!("{name}.partial"));
        for stale in [&done, &partial] {
            if stale.exists() {
                fs::remove_dir_all(stale)?;
            }
        }
        fs::create_dir_all(&partial)?;
        log::info!("stage {name}");
        let start = Instant::now();
        let value = body(&partial).map_err(|source| PipelineError::Stage { stage: name, source })?;
        fs::rename(&partial, &done)?;
        self.stages.push(StageRecord {
            name: name.to_string(),
            status: "completed".into(),
            elapsed_ms: start.elapsed().as_millis(),
            outputs: hash_tree(&done)?,
        });
        Ok(value)
    }
}

fn source_scheme(seq: &PoseSequence, params: &SchemeParams) -> Result<ColorScheme, ConditioningError> {
    build_color_scheme(&median_pose(seq)?, params.part_blue, params.interp_points)
}

/// Runs all five stages and writes `manifest.json` into the output directory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    let rigid_face = cfg.validate()?;
    fs::create_dir_all(&cfg.output)?;

    let mut inputs = BTreeMap::new();
    let mut named = vec![("source", &cfg.source), ("target", &cfg.target)];
    if let Some(r) = &cfg.rigid_face {
        named.push(("rigid_face", r));
    }
    for (name, path) in named {
        inputs.insert(
            name.to_string(),
            InputRecord {
                path: path.clone(),
                sha256: hash_file(path)?,
            },
        );
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let stages = pool.install(|| run_stages(cfg, &rigid_face))?;

    let manifest = Manifest {
        config: cfg.clone(),
        inputs,
        stages,
    };
    write_json(&cfg.output.join("manifest.json"), &manifest).map_err(|source| PipelineError::Stage {
        stage: "manifest",
        source,
    })?;
    Ok(manifest)
}

fn run_stages(cfg: &PipelineConfig, rigid_face: &[usize]) -> Result<Vec<StageRecord>, PipelineError> {
    let mut run = Runner {
        output: &cfg.output,
        stages: Vec::new(),
    };
    let opts = cfg.retarget_options(rigid_face);
    let parts = default_parts(rigid_face).map_err(|e| PipelineError::Config(e.to_string()))?;

    let (source, target) = run.stage("crop", |dir| {
        let source = read_sequence(&cfg.source)?;
        let target = read_sequence(&cfg.target)?;
        let (source, target, record) = crop_pair(&source, &target)?;
        write_sequence_file(&dir.join("source.jsonl"), &source)?;
        write_sequence_file(&dir.join("target.jsonl"), &target)?;
        write_json(&dir.join("crops.json"), &record)?;
        Ok((source, target))
    })?;

    let calibration: RetargetCalibration = run.stage("calibrate", |dir| {
        let cal = calibrate(&source, &target, &parts, &opts.calibration)?;
        write_json(&dir.join("calibration.json"), &cal)?;
        Ok(cal)
    })?;

    let (filled_source, retargeted, degenerate) = run.stage("retarget", |dir| {
        let filled = fill_missing(&source)?;
        let (seq, degenerate) = retarget_with_calibration(&filled, &parts, &calibration, target.width)?;
        write_sequence_file(&dir.join("retargeted.jsonl"), &seq)?;
        write_json(&dir.join("degenerate.json"), &degenerate)?;
        Ok((filled, seq, degenerate))
    })?;

    run.stage("render-conditioning", |dir| {
        let scheme = source_scheme(&target, &cfg.scheme)?;
        write_json(&dir.join("scheme.json"), &scheme)?;
        let frames = render_sequence(&retargeted, &scheme, &cfg.render)?;
        write_conditioning(dir, &frames, cfg.export_raw)?;
        Ok(())
    })?;

    run.stage("evaluate", |dir| {
        let back = retarget_sequence(&retargeted, &filled_source, &opts)?;
        write_sequence_file(&dir.join("cycled.jsonl"), &back.sequence)?;
        let cycle_error = skeleton_cycle_error(&filled_source, &back.sequence)?;

        let scheme = source_scheme(&filled_source, &cfg.scheme)?;
        let video = |seq: &PoseSequence| -> Result<VideoFrames, StageFailure> {
            let frames = render_sequence(seq, &scheme, &cfg.render)?;
            Ok(VideoFrames::new(frames.into_iter().map(|f| f.ccbr).collect())?)
        };
        let report = apd(&video(&filled_source)?, &video(&back.sequence)?)?;

        artifacts::write_atomic(
            &dir.join("heat.png"),
            &crate::conditioning::encode_png(&report.heatmap.render(cfg.heatmap_colormap))?,
        )?;
        let mut curve = Vec::new();
        report.write_curve(&mut curve)?;
        artifacts::write_atomic(&dir.join("curve.csv"), &curve)?;
        write_json(
            &dir.join("report.json"),
            &EvaluationReport {
                cycle_error,
                ccbr_apd: report,
                degenerate_frames: degenerate,
            },
        )?;
        Ok(())
    })?;

    Ok(run.stages)
}
