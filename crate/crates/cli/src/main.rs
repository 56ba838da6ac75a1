use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use reenact_core::conditioning::{build_color_scheme, median_pose, render_sequence, ColorScheme, PartBlue, RenderParams};
use reenact_core::crop::{apply_crop, proportion_profile, source_crop, target_crop, ProportionProfile};
use reenact_core::geometry::WeiszfeldParams;
use reenact_core::landmarks::layout::face;
use reenact_core::landmarks::{fill_missing, PoseSequence};
use reenact_core::metrics::{apd, skeleton_cycle_error, Colormap, VideoFrames};
use reenact_core::pipeline::artifacts::{read_rigid_face, read_sequence, write_conditioning, write_json, write_sequence_file};
use reenact_core::pipeline::{run_pipeline, PipelineConfig};
use reenact_core::retarget::{
    calibrate, default_parts, retarget_with_calibration, CalibrationOptions, RetargetCalibration,
};

/// Pose retargeting and conditioning-image tools for sign language reenactment.
#[derive(Parser)]
#[command(name = "reenact", version)]
struct Cli {
    /// Worker threads for per-frame work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extract landmarks from a video with the external tracker adapter.
    Extract(ExtractArgs),
    /// Crop a target sequence to the envelope of its landmarks.
    CropTarget(CropTargetArgs),
    /// Crop a source sequence to the target's body proportions.
    CropSource(CropSourceArgs),
    /// Retarget a cropped source onto a cropped target.
    Retarget(RetargetArgs),
    /// Build the joint color scheme from a cropped target.
    BuildScheme(BuildSchemeArgs),
    /// Render CCBR and gaze images for every frame.
    RenderConditioning(RenderArgs),
    /// Average pixel distance between two PNG directories.
    Apd(ApdArgs),
    /// Mean per-joint distance between two 256-space sequences.
    CycleError(CycleArgs),
    /// Run the full pipeline from a TOML or JSON config.
    #[command(long_about = RUN_HELP)]
    Run(RunArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    video: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Minimum detection confidence.
    #[arg(long, default_value_t = 0.5)]
    min_det: f64,
    /// Minimum tracking confidence.
    #[arg(long, default_value_t = 0.5)]
    min_track: f64,
    /// Adapter executable (default: $REENACT_ADAPTER, then `reenact-extract` on PATH).
    #[arg(long)]
    adapter: Option<PathBuf>,
}

#[derive(Args)]
struct CropTargetArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the crop box as JSON.
    #[arg(long)]
    spec_out: Option<PathBuf>,
    /// Where to write the proportion profile used by crop-source.
    #[arg(long)]
    profile_out: Option<PathBuf>,
}

#[derive(Args)]
struct CropSourceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Proportion profile written by crop-target.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrationArgs {
    /// JSON array of face-mesh indices (default: 12-point nose bridge, eye corner and temple subset).
    #[arg(long)]
    rigid_face: Option<PathBuf>,
    /// Generalized Procrustes iterations for the templates.
    #[arg(long, default_value_t = 10)]
    gpa_iters: usize,
    /// Weiszfeld convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    weiszfeld_tol: f64,
    /// Weiszfeld iteration cap.
    #[arg(long, default_value_t = 1000)]
    weiszfeld_max_iter: usize,
}

impl CalibrationArgs {
    fn rigid_face(&self) -> Result<Vec<usize>> {
        match &self.rigid_face {
            Some(p) => Ok(read_rigid_face(p)?),
            None => Ok(face::DEFAULT_RIGID.to_vec()),
        }
    }

    fn options(&self) -> CalibrationOptions {
        CalibrationOptions {
            gpa_iters: self.gpa_iters,
            weiszfeld: WeiszfeldParams {
                tol: self.weiszfeld_tol,
                max_iter: self.weiszfeld_max_iter,
            },
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct RetargetArgs {
    /// Cropped source sequence.
    #[arg(long)]
    source: PathBuf,
    /// Cropped target sequence (not needed with --calib-in).
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the calibration.
    #[arg(long)]
    calib_out: Option<PathBuf>,
    /// Reuse a saved calibration instead of calibrating.
    #[arg(long, conflicts_with = "target")]
    calib_in: Option<PathBuf>,
    #[command(flatten)]
    calibration: CalibrationArgs,
}

#[derive(Args)]
struct BuildSchemeArgs {
    /// Cropped target sequence; its per-joint median pose fixes the colors.
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Interpolated points per bone.
    #[arg(long, default_value_t = 4)]
    interp_points: usize,
    #[arg(long, default_value_t = 64)]
    blue_torso: u8,
    #[arg(long, default_value_t = 128)]
    blue_left_hand: u8,
    #[arg(long, default_value_t = 192)]
    blue_right_hand: u8,
    #[arg(long, default_value_t = 255)]
    blue_head: u8,
}

#[derive(Args)]
struct RenderArgs {
    /// 256×256 sequence to render.
    #[arg(long = "in")]
    input: PathBuf,
    /// Color scheme written by build-scheme.
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Fail on frames with missing parts instead of leaving them out.
    #[arg(long)]
    strict: bool,
    /// Also write 256×256×6 raw buffers.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 2.0)]
    joint_radius: f64,
    #[arg(long, default_value_t = 1.0)]
    face_radius: f64,
    #[arg(long, default_value_t = 2.0)]
    pupil_radius: f64,
    /// Eye contour line width in pixels.
    #[arg(long, default_value_t = 1)]
    line_width: u32,
}

#[derive(Args)]
struct ApdArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Heatmap colors (gray maps 0 to black and 255·√3 to white).
    #[arg(long, value_enum, default_value_t = ColormapArg::Gray)]
    colormap: ColormapArg,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ColormapArg {
    Gray,
    Viridis,
}

impl From<ColormapArg> for Colormap {
    fn from(c: ColormapArg) -> Self {
        match c {
            ColormapArg::Gray => Colormap::Gray,
            ColormapArg::Viridis => Colormap::Viridis,
        }
    }
}

#[derive(Args)]
struct CycleArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    cycled: PathBuf,
}

const RUN_HELP: &str = "Run crop, calibrate, retarget, render-conditioning and evaluate in order.

Each stage writes into <output>/<stage>/ (as <stage>.partial/ until it
completes) and <output>/manifest.json records input and output hashes.

Config keys (relative paths resolve against the config file):
  source, target, output   required paths
  rigid_face               JSON array of face-mesh indices [built-in 12-point subset]
  jobs                     worker threads [all cores]
  gpa_iters                [10]
  export_raw               also write cond_NNNNNN.raw buffers [false]
  heatmap_colormap         gray | viridis [gray]
  [weiszfeld]              tol [1e-9], max_iter [1000]
  [scheme]                 interp_points [4]
  [scheme.part_blue]       torso [64], left_hand [128], right_hand [192], head [255]
  [render]                 joint_radius [2], face_radius [1], pupil_radius [2],
                           line_width [1], left_pupil [[255,0,0]],
                           right_pupil [[0,255,0]], strict [false]";

#[derive(Args)]
struct RunArgs {
    /// Pipeline config (.toml or .json).
    #[arg(long)]
    config: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let (Some(n), false) = (cli.jobs, matches!(cli.command, Cmd::Run(_))) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    match cli.command {
        Cmd::Extract(a) => extract(a),
        Cmd::CropTarget(a) => crop_target_cmd(a),
        Cmd::CropSource(a) => crop_source_cmd(a),
        Cmd::Retarget(a) => retarget_cmd(a),
        Cmd::BuildScheme(a) => build_scheme_cmd(a),
        Cmd::RenderConditioning(a) => render_cmd(a),
        Cmd::Apd(a) => apd_cmd(a),
        Cmd::CycleError(a) => {
            let e = skeleton_cycle_error(&read_sequence(&a.original)?, &read_sequence(&a.cycled)?)?;
            println!("{e}");
            Ok(())
        }
        Cmd::Run(a) => {
            let mut cfg = PipelineConfig::load(&a.config)?;
            if cli.jobs.is_some() {
                cfg.jobs = cli.jobs;
            }
            let manifest = run_pipeline(&cfg)?;
            for s in &manifest.stages {
                println!("{:<20} {:>8} ms  {} outputs", s.name, s.elapsed_ms, s.outputs.len());
            }
            Ok(())
        }
    }
}

fn extract(a: ExtractArgs) -> Result<()> {
    let program = a
        .adapter
        .or_else(|| std::env::var_os("REENACT_ADAPTER").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reenact-extract"));
    let status = Command::new(&program)
        .arg("--video")
        .arg(&a.video)
        .arg("--out")
        .arg(&a.out)
        .arg("--min-det")
        .arg(a.min_det.to_string())
        .arg("--min-track")
        .arg(a.min_track.to_string())
        .status();
    match status {
        Ok(s) if s.success() => Ok(()),
        Ok(s) => bail!("landmark adapter {} exited with {s}", program.display()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => bail!(
            "no landmark extraction adapter found (tried {}); install it or set REENACT_ADAPTER",
            program.display()
        ),
        Err(e) => Err(e).with_context(|| format!("running {}", program.display())),
    }
}

fn crop_target_cmd(a: CropTargetArgs) -> Result<()> {
    let seq = read_sequence(&a.input)?;
    let spec = target_crop(&seq)?;
    write_sequence_file(&a.out, &apply_crop(&seq, &spec))?;
    if let Some(p) = a.spec_out {
        write_json(&p, &spec)?;
    }
    if let Some(p) = a.profile_out {
        write_json(&p, &proportion_profile(&seq, &spec)?)?;
    }
    Ok(())
}

fn crop_source_cmd(a: CropSourceArgs) -> Result<()> {
    let seq = read_sequence(&a.input)?;
    let profile: ProportionProfile = read_json(&a.profile)?;
    let spec = source_crop(&seq, &profile)?;
    write_sequence_file(&a.out, &apply_crop(&seq, &spec))?;
    if let Some(p) = a.spec_out {
        write_json(&p, &spec)?;
    }
    Ok(())
}

fn retarget_cmd(a: RetargetArgs) -> Result<()> {
    let rigid = a.calibration.rigid_face()?;
    let parts = default_parts(&rigid)?;
    let source = read_sequence(&a.source)?;
    let calibration: RetargetCalibration = match (&a.calib_in, &a.target) {
        (Some(p), _) => read_json(p)?,
        (None, Some(t)) => calibrate(&source, &read_sequence(t)?, &parts, &a.calibration.options())?,
        (None, None) => bail!("either --target or --calib-in is required"),
    };
    let (seq, degenerate) = retarget_with_calibration(&fill_missing(&source)?, &parts, &calibration, source.width)?;
    if !degenerate.is_empty() {
        log::warn!("{} part alignments were degenerate and reused a neighbor", degenerate.len());
    }
    write_sequence_file(&a.out, &seq)?;
    if let Some(p) = a.calib_out {
        write_json(&p, &calibration)?;
    }
    Ok(())
}

fn build_scheme_cmd(a: BuildSchemeArgs) -> Result<()> {
    let target: PoseSequence = read_sequence(&a.target)?;
    let blue = PartBlue {
        torso: a.blue_torso,
        left_hand: a.blue_left_hand,
        right_hand: a.blue_right_hand,
        head: a.blue_head,
    };
    let scheme = build_color_scheme(&median_pose(&target)?, blue, a.interp_points)?;
    write_json(&a.out, &scheme)?;
    Ok(())
}

fn render_cmd(a: RenderArgs) -> Result<()> {
    let seq = read_sequence(&a.input)?;
    let scheme: ColorScheme = read_json(&a.scheme)?;
    let params = RenderParams {
        joint_radius: a.joint_radius,
        face_radius: a.face_radius,
        pupil_radius: a.pupil_radius,
        line_width: a.line_width,
        strict: a.strict,
        ..Default::default()
    };
    let frames = render_sequence(&seq, &scheme, &params)?;
    write_conditioning(&a.out_dir, &frames, a.raw)?;
    Ok(())
}

fn apd_cmd(a: ApdArgs) -> Result<()> {
    let report = apd(&VideoFrames::load_dir(&a.a)?, &VideoFrames::load_dir(&a.b)?)?;
    println!("{}", report.apd);
    if let Some(p) = a.report {
        write_json(&p, &report)?;
    }
    if let Some(p) = a.heatmap {
        report
            .heatmap
            .render(a.colormap.into())
            .save(&p)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = a.curve {
        let mut f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        report.write_curve(&mut f)?;
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}
