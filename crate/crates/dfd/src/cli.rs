//! `dfd` command-line entry point.
//!
//! Exit codes: 0 success, 1 invalid arguments or values, 2 file I/O or format
//! errors, 3 a dataset run finished with failed samples. Every run echoes its
//! fully resolved configuration as one JSON line on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dfd_core::synth::synthesize_with_radii;
use dfd_core::{blur_cue_profile, blur_radius, dark_channel, lddcv, validity_mask, CameraParams};
use serde::Serialize;

use crate::dataset::{self, BatchOptions};
use crate::error::{Error, Result};
use crate::formats::{self, DepthEncoding, MapFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Maps [0, 1] maps onto the full 16-bit PNG range.
const UNIT_PNG_SCALE: f64 = 65535.0;

#[derive(Debug, Parser)]
#[command(name = "dfd", version, about = "Defocus blur synthesis, dark-channel cues, depth metrics and losses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render thin-lens defocus blur from an all-in-focus RGB image and a depth map
    Synth(SynthArgs),
    /// Dark channel of an RGB image
    Darkchannel(DarkArgs),
    /// Two-channel LDDCV cue map (LDCV from the dark channel, LDV from the image)
    Cues(CuesArgs),
    /// Threshold an LDDCV map into a validity mask
    Mask(MaskArgs),
    /// Mean cue strength per normalized blur-level bin, as CSV
    Profile(ProfileArgs),
    /// Depth-estimation metrics of predictions against ground truth, as JSON
    Metrics(MetricsArgs),
    /// Spatial, frequency and adversarial loss terms, as JSON
    Loss(LossArgs),
    /// Gaussian kernel density estimate with Silverman's bandwidth, as CSV
    Kde(KdeArgs),
    /// Whole-dataset processing
    #[command(subcommand)]
    Dataset(DatasetCommand),
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    /// Synthesize defocus, radius, dark channel, LDDCV and mask for every id in a split
    Synth(DatasetSynthArgs),
    /// Dark channel, LDDCV and mask for already defocused images at <root>/<id>.png
    Cues(DatasetCuesArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct CameraArgs {
    /// Focal length [m]
    #[arg(long, default_value_t = 0.009)]
    focal: f64,
    /// F-number [dimensionless]
    #[arg(long, default_value_t = 2.0)]
    fnumber: f64,
    /// In-focus plane distance [m]
    #[arg(long, default_value_t = 0.7)]
    focus: f64,
    /// Pixel pitch [m]
    #[arg(long = "pixel-pitch", default_value_t = 7.5e-6)]
    pixel_pitch: f64,
}

impl CameraArgs {
    fn camera(&self) -> Result<CameraParams> {
        Ok(CameraParams::new(self.focal, self.fnumber, self.focus, self.pixel_pitch)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct DepthArgs {
    /// Depth PNG units per meter [1/m] (1000 = millimeters)
    #[arg(long = "depth-scale", default_value_t = 1000.0)]
    depth_scale: f64,
    /// Largest accepted depth [m]
    #[arg(long = "max-depth", default_value_t = 10.0)]
    max_depth: f64,
}

impl DepthArgs {
    fn encoding(&self) -> DepthEncoding {
        DepthEncoding { scale: self.depth_scale, max_depth: Some(self.max_depth) }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct JobsArg {
    /// Worker threads [count]; defaults to $DFD_JOBS, then the number of CPUs
    #[arg(long, env = "DFD_JOBS")]
    jobs: Option<usize>,
}

impl JobsArg {
    fn resolve(&mut self) {
        let n = self.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        self.jobs = Some(n.max(1));
    }

    fn get(&self) -> usize {
        self.jobs.unwrap_or(1)
    }
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// All-in-focus RGB PNG (8 or 16 bit)
    #[arg(long)]
    rgb: PathBuf,
    /// Depth map: 16-bit PNG (see --depth-scale) or DFD1 .raw in meters
    #[arg(long)]
    depth: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    depth_enc: DepthArgs,
    #[command(flatten)]
    #[serde(flatten)]
    camera: CameraArgs,
    /// Kernel half-width in units of the blur radius [dimensionless]
    #[arg(long, default_value_t = 3.0)]
    truncation: f64,
    /// Output 16-bit RGB PNG
    #[arg(long)]
    out: PathBuf,
    /// Optional blur radius map [px], DFD1 raw
    #[arg(long = "out-radius")]
    out_radius: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args, Serialize)]
struct DarkArgs {
    /// RGB PNG
    #[arg(long = "in")]
    input: PathBuf,
    /// Odd window side [px]
    #[arg(long, default_value_t = 15)]
    window: usize,
    /// Output map: .raw for DFD1 floats, otherwise 16-bit PNG scaled by 65535
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args, Serialize)]
struct CuesArgs {
    /// Defocused RGB PNG
    #[arg(long = "in")]
    input: PathBuf,
    /// Dark channel map (.raw, or 16-bit PNG scaled by 65535)
    #[arg(long)]
    dark: PathBuf,
    /// Output two-plane DFD1 raw (LDCV plane, then LDV plane)
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args, Serialize)]
struct MaskArgs {
    /// Two-plane LDDCV raw
    #[arg(long = "in")]
    input: PathBuf,
    /// Threshold on max(LDCV, LDV) [intensity, 0..1); strict inequality
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Output 8-bit mask PNG (255 = valid)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ProfileArgs {
    /// Two-plane LDDCV raw
    #[arg(long)]
    cues: PathBuf,
    /// Blur radius map [px], DFD1 raw
    #[arg(long)]
    radii: PathBuf,
    /// Number of equal-width bins of normalized blur [count]
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MetricsArgs {
    /// Predicted depth (.raw meters or 16-bit PNG); repeat for a batch
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    /// Ground-truth depth, paired with --pred in order
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    /// Ground-truth depths above this are excluded [m]
    #[arg(long, default_value_t = 10.0)]
    cap: f64,
    /// Depth PNG units per meter [1/m]
    #[arg(long = "depth-scale", default_value_t = 1000.0)]
    depth_scale: f64,
    /// Output JSON (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct LossArgs {
    /// Predicted depth (.raw meters or 16-bit PNG)
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth depth
    #[arg(long)]
    gt: PathBuf,
    /// Discriminator scores for generated samples, CSV
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Depth PNG units per meter [1/m]
    #[arg(long = "depth-scale", default_value_t = 1000.0)]
    depth_scale: f64,
    /// Output JSON (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct KdeArgs {
    /// Values: .csv numbers, .raw map (nonzero samples), or 16-bit depth PNG
    #[arg(long)]
    values: PathBuf,
    /// Depth PNG units per meter [1/m], for PNG input
    #[arg(long = "depth-scale", default_value_t = 1000.0)]
    depth_scale: f64,
    /// Grid points [count]
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Fixed bandwidth in data units; Silverman's rule when omitted
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct DatasetSynthArgs {
    /// Dataset root holding rgb/<id>.png and depth/<id>.png
    #[arg(long)]
    root: PathBuf,
    /// Split file, one id per line
    #[arg(long)]
    split: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    camera: CameraArgs,
    #[command(flatten)]
    #[serde(flatten)]
    depth_enc: DepthArgs,
    /// Kernel half-width in units of the blur radius [dimensionless]
    #[arg(long, default_value_t = 3.0)]
    truncation: f64,
    /// Dark channel window side [px]
    #[arg(long, default_value_t = 15)]
    window: usize,
    /// Mask threshold [intensity]
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Stop at the first failing sample instead of recording it
    #[arg(long = "fail-fast")]
    fail_fast: bool,
    #[command(flatten)]
    #[serde(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args, Serialize)]
struct DatasetCuesArgs {
    /// Directory holding <id>.png defocused images
    #[arg(long)]
    root: PathBuf,
    /// Split file, one id per line
    #[arg(long)]
    split: PathBuf,
    /// Dark channel window side [px]
    #[arg(long, default_value_t = 15)]
    window: usize,
    /// Mask threshold [intensity]
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Stop at the first failing sample instead of recording it
    #[arg(long = "fail-fast")]
    fail_fast: bool,
    #[command(flatten)]
    #[serde(flatten)]
    jobs: JobsArg,
}

/// Resolved settings of one invocation, echoed to stderr.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub flags: serde_json::Value,
}

fn absolute(p: &mut PathBuf) {
    if let Ok(abs) = std::path::absolute(&*p) {
        *p = abs;
    }
}

fn absolute_opt(p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        absolute(p);
    }
}

impl Command {
    /// Makes paths absolute, fills environment/CPU defaults and checks
    /// flag-level invariants.
    fn resolve(&mut self) -> Result<()> {
        match self {
            Command::Synth(a) => {
                absolute(&mut a.rgb);
                absolute(&mut a.depth);
                absolute(&mut a.out);
                absolute_opt(&mut a.out_radius);
                a.jobs.resolve();
                a.camera.camera()?;
            }
            Command::Darkchannel(a) => {
                absolute(&mut a.input);
                absolute(&mut a.out);
                a.jobs.resolve();
                check_window(a.window)?;
            }
            Command::Cues(a) => {
                absolute(&mut a.input);
                absolute(&mut a.dark);
                absolute(&mut a.out);
                a.jobs.resolve();
            }
            Command::Mask(a) => {
                absolute(&mut a.input);
                absolute(&mut a.out);
            }
            Command::Profile(a) => {
                absolute(&mut a.cues);
                absolute(&mut a.radii);
                absolute_opt(&mut a.out);
            }
            Command::Metrics(a) => {
                a.pred.iter_mut().chain(a.gt.iter_mut()).for_each(absolute);
                absolute_opt(&mut a.out);
            }
            Command::Loss(a) => {
                absolute(&mut a.pred);
                absolute(&mut a.gt);
                absolute_opt(&mut a.scores);
                absolute_opt(&mut a.out);
            }
            Command::Kde(a) => {
                absolute(&mut a.values);
                absolute_opt(&mut a.out);
            }
            Command::Dataset(DatasetCommand::Synth(a)) => {
                absolute(&mut a.root);
                absolute(&mut a.split);
                absolute(&mut a.out);
                a.jobs.resolve();
                a.camera.camera()?;
                check_window(a.window)?;
            }
            Command::Dataset(DatasetCommand::Cues(a)) => {
                absolute(&mut a.root);
                absolute(&mut a.split);
                absolute(&mut a.out);
                a.jobs.resolve();
                check_window(a.window)?;
            }
        }
        Ok(())
    }

    fn config(&self) -> Result<RunConfig> {
        let (name, flags) = match self {
            Command::Synth(a) => ("synth", serde_json::to_value(a)?),
            Command::Darkchannel(a) => ("darkchannel", serde_json::to_value(a)?),
            Command::Cues(a) => ("cues", serde_json::to_value(a)?),
            Command::Mask(a) => ("mask", serde_json::to_value(a)?),
            Command::Profile(a) => ("profile", serde_json::to_value(a)?),
            Command::Metrics(a) => ("metrics", serde_json::to_value(a)?),
            Command::Loss(a) => ("loss", serde_json::to_value(a)?),
            Command::Kde(a) => ("kde", serde_json::to_value(a)?),
            Command::Dataset(DatasetCommand::Synth(a)) => ("dataset synth", serde_json::to_value(a)?),
            Command::Dataset(DatasetCommand::Cues(a)) => ("dataset cues", serde_json::to_value(a)?),
        };
        Ok(RunConfig { subcommand: name.into(), flags })
    }
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 || window % 2 == 0 {
        Err(dfd_core::Error::InvalidWindow(window).into())
    } else {
        Ok(())
    }
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("failed to start worker pool")
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(p, text).map_err(|e| Error::io(p, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Synth(a) => {
            let cam = a.camera.camera()?;
            let img = formats::read_rgb(&a.rgb)?;
            let depth = formats::read_depth_any(&a.depth, &a.depth_enc.encoding())?;
            if img.dims() != depth.dims() {
                return Err(dfd_core::Error::DimensionMismatch { expected: img.dims(), actual: depth.dims() }.into());
            }
            let radii = blur_radius(&depth, &cam);
            let out = pool(a.jobs.get()).install(|| synthesize_with_radii(&img, &radii, a.truncation))?;
            formats::write_rgb_png16(&out, &a.out)?;
            if let Some(p) = &a.out_radius {
                formats::write_map(&radii, p, MapFormat::RawF32)?;
            }
        }
        Command::Darkchannel(a) => {
            let img = formats::read_rgb(&a.input)?;
            let dark = pool(a.jobs.get()).install(|| dark_channel(&img, a.window))?;
            formats::write_map_auto(&dark, &a.out, UNIT_PNG_SCALE)?;
        }
        Command::Cues(a) => {
            let img = formats::read_rgb(&a.input)?;
            let dark = formats::read_map_any(&a.dark, UNIT_PNG_SCALE)?;
            let cues = pool(a.jobs.get()).install(|| lddcv(&dark, &img))?;
            formats::write_lddcv_raw(&cues, &a.out)?;
        }
        Command::Mask(a) => {
            let cues = formats::read_lddcv_raw(&a.input)?;
            let mask = validity_mask(&cues, a.threshold)?;
            formats::write_mask_png(&mask, &a.out)?;
        }
        Command::Profile(a) => {
            let cues = formats::read_lddcv_raw(&a.cues)?;
            let radii = formats::read_map_raw(&a.radii)?;
            let profile = blur_cue_profile(&cues, &radii, a.bins)?;
            let mut csv = String::from("bin_center,mean_ldcv,mean_ldv,count\n");
            let fmt = |v: Option<f64>| v.map_or_else(|| "NaN".to_owned(), |v| v.to_string());
            for b in &profile.bins {
                writeln!(csv, "{},{},{},{}", b.center, fmt(b.mean_ldcv), fmt(b.mean_ldv), b.count).unwrap();
            }
            write_text(a.out.as_deref(), &csv)?;
        }
        Command::Metrics(a) => {
            if a.pred.len() != a.gt.len() {
                return Err(Error::Parse {
                    path: PathBuf::from("--pred/--gt"),
                    line: 0,
                    reason: format!("{} predictions but {} ground truths", a.pred.len(), a.gt.len()),
                });
            }
            let enc = DepthEncoding { scale: a.depth_scale, max_depth: None };
            let mut reports = Vec::with_capacity(a.pred.len());
            for (p, g) in a.pred.iter().zip(&a.gt) {
                let pred = formats::read_depth_any(p, &enc)?;
                let gt = formats::read_depth_any(g, &enc)?;
                reports.push(dfd_core::metrics::evaluate(&pred, &gt, a.cap)?);
            }
            let report = dfd_core::metrics::mean_report(&reports).expect("at least one pair");
            write_text(a.out.as_deref(), &json_text(&report)?)?;
        }
        Command::Loss(a) => {
            let enc = DepthEncoding { scale: a.depth_scale, max_depth: None };
            let pred = formats::read_depth_any(&a.pred, &enc)?;
            let gt = formats::read_depth_any(&a.gt, &enc)?;
            let scores = a.scores.as_ref().map(formats::read_values_csv).transpose()?;
            let report = dfd_core::losses::evaluate_losses(&pred, &gt, scores.as_deref())?;
            write_text(a.out.as_deref(), &json_text(&report)?)?;
        }
        Command::Kde(a) => {
            let values = read_kde_values(&a.values, a.depth_scale)?;
            let h = match a.bandwidth {
                Some(h) => h,
                None => dfd_core::silverman_bandwidth(&values)?,
            };
            if !(h > 0.0) || !h.is_finite() {
                return Err(dfd_core::Error::InvalidBandwidth(h).into());
            }
            let grid = dfd_core::kde::default_grid(&values, h, a.points.max(1), dfd_core::kde::DEFAULT_GRID_PAD);
            let kde = dfd_core::gaussian_kde(&values, &grid, h)?;
            let mut csv = format!("# bandwidth={}\ngrid,density\n", kde.bandwidth);
            for (g, d) in kde.grid.iter().zip(&kde.density) {
                writeln!(csv, "{g},{d}").unwrap();
            }
            write_text(a.out.as_deref(), &csv)?;
        }
        Command::Dataset(DatasetCommand::Synth(a)) => {
            let split = dataset::load_split(&a.split)?;
            let opts = BatchOptions {
                camera: a.camera.camera()?,
                truncation: a.truncation,
                window: a.window,
                threshold: a.threshold,
                depth: a.depth_enc.encoding(),
                jobs: a.jobs.get(),
                fail_fast: a.fail_fast,
            };
            let summary = dataset::synthesize_dataset(&a.root, &split, &opts, &a.out)?;
            print!("{}", json_text(&summary)?);
            if !summary.is_complete() {
                return Ok(EXIT_PARTIAL);
            }
        }
        Command::Dataset(DatasetCommand::Cues(a)) => {
            let split = dataset::load_split(&a.split)?;
            let opts = BatchOptions {
                window: a.window,
                threshold: a.threshold,
                jobs: a.jobs.get(),
                fail_fast: a.fail_fast,
                ..BatchOptions::default()
            };
            let summary = dataset::extract_dataset_cues(&a.root, &split, &opts, &a.out)?;
            print!("{}", json_text(&summary)?);
            if !summary.is_complete() {
                return Ok(EXIT_PARTIAL);
            }
        }
    }
    Ok(EXIT_OK)
}

fn read_kde_values(path: &Path, depth_scale: f64) -> Result<Vec<f64>> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("raw") => Ok(formats::read_depth_raw(path)?.valid_values()),
        Some("png") => {
            let enc = DepthEncoding { scale: depth_scale, max_depth: None };
            Ok(formats::read_depth(path, &enc)?.valid_values())
        }
        _ => formats::read_values_csv(path),
    }
}

fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
        }
    };
    let mut cmd = cli.command;
    let resolved = cmd.resolve();
    match cmd.config().and_then(|c| Ok(serde_json::to_string(&c)?)) {
        Ok(line) => eprintln!("dfd config: {line}"),
        Err(e) => eprintln!("dfd: cannot encode config: {e}"),
    }
    let result = resolved.and_then(|_| execute(cmd));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dfd: error: {e}");
            exit_code(&e)
        }
    }
}
