//! NYU-v2 style RGB-D datasets and batch processing.
//!
//! Layout under a dataset root:
//!
//! ```text
//! <root>/rgb/<id>.png     all-in-focus RGB, 8 or 16 bit
//! <root>/depth/<id>.png   16-bit depth, `depth_scale` units per meter, 0 = hole
//! ```
//!
//! Split files list one id per line. Defocused-only collections (no depth)
//! keep images directly at `<root>/<id>.png` and only get cue extraction.
//!
//! Batch runs write, per id:
//!
//! ```text
//! <out>/<id>.defocus.png   16-bit RGB defocused image   (synthesis only)
//! <out>/<id>.radius.raw    blur radius in pixels        (synthesis only)
//! <out>/<id>.dark.raw      dark channel
//! <out>/<id>.lddcv.raw     two-plane LDDCV map
//! <out>/<id>.mask.png      validity mask
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use dfd_core::synth::synthesize_with_radii;
use dfd_core::{
    blur_radius, dark_channel, lddcv, validity_mask, CameraParams, DepthMap, LddcvMap, RgbImage, ScalarMap,
    ValidityMask,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::{self, DepthEncoding, MapFormat};

/// Ordered, duplicate-free list of sample ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitList {
    ids: Vec<String>,
}

impl SplitList {
    pub fn new(ids: Vec<String>) -> std::result::Result<Self, String> {
        if ids.is_empty() {
            return Err("split is empty".into());
        }
        let mut seen = HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(format!("duplicate id {dup:?}"));
        }
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Reads a split file: one id per line, blank lines ignored, order kept.
pub fn load_split(path: impl AsRef<Path>) -> Result<SplitList> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let id = line.trim();
        if id.is_empty() {
            continue;
        }
        if !seen.insert(id.to_owned()) {
            return Err(Error::DuplicateId { path: path.into(), id: id.into(), line: n + 1 });
        }
        ids.push(id.to_owned());
    }
    if ids.is_empty() {
        return Err(Error::EmptySplit { path: path.into() });
    }
    Ok(SplitList { ids })
}

#[derive(Debug, Clone)]
pub struct SamplePair {
    pub id: String,
    pub rgb: RgbImage,
    pub depth: DepthMap,
}

pub fn rgb_path(root: &Path, id: &str) -> PathBuf {
    root.join("rgb").join(format!("{id}.png"))
}

pub fn depth_path(root: &Path, id: &str) -> PathBuf {
    root.join("depth").join(format!("{id}.png"))
}

/// Loads `<root>/rgb/<id>.png` and `<root>/depth/<id>.png`.
pub fn load_pair(root: impl AsRef<Path>, id: &str, enc: &DepthEncoding) -> Result<SamplePair> {
    let root = root.as_ref();
    let rgb_file = rgb_path(root, id);
    let depth_file = depth_path(root, id);
    // Report a missing file before decoding anything.
    for p in [&rgb_file, &depth_file] {
        if !p.is_file() {
            return Err(Error::MissingFile { path: p.clone() });
        }
    }
    let rgb = formats::read_rgb(&rgb_file)?;
    let depth = formats::read_depth(&depth_file, enc)?;
    if rgb.dims() != depth.dims() {
        return Err(dfd_core::Error::DimensionMismatch { expected: rgb.dims(), actual: depth.dims() }.into());
    }
    Ok(SamplePair { id: id.to_owned(), rgb, depth })
}

/// Loads a defocused image with no depth, `<root>/<id>.png`.
pub fn load_defocused(root: impl AsRef<Path>, id: &str) -> Result<RgbImage> {
    formats::read_rgb(root.as_ref().join(format!("{id}.png")))
}

/// Dark channel, LDDCV map and mask of one defocused image.
#[derive(Debug, Clone)]
pub struct CueSet {
    pub dark: ScalarMap,
    pub cues: LddcvMap,
    pub mask: ValidityMask,
}

pub fn extract_cues(defocused: &RgbImage, window: usize, threshold: f64) -> Result<CueSet> {
    let dark = dark_channel(defocused, window)?;
    let cues = lddcv(&dark, defocused)?;
    let mask = validity_mask(&cues, threshold)?;
    Ok(CueSet { dark, cues, mask })
}

/// Settings shared by batch runs.
#[derive(Debug, Clone, Serialize)]
pub struct BatchOptions {
    pub camera: CameraParams,
    pub truncation: f64,
    pub window: usize,
    pub threshold: f64,
    pub depth: DepthEncoding,
    pub jobs: usize,
    pub fail_fast: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            camera: CameraParams::default(),
            truncation: dfd_core::synth::DEFAULT_TRUNCATION,
            window: dfd_core::dark_channel::DEFAULT_WINDOW,
            threshold: dfd_core::cues::DEFAULT_THRESHOLD,
            depth: DepthEncoding::default(),
            jobs: 1,
            fail_fast: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleState {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleStatus {
    pub id: String,
    pub status: SampleState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub total: usize,
    pub ok: usize,
    pub failed: usize,
    pub skipped: usize,
    pub samples: Vec<SampleStatus>,
}

impl DatasetSummary {
    pub fn is_complete(&self) -> bool {
        self.ok == self.total
    }
}

pub fn output_path(out: &Path, id: &str, suffix: &str) -> PathBuf {
    out.join(format!("{id}.{suffix}"))
}

fn write_cues(out: &Path, id: &str, set: &CueSet, written: &mut Vec<PathBuf>) -> Result<()> {
    let p = output_path(out, id, "dark.raw");
    formats::write_map(&set.dark, &p, MapFormat::RawF32)?;
    written.push(p);
    let p = output_path(out, id, "lddcv.raw");
    formats::write_lddcv_raw(&set.cues, &p)?;
    written.push(p);
    let p = output_path(out, id, "mask.png");
    formats::write_mask_png(&set.mask, &p)?;
    written.push(p);
    Ok(())
}

fn synth_one(root: &Path, id: &str, opts: &BatchOptions, out: &Path) -> Result<Vec<PathBuf>> {
    let pair = load_pair(root, id, &opts.depth)?;
    let radii = blur_radius(&pair.depth, &opts.camera);
    let defocused = synthesize_with_radii(&pair.rgb, &radii, opts.truncation)?;
    let cues = extract_cues(&defocused, opts.window, opts.threshold)?;

    let mut written = Vec::with_capacity(5);
    let p = output_path(out, id, "defocus.png");
    formats::write_rgb_png16(&defocused, &p)?;
    written.push(p);
    let p = output_path(out, id, "radius.raw");
    formats::write_map(&radii, &p, MapFormat::RawF32)?;
    written.push(p);
    write_cues(out, id, &cues, &mut written)?;
    Ok(written)
}

fn cues_one(root: &Path, id: &str, opts: &BatchOptions, out: &Path) -> Result<Vec<PathBuf>> {
    let img = load_defocused(root, id)?;
    let cues = extract_cues(&img, opts.window, opts.threshold)?;
    let mut written = Vec::with_capacity(3);
    write_cues(out, id, &cues, &mut written)?;
    Ok(written)
}

fn run_batch<F>(split: &SplitList, opts: &BatchOptions, work: F) -> Result<DatasetSummary>
where
    F: Fn(&str) -> Result<Vec<PathBuf>> + Sync,
{
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build().expect("failed to start worker pool");
    let stop = AtomicBool::new(false);
    let results: Vec<Option<Result<Vec<PathBuf>>>> = pool.install(|| {
        split
            .ids()
            .par_iter()
            .map(|id| {
                if stop.load(Ordering::Relaxed) {
                    return None;
                }
                let r = work(id);
                if r.is_err() && opts.fail_fast {
                    stop.store(true, Ordering::Relaxed);
                }
                Some(r)
            })
            .collect()
    });

    let mut samples = Vec::with_capacity(results.len());
    let mut first_err = None;
    for (id, r) in split.ids().iter().zip(results) {
        let status = match r {
            None => SampleStatus { id: id.clone(), status: SampleState::Skipped, error: None, outputs: vec![] },
            Some(Ok(outputs)) => SampleStatus { id: id.clone(), status: SampleState::Ok, error: None, outputs },
            Some(Err(e)) => {
                let msg = e.to_string();
                if first_err.is_none() {
                    first_err = Some(Error::Sample { id: id.clone(), source: Box::new(e) });
                }
                SampleStatus { id: id.clone(), status: SampleState::Failed, error: Some(msg), outputs: vec![] }
            }
        };
        samples.push(status);
    }
    if opts.fail_fast {
        if let Some(e) = first_err {
            return Err(e);
        }
    }
    let count = |s: SampleState| samples.iter().filter(|x| x.status == s).count();
    Ok(DatasetSummary {
        total: samples.len(),
        ok: count(SampleState::Ok),
        failed: count(SampleState::Failed),
        skipped: count(SampleState::Skipped),
        samples,
    })
}

/// Synthesizes defocus and cue maps for every id in `split`.
///
/// Failures are recorded per sample and the run continues, unless
/// `opts.fail_fast` is set, in which case the first failure (in split order)
/// is returned as an error. Outputs do not depend on `opts.jobs`.
pub fn synthesize_dataset(
    root: impl AsRef<Path>,
    split: &SplitList,
    opts: &BatchOptions,
    out: impl AsRef<Path>,
) -> Result<DatasetSummary> {
    let (root, out) = (root.as_ref(), out.as_ref());
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    run_batch(split, opts, |id| synth_one(root, id, opts, out))
}

/// Cue extraction only, for already defocused images at `<root>/<id>.png`.
pub fn extract_dataset_cues(
    root: impl AsRef<Path>,
    split: &SplitList,
    opts: &BatchOptions,
    out: impl AsRef<Path>,
) -> Result<DatasetSummary> {
    let (root, out) = (root.as_ref(), out.as_ref());
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    run_batch(split, opts, |id| cues_one(root, id, opts, out))
}
