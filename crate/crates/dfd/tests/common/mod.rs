//! Synthetic NYU-style fixtures.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dfd::formats::{self, MapFormat};
use dfd_core::{DepthMap, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform noise texture.
pub fn noise_image(seed: u64, w: usize, h: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

/// Random tinted blocks with fine per-pixel noise on top.
pub fn textured_scene(seed: u64, w: usize, h: usize, block: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bw = w.div_ceil(block);
    let bh = h.div_ceil(block);
    let blocks: Vec<[f64; 3]> = (0..bw * bh)
        .map(|_| {
            let base: f64 = rng.gen_range(0.2..0.8);
            [0, 1, 2].map(|_| base + rng.gen_range(-0.1..0.1))
        })
        .collect();
    RgbImage::from_fn(w, h, |x, y| {
        let b = blocks[(y / block) * bw + x / block];
        b.map(|v| (v + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0))
    })
    .unwrap()
}

/// Left half at `near`, right half at `far`.
pub fn two_level_depth(w: usize, h: usize, near: f64, far: f64) -> DepthMap {
    DepthMap::from_fn(w, h, |x, _| if x < w / 2 { near } else { far }).unwrap()
}

/// Smooth ramp from 0.5 m to 9.5 m with a few millimeter-PNG holes.
pub fn ramp_depth(seed: u64, w: usize, h: usize) -> DepthMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let t = (x + y) as f64 / (w + h) as f64;
            let d = ((0.5 + 9.0 * t + rng.gen_range(-0.05..0.05)) * 1000.0).round() / 1000.0;
            data.push(d);
            valid.push(rng.gen::<f64>() > 0.02);
        }
    }
    DepthMap::with_validity(w, h, data, valid).unwrap()
}

pub fn write_pair(root: &Path, id: &str, rgb: &RgbImage, depth: &DepthMap) {
    formats::write_rgb_png16(rgb, dfd::dataset::rgb_path(root, id)).unwrap();
    formats::write_map(depth, dfd::dataset::depth_path(root, id), MapFormat::Png16 { scale: 1000.0 }).unwrap();
}

/// Writes `n` random pairs named `s000`, `s001`, ... and a split file listing them.
pub fn nyu_fixture(root: &Path, n: usize, w: usize, h: usize) -> PathBuf {
    let mut ids = Vec::new();
    for i in 0..n {
        let id = format!("s{i:03}");
        write_pair(root, &id, &noise_image(i as u64, w, h), &ramp_depth(1000 + i as u64, w, h));
        ids.push(id);
    }
    let split = root.join("split.txt");
    std::fs::write(&split, ids.join("\n") + "\n").unwrap();
    split
}

pub fn dfd_bin() -> &'static str {
    env!("CARGO_BIN_EXE_dfd")
}
