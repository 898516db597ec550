use dfd_core::synth::{gaussian_psf, quantize_radius, radius_at, synthesize_with_radii, DEFAULT_TRUNCATION};
use dfd_core::{
    blur_cue_profile, dark_channel, lddcv, synthesize_defocus, CameraParams, DepthMap, RgbImage, ScalarMap,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, w: usize, h: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

fn blocks(seed: u64, w: usize, h: usize, block: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bw = w.div_ceil(block);
    let vals: Vec<[f64; 3]> = (0..bw * h.div_ceil(block))
        .map(|_| {
            let base: f64 = rng.gen_range(0.2..0.8);
            [0, 1, 2].map(|_| base + rng.gen_range(-0.1..0.1))
        })
        .collect();
    RgbImage::from_fn(w, h, |x, y| {
        let b = vals[(y / block) * bw + x / block];
        b.map(|v| (v + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0))
    })
    .unwrap()
}

/// Single-kernel convolution at one pixel with border renormalization.
fn dense_at(img: &RgbImage, x: usize, y: usize, r: f64) -> [f64; 3] {
    let psf = gaussian_psf(quantize_radius(r), DEFAULT_TRUNCATION).unwrap();
    let h = psf.half_width() as isize;
    let (mut acc, mut z) = ([0.0; 3], 0.0);
    for dy in -h..=h {
        for dx in -h..=h {
            let (sx, sy) = (x as isize + dx, y as isize + dy);
            if sx < 0 || sy < 0 || sx >= img.width() as isize || sy >= img.height() as isize {
                continue;
            }
            let k = psf.weight(dx, dy);
            let p = img.pixel(sx as usize, sy as usize);
            for c in 0..3 {
                acc[c] += k * p[c];
            }
            z += k;
        }
    }
    acc.map(|a| (a / z).clamp(0.0, 1.0))
}

#[test]
fn piecewise_depth_matches_per_region_oracle() {
    let cam = CameraParams::default();
    let img = noise(1, 60, 20);
    let depth = DepthMap::from_fn(60, 20, |x, _| if x < 30 { 1.4 } else { 4.0 }).unwrap();
    let out = synthesize_defocus(&img, &depth, &cam, DEFAULT_TRUNCATION).unwrap();
    for y in 0..20 {
        for x in 0..60 {
            let d = if x < 30 { 1.4 } else { 4.0 };
            let want = dense_at(&img, x, y, radius_at(d, &cam).unwrap());
            for (a, b) in out.pixel(x, y).iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "({x},{y})");
            }
        }
    }
}

#[test]
fn invalid_depth_pixels_pass_through() {
    let cam = CameraParams::default();
    let img = noise(2, 10, 10);
    let mut valid = vec![true; 100];
    valid[55] = false;
    let depth = DepthMap::with_validity(10, 10, vec![3.0; 100], valid).unwrap();
    let out = synthesize_defocus(&img, &depth, &cam, DEFAULT_TRUNCATION).unwrap();
    assert_eq!(out.pixel(5, 5), img.pixel(5, 5));
}

#[test]
fn two_region_profile_orders_bins() {
    let (w, h) = (96, 64);
    let img = blocks(3, w, h, 8);
    let radii = ScalarMap::from_fn(w, h, |x, _| if x < w / 2 { 0.0 } else { 4.0 }).unwrap();
    let blurred = synthesize_with_radii(&img, &radii, DEFAULT_TRUNCATION).unwrap();
    let cues = lddcv(&dark_channel(&blurred, 15).unwrap(), &blurred).unwrap();
    let profile = blur_cue_profile(&cues, &radii, 4).unwrap();
    let low = &profile.bins[0];
    let high = &profile.bins[3];
    assert_eq!(low.count + high.count, w * h);
    assert!(high.mean_ldcv.unwrap() < low.mean_ldcv.unwrap());
    assert!(high.mean_ldv.unwrap() < low.mean_ldv.unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn output_within_input_range(seed in any::<u64>(), r in 0.0f64..4.0) {
        let img = noise(seed, 12, 9);
        let radii = ScalarMap::filled(12, 9, r).unwrap();
        let out = synthesize_with_radii(&img, &radii, DEFAULT_TRUNCATION).unwrap();
        for c in 0..3 {
            let ch = img.data().iter().skip(c).step_by(3);
            let lo = ch.clone().cloned().fold(f64::INFINITY, f64::min);
            let hi = ch.cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in out.data().iter().skip(c).step_by(3) {
                prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn commutes_with_horizontal_flip(seed in any::<u64>(), near in 0.3f64..1.0, far in 1.0f64..9.0) {
        let cam = CameraParams::default();
        let img = noise(seed, 14, 10);
        let depth = DepthMap::from_fn(14, 10, |x, y| if (x + y) % 3 == 0 { near } else { far }).unwrap();
        let a = synthesize_defocus(&img, &depth, &cam, DEFAULT_TRUNCATION).unwrap().flip_horizontal();
        let b = synthesize_defocus(&img.flip_horizontal(), &depth.flip_horizontal(), &cam, DEFAULT_TRUNCATION).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
