//! One-dimensional Gaussian kernel density estimation.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

/// Points in the default evaluation grid.
pub const DEFAULT_GRID_POINTS: usize = 512;
/// Default grid padding beyond the sample range, in bandwidths.
pub const DEFAULT_GRID_PAD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KdeResult {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// Sample standard deviation with the `n − 1` denominator.
pub fn sample_std(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mean = pairwise_sum(samples) / n as f64;
    let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    Ok(libm::sqrt(pairwise_sum(&dev) / (n - 1) as f64))
}

/// Silverman's rule of thumb, `h = (4σ̂⁵ / 3n)^(1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let sigma = sample_std(samples)?;
    if !(sigma > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let n = samples.len() as f64;
    Ok(sigma * libm::pow(4.0 / (3.0 * n), 0.2))
}

/// `n` evenly spaced points covering `[min − pad·h, max + pad·h]`.
pub fn default_grid(samples: &[f64], bandwidth: f64, n: usize, pad: f64) -> Vec<f64> {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - pad * bandwidth;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad * bandwidth;
    if n == 1 {
        return alloc::vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// Evaluates `(1 / (n·h·√(2π))) · Σ exp(−(g − xᵢ)² / 2h²)` at each grid point.
pub fn gaussian_kde(samples: &[f64], grid: &[f64], bandwidth: f64) -> Result<KdeResult> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples(0));
    }
    if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    let norm = 1.0 / (samples.len() as f64 * bandwidth * libm::sqrt(2.0 * PI));
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut terms = Vec::with_capacity(samples.len());
    let density = grid
        .iter()
        .map(|&g| {
            terms.clear();
            terms.extend(samples.iter().map(|&x| libm::exp(-(g - x) * (g - x) * inv)));
            norm * pairwise_sum(&terms)
        })
        .collect();
    Ok(KdeResult { grid: grid.to_vec(), density, bandwidth })
}

/// Silverman bandwidth on the default 512-point grid.
pub fn kde_auto(samples: &[f64]) -> Result<KdeResult> {
    let h = silverman_bandwidth(samples)?;
    let grid = default_grid(samples, h, DEFAULT_GRID_POINTS, DEFAULT_GRID_PAD);
    gaussian_kde(samples, &grid, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
        x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }

    #[test]
    fn silverman_two_points() {
        let h = silverman_bandwidth(&[0.0, 1.0]).unwrap();
        assert!((sample_std(&[0.0, 1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        // (2/3)^(1/5) · √½
        assert!((h - 0.652033).abs() < 1e-5, "{h}");
        assert!((h - (2.0f64 / 3.0).powf(0.2) * 0.5f64.sqrt()).abs() < 1e-14);
        assert!((silverman_bandwidth(&[0.0, 3.0]).unwrap() - 3.0 * h).abs() < 1e-12);
    }

    #[test]
    fn silverman_errors() {
        assert_eq!(silverman_bandwidth(&[1.0]), Err(Error::TooFewSamples(1)));
        assert_eq!(silverman_bandwidth(&[2.0, 2.0, 2.0]), Err(Error::ZeroVariance));
    }

    #[test]
    fn single_sample_peak() {
        let k = gaussian_kde(&[0.0], &[0.0], 1.0).unwrap();
        assert!((k.density[0] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((k.density[0] - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn input_validation() {
        assert_eq!(gaussian_kde(&[0.0], &[0.0], 0.0), Err(Error::InvalidBandwidth(0.0)));
        assert_eq!(gaussian_kde(&[0.0], &[1.0, 1.0], 1.0), Err(Error::InvalidGrid));
        assert_eq!(gaussian_kde(&[0.0], &[], 1.0), Err(Error::InvalidGrid));
        assert_eq!(gaussian_kde(&[], &[0.0], 1.0), Err(Error::TooFewSamples(0)));
    }

    #[test]
    fn integrates_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [10, 100, 1000] {
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..10.0)).collect();
            let h = silverman_bandwidth(&s).unwrap();
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min) - 6.0 * h;
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 6.0 * h;
            let step = h / 20.0;
            let grid: Vec<f64> = (0..).map(|i| lo + step * i as f64).take_while(|&g| g <= hi).collect();
            let k = gaussian_kde(&s, &grid, h).unwrap();
            assert!((trapezoid(&k.grid, &k.density) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn default_grid_spans_padded_range() {
        let k = kde_auto(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(k.grid.len(), DEFAULT_GRID_POINTS);
        assert!((k.grid[0] - (1.0 - 3.0 * k.bandwidth)).abs() < 1e-12);
        assert_eq!(*k.grid.last().unwrap(), 4.0 + 3.0 * k.bandwidth);
        assert!(k.density.iter().all(|&d| d >= 0.0));
    }

    proptest! {
        #[test]
        fn mirror_translation_permutation(seed in any::<u64>(), c in -5.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s: Vec<f64> = (0..17).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let grid: Vec<f64> = (0..41).map(|i| -6.0 + 0.3 * i as f64).collect();
            let h = 0.4;
            let base = gaussian_kde(&s, &grid, h).unwrap();

            let mirrored: Vec<f64> = s.iter().map(|x| -x).collect();
            let mgrid: Vec<f64> = grid.iter().rev().map(|g| -g).collect();
            let m = gaussian_kde(&mirrored, &mgrid, h).unwrap();
            for (a, b) in base.density.iter().zip(m.density.iter().rev()) {
                prop_assert!((a - b).abs() < 1e-12);
            }

            let shifted: Vec<f64> = s.iter().map(|x| x + c).collect();
            let sgrid: Vec<f64> = grid.iter().map(|g| g + c).collect();
            let t = gaussian_kde(&shifted, &sgrid, h).unwrap();
            for (a, b) in base.density.iter().zip(&t.density) {
                prop_assert!((a - b).abs() < 1e-9);
            }

            let mut perm = s.clone();
            perm.reverse();
            let p = gaussian_kde(&perm, &grid, h).unwrap();
            for (a, b) in base.density.iter().zip(&p.density) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_point_grid_is_midpoint() {
        assert_eq!(vec![1.0], default_grid(&[1.0, 1.0], 1.0, 1, 0.0));
    }
}
