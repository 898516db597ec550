//! Unnormalized DCT-II and its inverse.
//!
//! `X[k] = Σ_{i=0}^{L-1} x[i] · cos(π/L · (i + ½) · k)`
//!
//! The 2-D transform applies it along every row, then along every column.
//! Direct O(L²) evaluation with a cosine table indexed by `(2i+1)·k mod 4L`,
//! which keeps arguments reduced and the result identical for any thread count.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::par::for_each_row;
use crate::raster::ScalarMap;

/// Precomputed cosine table for one transform length.
#[derive(Debug, Clone)]
pub struct DctPlan {
    len: usize,
    // cos(π·m / (2L)) for m in 0..4L
    table: Vec<f64>,
}

impl DctPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be >= 1");
        let step = PI / (2 * len) as f64;
        let table = (0..4 * len).map(|m| libm::cos(step * m as f64)).collect();
        Self { len, table }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn cos(&self, i: usize, k: usize) -> f64 {
        self.table[((2 * i + 1) * k) % (4 * self.len)]
    }

    /// Forward transform of one signal into `out`.
    pub fn forward_into(&self, input: &[f64], out: &mut [f64]) {
        assert_eq!(input.len(), self.len);
        assert_eq!(out.len(), self.len);
        for (k, o) in out.iter_mut().enumerate() {
            *o = input.iter().enumerate().map(|(i, &x)| x * self.cos(i, k)).sum();
        }
    }

    /// Inverse: `x[i] = (X[0] + 2·Σ_{k≥1} X[k]·cos(π/L·(i+½)·k)) / L`.
    pub fn inverse_into(&self, coeffs: &[f64], out: &mut [f64]) {
        assert_eq!(coeffs.len(), self.len);
        assert_eq!(out.len(), self.len);
        let l = self.len as f64;
        for (i, o) in out.iter_mut().enumerate() {
            let tail: f64 = coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * self.cos(i, k)).sum();
            *o = (coeffs[0] + 2.0 * tail) / l;
        }
    }
}

/// 1-D forward transform.
pub fn dct_ii(input: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; input.len()];
    if !input.is_empty() {
        DctPlan::new(input.len()).forward_into(input, &mut out);
    }
    out
}

/// 1-D inverse of [`dct_ii`].
pub fn idct_ii(coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    if !coeffs.is_empty() {
        DctPlan::new(coeffs.len()).inverse_into(coeffs, &mut out);
    }
    out
}

fn separable(map: &ScalarMap, apply: impl Fn(&DctPlan, &[f64], &mut [f64]) + Sync + Send) -> ScalarMap {
    let (w, h) = map.dims();
    let row_plan = DctPlan::new(w);
    let col_plan = DctPlan::new(h);

    let src = map.data();
    let mut rows = vec![0.0; w * h];
    for_each_row(&mut rows, w, |y, out| apply(&row_plan, &src[y * w..(y + 1) * w], out));

    // Columns: transpose, transform as rows, transpose back.
    let mut cols_t = vec![0.0; w * h];
    for_each_row(&mut cols_t, h, |x, out| {
        let column: Vec<f64> = (0..h).map(|y| rows[y * w + x]).collect();
        apply(&col_plan, &column, out);
    });
    let mut out = vec![0.0; w * h];
    for_each_row(&mut out, w, |y, row| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = cols_t[x * h + y];
        }
    });
    ScalarMap::from_parts_unchecked(w, h, out)
}

/// 2-D unnormalized DCT-II (rows, then columns). Output has the input's shape;
/// coefficient `(kx, ky)` sits at pixel `(kx, ky)`.
pub fn dct2(map: &ScalarMap) -> ScalarMap {
    separable(map, |p, i, o| p.forward_into(i, o))
}

/// Inverse of [`dct2`].
pub fn idct2(coeffs: &ScalarMap) -> ScalarMap {
    separable(coeffs, |p, i, o| p.inverse_into(i, o))
}
