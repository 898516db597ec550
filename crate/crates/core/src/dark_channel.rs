//! Dark channel: the minimum over color channels and a square window.

use alloc::vec;

use crate::error::{Error, Result};
use crate::par::for_each_row;
use crate::raster::{RgbImage, ScalarMap};

/// Window side used when none is given.
pub const DEFAULT_WINDOW: usize = 15;

/// Dark channel of `img` over a `window`×`window` neighborhood.
///
/// Windows are clipped to the image; the minimum runs over in-bounds pixels
/// only. Min is separable over a rectangle, so this is a channel minimum
/// followed by a horizontal and a vertical running-window minimum.
pub fn dark_channel(img: &RgbImage, window: usize) -> Result<ScalarMap> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidWindow(window));
    }
    let (w, h) = img.dims();
    let half = window / 2;
    let base = img.channel_min();
    if half == 0 {
        return Ok(base);
    }
    let src = base.data();

    let mut horiz = vec![0.0; w * h];
    for_each_row(&mut horiz, w, |y, row| {
        let line = &src[y * w..(y + 1) * w];
        for (x, out) in row.iter_mut().enumerate() {
            let lo = x.saturating_sub(half);
            let hi = (x + half).min(w - 1);
            *out = line[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
        }
    });

    let mut out = vec![0.0; w * h];
    for_each_row(&mut out, w, |y, row| {
        let lo = y.saturating_sub(half);
        let hi = (y + half).min(h - 1);
        row.copy_from_slice(&horiz[lo * w..(lo + 1) * w]);
        for yy in lo + 1..=hi {
            for (o, &v) in row.iter_mut().zip(&horiz[yy * w..(yy + 1) * w]) {
                *o = o.min(v);
            }
        }
    });
    Ok(ScalarMap::from_parts_unchecked(w, h, out))
}
