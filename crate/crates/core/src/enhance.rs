//! Ridge/valley contrast enhancement and binarization.

use crate::error::{Error, Result};
use crate::imgops::{BinaryImage, GrayImage};

/// Classic histogram equalization:
/// `round(255 * (cdf(v) - cdf_min) / (n - cdf_min))`.
pub fn equalize_histogram(img: &GrayImage) -> GrayImage {
    let mut hist = [0usize; 256];
    for &v in img.as_raw() {
        hist[v as usize] += 1;
    }
    let n = img.as_raw().len();
    let cdf_min = hist.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if n == cdf_min {
        return img.clone();
    }
    let mut lut = [0u8; 256];
    let mut cdf = 0;
    for (v, &c) in hist.iter().enumerate() {
        cdf += c;
        let mapped = (cdf.saturating_sub(cdf_min)) as f64 * 255.0 / (n - cdf_min) as f64;
        lut[v] = mapped.round().clamp(0.0, 255.0) as u8;
    }
    img.map(|v| lut[v as usize])
}

/// Clipped, redistributed histogram of a tile turned into a monotone
/// transfer function. Kept unrounded so that tiles of different sizes map a
/// shared value identically and rounding happens once, after blending.
fn tile_lut(img: &GrayImage, x0: usize, x1: usize, y0: usize, y1: usize, clip_limit: f64) -> [f64; 256] {
    let mut hist = [0f64; 256];
    for y in y0..y1 {
        for x in x0..x1 {
            hist[img.get(x, y) as usize] += 1.0;
        }
    }
    let n = ((x1 - x0) * (y1 - y0)) as f64;
    let limit = (clip_limit * n / 256.0).max(1.0);
    let mut excess = 0.0;
    for c in hist.iter_mut() {
        if *c > limit {
            excess += *c - limit;
            *c = limit;
        }
    }
    let share = excess / 256.0;
    let mut lut = [0f64; 256];
    let mut cdf = 0.0;
    for (v, &c) in hist.iter().enumerate() {
        cdf += c + share;
        lut[v] = cdf * 255.0 / n;
    }
    lut
}

/// Contrast-limited adaptive histogram equalization.
///
/// The image is split into a grid of roughly `tile`-sized blocks, each block
/// gets a clipped-histogram transfer function, and every pixel blends the
/// four nearest block transfers bilinearly. Images smaller than one tile in
/// either direction fall back to [`equalize_histogram`].
pub fn contrast_enhance(img: &GrayImage, clip_limit: f64, tile: usize) -> Result<GrayImage> {
    if tile < 8 {
        return Err(Error::InvalidArgument(format!("tile must be at least 8, got {tile}")));
    }
    if !(clip_limit >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "clip limit must be at least 1, got {clip_limit}"
        )));
    }
    let (w, h) = img.dims();
    if w < tile || h < tile {
        return Ok(equalize_histogram(img));
    }
    let (nx, ny) = (w / tile, h / tile);
    let bound = |i: usize, n: usize, len: usize| i * len / n;
    let mut luts = Vec::with_capacity(nx * ny);
    for ty in 0..ny {
        for tx in 0..nx {
            luts.push(tile_lut(
                img,
                bound(tx, nx, w),
                bound(tx + 1, nx, w),
                bound(ty, ny, h),
                bound(ty + 1, ny, h),
                clip_limit,
            ));
        }
    }
    let (tw, th) = (w as f64 / nx as f64, h as f64 / ny as f64);
    let locate = |p: usize, size: f64, n: usize| {
        let f = ((p as f64 + 0.5) / size - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = f.floor() as usize;
        (i0, (i0 + 1).min(n - 1), f - i0 as f64)
    };
    Ok(GrayImage::from_fn(w, h, |x, y| {
        let (x0, x1, wx) = locate(x, tw, nx);
        let (y0, y1, wy) = locate(y, th, ny);
        let v = img.get(x, y) as usize;
        let at = |tx: usize, ty: usize| luts[ty * nx + tx][v];
        let top = at(x0, y0) * (1.0 - wx) + at(x1, y0) * wx;
        let bottom = at(x0, y1) * (1.0 - wx) + at(x1, y1) * wx;
        (top * (1.0 - wy) + bottom * wy).round().clamp(0.0, 255.0) as u8
    }))
}

/// Summed-area table with one row/column of zero padding.
pub(crate) struct IntegralImage {
    width: usize,
    sums: Vec<u64>,
}

impl IntegralImage {
    pub(crate) fn new(img: &GrayImage) -> Self {
        let (w, h) = img.dims();
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += img.get(x, y) as u64;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { width: w, sums }
    }

    /// Sum over `[x0, x1) x [y0, y1)`.
    pub(crate) fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u64 {
        let s = self.width + 1;
        self.sums[y1 * s + x1] + self.sums[y0 * s + x0] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
    }
}

/// Adaptive mean threshold. A pixel is foreground (ridge) iff it is darker
/// than the mean of its `window` x `window` neighbourhood (clipped to the
/// image) minus `offset`.
pub fn binarize(img: &GrayImage, window: usize, offset: f64) -> Result<BinaryImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "binarize window must be odd and at least 3, got {window}"
        )));
    }
    let (w, h) = img.dims();
    let half = window / 2;
    let integral = IntegralImage::new(img);
    Ok(BinaryImage::from_fn(w, h, |x, y| {
        let (x0, x1) = (x.saturating_sub(half), (x + half + 1).min(w));
        let (y0, y1) = (y.saturating_sub(half), (y + half + 1).min(h));
        let n = ((x1 - x0) * (y1 - y0)) as f64;
        let mean = integral.sum(x0, y0, x1, y1) as f64 / n;
        (img.get(x, y) as f64) < mean - offset
    }))
}
