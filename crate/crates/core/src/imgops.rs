//! Raster types and the pixel-level kernels every pipeline stage builds on.

use crate::error::{Error, Result};

/// 8-bit RGB raster, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// 8-bit intensity raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// Boolean raster, row-major. `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

fn check_dims(width: usize, height: usize, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if len != width * height * channels {
        return Err(Error::InvalidArgument(format!(
            "buffer of {len} values does not fit {width}x{height}x{channels}"
        )));
    }
    Ok(())
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.put(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_raw(width, height, data).expect("dimensions checked by construction")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.get(x, y)
    }

    pub fn put(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_raw(width, height, data).expect("dimensions checked by construction")
    }

    /// Parses rows of `'1'`/`'#'` (foreground) and anything else (background).
    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        Self::from_fn(width, height, |x, y| matches!(rows[y].as_bytes()[x], b'1' | b'#'))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    pub fn get_or_false(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn put(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| !v).collect(),
        }
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Renders foreground as 0 (black) and background as 255.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v { 0 } else { 255 }).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| if self.get(x, y) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

/// A colour in the hexcone model: hue in degrees `[0, 360)`, saturation and
/// value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeShape {
    Square,
    Disk,
}

/// Flat structuring element centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
    shape: SeShape,
}

impl StructuringElement {
    pub fn new(radius: usize, shape: SeShape) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidArgument(
                "structuring element radius must be at least 1".into(),
            ));
        }
        Ok(Self { radius, shape })
    }

    pub fn square(radius: usize) -> Result<Self> {
        Self::new(radius, SeShape::Square)
    }

    pub fn disk(radius: usize) -> Result<Self> {
        Self::new(radius, SeShape::Disk)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    /// Offsets `(dx, dy)` covered by the element. Symmetric under negation.
    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let r = self.radius as i64;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if self.shape == SeShape::Square || dx * dx + dy * dy <= r * r {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// BT.601 luma, rounded.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let data = img
        .pixels()
        .map(|[r, g, b]| {
            let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return HsvPixel { h: 0.0, s, v };
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvPixel { h, s, v }
}

pub fn hsv_to_rgb(p: HsvPixel) -> [u8; 3] {
    let c = p.v * p.s;
    let hp = p.h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = p.v - c;
    let to_byte = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_byte(r), to_byte(g), to_byte(b)]
}

/// Normalized 1-D Gaussian taps for half-width `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gaussian sigma must be positive, got {sigma}"
        )));
    }
    let kernel = gaussian_kernel(sigma);
    let half = (kernel.len() / 2) as i64;
    let (w, h) = img.dims();

    let mut horizontal = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                acc += wt * img.get_clamped(x as i64 + k as i64 - half, y as i64) as f64;
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut data = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                let yy = (y as i64 + k as i64 - half).clamp(0, h as i64 - 1) as usize;
                acc += wt * horizontal[yy * w + x];
            }
            data[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage::from_raw(w, h, data)
}

fn morph(img: &BinaryImage, se: &StructuringElement, erode: bool) -> BinaryImage {
    let offsets = se.offsets();
    let (w, h) = img.dims();
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut hit = erode;
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let v = img.get(nx as usize, ny as usize);
                if erode && !v {
                    hit = false;
                    break;
                }
                if !erode && v {
                    hit = true;
                    break;
                }
            }
            out.put(x, y, hit);
        }
    }
    out
}

/// True where every in-bounds neighbourhood pixel is true.
pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    morph(img, se, true)
}

/// True where any in-bounds neighbourhood pixel is true.
pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    morph(img, se, false)
}

pub fn open(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate(&erode(img, se), se)
}

pub fn close(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode(&dilate(img, se), se)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(0, -1), (1, 0), (0, 1), (-1, 0)],
            Connectivity::Eight => &[
                (0, -1),
                (1, -1),
                (1, 0),
                (1, 1),
                (0, 1),
                (-1, 1),
                (-1, 0),
                (-1, -1),
            ],
        }
    }
}

/// Labels foreground components in row-major discovery order. Returns the
/// per-pixel label (0 = background) and the pixel count of each label.
pub fn label_components(img: &BinaryImage, connectivity: Connectivity) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = img.dims();
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !img.data[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        let mut size = 0;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if img.data[j] && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

pub fn count_components(img: &BinaryImage, connectivity: Connectivity) -> usize {
    label_components(img, connectivity).1.len()
}

/// Keeps only the largest connected component. Ties go to the component whose
/// first pixel comes earliest in row-major order.
pub fn largest_component(img: &BinaryImage, connectivity: Connectivity) -> BinaryImage {
    let (labels, sizes) = label_components(img, connectivity);
    let mut best: Option<(u32, usize)> = None;
    for (i, &size) in sizes.iter().enumerate() {
        if best.map_or(true, |(_, s)| size > s) {
            best = Some((i as u32 + 1, size));
        }
    }
    let keep = best.map_or(0, |(l, _)| l);
    BinaryImage {
        width: img.width,
        height: img.height,
        data: labels.iter().map(|&l| l != 0 && l == keep).collect(),
    }
}

/// Bilinear resample of an RGB image to `new_w` x `new_h` (pixel-centre aligned).
pub fn resize_bilinear(img: &RgbImage, new_w: usize, new_h: usize) -> RgbImage {
    let sx = img.width as f64 / new_w as f64;
    let sy = img.height as f64 / new_h as f64;
    let mut out = RgbImage::new(new_w, new_h);
    for y in 0..new_h {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let wy = fy - y0 as f64;
        for x in 0..new_w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let wx = fx - x0 as f64;
            let (a, b, c, d) = (img.get(x0, y0), img.get(x1, y0), img.get(x0, y1), img.get(x1, y1));
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let top = a[ch] as f64 * (1.0 - wx) + b[ch] as f64 * wx;
                let bottom = c[ch] as f64 * (1.0 - wx) + d[ch] as f64 * wx;
                px[ch] = (top * (1.0 - wy) + bottom * wy).round().clamp(0.0, 255.0) as u8;
            }
            out.put(x, y, px);
        }
    }
    out
}

/// Downscales so the longer side equals `max_side`. Smaller images are
/// returned unchanged.
pub fn downscale_to_max(img: &RgbImage, max_side: usize) -> RgbImage {
    let longest = img.width.max(img.height);
    if longest <= max_side {
        return img.clone();
    }
    let scale = max_side as f64 / longest as f64;
    let w = ((img.width as f64 * scale).round() as usize).max(1);
    let h = ((img.height as f64 * scale).round() as usize).max(1);
    resize_bilinear(img, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xorshift64Star;
    use proptest::prelude::*;

    fn random_binary(seed: u64, w: usize, h: usize, p: f64) -> BinaryImage {
        let mut rng = Xorshift64Star::new(seed);
        BinaryImage::from_fn(w, h, |_, _| rng.next_f64() < p)
    }

    #[test]
    fn grayscale_examples() {
        let img = RgbImage::from_raw(3, 1, vec![0, 0, 0, 255, 255, 255, 255, 0, 0]).unwrap();
        assert_eq!(to_grayscale(&img).as_raw(), &[0, 255, 76]);
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(RgbImage::from_raw(2, 2, vec![0; 11]).is_err());
        assert!(GrayImage::from_raw(0, 2, vec![]).is_err());
    }

    #[test]
    fn hsv_examples() {
        let red = rgb_to_hsv(255, 0, 0);
        assert_eq!((red.h, red.s, red.v), (0.0, 1.0, 1.0));
        let grey = rgb_to_hsv(128, 128, 128);
        assert_eq!((grey.h, grey.s), (0.0, 0.0));
        assert!((grey.v - 128.0 / 255.0).abs() < 1e-12);
        let cyan = rgb_to_hsv(0, 255, 255);
        assert_eq!((cyan.h, cyan.s, cyan.v), (180.0, 1.0, 1.0));
    }

    #[test]
    fn hsv_round_trip_exhaustive_grid() {
        for r in (0..=255).step_by(5) {
            for g in (0..=255).step_by(7) {
                for b in (0..=255).step_by(3) {
                    let back = hsv_to_rgb(rgb_to_hsv(r as u8, g as u8, b as u8));
                    for (a, b) in [r, g, b].iter().zip(back) {
                        assert!((*a as i32 - b as i32).abs() <= 1);
                    }
                }
            }
        }
    }

    #[test]
    fn blur_rejects_non_positive_sigma() {
        let img = GrayImage::filled(4, 4, 9);
        assert!(gaussian_blur(&img, 0.0).is_err());
        assert!(gaussian_blur(&img, -1.0).is_err());
    }

    #[test]
    fn blur_preserves_constants() {
        let img = GrayImage::filled(17, 9, 131);
        for sigma in [0.5, 1.0, 2.7] {
            assert_eq!(gaussian_blur(&img, sigma).unwrap(), img);
        }
    }

    #[test]
    fn blur_impulse_response_is_the_kernel() {
        let mut img = GrayImage::new(21, 21);
        img.put(10, 10, 255);
        let out = gaussian_blur(&img, 1.0).unwrap();
        let k = gaussian_kernel(1.0);
        assert_eq!(k.len(), 7);
        for y in 0..21 {
            for x in 0..21 {
                let (dx, dy) = (x as i64 - 10, y as i64 - 10);
                let expected = if dx.abs() <= 3 && dy.abs() <= 3 {
                    (255.0 * k[(dx + 3) as usize] * k[(dy + 3) as usize]).round() as u8
                } else {
                    0
                };
                assert_eq!(out.get(x, y), expected, "({x},{y})");
            }
        }
    }

    #[test]
    fn blur_conserves_mass_for_interior_impulse() {
        let mut img = GrayImage::new(31, 31);
        img.put(15, 15, 200);
        for sigma in [0.8, 1.5, 2.0] {
            let out = gaussian_blur(&img, sigma).unwrap();
            let taps = gaussian_kernel(sigma).len().pow(2) as i64;
            let sum: i64 = out.as_raw().iter().map(|&v| v as i64).sum();
            assert!((sum - 200).abs() <= taps, "sigma {sigma}: {sum}");
        }
    }

    #[test]
    fn erode_examples() {
        let se = StructuringElement::square(1).unwrap();
        let full = BinaryImage::filled(6, 5, true);
        assert_eq!(erode(&full, &se), full);

        let mut single = BinaryImage::new(5, 5);
        single.put(2, 2, true);
        assert_eq!(erode(&single, &se).count(), 0);

        let block = BinaryImage::from_fn(9, 9, |x, y| (2..7).contains(&x) && (2..7).contains(&y));
        let out = erode(&block, &StructuringElement::disk(1).unwrap());
        let expected = BinaryImage::from_fn(9, 9, |x, y| (3..6).contains(&x) && (3..6).contains(&y));
        assert_eq!(out, expected);
    }

    #[test]
    fn dilate_examples() {
        let se = StructuringElement::square(1).unwrap();
        let empty = BinaryImage::new(7, 7);
        assert_eq!(dilate(&empty, &se), empty);

        let mut single = BinaryImage::new(7, 7);
        single.put(3, 3, true);
        let expected = BinaryImage::from_fn(7, 7, |x, y| (2..5).contains(&x) && (2..5).contains(&y));
        assert_eq!(dilate(&single, &se), expected);
    }

    #[test]
    fn structuring_element_radius_zero_rejected() {
        assert!(StructuringElement::disk(0).is_err());
    }

    #[test]
    fn disk_offsets_match_inequality() {
        let se = StructuringElement::disk(2).unwrap();
        // 5x5 square minus the four corners and the eight (±2,±1)/(±1,±2) cells.
        assert_eq!(se.offsets().len(), 13);
    }

    #[test]
    fn largest_component_examples() {
        let single = BinaryImage::from_rows(&["0000", "0110", "0110"]);
        assert_eq!(largest_component(&single, Connectivity::Eight), single);

        let two = BinaryImage::from_rows(&[
            "11111000000",
            "00000000000",
            "00000011100",
            "00000011100",
            "00000011100",
        ]);
        let out = largest_component(&two, Connectivity::Four);
        assert_eq!(out.count(), 9);
        assert!(out.get(7, 3));
        assert!(!out.get(0, 0));

        let empty = BinaryImage::new(4, 4);
        assert_eq!(largest_component(&empty, Connectivity::Eight), empty);
    }

    #[test]
    fn largest_component_tie_goes_to_first() {
        let img = BinaryImage::from_rows(&["1100", "0000", "0011"]);
        let out = largest_component(&img, Connectivity::Eight);
        assert_eq!(out, BinaryImage::from_rows(&["1100", "0000", "0000"]));
    }

    #[test]
    fn connectivity_differs_on_diagonals() {
        let img = BinaryImage::from_rows(&["10", "01"]);
        assert_eq!(count_components(&img, Connectivity::Four), 2);
        assert_eq!(count_components(&img, Connectivity::Eight), 1);
    }

    #[test]
    fn downscale_keeps_aspect() {
        let img = RgbImage::new(1280, 960);
        let out = downscale_to_max(&img, 640);
        assert_eq!((out.width(), out.height()), (640, 480));
        let small = RgbImage::new(300, 200);
        assert_eq!(downscale_to_max(&small, 640), small);
    }

    #[test]
    fn resize_of_constant_is_constant() {
        let img = RgbImage::from_fn(50, 30, |_, _| [10, 20, 30]);
        let out = resize_bilinear(&img, 17, 11);
        assert!(out.pixels().all(|p| p == [10, 20, 30]));
    }

    proptest! {
        #[test]
        fn morphology_duality(seed in any::<u64>(), r in 1usize..3, disk in any::<bool>()) {
            let img = random_binary(seed, 24, 20, 0.5);
            let se = StructuringElement::new(r, if disk { SeShape::Disk } else { SeShape::Square }).unwrap();
            prop_assert_eq!(dilate(&img.complement(), &se), erode(&img, &se).complement());
        }

        #[test]
        fn opening_is_idempotent(seed in any::<u64>(), r in 1usize..3) {
            let img = random_binary(seed, 24, 20, 0.6);
            let se = StructuringElement::disk(r).unwrap();
            let once = open(&img, &se);
            prop_assert_eq!(open(&once, &se), once);
        }

        #[test]
        fn blur_stays_within_input_range(seed in any::<u64>(), sigma in 0.3f64..3.0) {
            let mut rng = Xorshift64Star::new(seed);
            let img = GrayImage::from_fn(13, 11, |_, _| 40 + rng.below(150) as u8);
            let lo = *img.as_raw().iter().min().unwrap();
            let hi = *img.as_raw().iter().max().unwrap();
            let out = gaussian_blur(&img, sigma).unwrap();
            prop_assert!(out.as_raw().iter().all(|&v| v >= lo && v <= hi));
        }

        #[test]
        fn operations_are_pure(seed in any::<u64>()) {
            let img = random_binary(seed, 16, 16, 0.5);
            let se = StructuringElement::square(1).unwrap();
            prop_assert_eq!(erode(&img, &se), erode(&img, &se));
            let g = img.to_gray();
            prop_assert_eq!(gaussian_blur(&g, 1.2).unwrap(), gaussian_blur(&g, 1.2).unwrap());
        }
    }
}
