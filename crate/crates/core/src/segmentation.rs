//! Finger isolation: HSV skin mask, morphological cleanup and an elliptical
//! region of interest fitted to the mask.

use crate::error::{Error, Result};
use crate::imgops::{
    close, largest_component, open, rgb_to_hsv, BinaryImage, Connectivity, GrayImage, HsvPixel,
    RgbImage, StructuringElement,
};

/// Closed HSV box. A hue interval with `h_lo > h_hi` wraps through 0°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvRange {
    pub h_lo: f64,
    pub h_hi: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl Default for HsvRange {
    /// H in [340°, 360°) ∪ [0°, 50°], S in [0.15, 0.75], V in [0.30, 1.0].
    fn default() -> Self {
        Self {
            h_lo: 340.0,
            h_hi: 50.0,
            s_lo: 0.15,
            s_hi: 0.75,
            v_lo: 0.30,
            v_hi: 1.0,
        }
    }
}

impl HsvRange {
    pub fn validate(&self) -> Result<()> {
        let hue_ok = |h: f64| (0.0..=360.0).contains(&h);
        let unit_ok = |u: f64| (0.0..=1.0).contains(&u);
        if !hue_ok(self.h_lo) || !hue_ok(self.h_hi) {
            return Err(Error::InvalidArgument("hue bounds must lie in [0, 360]".into()));
        }
        if ![self.s_lo, self.s_hi, self.v_lo, self.v_hi].into_iter().all(unit_ok) {
            return Err(Error::InvalidArgument(
                "saturation/value bounds must lie in [0, 1]".into(),
            ));
        }
        if self.s_lo > self.s_hi || self.v_lo > self.v_hi {
            return Err(Error::InvalidArgument("inverted saturation/value interval".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: HsvPixel) -> bool {
        let hue = if self.h_lo <= self.h_hi {
            p.h >= self.h_lo && p.h <= self.h_hi
        } else {
            p.h >= self.h_lo || p.h <= self.h_hi
        };
        hue && p.s >= self.s_lo && p.s <= self.s_hi && p.v >= self.v_lo && p.v <= self.v_hi
    }
}

/// Ellipse with centre `(cx, cy)`, semi-axis `rx` along direction `angle`
/// (radians, image coordinates) and `ry` perpendicular to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
    pub angle: f64,
}

impl Ellipse {
    /// Canonical quadratic form; `<= 1` is inside.
    pub fn quadratic(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let (s, c) = self.angle.sin_cos();
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.rx).powi(2) + (v / self.ry).powi(2)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.quadratic(x, y) <= 1.0
    }

    /// Same centre and orientation, semi-axes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rx: self.rx * factor,
            ry: self.ry * factor,
            ..*self
        }
    }
}

pub fn skin_mask(img: &RgbImage, range: &HsvRange) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let [r, g, b] = img.get(x, y);
        range.contains(rgb_to_hsv(r, g, b))
    })
}

/// Opening (speck removal), closing (hole fill), then the largest
/// 8-connected component. A radius of 0 skips that pass.
pub fn clean_mask(mask: &BinaryImage, open_radius: usize, close_radius: usize) -> BinaryImage {
    let mut out = mask.clone();
    if open_radius > 0 {
        out = open(&out, &StructuringElement::square(open_radius).expect("radius > 0"));
    }
    if close_radius > 0 {
        out = close(&out, &StructuringElement::square(close_radius).expect("radius > 0"));
    }
    largest_component(&out, Connectivity::Eight)
}

/// Replaces every pixel whose centre lies outside `roi` with `background`.
pub fn elliptical_crop(img: &GrayImage, roi: &Ellipse, background: u8) -> GrayImage {
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        if roi.contains(x as f64, y as f64) {
            img.get(x, y)
        } else {
            background
        }
    })
}

/// Moment fit: centroid plus semi-axes `2 * sqrt(eigenvalue)` of the
/// foreground coordinate covariance. `rx` is the major axis.
pub fn mask_to_ellipse(mask: &BinaryImage) -> Result<Ellipse> {
    let n = mask.count();
    if n < 5 {
        return Err(Error::NoFinger(format!(
            "segmentation mask has {n} foreground pixels, need at least 5"
        )));
    }
    let nf = n as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in mask.foreground() {
        sx += x as f64;
        sy += y as f64;
    }
    let (cx, cy) = (sx / nf, sy / nf);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in mask.foreground() {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let (a, b, c) = (sxx / nf, sxy / nf, syy / nf);
    let mean = 0.5 * (a + c);
    let spread = (0.25 * (a - c).powi(2) + b * b).sqrt();
    let major = mean + spread;
    let minor = (mean - spread).max(0.0);
    let angle = 0.5 * (2.0 * b).atan2(a - c);
    let rx = 2.0 * major.sqrt();
    let ry = 2.0 * minor.sqrt();
    if !(rx > 0.0 && ry > 0.0) {
        return Err(Error::NoFinger("segmentation mask is degenerate (collinear)".into()));
    }
    Ok(Ellipse {
        cx,
        cy,
        rx,
        ry,
        angle: angle.rem_euclid(std::f64::consts::PI),
    })
}
