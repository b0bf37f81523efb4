//! Steered 256-bit binary descriptors at minutiae, and the [`Template`] that
//! collects them.
//!
//! Each descriptor is 256 intensity comparisons between point pairs of a
//! seeded sampling pattern, rotated by the minutia orientation quantized to
//! 30 steps of 12°, and read from a 5x5 box-smoothed copy of the image.

use std::f64::consts::TAU;

use crate::enhance::IntegralImage;
use crate::error::{Error, Result};
use crate::imgops::GrayImage;
use crate::minutiae::Minutia;
use crate::rng::Xorshift64Star;

pub const DESCRIPTOR_BITS: usize = 256;
pub const PATCH_RADIUS: i32 = 15;
pub const ANGLE_BINS: usize = 30;
pub const DEFAULT_PATTERN_SEED: u64 = 0x4642_4C58;
const SMOOTH_HALF: usize = 2;

/// Bit `i` lives in byte `i / 8` at bit position `i % 8`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Descriptor256(pub [u8; 32]);

impl Descriptor256 {
    pub const ZERO: Descriptor256 = Descriptor256([0; 32]);

    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, v: bool) {
        if v {
            self.0[i / 8] |= 1 << (i % 8);
        } else {
            self.0[i / 8] &= !(1 << (i % 8));
        }
    }

    pub fn words(&self) -> [u64; 4] {
        let mut w = [0u64; 4];
        for (i, chunk) in self.0.chunks_exact(8).enumerate() {
            w[i] = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
        w
    }

    pub fn complement(&self) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|b| *b = !*b);
        out
    }

    pub fn random(rng: &mut Xorshift64Star) -> Self {
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&rng.next_u64().to_le_bytes());
        }
        Descriptor256(bytes)
    }
}

impl std::fmt::Debug for Descriptor256 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Descriptor256(")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

pub type Point = (i32, i32);

/// 256 point pairs inside the 31x31 patch centred on the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPattern {
    pairs: Vec<(Point, Point)>,
}

impl TestPattern {
    pub fn from_pairs(pairs: Vec<(Point, Point)>) -> Result<Self> {
        if pairs.len() != DESCRIPTOR_BITS {
            return Err(Error::InvalidArgument(format!(
                "pattern needs {DESCRIPTOR_BITS} pairs, got {}",
                pairs.len()
            )));
        }
        let inside = |&(u, v): &Point| u.abs() <= PATCH_RADIUS && v.abs() <= PATCH_RADIUS;
        if !pairs.iter().all(|(a, b)| inside(a) && inside(b)) {
            return Err(Error::InvalidArgument("pattern point outside the 31x31 patch".into()));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    /// One pair per line: `u1 v1 u2 v2`.
    pub fn to_text(&self) -> String {
        self.pairs
            .iter()
            .map(|((a, b), (c, d))| format!("{a} {b} {c} {d}\n"))
            .collect()
    }
}

/// Draws 256 pairs from an isotropic Gaussian with σ = 31/5, each coordinate
/// rounded to the nearest pixel and clamped to `[-15, 15]`. The stream comes
/// from [`Xorshift64Star`] seeded with `seed`, consuming one Box-Muller
/// deviate per coordinate in the order u1, v1, u2, v2.
pub fn generate_pattern(seed: u64) -> TestPattern {
    let sigma = 31.0 / 5.0;
    let mut rng = Xorshift64Star::new(seed);
    let mut coord = || ((rng.gaussian() * sigma).round() as i32).clamp(-PATCH_RADIUS, PATCH_RADIUS);
    let pairs = (0..DESCRIPTOR_BITS)
        .map(|_| {
            let a = (coord(), coord());
            let b = (coord(), coord());
            (a, b)
        })
        .collect();
    TestPattern { pairs }
}

/// Quantized steering bin for an orientation.
pub fn angle_bin(angle: f64) -> usize {
    let step = TAU / ANGLE_BINS as f64;
    ((angle.rem_euclid(TAU) / step).round() as usize) % ANGLE_BINS
}

fn rotate(p: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    let (u, v) = (p.0 as f64, p.1 as f64);
    ((c * u - s * v).round() as i32, (s * u + c * v).round() as i32)
}

/// Describes many minutiae of one image: holds the box-smoothed image and
/// the pattern pre-rotated for every angle bin.
pub struct Describer {
    width: usize,
    height: usize,
    smoothed: Vec<u32>,
    rotated: Vec<Vec<(Point, Point)>>,
}

impl Describer {
    pub fn new(img: &GrayImage, pattern: &TestPattern) -> Self {
        let (w, h) = img.dims();
        let integral = IntegralImage::new(img);
        let mut smoothed = vec![0u32; w * h];
        for y in 0..h {
            for x in 0..w {
                let (x0, x1) = (x.saturating_sub(SMOOTH_HALF), (x + SMOOTH_HALF + 1).min(w));
                let (y0, y1) = (y.saturating_sub(SMOOTH_HALF), (y + SMOOTH_HALF + 1).min(h));
                let n = ((x1 - x0) * (y1 - y0)) as u64;
                // Scale to a 25-pixel sum so clipped borders compare fairly.
                let sum = integral.sum(x0, y0, x1, y1);
                smoothed[y * w + x] = ((sum * 25 + n / 2) / n) as u32;
            }
        }
        let step = TAU / ANGLE_BINS as f64;
        let rotated = (0..ANGLE_BINS)
            .map(|bin| {
                let theta = bin as f64 * step;
                pattern
                    .pairs()
                    .iter()
                    .map(|&(a, b)| (rotate(a, theta), rotate(b, theta)))
                    .collect()
            })
            .collect();
        Self {
            width: w,
            height: h,
            smoothed,
            rotated,
        }
    }

    fn sample(&self, x: i64, y: i64) -> u32 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.smoothed[y * self.width + x]
    }

    /// The 31x31 patch around the minutia must be inside the image. Rotated
    /// sample points that leave the frame read the nearest edge pixel.
    pub fn describe(&self, m: &Minutia) -> Result<Descriptor256> {
        let (x, y) = (m.x as i64, m.y as i64);
        let r = PATCH_RADIUS as i64;
        if x < r || y < r || x + r >= self.width as i64 || y + r >= self.height as i64 {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let mut d = Descriptor256::ZERO;
        for (i, &((u1, v1), (u2, v2))) in self.rotated[angle_bin(m.angle.radians())].iter().enumerate() {
            let a = self.sample(x + u1 as i64, y + v1 as i64);
            let b = self.sample(x + u2 as i64, y + v2 as i64);
            d.set_bit(i, a < b);
        }
        Ok(d)
    }
}

/// Single-shot convenience over [`Describer`].
pub fn describe(img: &GrayImage, m: &Minutia, pattern: &TestPattern) -> Result<Descriptor256> {
    Describer::new(img, pattern).describe(m)
}

pub const TEMPLATE_VERSION: u16 = 1;

/// One fingerprint: minutiae with their descriptors at the working scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub version: u16,
    pub label: String,
    pub working_width: u16,
    pub working_height: u16,
    pub features: Vec<(Minutia, Descriptor256)>,
}

impl Template {
    pub fn new(label: impl Into<String>, working_width: u16, working_height: u16) -> Self {
        Self {
            version: TEMPLATE_VERSION,
            label: label.into(),
            working_width,
            working_height,
            features: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minutiae::{Angle, MinutiaKind};
    use proptest::prelude::*;

    fn minutia(x: u16, y: u16, angle: f64) -> Minutia {
        Minutia {
            x,
            y,
            kind: MinutiaKind::Ending,
            angle: Angle::from_radians(angle),
        }
    }

    fn ridge_image(w: usize, h: usize, period: f64, theta: f64, cx: f64, cy: f64) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            // curved ridges: phase depends on a rotated, bent coordinate
            let (s, c) = theta.sin_cos();
            let u = c * dx + s * dy;
            let v = -s * dx + c * dy;
            // a ridge ending sits at the centre: one phase winding there
            let phase = (u + 0.02 * v * v) / period * TAU + v.atan2(u);
            (128.0 + 100.0 * phase.cos() + 0.6 * v).clamp(0.0, 255.0) as u8
        })
    }

    #[test]
    fn pattern_is_deterministic_and_clipped() {
        let a = generate_pattern(DEFAULT_PATTERN_SEED);
        let b = generate_pattern(DEFAULT_PATTERN_SEED);
        assert_eq!(a, b);
        assert_eq!(a.pairs().len(), 256);
        for &((u1, v1), (u2, v2)) in a.pairs() {
            for c in [u1, v1, u2, v2] {
                assert!((-15..=15).contains(&c));
            }
        }
        assert_ne!(a, generate_pattern(1));
    }

    #[test]
    fn pattern_spread_matches_sigma() {
        let p = generate_pattern(DEFAULT_PATTERN_SEED);
        let coords: Vec<f64> = p
            .pairs()
            .iter()
            .flat_map(|&((a, b), (c, d))| [a, b, c, d])
            .map(f64::from)
            .collect();
        let sd = (coords.iter().map(|c| c * c).sum::<f64>() / coords.len() as f64).sqrt();
        assert!((sd - 6.2).abs() < 0.8, "{sd}");
    }

    #[test]
    fn from_pairs_validates() {
        assert!(TestPattern::from_pairs(vec![((0, 0), (1, 1)); 10]).is_err());
        assert!(TestPattern::from_pairs(vec![((0, 16), (1, 1)); 256]).is_err());
        assert!(TestPattern::from_pairs(vec![((0, 15), (1, 1)); 256]).is_ok());
    }

    #[test]
    fn angle_bins_are_twelve_degrees() {
        assert_eq!(angle_bin(0.0), 0);
        assert_eq!(angle_bin(12f64.to_radians()), 1);
        assert_eq!(angle_bin(17.9f64.to_radians()), 1);
        assert_eq!(angle_bin(18.1f64.to_radians()), 2);
        assert_eq!(angle_bin(359f64.to_radians()), 0);
    }

    #[test]
    fn constant_image_gives_zero_descriptor() {
        let img = GrayImage::filled(64, 64, 140);
        let p = generate_pattern(DEFAULT_PATTERN_SEED);
        assert_eq!(describe(&img, &minutia(32, 32, 1.0), &p).unwrap(), Descriptor256::ZERO);
    }

    #[test]
    fn describe_is_deterministic() {
        let img = ridge_image(80, 80, 9.0, 0.4, 40.0, 40.0);
        let p = generate_pattern(DEFAULT_PATTERN_SEED);
        let m = minutia(40, 40, 2.0);
        assert_eq!(describe(&img, &m, &p).unwrap(), describe(&img, &m, &p).unwrap());
    }

    #[test]
    fn describe_rejects_patch_outside_image() {
        let img = GrayImage::filled(64, 64, 0);
        let p = generate_pattern(DEFAULT_PATTERN_SEED);
        assert!(describe(&img, &minutia(14, 32, 0.0), &p).is_err());
        assert!(describe(&img, &minutia(32, 49, 0.0), &p).is_err());
        assert!(describe(&img, &minutia(15, 48, 0.0), &p).is_ok());
    }

    #[test]
    fn descriptor_bits_follow_comparisons() {
        // Left half dark, right half bright: a pair (a, b) with a left of the
        // edge and b right of it must set its bit at angle 0.
        let img = GrayImage::from_fn(64, 64, |x, _| if x < 32 { 10 } else { 240 });
        let mut pairs = vec![((0, 0), (0, 0)); 256];
        pairs[0] = ((-10, 0), (10, 0));
        pairs[1] = ((10, 0), (-10, 0));
        let p = TestPattern::from_pairs(pairs).unwrap();
        let d = describe(&img, &minutia(32, 32, 0.0), &p).unwrap();
        assert!(d.bit(0));
        assert!(!d.bit(1));
        // Steering by 180° swaps the roles.
        let d = describe(&img, &minutia(32, 32, std::f64::consts::PI), &p).unwrap();
        assert!(!d.bit(0));
        assert!(d.bit(1));
    }

    #[test]
    fn rotation_robustness_on_ridge_patches() {
        // Rotate a synthetic ridge-ending patch by 12° about the keypoint,
        // re-estimate the orientation, and compare descriptors.
        use crate::matcher::hamming;
        use crate::minutiae::keypoint_orientation;
        let p = generate_pattern(DEFAULT_PATTERN_SEED);
        let mut worst = 0;
        for k in 0..36 {
            let theta = TAU * k as f64 / 36.0;
            let a = ridge_image(101, 101, 8.5, theta, 50.0, 50.0);
            let b = ridge_image(101, 101, 8.5, theta + 12f64.to_radians(), 50.0, 50.0);
            let ang_a = keypoint_orientation(&a, 50, 50, 15).unwrap();
            let ang_b = keypoint_orientation(&b, 50, 50, 15).unwrap();
            let da = describe(&a, &minutia(50, 50, ang_a), &p).unwrap();
            let db = describe(&b, &minutia(50, 50, ang_b), &p).unwrap();
            worst = worst.max(hamming(&da, &db));
        }
        assert!(worst <= 60, "worst hamming {worst}");
    }

    proptest! {
        #[test]
        fn describe_ignores_intensity_offset(seed: u64, shift in 1u8..60, x in 15u16..34, y in 15u16..34, angle in 0.0f64..std::f64::consts::TAU) {
            let mut rng = Xorshift64Star::new(seed);
            let img = GrayImage::from_fn(50, 50, |_, _| rng.below(190) as u8);
            let brighter = img.map(|v| v + shift);
            let p = generate_pattern(DEFAULT_PATTERN_SEED);
            let m = minutia(x, y, angle);
            prop_assert_eq!(describe(&img, &m, &p).unwrap(), describe(&brighter, &m, &p).unwrap());
        }
    }
}
