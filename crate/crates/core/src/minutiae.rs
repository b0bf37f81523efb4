//! Ridge endings and bifurcations on the thinned ridge map.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::imgops::{BinaryImage, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinutiaKind {
    Ending,
    Bifurcation,
}

impl MinutiaKind {
    pub fn code(self) -> u8 {
        match self {
            MinutiaKind::Ending => 0,
            MinutiaKind::Bifurcation => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(MinutiaKind::Ending),
            1 => Some(MinutiaKind::Bifurcation),
            _ => None,
        }
    }
}

/// Orientation in 16-bit fixed point, one unit = 2π/65536 rad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle(pub u16);

impl Angle {
    pub fn from_radians(rad: f64) -> Self {
        let units = (rad.rem_euclid(TAU) / TAU * 65536.0).round() as u32;
        Angle((units % 65536) as u16)
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * TAU / 65536.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Minutia {
    pub x: u16,
    pub y: u16,
    pub kind: MinutiaKind,
    pub angle: Angle,
}

/// Foreground neighbours of `(x, y)` among its eight; out-of-bounds count 0.
pub fn neighbor_count(skel: &BinaryImage, x: usize, y: usize) -> Result<usize> {
    if x >= skel.width() || y >= skel.height() {
        return Err(Error::OutOfBounds {
            x: x as i64,
            y: y as i64,
            width: skel.width(),
            height: skel.height(),
        });
    }
    let (x, y) = (x as i64, y as i64);
    let mut n = 0;
    for dy in -1..=1 {
        for dx in -1..=1 {
            if (dx, dy) != (0, 0) && skel.get_or_false(x + dx, y + dy) {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// Intensity-centroid orientation over the discrete disk of `patch_radius`:
/// `atan2(m01, m10)` in `[0, 2π)`, or 0 when both moments vanish.
pub fn keypoint_orientation(img: &GrayImage, x: usize, y: usize, patch_radius: usize) -> Result<f64> {
    let r = patch_radius;
    if x < r || y < r || x + r >= img.width() || y + r >= img.height() {
        return Err(Error::OutOfBounds {
            x: x as i64,
            y: y as i64,
            width: img.width(),
            height: img.height(),
        });
    }
    let r = r as i64;
    let (mut m10, mut m01) = (0i64, 0i64);
    for v in -r..=r {
        for u in -r..=r {
            if u * u + v * v > r * r {
                continue;
            }
            let i = img.get((x as i64 + u) as usize, (y as i64 + v) as usize) as i64;
            m10 += u * i;
            m01 += v * i;
        }
    }
    if m10 == 0 && m01 == 0 {
        return Ok(0.0);
    }
    Ok((m01 as f64).atan2(m10 as f64).rem_euclid(TAU))
}

/// Scans every skeleton pixel at least `border_margin` from each edge:
/// one neighbour is an ending, three a bifurcation. Output is row-major.
pub fn extract_minutiae(
    skel: &BinaryImage,
    enhanced: &GrayImage,
    border_margin: usize,
    patch_radius: usize,
) -> Result<Vec<Minutia>> {
    if skel.dims() != enhanced.dims() {
        return Err(Error::DimensionMismatch {
            expected: skel.dims(),
            actual: enhanced.dims(),
        });
    }
    let (w, h) = skel.dims();
    let mut out = Vec::new();
    if 2 * border_margin >= w || 2 * border_margin >= h {
        return Ok(out);
    }
    for y in border_margin..h - border_margin {
        for x in border_margin..w - border_margin {
            if !skel.get(x, y) {
                continue;
            }
            let kind = match neighbor_count(skel, x, y)? {
                1 => MinutiaKind::Ending,
                3 => MinutiaKind::Bifurcation,
                _ => continue,
            };
            let angle = keypoint_orientation(enhanced, x, y, patch_radius)?;
            out.push(Minutia {
                x: x as u16,
                y: y as u16,
                kind,
                angle: Angle::from_radians(angle),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xorshift64Star;
    use crate::skeleton::zhang_suen_thin;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn neighbor_count_examples() {
        let mut iso = BinaryImage::new(5, 5);
        iso.put(2, 2, true);
        assert_eq!(neighbor_count(&iso, 2, 2).unwrap(), 0);

        let line = BinaryImage::from_rows(&["00000", "11111", "00000"]);
        assert_eq!(neighbor_count(&line, 2, 1).unwrap(), 2);

        let plus = BinaryImage::from_rows(&["00100", "00100", "11111", "00100", "00100"]);
        assert_eq!(neighbor_count(&plus, 2, 2).unwrap(), 4);

        assert!(neighbor_count(&plus, 5, 0).is_err());
    }

    #[test]
    fn corner_pixels_count_out_of_bounds_as_background() {
        let full = BinaryImage::filled(3, 3, true);
        assert_eq!(neighbor_count(&full, 0, 0).unwrap(), 3);
        assert_eq!(neighbor_count(&full, 1, 1).unwrap(), 8);
    }

    #[test]
    fn segment_has_two_endings() {
        let skel = BinaryImage::from_fn(16, 5, |x, y| y == 2 && (3..13).contains(&x));
        let gray = GrayImage::filled(16, 5, 100);
        let m = extract_minutiae(&skel, &gray, 0, 0).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.iter().all(|m| m.kind == MinutiaKind::Ending));
        assert_eq!((m[0].x, m[1].x), (3, 12));
    }

    #[test]
    fn y_shape_has_one_bifurcation_three_endings() {
        let skel = BinaryImage::from_rows(&[
            "000000000",
            "010000010",
            "001000100",
            "000101000",
            "000010000",
            "000010000",
            "000010000",
            "000000000",
        ]);
        let gray = GrayImage::filled(9, 8, 50);
        let m = extract_minutiae(&skel, &gray, 0, 0).unwrap();
        let bif: Vec<_> = m.iter().filter(|m| m.kind == MinutiaKind::Bifurcation).collect();
        let end: Vec<_> = m.iter().filter(|m| m.kind == MinutiaKind::Ending).collect();
        assert_eq!(bif.len(), 1);
        assert_eq!((bif[0].x, bif[0].y), (4, 4));
        assert_eq!(end.len(), 3);
    }

    #[test]
    fn huge_margin_yields_nothing() {
        let skel = BinaryImage::filled(20, 10, true);
        let gray = GrayImage::filled(20, 10, 0);
        assert!(extract_minutiae(&skel, &gray, 6, 0).unwrap().is_empty());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let skel = BinaryImage::new(10, 10);
        let gray = GrayImage::new(10, 11);
        assert!(matches!(
            extract_minutiae(&skel, &gray, 0, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn orientation_examples() {
        let sym = GrayImage::filled(31, 31, 120);
        assert_eq!(keypoint_orientation(&sym, 15, 15, 7).unwrap(), 0.0);

        let right = GrayImage::from_fn(31, 31, |x, _| if x > 15 { 255 } else { 0 });
        assert!(keypoint_orientation(&right, 15, 15, 7).unwrap().abs() < 1e-12);

        let down = GrayImage::from_fn(31, 31, |_, y| if y > 15 { 255 } else { 0 });
        let a = keypoint_orientation(&down, 15, 15, 7).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-12);

        let left = GrayImage::from_fn(31, 31, |x, _| if x < 15 { 255 } else { 0 });
        assert!((keypoint_orientation(&left, 15, 15, 7).unwrap() - PI).abs() < 1e-12);

        assert!(keypoint_orientation(&sym, 3, 15, 7).is_err());
        assert!(keypoint_orientation(&sym, 15, 24, 7).is_err());
    }

    #[test]
    fn orientation_matches_direct_moment_sums() {
        let mut rng = Xorshift64Star::new(11);
        let img = GrayImage::from_fn(25, 25, |_, _| rng.below(256) as u8);
        let (mut m10, mut m01) = (0.0, 0.0);
        for y in 0..25 {
            for x in 0..25 {
                let (u, v) = (x as f64 - 12.0, y as f64 - 12.0);
                if u * u + v * v <= 100.0 {
                    m10 += u * img.get(x, y) as f64;
                    m01 += v * img.get(x, y) as f64;
                }
            }
        }
        let expect = m01.atan2(m10).rem_euclid(TAU);
        assert!((keypoint_orientation(&img, 12, 12, 10).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_adds_half_pi() {
        let mut rng = Xorshift64Star::new(21);
        for _ in 0..20 {
            let img = GrayImage::from_fn(33, 33, |_, _| rng.below(256) as u8);
            // (u, v) -> (-v, u): pixel (x, y) of the rotated patch reads
            // the original at (16 + (y - 16), 16 - (x - 16)).
            let rot = GrayImage::from_fn(33, 33, |x, y| img.get(y, 32 - x));
            let a = keypoint_orientation(&img, 16, 16, 15).unwrap();
            let b = keypoint_orientation(&rot, 16, 16, 15).unwrap();
            let diff = (b - a - FRAC_PI_2).rem_euclid(TAU);
            assert!(diff.min(TAU - diff) < 0.05, "{a} {b}");
        }
    }

    #[test]
    fn angle_fixed_point_round_trip() {
        assert_eq!(Angle::from_radians(0.0), Angle(0));
        assert_eq!(Angle::from_radians(TAU), Angle(0));
        assert_eq!(Angle::from_radians(PI), Angle(32768));
        assert_eq!(Angle::from_radians(-FRAC_PI_2), Angle(49152));
        for units in [0u16, 1, 12345, 65535] {
            assert_eq!(Angle::from_radians(Angle(units).radians()), Angle(units));
        }
    }

    #[test]
    fn extraction_equals_brute_force_scan() {
        for seed in 0..20 {
            let mut rng = Xorshift64Star::new(seed);
            let blob = BinaryImage::from_fn(40, 30, |_, _| rng.next_f64() < 0.55);
            let skel = zhang_suen_thin(&blob);
            let gray = GrayImage::from_fn(40, 30, |x, y| ((x * 31 + y * 17) % 256) as u8);
            let got = extract_minutiae(&skel, &gray, 3, 3).unwrap();
            let mut expect = Vec::new();
            for y in 3..27 {
                for x in 3..37 {
                    if skel.get(x, y) {
                        match neighbor_count(&skel, x, y).unwrap() {
                            1 => expect.push((x as u16, y as u16, MinutiaKind::Ending)),
                            3 => expect.push((x as u16, y as u16, MinutiaKind::Bifurcation)),
                            _ => {}
                        }
                    }
                }
            }
            let got: Vec<_> = got.iter().map(|m| (m.x, m.y, m.kind)).collect();
            assert_eq!(got, expect, "seed {seed}");
        }
    }
}
