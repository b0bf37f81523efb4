//! Deterministic synthetic fingertip photographs.
//!
//! A finger is a skin-toned ellipse on a coloured background carrying a dark
//! ridge pattern. The ridge phase is a warped concentric field around a core
//! point plus point dislocations (each one a phase winding of ±2π, which
//! produces a ridge ending or bifurcation), and short seeded ridge breaks.
//! Everything about the finger comes from `seed`; the [`Pose`] only moves the
//! finger in the frame and adds sensor noise, so two poses of one seed show
//! the same fingerprint.

use std::f64::consts::{PI, TAU};

use crate::imgops::{hsv_to_rgb, HsvPixel, RgbImage};
use crate::rng::Xorshift64Star;

pub const WIDTH: usize = 640;
pub const HEIGHT: usize = 480;

/// Placement of the finger in the frame plus per-render noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// Rotation about the frame centre, degrees (image coordinates, y down).
    pub rotation_deg: f64,
    pub tx: f64,
    pub ty: f64,
    /// Standard deviation of additive per-channel noise, in 8-bit units.
    pub noise: f64,
    pub noise_seed: u64,
}

impl Default for Pose {
    fn default() -> Self {
        Self {
            rotation_deg: 0.0,
            tx: 0.0,
            ty: 0.0,
            noise: 3.0,
            noise_seed: 0,
        }
    }
}

impl Pose {
    /// Where the finger-frame point `(u, v)` lands in the image.
    pub fn to_image(&self, (u, v): (f64, f64)) -> (f64, f64) {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let (cx, cy) = (WIDTH as f64 / 2.0 + self.tx, HEIGHT as f64 / 2.0 + self.ty);
        (cx + c * u - s * v, cy + s * u + c * v)
    }

    pub fn to_finger(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let (dx, dy) = (x - WIDTH as f64 / 2.0 - self.tx, y - HEIGHT as f64 / 2.0 - self.ty);
        (c * dx + s * dy, -s * dx + c * dy)
    }
}

struct Dislocation {
    u: f64,
    v: f64,
    charge: f64,
}

struct Warp {
    amp: f64,
    fu: f64,
    fv: f64,
    phase: f64,
}

/// The seed-determined fingerprint, in finger coordinates centred on the
/// ellipse centre.
pub struct Finger {
    rx: f64,
    ry: f64,
    skin: HsvPixel,
    background: HsvPixel,
    core: (f64, f64),
    aspect: f64,
    period: f64,
    ridge_depth: f64,
    shading: (f64, f64),
    warps: Vec<Warp>,
    dislocations: Vec<Dislocation>,
    breaks: Vec<(f64, f64, f64)>,
}

impl Finger {
    pub fn new(seed: u64) -> Self {
        let mut rng = Xorshift64Star::new(seed ^ 0xF1A9_E2B0_0000_0000);
        let rx = rng.uniform(115.0, 140.0);
        let ry = rng.uniform(165.0, 190.0);
        let skin = HsvPixel {
            h: rng.uniform(12.0, 30.0),
            s: rng.uniform(0.35, 0.55),
            v: rng.uniform(0.78, 0.92),
        };
        let background = HsvPixel {
            h: rng.uniform(170.0, 260.0),
            s: rng.uniform(0.35, 0.8),
            v: rng.uniform(0.3, 0.75),
        };
        let core = (rng.uniform(-35.0, 35.0), rng.uniform(-60.0, 20.0));
        let aspect = rng.uniform(1.1, 1.6);
        let period = rng.uniform(8.5, 10.0);
        let ridge_depth = rng.uniform(0.4, 0.55);
        let shade_angle = rng.uniform(0.0, TAU);
        let shading = (shade_angle.cos() * 0.12 / rx, shade_angle.sin() * 0.12 / ry);
        let warps = (0..4)
            .map(|_| {
                let dir = rng.uniform(0.0, TAU);
                let freq = rng.uniform(0.006, 0.02);
                Warp {
                    amp: rng.uniform(1.0, 3.0),
                    fu: freq * dir.cos(),
                    fv: freq * dir.sin(),
                    phase: rng.uniform(0.0, TAU),
                }
            })
            .collect();
        let inside = |rng: &mut Xorshift64Star, margin: f64| loop {
            let (u, v) = (rng.uniform(-rx, rx), rng.uniform(-ry, ry));
            if (u / rx).powi(2) + (v / ry).powi(2) <= margin * margin {
                return (u, v);
            }
        };
        let n_disloc = 24 + rng.below(14) as usize;
        let dislocations = (0..n_disloc)
            .map(|_| {
                let (u, v) = inside(&mut rng, 0.85);
                let charge = if rng.below(2) == 0 { 1.0 } else { -1.0 };
                Dislocation { u, v, charge }
            })
            .collect();
        let n_breaks = 10 + rng.below(10) as usize;
        let breaks = (0..n_breaks)
            .map(|_| {
                let (u, v) = inside(&mut rng, 0.8);
                (u, v, rng.uniform(2.5, 4.0))
            })
            .collect();
        Self {
            rx,
            ry,
            skin,
            background,
            core,
            aspect,
            period,
            ridge_depth,
            shading,
            warps,
            dislocations,
            breaks,
        }
    }

    pub fn contains(&self, (u, v): (f64, f64)) -> bool {
        (u / self.rx).powi(2) + (v / self.ry).powi(2) <= 1.0
    }

    /// Ridge phase in radians; ridges sit where `cos(phase)` is near 1.
    pub fn phase(&self, (u, v): (f64, f64)) -> f64 {
        let (du, dv) = (u - self.core.0, (v - self.core.1) * self.aspect);
        let mut phase = TAU * du.hypot(dv) / self.period;
        for w in &self.warps {
            phase += w.amp * (w.fu * u + w.fv * v + w.phase).sin();
        }
        for d in &self.dislocations {
            phase += d.charge * (v - d.v).atan2(u - d.u);
        }
        phase
    }

    /// Ridge darkness in `[0, 1]` at a finger-frame point.
    pub fn ridge(&self, p: (f64, f64)) -> f64 {
        let c = self.phase(p).cos();
        // sharpen the sinusoid into ridges with flat valleys
        let r = ((c - 0.1) * 1.6).clamp(0.0, 1.0);
        let r = r * r * (3.0 - 2.0 * r);
        let gap = self
            .breaks
            .iter()
            .map(|&(bu, bv, br)| {
                let d = (p.0 - bu).hypot(p.1 - bv);
                ((d - br) / 1.5).clamp(0.0, 1.0)
            })
            .fold(1.0, f64::min);
        r * gap
    }

    fn shade(&self, (u, v): (f64, f64)) -> f64 {
        1.0 + self.shading.0 * u + self.shading.1 * v
    }
}

/// Renders seed `seed` at `pose` as a 640x480 photograph.
pub fn render_finger(seed: u64, pose: &Pose) -> RgbImage {
    let finger = Finger::new(seed);
    let mut noise = Xorshift64Star::new(pose.noise_seed.wrapping_mul(0x9E37_79B9).wrapping_add(seed));
    let skin_rgb = unit_rgb(finger.skin);
    let bg_rgb = unit_rgb(finger.background);
    let mut img = RgbImage::new(WIDTH, HEIGHT);
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let p = pose.to_finger((x as f64, y as f64));
            let (base, factor) = if finger.contains(p) {
                let f = finger.shade(p) * (1.0 - finger.ridge_depth * finger.ridge(p));
                (skin_rgb, f)
            } else {
                let f = 1.0 + 0.08 * ((x as f64 / WIDTH as f64) - 0.5);
                (bg_rgb, f)
            };
            let mut px = [0u8; 3];
            for (ch, out) in px.iter_mut().enumerate() {
                let n = if pose.noise > 0.0 { noise.gaussian() * pose.noise } else { 0.0 };
                *out = (base[ch] * factor * 255.0 + n).round().clamp(0.0, 255.0) as u8;
            }
            img.put(x, y, px);
        }
    }
    img
}

fn unit_rgb(p: HsvPixel) -> [f64; 3] {
    let [r, g, b] = hsv_to_rgb(p);
    [r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0]
}

/// A pose drawn from `seed`: rotation within ±`max_rotation_deg`,
/// translation within ±`max_shift` pixels, noise level `noise`.
pub fn random_pose(seed: u64, max_rotation_deg: f64, max_shift: f64, noise: f64) -> Pose {
    let mut rng = Xorshift64Star::new(seed ^ 0x05E5_0000);
    Pose {
        rotation_deg: rng.uniform(-max_rotation_deg, max_rotation_deg),
        tx: rng.uniform(-max_shift, max_shift),
        ty: rng.uniform(-max_shift, max_shift),
        noise,
        noise_seed: seed,
    }
}

/// Rotation in radians of the upright render expressed as a similarity
/// transform from `from` image coordinates to `to` image coordinates.
pub fn relative_rotation(from: &Pose, to: &Pose) -> f64 {
    let d = (to.rotation_deg - from.rotation_deg).to_radians();
    (d + PI).rem_euclid(TAU) - PI
}
