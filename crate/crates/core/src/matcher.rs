//! Template matching: brute-force Hamming nearest neighbours, ratio test,
//! and RANSAC verification under a 4-DOF similarity transform.
//!
//! The matching percentage is `100 * inliers / min(|probe|, |gallery|)`.
//! Min-normalization makes a self-match score exactly 100 and does not
//! penalize the larger of the two templates. Scores are not symmetric in
//! general: swapping probe and gallery changes which side runs the ratio test.

use crate::descriptor::{Descriptor256, Template};
use crate::error::{Error, Result};
use crate::rng::Xorshift64Star;

pub fn hamming(a: &Descriptor256, b: &Descriptor256) -> u32 {
    a.words()
        .iter()
        .zip(b.words())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Correspondence {
    pub probe_index: usize,
    pub gallery_index: usize,
    pub distance: u32,
    pub second_distance: u32,
}

/// `q = scale * R(rotation) * p + (tx, ty)` in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: f64,
    pub tx: f64,
    pub ty: f64,
}

impl SimilarityTransform {
    pub const IDENTITY: SimilarityTransform = SimilarityTransform {
        scale: 1.0,
        rotation: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        (
            self.scale * (c * x - s * y) + self.tx,
            self.scale * (s * x + c * y) + self.ty,
        )
    }

    /// Exact map of `p1 -> q1`, `p2 -> q2`; `None` if `p1 == p2`.
    pub fn from_two_points(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> Option<Self> {
        let (dpx, dpy) = (p2.0 - p1.0, p2.1 - p1.1);
        let (dqx, dqy) = (q2.0 - q1.0, q2.1 - q1.1);
        let norm = dpx * dpx + dpy * dpy;
        if norm == 0.0 {
            return None;
        }
        // a = dq / dp as complex numbers
        let a_re = (dqx * dpx + dqy * dpy) / norm;
        let a_im = (dqy * dpx - dqx * dpy) / norm;
        Some(Self::from_complex(a_re, a_im, p1, q1))
    }

    fn from_complex(a_re: f64, a_im: f64, p: (f64, f64), q: (f64, f64)) -> Self {
        let tx = q.0 - (a_re * p.0 - a_im * p.1);
        let ty = q.1 - (a_im * p.0 + a_re * p.1);
        Self {
            scale: a_re.hypot(a_im),
            rotation: a_im.atan2(a_re),
            tx,
            ty,
        }
    }

    /// Closed-form least-squares similarity over point pairs.
    pub fn least_squares(pairs: &[((f64, f64), (f64, f64))]) -> Option<Self> {
        if pairs.len() < 2 {
            return None;
        }
        let n = pairs.len() as f64;
        let (mut px, mut py, mut qx, mut qy) = (0.0, 0.0, 0.0, 0.0);
        for &((a, b), (c, d)) in pairs {
            px += a;
            py += b;
            qx += c;
            qy += d;
        }
        let (pm, qm) = ((px / n, py / n), (qx / n, qy / n));
        let (mut num_re, mut num_im, mut den) = (0.0, 0.0, 0.0);
        for &(p, q) in pairs {
            let (u, v) = (p.0 - pm.0, p.1 - pm.1);
            let (s, t) = (q.0 - qm.0, q.1 - qm.1);
            // (s + it) * conj(u + iv)
            num_re += s * u + t * v;
            num_im += t * u - s * v;
            den += u * u + v * v;
        }
        if den == 0.0 {
            return None;
        }
        Some(Self::from_complex(num_re / den, num_im / den, pm, qm))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig {
    /// Reprojection error below which a correspondence is an inlier (pixels).
    pub inlier_threshold: f64,
    pub max_iterations: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub seed: u64,
    /// Adaptive early exit once this confidence is reached; `>= 1` disables it.
    pub confidence: f64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            inlier_threshold: 5.0,
            max_iterations: 1000,
            scale_min: 0.5,
            scale_max: 2.0,
            seed: 1,
            confidence: 0.99,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inlier_threshold > 0.0) {
            return Err(Error::InvalidArgument("inlier threshold must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max) {
            return Err(Error::InvalidArgument("scale bounds must satisfy 0 < min <= max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub ratio: f64,
    pub ransac: RansacConfig,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            ratio: 0.75,
            ransac: RansacConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub correspondences: Vec<Correspondence>,
    /// Indices into `correspondences`, ascending.
    pub inliers: Vec<usize>,
    pub transform: Option<SimilarityTransform>,
    pub score: f64,
}

impl MatchResult {
    pub fn empty() -> Self {
        Self {
            correspondences: Vec::new(),
            inliers: Vec::new(),
            transform: None,
            score: 0.0,
        }
    }
}

/// Nearest and runner-up gallery distances for each probe feature; a match
/// is kept iff `distance < ratio * second_distance`. A one-feature gallery
/// uses 257 as the runner-up. When several probe features pick the same
/// gallery feature only the closest (then lowest probe index) survives, so
/// the result is one-to-one.
pub fn ratio_match(probe: &Template, gallery: &Template, ratio: f64) -> Result<Vec<Correspondence>> {
    if probe.is_empty() || gallery.is_empty() {
        return Err(Error::InvalidArgument("cannot match an empty template".into()));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!("ratio must be in (0, 1], got {ratio}")));
    }
    let gallery_words: Vec<[u64; 4]> = gallery.features.iter().map(|(_, d)| d.words()).collect();
    let mut best_for_gallery: Vec<Option<Correspondence>> = vec![None; gallery.len()];
    for (pi, (_, pd)) in probe.features.iter().enumerate() {
        let pw = pd.words();
        let (mut best, mut best_idx, mut second) = (u32::MAX, 0usize, 257u32);
        for (gi, gw) in gallery_words.iter().enumerate() {
            let d: u32 = (0..4).map(|k| (pw[k] ^ gw[k]).count_ones()).sum();
            if d < best {
                second = second.min(best);
                best = d;
                best_idx = gi;
            } else if d < second {
                second = d;
            }
        }
        if (best as f64) < ratio * second as f64 {
            let c = Correspondence {
                probe_index: pi,
                gallery_index: best_idx,
                distance: best,
                second_distance: second,
            };
            let slot = &mut best_for_gallery[best_idx];
            if slot.map_or(true, |old| c.distance < old.distance) {
                *slot = Some(c);
            }
        }
    }
    let mut out: Vec<Correspondence> = best_for_gallery.into_iter().flatten().collect();
    out.sort_by_key(|c| c.probe_index);
    Ok(out)
}

fn position(t: &Template, i: usize) -> (f64, f64) {
    let m = &t.features[i].0;
    (m.x as f64, m.y as f64)
}

/// Indices of inliers and the sum of their squared residuals.
fn score_hypothesis(
    model: &SimilarityTransform,
    pairs: &[((f64, f64), (f64, f64))],
    threshold: f64,
) -> (Vec<usize>, f64) {
    let mut inliers = Vec::new();
    let mut sq = 0.0;
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let (x, y) = model.apply(p);
        let e2 = (x - q.0).powi(2) + (y - q.1).powi(2);
        if e2.sqrt() < threshold {
            inliers.push(i);
            sq += e2;
        }
    }
    (inliers, sq)
}

/// Seeded RANSAC over 2-point minimal samples. Returns the refit transform
/// and the inlier indices, or `(None, [])` when fewer than two
/// correspondences support any admissible model.
pub fn ransac_similarity(
    corr: &[Correspondence],
    probe: &Template,
    gallery: &Template,
    cfg: &RansacConfig,
) -> (Option<SimilarityTransform>, Vec<usize>) {
    let pairs: Vec<_> = corr
        .iter()
        .map(|c| (position(probe, c.probe_index), position(gallery, c.gallery_index)))
        .collect();
    ransac_on_points(&pairs, cfg)
}

/// RANSAC on raw point pairs `(probe point, gallery point)`.
pub fn ransac_on_points(
    pairs: &[((f64, f64), (f64, f64))],
    cfg: &RansacConfig,
) -> (Option<SimilarityTransform>, Vec<usize>) {
    let n = pairs.len();
    if n < 2 {
        return (None, Vec::new());
    }
    let mut rng = Xorshift64Star::new(cfg.seed);
    let mut best: Option<(SimilarityTransform, Vec<usize>, f64)> = None;
    let mut needed = cfg.max_iterations;
    let mut iteration = 0;
    while iteration < needed.min(cfg.max_iterations) {
        iteration += 1;
        let i = rng.below(n as u64) as usize;
        let mut j = rng.below(n as u64 - 1) as usize;
        if j >= i {
            j += 1;
        }
        let Some(model) = SimilarityTransform::from_two_points(pairs[i].0, pairs[j].0, pairs[i].1, pairs[j].1) else {
            continue;
        };
        if !(cfg.scale_min..=cfg.scale_max).contains(&model.scale) {
            continue;
        }
        let (inliers, sq) = score_hypothesis(&model, pairs, cfg.inlier_threshold);
        let better = match &best {
            None => true,
            Some((_, b, bsq)) => {
                inliers.len() > b.len()
                    || (inliers.len() == b.len() && sq / (inliers.len().max(1) as f64) < bsq / (b.len().max(1) as f64))
            }
        };
        if better {
            if cfg.confidence < 1.0 {
                let w = inliers.len() as f64 / n as f64;
                let p_good = w * w;
                needed = if p_good >= 1.0 {
                    iteration
                } else if p_good <= 0.0 {
                    cfg.max_iterations
                } else {
                    ((1.0 - cfg.confidence).ln() / (1.0 - p_good).ln()).ceil().max(1.0) as usize
                };
            }
            best = Some((model, inliers, sq));
        }
    }
    match best {
        Some((model, inliers, _)) if inliers.len() >= 2 => {
            let subset: Vec<_> = inliers.iter().map(|&k| pairs[k]).collect();
            let refit = SimilarityTransform::least_squares(&subset)
                .filter(|t| (cfg.scale_min..=cfg.scale_max).contains(&t.scale))
                .unwrap_or(model);
            (Some(refit), inliers)
        }
        _ => (None, Vec::new()),
    }
}

/// Ratio test, RANSAC, then the min-normalized inlier percentage.
/// Empty templates give a zero score rather than an error.
pub fn match_score(probe: &Template, gallery: &Template, cfg: &MatchConfig) -> MatchResult {
    if probe.is_empty() || gallery.is_empty() {
        return MatchResult::empty();
    }
    let correspondences = match ratio_match(probe, gallery, cfg.ratio) {
        Ok(c) => c,
        Err(_) => return MatchResult::empty(),
    };
    let (transform, inliers) = ransac_similarity(&correspondences, probe, gallery, &cfg.ransac);
    let denom = probe.len().min(gallery.len()) as f64;
    let score = (100.0 * inliers.len() as f64 / denom).clamp(0.0, 100.0);
    MatchResult {
        correspondences,
        inliers,
        transform,
        score,
    }
}
