//! The photograph-to-template pipeline.

use std::path::Path;

use crate::descriptor::{generate_pattern, Describer, Template, DEFAULT_PATTERN_SEED};
use crate::enhance::{binarize, contrast_enhance};
use crate::error::{Error, Result};
use crate::imgops::{downscale_to_max, gaussian_blur, to_grayscale, BinaryImage, GrayImage, RgbImage};
use crate::io;
use crate::matcher::MatchConfig;
use crate::minutiae::{extract_minutiae, Minutia, MinutiaKind};
use crate::segmentation::{clean_mask, elliptical_crop, mask_to_ellipse, skin_mask, Ellipse, HsvRange};
use crate::skeleton::{remove_staircases, zhang_suen_thin};

/// Every tunable of extraction and matching. Pixel sizes refer to the
/// working image (longer side `max_side`).
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub max_side: usize,
    pub skin: HsvRange,
    pub open_radius: usize,
    pub close_radius: usize,
    pub blur_sigma: f64,
    /// Multiplies the fitted ellipse's semi-axes before cropping.
    pub roi_scale: f64,
    pub crop_background: u8,
    pub clip_limit: f64,
    pub tile: usize,
    pub binarize_window: usize,
    pub binarize_offset: f64,
    /// Strip redundant staircase corners from the skeleton before counting
    /// neighbours; without this every diagonal step reads as a bifurcation.
    pub prune_staircases: bool,
    pub border_margin: usize,
    pub patch_radius: usize,
    pub pattern_seed: u64,
    pub matching: MatchConfig,
    /// Minimum score for `verify` to accept.
    pub accept_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_side: 640,
            skin: HsvRange::default(),
            open_radius: 3,
            close_radius: 3,
            blur_sigma: 1.0,
            roi_scale: 0.9,
            crop_background: 128,
            clip_limit: 2.0,
            tile: 32,
            binarize_window: 25,
            binarize_offset: 4.0,
            prune_staircases: true,
            border_margin: 15,
            patch_radius: 15,
            pattern_seed: DEFAULT_PATTERN_SEED,
            matching: MatchConfig::default(),
            accept_threshold: 40.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        self.skin.validate()?;
        self.matching.ransac.validate()?;
        if self.max_side < 64 {
            return bad("max_side must be at least 64");
        }
        if !(self.blur_sigma > 0.0) {
            return bad("blur_sigma must be positive");
        }
        if !(self.roi_scale > 0.0) {
            return bad("roi_scale must be positive");
        }
        if !(self.clip_limit >= 1.0) || self.tile < 8 {
            return bad("clip_limit must be >= 1 and tile >= 8");
        }
        if self.binarize_window < 3 || self.binarize_window % 2 == 0 {
            return bad("binarize_window must be odd and >= 3");
        }
        if self.border_margin < self.patch_radius.max(15) {
            return bad("border_margin must be at least max(patch_radius, 15)");
        }
        if !(self.matching.ratio > 0.0 && self.matching.ratio <= 1.0) {
            return bad("ratio must be in (0, 1]");
        }
        if !(0.0..=100.0).contains(&self.accept_threshold) {
            return bad("accept_threshold must be in [0, 100]");
        }
        Ok(())
    }
}

/// An intermediate raster kept for inspection.
#[derive(Debug, Clone)]
pub enum StageImage {
    Rgb(RgbImage),
    Gray(GrayImage),
    Binary(BinaryImage),
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub image: StageImage,
}

/// Result of a pipeline run. `stages` is filled only when requested and holds
/// every stage reached, including on failure.
#[derive(Debug)]
pub struct PipelineRun {
    pub template: Result<Template>,
    pub ellipse: Option<Ellipse>,
    pub stages: Vec<Stage>,
}

struct Recorder {
    keep: bool,
    stages: Vec<Stage>,
}

impl Recorder {
    fn push(&mut self, name: &'static str, image: impl FnOnce() -> StageImage) {
        if self.keep {
            self.stages.push(Stage { name, image: image() });
        }
    }
}

fn draw_minutiae(base: &GrayImage, skel: &BinaryImage, minutiae: &[Minutia]) -> RgbImage {
    let mut img = RgbImage::from_fn(base.width(), base.height(), |x, y| {
        if skel.get(x, y) {
            [40, 40, 40]
        } else {
            let v = base.get(x, y) / 2 + 120;
            [v, v, v]
        }
    });
    for m in minutiae {
        let color = match m.kind {
            MinutiaKind::Ending => [220, 30, 30],
            MinutiaKind::Bifurcation => [30, 90, 230],
        };
        for d in -3i64..=3 {
            for (dx, dy) in [(d, -3), (d, 3), (-3, d), (3, d)] {
                let (x, y) = (m.x as i64 + dx, m.y as i64 + dy);
                if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
                    img.put(x as usize, y as usize, color);
                }
            }
        }
    }
    img
}

/// Runs the full pipeline: downscale, skin mask, mask cleanup, ellipse fit,
/// grayscale, blur, elliptical crop, CLAHE, binarization, thinning,
/// staircase pruning (optional), minutiae, descriptors.
pub fn run_pipeline(photo: &RgbImage, label: &str, cfg: &PipelineConfig, keep_stages: bool) -> PipelineRun {
    let mut rec = Recorder {
        keep: keep_stages,
        stages: Vec::new(),
    };
    let mut ellipse = None;
    let template = (|| {
        cfg.validate()?;
        rec.push("input", || StageImage::Rgb(photo.clone()));
        let working = downscale_to_max(photo, cfg.max_side);
        rec.push("working", || StageImage::Rgb(working.clone()));
        let mask = skin_mask(&working, &cfg.skin);
        rec.push("skin_mask", || StageImage::Binary(mask.clone()));
        let cleaned = clean_mask(&mask, cfg.open_radius, cfg.close_radius);
        rec.push("clean_mask", || StageImage::Binary(cleaned.clone()));
        let roi = mask_to_ellipse(&cleaned)?.scaled(cfg.roi_scale);
        ellipse = Some(roi);
        let gray = to_grayscale(&working);
        rec.push("grayscale", || StageImage::Gray(gray.clone()));
        let blurred = gaussian_blur(&gray, cfg.blur_sigma)?;
        rec.push("blur", || StageImage::Gray(blurred.clone()));
        let cropped = elliptical_crop(&blurred, &roi, cfg.crop_background);
        rec.push("crop", || StageImage::Gray(cropped.clone()));
        let enhanced = contrast_enhance(&cropped, cfg.clip_limit, cfg.tile)?;
        rec.push("enhanced", || StageImage::Gray(enhanced.clone()));
        let binary = binarize(&enhanced, cfg.binarize_window, cfg.binarize_offset)?;
        rec.push("binary", || StageImage::Binary(binary.clone()));
        let mut skeleton = zhang_suen_thin(&binary);
        if cfg.prune_staircases {
            remove_staircases(&mut skeleton);
        }
        rec.push("skeleton", || StageImage::Binary(skeleton.clone()));
        let minutiae = extract_minutiae(&skeleton, &enhanced, cfg.border_margin, cfg.patch_radius)?;
        rec.push("minutiae", || StageImage::Rgb(draw_minutiae(&enhanced, &skeleton, &minutiae)));
        if minutiae.is_empty() {
            return Err(Error::NoFeatures);
        }
        let pattern = generate_pattern(cfg.pattern_seed);
        let describer = Describer::new(&enhanced, &pattern);
        let mut template = Template::new(label, working.width() as u16, working.height() as u16);
        for m in minutiae {
            template.features.push((m, describer.describe(&m)?));
        }
        Ok(template)
    })();
    PipelineRun {
        template,
        ellipse,
        stages: rec.stages,
    }
}

/// Extracts the template of one photograph.
pub fn extract_template(photo: &RgbImage, label: &str, cfg: &PipelineConfig) -> Result<Template> {
    run_pipeline(photo, label, cfg, false).template
}

/// Writes stages as `NN_<name>.png` into `dir`.
pub fn dump_stages(stages: &[Stage], dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (i, stage) in stages.iter().enumerate() {
        let path = dir.join(format!("{:02}_{}.png", i + 1, stage.name));
        match &stage.image {
            StageImage::Rgb(img) => io::save_rgb_png(img, &path)?,
            StageImage::Gray(img) => io::save_gray_png(img, &path)?,
            StageImage::Binary(img) => io::save_binary_png(img, &path)?,
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::serialize;
    use crate::synth::{render_finger, Pose};

    #[test]
    fn synthetic_finger_yields_features() {
        let photo = render_finger(1, &Pose::default());
        let t = extract_template(&photo, "L1", &PipelineConfig::default()).unwrap();
        assert!(t.len() >= 10, "{} features", t.len());
        assert_eq!((t.working_width, t.working_height), (640, 480));
    }

    #[test]
    fn blue_image_has_no_finger() {
        let photo = RgbImage::from_fn(200, 150, |_, _| [20, 40, 200]);
        assert!(matches!(
            extract_template(&photo, "x", &PipelineConfig::default()),
            Err(Error::NoFinger(_))
        ));
    }

    #[test]
    fn extraction_is_deterministic() {
        let photo = render_finger(4, &Pose::default());
        let cfg = PipelineConfig::default();
        let a = serialize(&extract_template(&photo, "L4", &cfg).unwrap()).unwrap();
        let b = serialize(&extract_template(&photo, "L4", &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stages_are_recorded_in_order() {
        let photo = render_finger(2, &Pose::default());
        let run = run_pipeline(&photo, "x", &PipelineConfig::default(), true);
        assert!(run.template.is_ok());
        let names: Vec<_> = run.stages.iter().map(|s| s.name).collect();
        assert_eq!(
            names,
            [
                "input",
                "working",
                "skin_mask",
                "clean_mask",
                "grayscale",
                "blur",
                "crop",
                "enhanced",
                "binary",
                "skeleton",
                "minutiae"
            ]
        );
        let dir = tempfile::tempdir().unwrap();
        let files = dump_stages(&run.stages, dir.path()).unwrap();
        assert_eq!(files.len(), 11);
        assert!(files[0].ends_with("01_input.png"));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = PipelineConfig {
            binarize_window: 24,
            ..PipelineConfig::default()
        };
        let photo = render_finger(2, &Pose::default());
        assert!(matches!(extract_template(&photo, "x", &cfg), Err(Error::InvalidArgument(_))));
    }
}
