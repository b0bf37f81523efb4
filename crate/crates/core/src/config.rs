//! Flat `key = value` configuration text for [`PipelineConfig`].
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! errors. [`to_text`] prints every key with its current value, so its output
//! is itself a valid config file.

use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

fn parse_seed(line: usize, key: &str, value: &str) -> Result<u64> {
    let parsed = match value.strip_prefix("0x").or_else(|| value.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => value.parse().ok(),
    };
    parsed.ok_or_else(|| Error::Config {
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

/// Applies `key = value` lines on top of `base`, then validates.
pub fn parse(text: &str, base: PipelineConfig) -> Result<PipelineConfig> {
    let mut c = base;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected key = value, got {trimmed:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        macro_rules! set {
            ($field:expr) => {
                $field = parse_value(line, key, value)?
            };
        }
        match key {
            "max_side" => set!(c.max_side),
            "skin_h_lo" => set!(c.skin.h_lo),
            "skin_h_hi" => set!(c.skin.h_hi),
            "skin_s_lo" => set!(c.skin.s_lo),
            "skin_s_hi" => set!(c.skin.s_hi),
            "skin_v_lo" => set!(c.skin.v_lo),
            "skin_v_hi" => set!(c.skin.v_hi),
            "open_radius" => set!(c.open_radius),
            "close_radius" => set!(c.close_radius),
            "blur_sigma" => set!(c.blur_sigma),
            "roi_scale" => set!(c.roi_scale),
            "crop_background" => set!(c.crop_background),
            "clip_limit" => set!(c.clip_limit),
            "tile" => set!(c.tile),
            "binarize_window" => set!(c.binarize_window),
            "binarize_offset" => set!(c.binarize_offset),
            "prune_staircases" => set!(c.prune_staircases),
            "border_margin" => set!(c.border_margin),
            "patch_radius" => set!(c.patch_radius),
            "pattern_seed" => c.pattern_seed = parse_seed(line, key, value)?,
            "ratio" => set!(c.matching.ratio),
            "ransac_threshold" => set!(c.matching.ransac.inlier_threshold),
            "ransac_iterations" => set!(c.matching.ransac.max_iterations),
            "ransac_scale_min" => set!(c.matching.ransac.scale_min),
            "ransac_scale_max" => set!(c.matching.ransac.scale_max),
            "ransac_seed" => c.matching.ransac.seed = parse_seed(line, key, value)?,
            "ransac_confidence" => set!(c.matching.ransac.confidence),
            "accept_threshold" => set!(c.accept_threshold),
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key {key:?}"),
                })
            }
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn to_text(c: &PipelineConfig) -> String {
    let r = &c.matching.ransac;
    let rows: Vec<(&str, String)> = vec![
        ("max_side", c.max_side.to_string()),
        ("skin_h_lo", c.skin.h_lo.to_string()),
        ("skin_h_hi", c.skin.h_hi.to_string()),
        ("skin_s_lo", c.skin.s_lo.to_string()),
        ("skin_s_hi", c.skin.s_hi.to_string()),
        ("skin_v_lo", c.skin.v_lo.to_string()),
        ("skin_v_hi", c.skin.v_hi.to_string()),
        ("open_radius", c.open_radius.to_string()),
        ("close_radius", c.close_radius.to_string()),
        ("blur_sigma", c.blur_sigma.to_string()),
        ("roi_scale", c.roi_scale.to_string()),
        ("crop_background", c.crop_background.to_string()),
        ("clip_limit", c.clip_limit.to_string()),
        ("tile", c.tile.to_string()),
        ("binarize_window", c.binarize_window.to_string()),
        ("binarize_offset", c.binarize_offset.to_string()),
        ("prune_staircases", c.prune_staircases.to_string()),
        ("border_margin", c.border_margin.to_string()),
        ("patch_radius", c.patch_radius.to_string()),
        ("pattern_seed", format!("0x{:X}", c.pattern_seed)),
        ("ratio", c.matching.ratio.to_string()),
        ("ransac_threshold", r.inlier_threshold.to_string()),
        ("ransac_iterations", r.max_iterations.to_string()),
        ("ransac_scale_min", r.scale_min.to_string()),
        ("ransac_scale_max", r.scale_max.to_string()),
        ("ransac_seed", r.seed.to_string()),
        ("ransac_confidence", r.confidence.to_string()),
        ("accept_threshold", c.accept_threshold.to_string()),
    ];
    rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
