#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use fingerprint_core::pipeline::{extract_template, PipelineConfig};
use fingerprint_core::rng::Xorshift64Star;
use fingerprint_core::synth::{random_pose, render_finger};
use fingerprint_core::{Angle, Descriptor256, Minutia, MinutiaKind, Template};

/// Compares `actual` with `tests/golden/<name>`. Setting `FINGERPRINT_BLESS`
/// rewrites the file instead.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("FINGERPRINT_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e} (rerun with FINGERPRINT_BLESS=1 to record)", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let line = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .map_or_else(|| "length".to_string(), |i| format!("line {}", i + 1));
        Err(format!("{} differs at {line}", path.display()))
    }
}

pub fn random_template(rng: &mut Xorshift64Star, n: usize, label: &str) -> Template {
    let mut t = Template::new(label, 640, 480);
    for _ in 0..n {
        let m = Minutia {
            x: rng.below(640) as u16,
            y: rng.below(480) as u16,
            kind: if rng.below(2) == 0 {
                MinutiaKind::Ending
            } else {
                MinutiaKind::Bifurcation
            },
            angle: Angle(rng.below(65536) as u16),
        };
        t.features.push((m, Descriptor256::random(rng)));
    }
    t
}

pub type Row = (String, Result<Template, String>, Result<Template, String>);

/// Five labels, each rendered twice from its own generator seed with
/// independent poses (±15°, ±20 px, noise 3).
pub fn synthetic_dataset(dataset_seed: u64, cfg: &PipelineConfig) -> Vec<Row> {
    (0..5u64)
        .map(|l| {
            let seed = dataset_seed * 1000 + l + 1;
            let extract = render_finger(seed, &random_pose(seed * 2, 15.0, 20.0, 3.0));
            let matching = render_finger(seed, &random_pose(seed * 2 + 1, 15.0, 20.0, 3.0));
            let build = |img| extract_template(img, &format!("L{}", l + 1), cfg).map_err(|e| e.to_string());
            (format!("L{}", l + 1), build(&extract), build(&matching))
        })
        .collect()
}
