//! `fingerprint`: extract, enroll, verify, identify and evaluate fingerprint
//! photographs from the command line.
//!
//! Exit codes (stable):
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; `verify` accepted |
//! | 1 | `verify` rejected, or `identify` found an empty database |
//! | 2 | usage error (bad flags, missing database) |
//! | 3 | I/O or image decoding failure |
//! | 4 | no finger found in a photograph |
//! | 5 | finger found but no minutiae extracted |
//! | 6 | malformed template file |
//! | 7 | invalid configuration |

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fingerprint_core::pipeline::{dump_stages, run_pipeline};
use fingerprint_core::report::{evaluate, pooled_diagonal_mean, render_pooled, EvalReport};
use fingerprint_core::store::{deserialize, serialize, TemplateDb, MAGIC};
use fingerprint_core::synth::{render_finger, Pose};
use fingerprint_core::{config, io, Error, MatchResult, PipelineConfig, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    Rejected = 1,
    Usage = 2,
    Io = 3,
    NoFinger = 4,
    NoFeatures = 5,
    BadTemplate = 6,
    Config = 7,
}

#[derive(Debug)]
struct Failure {
    exit: Exit,
    error: anyhow::Error,
}

impl Failure {
    fn new(exit: Exit, error: impl Into<anyhow::Error>) -> Self {
        Self {
            exit,
            error: error.into(),
        }
    }
}

fn exit_for(e: &Error) -> Exit {
    match e {
        Error::Io(_) | Error::ImageDecode { .. } => Exit::Io,
        Error::NoFinger(_) => Exit::NoFinger,
        Error::NoFeatures => Exit::NoFeatures,
        Error::BadMagic { .. } | Error::VersionMismatch { .. } | Error::Length { .. } | Error::LabelEncoding => {
            Exit::BadTemplate
        }
        Error::Config { .. } => Exit::Config,
        _ => Exit::Usage,
    }
}

type CliResult<T = Exit> = std::result::Result<T, Failure>;

trait AtPath<T> {
    fn at(self, path: &Path) -> CliResult<T>;
}

impl<T> AtPath<T> for fingerprint_core::Result<T> {
    fn at(self, path: &Path) -> CliResult<T> {
        self.map_err(|e| {
            let exit = exit_for(&e);
            match e {
                Error::ImageDecode { .. } => Failure::new(exit, e),
                e => Failure::new(exit, anyhow::Error::new(e).context(path.display().to_string())),
            }
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "fingerprint", version, about = "Offline fingerprint-photograph authentication")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct DbArg {
    /// Template database directory (the FINGERDB environment variable takes
    /// precedence).
    #[arg(long)]
    db: Option<PathBuf>,
}

impl DbArg {
    fn open(&self) -> CliResult<TemplateDb> {
        let root = std::env::var_os("FINGERDB")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| self.db.clone())
            .ok_or_else(|| Failure::new(Exit::Usage, anyhow!("no database: pass --db or set FINGERDB")))?;
        TemplateDb::open(&root).at(&root)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract a template from a photograph.
    Process {
        input: PathBuf,
        /// Template output path.
        #[arg(short, long)]
        output: PathBuf,
        /// Label stored in the template (default: input file stem).
        #[arg(long)]
        label: Option<String>,
        /// Also write every pipeline stage as a numbered PNG here.
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Write every pipeline stage of a photograph as numbered PNGs.
    DumpStages { input: PathBuf, dir: PathBuf },
    /// Compare a probe (photograph or template) with a gallery template.
    Verify {
        probe: PathBuf,
        gallery: PathBuf,
        /// Minimum score to accept (default from config).
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Add photographs or templates to the database.
    Enroll {
        #[command(flatten)]
        db: DbArg,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Label for every input (default: each input's file stem).
        #[arg(long)]
        label: Option<String>,
    },
    /// Rank database entries against a probe.
    Identify {
        #[command(flatten)]
        db: DbArg,
        probe: PathBuf,
        /// Number of entries to report.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Score every extraction image against every matching image of a
    /// `label,extract,match` CSV manifest. Several manifests (one per hand)
    /// are reported in turn, followed by their pooled diagonal mean.
    Evaluate {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Emit JSON instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Render a synthetic finger photograph.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Rotation about the frame centre, degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        rotation: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tx: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        ty: f64,
        /// Standard deviation of per-channel sensor noise.
        #[arg(long, default_value_t = 3.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
    },
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct TransformJson {
    scale: f64,
    rotation_deg: f64,
    tx: f64,
    ty: f64,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct VerifyJson {
    score: f64,
    correspondences: usize,
    inliers: usize,
    transform: Option<TransformJson>,
}

impl From<&MatchResult> for VerifyJson {
    fn from(r: &MatchResult) -> Self {
        Self {
            score: r.score,
            correspondences: r.correspondences.len(),
            inliers: r.inliers.len(),
            transform: r.transform.map(|t| TransformJson {
                scale: t.scale,
                rotation_deg: t.rotation.to_degrees(),
                tx: t.tx,
                ty: t.ty,
            }),
        }
    }
}

#[derive(Serialize, Debug)]
struct EnrolledJson {
    id: u64,
    label: String,
    features: usize,
}

#[derive(Serialize, Debug)]
struct RankedJson {
    rank: usize,
    id: u64,
    label: String,
    score: f64,
    inliers: usize,
}

#[derive(Serialize, Debug)]
struct SkippedJson {
    label: String,
    reason: String,
}

#[derive(Serialize, Debug)]
struct ReportJson {
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
    diagonal_mean: f64,
    off_diagonal_mean: f64,
    rank_one_rate: f64,
    skipped: Vec<SkippedJson>,
}

impl From<&EvalReport> for ReportJson {
    fn from(r: &EvalReport) -> Self {
        Self {
            labels: r.labels.clone(),
            matrix: r.matrix.clone(),
            diagonal_mean: r.diagonal_mean,
            off_diagonal_mean: r.off_diagonal_mean,
            rank_one_rate: r.rank_one_rate(),
            skipped: r
                .skipped
                .iter()
                .map(|(label, reason)| SkippedJson {
                    label: label.clone(),
                    reason: reason.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Debug)]
struct PooledJson {
    reports: Vec<ReportJson>,
    pooled_diagonal_mean: f64,
}

#[derive(Deserialize, Debug)]
struct ManifestRow {
    label: String,
    extract: PathBuf,
    #[serde(rename = "match")]
    matching: PathBuf,
}

fn load_config(path: Option<&Path>) -> CliResult<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::new(Exit::Io, anyhow::Error::new(e).context(path.display().to_string())))?;
    config::parse(&text, PipelineConfig::default())
        .map_err(|e| Failure::new(Exit::Config, anyhow::Error::new(e).context(path.display().to_string())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads a template file, or runs the pipeline when the file is not one.
fn load_probe(path: &Path, label: &str, cfg: &PipelineConfig) -> CliResult<Template> {
    let bytes = fs::read(path).map_err(Error::from).at(path)?;
    if bytes.starts_with(&MAGIC) {
        deserialize(&bytes).at(path)
    } else {
        let photo = io::load_rgb(path).at(path)?;
        fingerprint_core::extract_template(&photo, label, cfg).at(path)
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::new(Exit::Io, e)),
        _ => Ok(()),
    }
}

fn print_json(value: &impl Serialize) -> CliResult<()> {
    emit(&(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
}

fn cmd_process(input: &Path, output: Option<&Path>, label: Option<&str>, stages: Option<&Path>, cfg: &PipelineConfig) -> CliResult {
    let photo = io::load_rgb(input).at(input)?;
    let label = label.map(str::to_string).unwrap_or_else(|| stem(input));
    let run = run_pipeline(&photo, &label, cfg, stages.is_some());
    if let Some(dir) = stages {
        let written = dump_stages(&run.stages, dir).at(dir)?;
        eprintln!("wrote {} stage images to {}", written.len(), dir.display());
    }
    let template = run.template.at(input)?;
    if let Some(out) = output {
        let bytes = serialize(&template).at(out)?;
        fs::write(out, bytes).map_err(Error::from).at(out)?;
        eprintln!("{}: {} features -> {}", input.display(), template.len(), out.display());
    }
    Ok(Exit::Ok)
}

fn cmd_verify(probe: &Path, gallery: &Path, threshold: Option<f64>, cfg: &PipelineConfig) -> CliResult {
    let threshold = threshold.unwrap_or(cfg.accept_threshold);
    let p = load_probe(probe, &stem(probe), cfg)?;
    let g = load_probe(gallery, &stem(gallery), cfg)?;
    let result = fingerprint_core::matcher::match_score(&p, &g, &cfg.matching);
    print_json(&VerifyJson::from(&result))?;
    Ok(if result.score >= threshold { Exit::Ok } else { Exit::Rejected })
}

fn cmd_enroll(db: &DbArg, inputs: &[PathBuf], label: Option<&str>, cfg: &PipelineConfig) -> CliResult {
    let db = db.open()?;
    let mut enrolled = Vec::new();
    for input in inputs {
        let label = label.map(str::to_string).unwrap_or_else(|| stem(input));
        let mut t = load_probe(input, &label, cfg)?;
        t.label = label;
        let id = db.enroll(&t).at(db.root())?;
        enrolled.push(EnrolledJson {
            id,
            label: t.label.clone(),
            features: t.len(),
        });
    }
    print_json(&enrolled)?;
    Ok(Exit::Ok)
}

fn cmd_identify(db: &DbArg, probe: &Path, top: usize, cfg: &PipelineConfig) -> CliResult {
    let db = db.open()?;
    let p = load_probe(probe, &stem(probe), cfg)?;
    let ranking = db.identify(&p, &cfg.matching).at(db.root())?;
    let out: Vec<RankedJson> = ranking
        .iter()
        .take(top)
        .enumerate()
        .map(|(i, r)| RankedJson {
            rank: i + 1,
            id: r.id,
            label: r.label.clone(),
            score: r.result.score,
            inliers: r.result.inliers.len(),
        })
        .collect();
    print_json(&out)?;
    Ok(if out.is_empty() { Exit::Rejected } else { Exit::Ok })
}

fn read_manifest(path: &Path) -> CliResult<Vec<ManifestRow>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::new(Exit::Io, anyhow::Error::new(e).context(path.display().to_string())))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let mut row: ManifestRow = row
            .map_err(|e| Failure::new(Exit::Usage, anyhow::Error::new(e).context(format!("manifest {}", path.display()))))?;
        row.extract = base.join(&row.extract);
        row.matching = base.join(&row.matching);
        rows.push(row);
    }
    Ok(rows)
}

fn evaluate_manifest(manifest: &Path, cfg: &PipelineConfig) -> CliResult<EvalReport> {
    let rows = read_manifest(manifest)?;
    let build = |path: &Path, label: &str| -> Result<Template, String> {
        load_probe(path, label, cfg).map_err(|f| format!("{:#}", f.error))
    };
    let templates: Vec<_> = rows
        .par_iter()
        .map(|r| (r.label.clone(), build(&r.extract, &r.label), build(&r.matching, &r.label)))
        .collect();
    Ok(evaluate(templates, &cfg.matching))
}

fn cmd_evaluate(manifests: &[PathBuf], json: bool, cfg: &PipelineConfig) -> CliResult {
    let reports = manifests
        .iter()
        .map(|m| Ok((stem(m), evaluate_manifest(m, cfg)?)))
        .collect::<CliResult<Vec<_>>>()?;
    match (json, reports.as_slice()) {
        (true, [(_, single)]) => print_json(&ReportJson::from(single))?,
        (true, _) => {
            let all: Vec<EvalReport> = reports.iter().map(|(_, r)| r.clone()).collect();
            print_json(&PooledJson {
                reports: all.iter().map(ReportJson::from).collect(),
                pooled_diagonal_mean: pooled_diagonal_mean(&all),
            })?
        }
        (false, [(_, single)]) => emit(&single.render())?,
        (false, _) => emit(&render_pooled(&reports))?,
    }
    Ok(Exit::Ok)
}

fn run(cli: Cli) -> CliResult {
    let cfg = load_config(cli.config.as_deref())?;
    if cli.print_config {
        emit(&config::to_text(&cfg))?;
        return Ok(Exit::Ok);
    }
    let Some(command) = cli.command else {
        return Err(Failure::new(Exit::Usage, anyhow!("no command given (try --help)")));
    };
    match command {
        Command::Process {
            input,
            output,
            label,
            dump_stages,
        } => cmd_process(&input, Some(&output), label.as_deref(), dump_stages.as_deref(), &cfg),
        Command::DumpStages { input, dir } => cmd_process(&input, None, None, Some(&dir), &cfg),
        Command::Verify {
            probe,
            gallery,
            threshold,
        } => cmd_verify(&probe, &gallery, threshold, &cfg),
        Command::Enroll { db, inputs, label } => cmd_enroll(&db, &inputs, label.as_deref(), &cfg),
        Command::Identify { db, probe, top } => cmd_identify(&db, &probe, top, &cfg),
        Command::Evaluate { manifests, json } => cmd_evaluate(&manifests, json, &cfg),
        Command::Synth {
            seed,
            output,
            rotation,
            tx,
            ty,
            noise,
            noise_seed,
        } => {
            let pose = Pose {
                rotation_deg: rotation,
                tx,
                ty,
                noise,
                noise_seed,
            };
            io::save_rgb_png(&render_finger(seed, &pose), &output).at(&output)?;
            Ok(Exit::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Usage as u8 } else { Exit::Ok as u8 });
        }
    };
    match run(cli) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.exit as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn errors_map_to_stable_codes() {
        assert_eq!(exit_for(&Error::NoFeatures), Exit::NoFeatures);
        assert_eq!(exit_for(&Error::NoFinger("x".into())), Exit::NoFinger);
        assert_eq!(exit_for(&Error::BadMagic { found: *b"abcd" }), Exit::BadTemplate);
        assert_eq!(
            exit_for(&Error::Config {
                line: 1,
                message: String::new()
            }),
            Exit::Config
        );
        assert_eq!(exit_for(&Error::Io(std::io::Error::other("x"))), Exit::Io);
    }
}
