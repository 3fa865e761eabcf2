//! `flamelens` command line: `train`, `detect`, `eval` and `overlay`.
//!
//! Exit status is 0 on success, 1 on runtime failure and 2 on usage errors.
//! Arguments are validated before any output file is touched.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::Error;
use crate::evaluation::{batch_evaluate, format_metric, parse_manifest};
use crate::imaging::{encode_mask, encode_rgb, load_image, load_mask, overlay, Rgb};
use crate::pipeline::{Method, PipelineConfig};
use crate::training::{
    feature_from_regions, load_matrix, pso_search, ConversionMatrix, PsoConfig, Rect, Region,
};

#[derive(Debug, Parser)]
#[command(name = "flamelens", version, about = "Colour-matrix fire detection and matrix training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a conversion matrix from a sample image.
    Train(TrainArgs),
    /// Detect fire pixels in one image.
    Detect(DetectArgs),
    /// Score a detector on a dataset manifest.
    Eval(EvalArgs),
    /// Paint a mask over an image.
    Overlay(OverlayArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Sample image containing fire and fire-coloured background.
    pub image: PathBuf,
    /// Fire region as x,y,w,h.
    #[arg(long, value_name = "X,Y,W,H", required_unless_present = "fire_mask", conflicts_with = "fire_mask")]
    pub fire_region: Option<Rect>,
    /// Fire region as a mask PNG.
    #[arg(long, value_name = "PNG")]
    pub fire_mask: Option<PathBuf>,
    /// Background region as x,y,w,h.
    #[arg(
        long,
        value_name = "X,Y,W,H",
        required_unless_present = "background_mask",
        conflicts_with = "background_mask"
    )]
    pub background_region: Option<Rect>,
    /// Background region as a mask PNG.
    #[arg(long, value_name = "PNG")]
    pub background_mask: Option<PathBuf>,
    /// Where to write the trained matrix JSON.
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pso: PsoFlags,
    /// JSON config with `pso` and `pipeline` sections; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "FLAMELENS_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct PsoFlags {
    #[arg(long)]
    pub swarm_size: Option<usize>,
    /// Maximum update rounds.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Initial entry range as lo,hi.
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    pub init_range: Option<Range>,
    #[arg(long)]
    pub velocity_clamp: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl PsoFlags {
    fn apply(&self, cfg: &mut PsoConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$target = v; })*
            };
        }
        set!(swarm_size => swarm_size, iterations => max_iterations, omega => omega,
             c1 => c1, c2 => c2, velocity_clamp => velocity_clamp, seed => seed);
        if let Some(r) = self.init_range {
            cfg.init_range = [r.lo, r.hi];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_floats(s)?[..] {
            [lo, hi] => Ok(Range { lo, hi }),
            _ => Err(format!("expected lo,hi, got `{s}`")),
        }
    }
}

/// An RGB triple with channels in `[0, 1]`, written `r,g,b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Colour(pub Rgb);

impl FromStr for Colour {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_floats(s)?[..] {
            [r, g, b] if [r, g, b].iter().all(|v| (0.0..=1.0).contains(v)) => Ok(Colour([r, g, b])),
            [_, _, _] => Err(format!("colour channels must be in [0, 1], got `{s}`")),
            _ => Err(format!("expected r,g,b, got `{s}`")),
        }
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Linear,
    Nonlinear,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Linear => Method::Linear,
            MethodArg::Nonlinear => Method::Nonlinear,
        }
    }
}

/// Built-in matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Flame-highlighting matrix (default first stage).
    Eq8,
    /// Colour-differentiating matrix (default second stage and linear).
    Eq10,
}

impl Preset {
    pub fn matrix(self) -> ConversionMatrix {
        match self {
            Preset::Eq8 => ConversionMatrix::FLAME_HIGHLIGHT,
            Preset::Eq10 => ConversionMatrix::COLOUR_DIFFERENTIATING,
        }
    }
}

/// Detector selection shared by `detect` and `eval`.
#[derive(Debug, Args)]
pub struct DetectorFlags {
    #[arg(long, value_enum, default_value = "nonlinear")]
    pub method: MethodArg,
    /// Matrix JSON replacing the colour-differentiating matrix.
    #[arg(long, conflicts_with = "preset")]
    pub matrix: Option<PathBuf>,
    /// Built-in matrix replacing the colour-differentiating matrix.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Close the final mask with a square element of this radius.
    #[arg(long, value_name = "RADIUS", value_parser = clap::value_parser!(u64).range(1..))]
    pub close: Option<u64>,
    /// JSON config with `pso` and `pipeline` sections; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "FLAMELENS_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub image: PathBuf,
    /// Output mask PNG.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the image with detected pixels highlighted.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[arg(long, alias = "color", value_name = "R,G,B", default_value = "1,0,0")]
    pub colour: Colour,
    #[command(flatten)]
    pub detector: DetectorFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Manifest file (image<TAB>mask per line) or dataset directory.
    pub manifest: PathBuf,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorFlags,
}

#[derive(Debug, Args)]
pub struct OverlayArgs {
    pub image: PathBuf,
    pub mask: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, alias = "color", value_name = "R,G,B", default_value = "1,0,0")]
    pub colour: Colour,
}

/// Config file layout; both sections optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub pso: PsoConfig,
    pub pipeline: PipelineConfig,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn runtime(context: impl std::fmt::Display) -> impl FnOnce(Error) -> CliError {
    move |e| CliError::Runtime(format!("{context}: {e}"))
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(a) => with_jobs(a.jobs, || cmd_train(&a)),
        Command::Detect(a) => with_jobs(a.detector.jobs, || cmd_detect(&a)),
        Command::Eval(a) => with_jobs(a.detector.jobs, || cmd_eval(&a)),
        Command::Overlay(a) => cmd_overlay(&a),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .expect("thread pool");
    pool.install(f)
}

pub fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let mut cfg = ConfigFile::load(a.config.as_deref())?.pso;
    a.pso.apply(&mut cfg);
    cfg.validate()?;

    let image = load_image(&a.image).map_err(runtime(a.image.display()))?;
    let fire = region(a.fire_region, a.fire_mask.as_deref())?;
    let background = region(a.background_region, a.background_mask.as_deref())?;
    let feature = feature_from_regions(&image, &fire, &background).map_err(|e| match e {
        Error::WrongCount { what, expected, got } => {
            CliError::Usage(format!("{what} too small: {got} pixels, need at least {expected}"))
        }
        Error::InvalidConfig(_) | Error::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
        other => other.into(),
    })?;

    let outcome = pso_search(&feature, &cfg)?;
    std::fs::write(&a.out, outcome.matrix.to_json())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", a.out.display())))?;
    println!("cost: {}", outcome.cost);
    println!("iterations: {}", outcome.iterations_used);
    println!("matrix: {}", a.out.display());
    Ok(())
}

fn region(rect: Option<Rect>, mask: Option<&Path>) -> Result<Region, CliError> {
    match (rect, mask) {
        (Some(r), _) => Ok(Region::Rect(r)),
        (None, Some(p)) => Ok(Region::Mask(load_mask(p).map_err(runtime(p.display()))?)),
        (None, None) => Err(CliError::Usage("a region rectangle or mask is required".into())),
    }
}

/// Pipeline config from the config file, the matrix flags and `--close`.
fn pipeline_config(flags: &DetectorFlags) -> Result<PipelineConfig, CliError> {
    let mut cfg = ConfigFile::load(flags.config.as_deref())?.pipeline;
    if let Some(p) = flags.preset {
        cfg.stage2_matrix = p.matrix();
    }
    if let Some(path) = &flags.matrix {
        cfg.stage2_matrix = load_matrix(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    if let Some(r) = flags.close {
        cfg.morph_close = Some(r as usize);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_detect(a: &DetectArgs) -> Result<(), CliError> {
    let cfg = pipeline_config(&a.detector)?;
    let image = load_image(&a.image).map_err(runtime(a.image.display()))?;
    let mask = Method::from(a.detector.method).detect(&image, &cfg);

    let mask_png = encode_mask(&mask)?;
    let overlay_png = match &a.overlay {
        Some(_) => Some(encode_rgb(&overlay(&image, &mask, a.colour.0)?)?),
        None => None,
    };
    write(&a.out, &mask_png)?;
    if let (Some(path), Some(png)) = (&a.overlay, overlay_png) {
        write(path, &png)?;
    }

    let total = mask.len();
    let fire = mask.count();
    let fraction = if total == 0 { 0.0 } else { fire as f64 / total as f64 };
    println!("fire pixels: {fire} of {total} ({fraction:.4})");
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let cfg = pipeline_config(&a.detector)?;
    let pairs = parse_manifest(&a.manifest).map_err(|e| match e {
        Error::Parse(m) => CliError::Usage(m),
        other => CliError::Runtime(format!("{}: {other}", a.manifest.display())),
    })?;
    let report = batch_evaluate(&pairs, a.detector.method.into(), &cfg);

    if let Some(path) = &a.report {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        write(path, report.to_json_document(now).as_bytes())?;
    }
    print!("{}", report.to_table());
    let m = &report.aggregate.metrics;
    println!(
        "FPR {}  FNR {}  F-score {}",
        format_metric(m.fpr),
        format_metric(m.fnr),
        format_metric(m.fscore)
    );
    if report.images.is_empty() {
        return Err(CliError::Runtime("no pair could be evaluated".into()));
    }
    Ok(())
}

pub fn cmd_overlay(a: &OverlayArgs) -> Result<(), CliError> {
    let image = load_image(&a.image).map_err(runtime(a.image.display()))?;
    let mask = load_mask(&a.mask).map_err(runtime(a.mask.display()))?;
    let out = overlay(&image, &mask, a.colour.0)?;
    write(&a.out, &encode_rgb(&out)?)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}
