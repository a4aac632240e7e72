//! The `strongaug` command-line tool.
//!
//! Every flag can also be set through an environment variable named
//! `STRONGAUG_<FLAG>`, e.g. `STRONGAUG_SEED=7`. Commands that write a
//! directory also write `run.json` (seed, resolved configuration and its
//! SHA-256, versions) and `run_env.json` (worker count and timestamps), so
//! the first stays byte-identical between identical runs.
//!
//! Exit codes: 0 success, 2 invalid input or flags, 3 bad or unreadable
//! data, 4 internal error. Failures also print a one-line JSON summary on
//! stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Failure, Result};
use crate::imgcore::{io, Interpolation};
use crate::metrics::{build_reports, PredictionSet, RobustnessReport};
use crate::policies::PolicyConfig;
use crate::shiftgen::{
    augment_dataset, shift_dataset, stain_grid, subsample_per_label, tile_dataset, LoadedManifest,
    ShiftSpec, TileGridSpec, DEFAULT_STAIN_GRID,
};
use crate::stain::{self, StainAdjustment, StainModel};
use crate::transforms::{ApplyOptions, Catalog, Magnitude, TransformKind};

pub const ENV_PREFIX: &str = "STRONGAUG_";

#[derive(Debug, Parser)]
#[command(
    name = "strongaug",
    about = "Augmentation, shifted datasets and robustness evaluation",
    disable_version_flag = true
)]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "STRONGAUG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses one per logical core.
    #[arg(long, global = true, env = "STRONGAUG_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, env = "STRONGAUG_LOG_LEVEL", default_value = "warn")]
    pub log_level: String,
    /// Print the version and catalog schema version.
    #[arg(long, short = 'V')]
    pub version: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment every image of a dataset once.
    Augment(AugmentArgs),
    /// Write shifted copies of a dataset.
    Shift(ShiftArgs),
    /// Fit or apply stain models.
    #[command(subcommand)]
    Stain(StainCommand),
    /// Score prediction files into robustness reports.
    Evaluate(EvaluateArgs),
    /// Print the transform catalog as JSON.
    Catalog(CatalogArgs),
    /// Cut every image of a dataset into overlapping tiles.
    Tile(TileArgs),
    /// Keep a random subset of each label.
    Subsample(SubsampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Strong,
    Rand,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationArg {
    Nearest,
    Bilinear,
    Bicubic,
}

impl From<InterpolationArg> for Interpolation {
    fn from(v: InterpolationArg) -> Self {
        match v {
            InterpolationArg::Nearest => Interpolation::Nearest,
            InterpolationArg::Bilinear => Interpolation::Bilinear,
            InterpolationArg::Bicubic => Interpolation::Bicubic,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ResampleArgs {
    /// Value for pixels uncovered by geometric transforms.
    #[arg(long, env = "STRONGAUG_FILL", default_value_t = 0)]
    pub fill: u8,
    #[arg(long, value_enum, env = "STRONGAUG_INTERPOLATION", default_value = "nearest")]
    pub interpolation: InterpolationArg,
}

impl ResampleArgs {
    fn options(&self) -> ApplyOptions {
        ApplyOptions {
            fill: self.fill,
            interpolation: self.interpolation.into(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AugmentArgs {
    #[arg(long, env = "STRONGAUG_MANIFEST")]
    pub manifest: PathBuf,
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Built-in policy; ignored when --policy-file is given.
    #[arg(long, value_enum, env = "STRONGAUG_POLICY", default_value = "strong")]
    pub policy: PolicyName,
    /// Policy JSON, e.g. {"variant":{"strong_augment":{"p":0.5}}}.
    #[arg(long, env = "STRONGAUG_POLICY_FILE")]
    pub policy_file: Option<PathBuf>,
    /// StrongAugment continuation probability.
    #[arg(long, env = "STRONGAUG_P", default_value_t = 0.5)]
    pub p: f64,
    /// RandAugment operation count.
    #[arg(long, env = "STRONGAUG_N", default_value_t = 2)]
    pub n: usize,
    /// RandAugment level, 0 to 30.
    #[arg(long, env = "STRONGAUG_M", default_value_t = 10)]
    pub m: u32,
    /// Write trace.jsonl with the transforms applied to each image.
    #[arg(long, env = "STRONGAUG_TRACE")]
    pub trace: bool,
    #[command(flatten)]
    pub resample: ResampleArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ShiftArgs {
    #[arg(long, env = "STRONGAUG_MANIFEST")]
    pub manifest: PathBuf,
    /// Root directory; one sub-directory per shifted dataset.
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, env = "STRONGAUG_TRANSFORM", requires = "magnitudes", conflicts_with = "stain_grid")]
    pub transform: Option<String>,
    /// Comma-separated magnitudes, or `default` for the evaluation grid.
    #[arg(long, env = "STRONGAUG_MAGNITUDES", requires = "transform")]
    pub magnitudes: Option<String>,
    /// Haematoxylin and eosin multipliers, e.g. `--stain-grid 0,1 0,1`.
    #[arg(long, num_args = 2, value_names = ["H", "E"], requires = "stain_model")]
    pub stain_grid: Option<Vec<String>>,
    /// Stain model JSON as written by `stain fit`.
    #[arg(long, env = "STRONGAUG_STAIN_MODEL")]
    pub stain_model: Option<PathBuf>,
    #[command(flatten)]
    pub resample: ResampleArgs,
}

#[derive(Debug, Subcommand)]
pub enum StainCommand {
    /// Estimate the mean stain model of a dataset.
    Fit(StainFitArgs),
    /// Scale stain densities of one image or a whole dataset.
    Adjust(StainAdjustArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct StainFitArgs {
    #[arg(long, env = "STRONGAUG_MANIFEST")]
    pub manifest: PathBuf,
    /// Output model JSON.
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Optical-density threshold for tissue pixels.
    #[arg(long, default_value_t = stain::DEFAULT_BETA)]
    pub beta: f64,
    /// Percentile of the extreme angles.
    #[arg(long, default_value_t = stain::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Background light intensity.
    #[arg(long, default_value_t = stain::DEFAULT_BACKGROUND)]
    pub background: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "manifest"]))]
pub struct StainAdjustArgs {
    /// Single input image; --out is then the output image path.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Dataset manifest; --out is then the output directory.
    #[arg(long, env = "STRONGAUG_MANIFEST")]
    pub manifest: Option<PathBuf>,
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, env = "STRONGAUG_STAIN_MODEL")]
    pub model: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Prediction CSV files, or directories searched recursively for them.
    #[arg(long, num_args = 1.., required = true)]
    pub predictions: Vec<PathBuf>,
    /// Prediction files of a baseline method, for percentage-point tables.
    #[arg(long, num_args = 1..)]
    pub baseline: Vec<PathBuf>,
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Also render SVG heatmaps.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CatalogArgs {
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TileArgs {
    #[arg(long, env = "STRONGAUG_MANIFEST")]
    pub manifest: PathBuf,
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub tile_size: u32,
    #[arg(long, default_value_t = 0.2)]
    pub overlap: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SubsampleArgs {
    #[arg(long, env = "STRONGAUG_MANIFEST")]
    pub manifest: PathBuf,
    #[arg(long, env = "STRONGAUG_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long)]
    pub per_label: usize,
}

#[derive(Serialize)]
struct RunMeta<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a T,
    config_sha256: String,
    crate_version: &'a str,
    catalog_schema_version: u32,
}

#[derive(Serialize)]
struct RunEnv {
    workers: usize,
    started_unix_ms: u128,
    finished_unix_ms: u128,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    s.push('\n');
    crate::shiftgen::write_atomic(path, s.as_bytes())
}

struct RunContext {
    seed: u64,
    workers: usize,
    started: u128,
}

impl RunContext {
    /// Write `run.json` and `run_env.json` into `dir`, or next to `dir`
    /// with the given file-name prefix when the output is a single file.
    fn record<T: Serialize>(&self, command: &str, config: &T, dir: &Path, prefix: &str) -> Result<()> {
        let config_json = serde_json::to_string(config).map_err(|e| Error::Internal(e.to_string()))?;
        let meta = RunMeta {
            command,
            seed: self.seed,
            config,
            config_sha256: Sha256::digest(format!("{command}\n{}\n{config_json}", self.seed))
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect(),
            crate_version: env!("CARGO_PKG_VERSION"),
            catalog_schema_version: crate::SCHEMA_VERSION,
        };
        write_json(&dir.join(format!("{prefix}run.json")), &meta)?;
        let env = RunEnv {
            workers: self.workers,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        };
        write_json(&dir.join(format!("{prefix}run_env.json")), &env)
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

fn read_model(path: &Path) -> Result<StainModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

fn load_images(loaded: &LoadedManifest) -> Result<Vec<crate::ImageRGB8>> {
    let results: Vec<Result<_>> = loaded
        .manifest
        .entries
        .par_iter()
        .map(|e| io::read_image(loaded.image_path(e)))
        .collect();
    collect_failures(
        results,
        loaded.manifest.entries.iter().map(|e| e.id.clone()),
    )
}

/// Split per-item results into values, or one error listing every failure.
fn collect_failures<T>(
    results: Vec<Result<T>>,
    names: impl Iterator<Item = String>,
) -> Result<Vec<T>> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (res, name) in results.into_iter().zip(names) {
        match res {
            Ok(v) => ok.push(v),
            Err(e) => failures.push(Failure::new(name, &e)),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(Error::Failures { total, failures })
    }
}

fn cmd_augment(ctx: &RunContext, args: &AugmentArgs) -> Result<()> {
    let config = match &args.policy_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<PolicyConfig>(&text).map_err(|e| {
                // a rejected policy is a validation problem, not bad data
                Error::InvalidArgument(format!("{}: {e}", path.display()))
            })?
        }
        None => match args.policy {
            PolicyName::Strong => PolicyConfig::strong(args.p)?,
            PolicyName::Rand => PolicyConfig::rand_augment(args.n, args.m)?,
            PolicyName::Trivial => PolicyConfig::trivial(),
        },
    };
    let loaded = LoadedManifest::load(&args.manifest)?;
    let (manifest, traces) =
        augment_dataset(&loaded, &config, &args.resample.options(), ctx.seed, &args.out)?;
    if args.trace {
        let mut s = String::new();
        for t in &traces {
            s.push_str(&serde_json::to_string(t).map_err(|e| Error::Internal(e.to_string()))?);
            s.push('\n');
        }
        crate::shiftgen::write_atomic(&args.out.join("trace.jsonl"), s.as_bytes())?;
    }
    log::info!("augmented {} images", manifest.len());

    #[derive(Serialize)]
    struct Resolved<'a> {
        #[serde(flatten)]
        args: &'a AugmentArgs,
        policy_config: &'a PolicyConfig,
    }
    ctx.record(
        "augment",
        &Resolved {
            args,
            policy_config: &config,
        },
        &args.out,
        "",
    )
}

fn cmd_shift(ctx: &RunContext, args: &ShiftArgs) -> Result<()> {
    let loaded = LoadedManifest::load(&args.manifest)?;
    if let Some(kind) = &args.transform {
        let kind: TransformKind = kind.parse()?;
        let spec_text = args.magnitudes.as_deref().unwrap_or("default");
        let magnitudes: Vec<Magnitude> = if spec_text == "default" {
            crate::transforms::default_eval_grid(kind)
        } else {
            parse_list(spec_text, "--magnitudes")?
                .into_iter()
                .map(|v| Magnitude::new(kind, v))
                .collect::<Result<_, _>>()?
        };
        for m in magnitudes {
            let spec = ShiftSpec::Transform {
                magnitude: m,
                seed: ctx.seed,
                options: args.resample.options(),
            };
            let dir = args.out.join(spec.dataset_name());
            let manifest = shift_dataset(&loaded, &spec, &dir)?;
            log::info!("wrote {} ({} images)", dir.display(), manifest.len());
        }
    } else if let Some(grid) = &args.stain_grid {
        let model_path = args
            .stain_model
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("--stain-grid needs --stain-model".into()))?;
        let model = read_model(model_path)?;
        let axis = |s: &str, what| {
            if s == "default" {
                Ok(DEFAULT_STAIN_GRID.to_vec())
            } else {
                parse_list(s, what)
            }
        };
        let h = axis(&grid[0], "--stain-grid H")?;
        let e = axis(&grid[1], "--stain-grid E")?;
        let written = stain_grid(&loaded, &model, &h, &e, &args.out)?;
        log::info!("wrote {} stain-shifted datasets", written.len());
    } else {
        return Err(Error::InvalidArgument(
            "shift needs either --transform/--magnitudes or --stain-grid".into(),
        ));
    }
    ctx.record("shift", args, &args.out, "")
}

fn file_prefix(out: &Path) -> (PathBuf, String) {
    let dir = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    (dir, format!("{stem}."))
}

fn cmd_stain_fit(ctx: &RunContext, args: &StainFitArgs) -> Result<()> {
    let loaded = LoadedManifest::load(&args.manifest)?;
    let images = load_images(&loaded)?;
    let model = stain::mean_stain_model(&images, args.beta, args.alpha, args.background)?;
    write_json(&args.out, &model)?;
    let (dir, prefix) = file_prefix(&args.out);
    ctx.record("stain fit", args, &dir, &prefix)
}

fn cmd_stain_adjust(ctx: &RunContext, args: &StainAdjustArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let adj = StainAdjustment::new(args.h, args.e)?;
    if let Some(input) = &args.input {
        let img = io::read_image(input)?;
        io::write_png(&stain::stain_adjust(&img, &model, adj), &args.out)?;
        let (dir, prefix) = file_prefix(&args.out);
        ctx.record("stain adjust", args, &dir, &prefix)
    } else {
        let manifest = args.manifest.as_ref().expect("clap enforces a source");
        let loaded = LoadedManifest::load(manifest)?;
        let spec = ShiftSpec::stain(adj.h, adj.e, model)?;
        shift_dataset(&loaded, &spec, &args.out)?;
        ctx.record("stain adjust", args, &args.out, "")
    }
}

fn collect_csvs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
            .collect::<Result<_>>()?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            walk(p, &mut files)?;
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::InvalidArgument("no prediction files found".into()));
    }
    Ok(files)
}

/// Read prediction files and check each has a defined AUROC, reporting
/// every bad file rather than only the first.
fn read_predictions(inputs: &[PathBuf]) -> Result<Vec<PredictionSet>> {
    let files = collect_csvs(inputs)?;
    let results: Vec<Result<PredictionSet>> = files
        .par_iter()
        .map(|p| {
            let set = PredictionSet::read_csv(p)?;
            crate::metrics::auroc(&set)?;
            Ok(set)
        })
        .collect();
    collect_failures(results, files.iter().map(|p| p.display().to_string()))
}

fn report_file_stem(report: &RobustnessReport) -> String {
    report.axes.title()
}

fn cmd_evaluate(ctx: &RunContext, args: &EvaluateArgs) -> Result<()> {
    let sets = read_predictions(&args.predictions)?;
    let mut reports = build_reports(&sets)?;
    if !args.baseline.is_empty() {
        let base = build_reports(&read_predictions(&args.baseline)?)?;
        reports = reports
            .into_iter()
            .map(|r| {
                let b = base.iter().find(|b| b.axes == r.axes).ok_or_else(|| {
                    crate::metrics::MetricsError::AxisMismatch(format!(
                        "baseline has no `{}` grid with the same axes",
                        r.axes.title()
                    ))
                })?;
                Ok(r.with_baseline(b)?)
            })
            .collect::<Result<_>>()?;
    }

    #[derive(Serialize)]
    struct ReportFile<'a> {
        schema_version: u32,
        reports: &'a [RobustnessReport],
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_json(
        &args.out.join("report.json"),
        &ReportFile {
            schema_version: crate::SCHEMA_VERSION,
            reports: &reports,
        },
    )?;
    let write = |name: String, text: String| {
        crate::shiftgen::write_atomic(&args.out.join(name), text.as_bytes())
    };
    for r in &reports {
        let stem = report_file_stem(r);
        write(format!("{stem}.csv"), r.to_csv_matrix())?;
        if let Some(pp) = r.pp_csv_matrix() {
            write(format!("{stem}_pp.csv"), pp)?;
        }
        if args.svg {
            write(format!("{stem}.svg"), r.to_svg())?;
            if let Some(pp) = r.pp_svg() {
                write(format!("{stem}_pp.svg"), pp)?;
            }
        }
    }
    ctx.record("evaluate", args, &args.out, "")
}

fn cmd_catalog(args: &CatalogArgs) -> Result<()> {
    let catalog = Catalog::current();
    match &args.out {
        Some(path) => write_json(path, &catalog),
        None => {
            println!(
                "{}",
                serde_json::to_string_pretty(&catalog).map_err(|e| Error::Internal(e.to_string()))?
            );
            Ok(())
        }
    }
}

fn cmd_tile(ctx: &RunContext, args: &TileArgs) -> Result<()> {
    let grid = TileGridSpec::new(args.tile_size, args.overlap)?;
    let loaded = LoadedManifest::load(&args.manifest)?;
    let m = tile_dataset(&loaded, &grid, &args.out)?;
    log::info!("wrote {} tiles", m.len());
    ctx.record("tile", args, &args.out, "")
}

fn cmd_subsample(ctx: &RunContext, args: &SubsampleArgs) -> Result<()> {
    let loaded = LoadedManifest::load(&args.manifest)?;
    subsample_per_label(&loaded, args.per_label, ctx.seed, &args.out)?;
    ctx.record("subsample", args, &args.out, "")
}

fn dispatch(ctx: &RunContext, command: &Command) -> Result<()> {
    match command {
        Command::Augment(a) => cmd_augment(ctx, a),
        Command::Shift(a) => cmd_shift(ctx, a),
        Command::Stain(StainCommand::Fit(a)) => cmd_stain_fit(ctx, a),
        Command::Stain(StainCommand::Adjust(a)) => cmd_stain_adjust(ctx, a),
        Command::Evaluate(a) => cmd_evaluate(ctx, a),
        Command::Catalog(a) => cmd_catalog(a),
        Command::Tile(a) => cmd_tile(ctx, a),
        Command::Subsample(a) => cmd_subsample(ctx, a),
    }
}

pub fn version_string() -> String {
    format!(
        "strongaug {} (catalog schema {})",
        env!("CARGO_PKG_VERSION"),
        crate::SCHEMA_VERSION
    )
}

#[derive(Serialize)]
struct ErrorSummary<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    failures: Option<&'a [Failure]>,
}

fn print_error(err: &Error) -> i32 {
    let code = err.exit_code();
    let summary = ErrorSummary {
        error: err.kind(),
        message: err.to_string(),
        exit_code: code,
        failures: match err {
            Error::Failures { failures, .. } => Some(failures),
            _ => None,
        },
    };
    eprintln!(
        "{}",
        serde_json::to_string(&summary).unwrap_or_else(|_| err.to_string())
    );
    code
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    if cli.version {
        println!("{}", version_string());
        return 0;
    }
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .try_init();
    let Some(command) = cli.command else {
        let _ = Cli::command().print_help();
        return 2;
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => return print_error(&Error::Internal(e.to_string())),
    };
    let ctx = RunContext {
        seed: cli.seed,
        workers: pool.current_num_threads(),
        started: now_ms(),
    };
    match pool.install(|| dispatch(&ctx, &command)) {
        Ok(()) => 0,
        Err(e) => print_error(&e),
    }
}

/// Parse `args` (including the program name) and run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
