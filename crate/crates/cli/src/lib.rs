//! Command-line front end: argument parsing and the evaluation run.
//!
//! ```text
//! layout-eval <gt-image> <prediction-image> [output-file.csv] [output-directory]
//!             [--original <image>] [--classes <config>] [--alpha <0..1>]
//! ```

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use layout_eval_core::{
    decode_label_image, decode_rgb, encode_png, evaluate_with, render_error_map, render_overlay, summary_table,
    write_csv, ClassRegistry, Error as CoreError, EvaluationOptions, EvaluationReport, MicroAveraging, Palette,
    Role,
};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DECODE: i32 = 4;
pub const EXIT_DIMENSION: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "layout-eval",
    version,
    about = "Pixel-level evaluation of document layout analysis predictions",
    after_help = "Pixel values encode one class per bit (default: background=0x01, comment=0x02, \
                  decoration=0x04, main-text=0x08, boundary flag 0x800000 ignored).\n\
                  Exit codes: 0 ok, 2 usage, 3 I/O, 4 decode, 5 dimension mismatch."
)]
struct Args {
    /// Ground truth image
    gt_image: PathBuf,
    /// Prediction image, same encoding as the ground truth
    prediction_image: PathBuf,
    /// Write the metrics as CSV to this file
    output_file: Option<PathBuf>,
    /// Write visualization images to this directory
    output_directory: Option<PathBuf>,
    /// Original page image, enables the overlay visualization
    #[arg(long, value_name = "IMAGE")]
    original: Option<PathBuf>,
    /// Class registry file (TOML); defaults to the DIVA-HisDB encoding
    #[arg(long, value_name = "CONFIG")]
    classes: Option<PathBuf>,
    /// Weight of the error map in the overlay
    #[arg(long, default_value_t = 0.5, value_name = "0..1")]
    alpha: f64,
    /// Micro-average by pooling counts instead of weighting class scores
    #[arg(long)]
    pooled_micro: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gt_path: PathBuf,
    pub prediction_path: PathBuf,
    pub output_file: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub original_image_path: Option<PathBuf>,
    /// `None` selects the built-in DIVA-HisDB registry.
    pub registry_path: Option<PathBuf>,
    pub alpha: f64,
    pub micro: MicroAveraging,
}

impl RunConfig {
    pub fn new(gt_path: impl Into<PathBuf>, prediction_path: impl Into<PathBuf>) -> Self {
        Self {
            gt_path: gt_path.into(),
            prediction_path: prediction_path.into(),
            output_file: None,
            output_dir: None,
            original_image_path: None,
            registry_path: None,
            alpha: Palette::default().alpha(),
            micro: MicroAveraging::default(),
        }
    }
}

/// What the command line asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Run(RunConfig),
    /// No arguments: show the expected inputs and stop.
    Usage(String),
    /// `--help` or `--version`.
    Info(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Decode { path: PathBuf, source: CoreError },

    #[error(transparent)]
    Dimension(CoreError),

    #[error("class registry {}: {source}", path.display())]
    Registry { path: PathBuf, source: CoreError },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Registry { .. } => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Decode { .. } => EXIT_DECODE,
            CliError::Dimension(_) => EXIT_DIMENSION,
        }
    }
}

pub fn usage() -> String {
    Args::command().render_help().to_string()
}

/// Parses the full argument vector, program name included.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if argv.len() <= 1 {
        return Ok(Invocation::Usage(usage()));
    }
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(Invocation::Info(e.to_string()));
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::Usage(format!("--alpha {} is outside [0, 1]", args.alpha)));
    }
    Ok(Invocation::Run(RunConfig {
        gt_path: args.gt_image,
        prediction_path: args.prediction_image,
        output_file: args.output_file,
        output_dir: args.output_directory,
        original_image_path: args.original,
        registry_path: args.classes,
        alpha: args.alpha,
        micro: if args.pooled_micro {
            MicroAveraging::Pooled
        } else {
            MicroAveraging::FrequencyWeighted
        },
    }))
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_registry(config: &RunConfig) -> Result<ClassRegistry, CliError> {
    let Some(path) = &config.registry_path else {
        return Ok(ClassRegistry::diva_hisdb());
    };
    ClassRegistry::from_path(path).map_err(|source| match source {
        CoreError::Io(source) => CliError::Io {
            path: path.clone(),
            source,
        },
        source => CliError::Registry {
            path: path.clone(),
            source,
        },
    })
}

fn decode_error(path: &Path, source: CoreError) -> CliError {
    match source {
        CoreError::DimensionMismatch { .. } => CliError::Dimension(source),
        source => CliError::Decode {
            path: path.to_owned(),
            source,
        },
    }
}

/// Visualization file names for a prediction image:
/// `<stem>.visualization.png` and `<stem>.overlap.png`.
pub fn visualization_paths(dir: &Path, prediction: &Path) -> (PathBuf, PathBuf) {
    let stem = prediction
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "prediction".to_owned());
    (
        dir.join(format!("{stem}.visualization.png")),
        dir.join(format!("{stem}.overlap.png")),
    )
}

/// Decodes, evaluates and writes whatever outputs the config asks for. The
/// summary table goes to `out`. No file is written unless requested.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<EvaluationReport, CliError> {
    let registry = load_registry(config)?;
    let gt_bytes = read(&config.gt_path)?;
    let pred_bytes = read(&config.prediction_path)?;
    let original_bytes = match (&config.output_dir, &config.original_image_path) {
        (Some(_), Some(path)) => Some((path, read(path)?)),
        _ => None,
    };

    let gt = decode_label_image(&gt_bytes, &registry, Role::GroundTruth)
        .map_err(|e| decode_error(&config.gt_path, e))?;
    let pred = decode_label_image(&pred_bytes, &registry, Role::Prediction)
        .map_err(|e| decode_error(&config.prediction_path, e))?;
    let options = EvaluationOptions { micro: config.micro };
    let report = evaluate_with(&gt, &pred, &registry, &options).map_err(|e| match e {
        CoreError::DimensionMismatch { .. } => CliError::Dimension(e),
        e => decode_error(&config.gt_path, e),
    })?;

    let io = |source: std::io::Error| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    write!(out, "{}", summary_table(&report)).map_err(io)?;

    if let Some(path) = &config.output_file {
        let mut csv = Vec::new();
        write_csv(&report, &mut csv).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        write(path, &csv)?;
    }

    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        let palette = Palette::default()
            .with_alpha(config.alpha)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let error_map = render_error_map(&gt, &pred, &registry, &palette)
            .map_err(|e| decode_error(&config.prediction_path, e))?;
        let (map_path, overlap_path) = visualization_paths(dir, &config.prediction_path);
        let png = |img| encode_png(img).map_err(|e| decode_error(&map_path, e));
        write(&map_path, &png(&error_map)?)?;

        if let Some((path, bytes)) = original_bytes {
            let original = decode_rgb(&bytes).map_err(|e| decode_error(path, e))?;
            let overlay = render_overlay(&error_map, &original, palette.alpha()).map_err(|e| match e {
                CoreError::DimensionMismatch { .. } => CliError::Dimension(e),
                e => decode_error(path, e),
            })?;
            write(&overlap_path, &png(&overlay)?)?;
        }
    }
    Ok(report)
}
