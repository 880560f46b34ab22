use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use logsupmod::experiments::bound_comparison::{bound_comparison, rows_to_csv, summarize};
use logsupmod::experiments::denoise::{run_denoise, DecodedImage, DenoiseModel, DenoiseOutcome, DenoiseReport};
use logsupmod::experiments::{run_supervised, run_unsupervised, BinaryImage, ConfigError, ExperimentConfig};
use logsupmod::learning::{finalize, Checkpoint};
use logsupmod::run_selftest;

use crate::args::{Cli, Command};
use crate::exit;

const DEFAULT_OUT: &str = "out";

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Library(logsupmod::Error),
    MissingSubcommand,
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::UnknownKey(_)) => exit::USAGE,
            CliError::Config(_) => exit::MALFORMED_VALUE,
            CliError::Library(logsupmod::Error::Numerical(_)) => exit::NUMERICAL,
            CliError::Library(_) => exit::DATA,
            CliError::MissingSubcommand => exit::MISSING_SUBCOMMAND,
            CliError::Usage(_) => exit::USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Library(e) => e.fmt(f),
            CliError::MissingSubcommand => write!(
                f,
                "missing subcommand (one of bounds, train-supervised, train-unsupervised, denoise, selftest)"
            ),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<logsupmod::Error> for CliError {
    fn from(e: logsupmod::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Library(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Defaults, then the config file, then flags.
fn resolve(cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let mut config = ExperimentConfig::default();
    let mut out = None;
    if let Some(path) = &cli.flags.config {
        let text = fs::read_to_string(path)?;
        out = config.apply_text(&text)?.map(PathBuf::from);
    }
    for (key, value) in cli.flags.overrides() {
        config.set(key, value)?;
    }
    config.validate()?;
    let out = cli.flags.out.clone().or(out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((config, out))
}

pub fn run(cli: &Cli) -> Result<u8> {
    let (config, out) = resolve(cli)?;
    let command = cli.command.ok_or(CliError::MissingSubcommand)?;
    fs::create_dir_all(&out)?;
    fs::write(out.join("config.resolved.txt"), config.to_text())?;
    match command {
        Command::Bounds => bounds(&config, &out),
        Command::TrainSupervised => {
            let outcome = run_supervised(&config)?;
            write_training(&config, &out, command, &outcome)
        }
        Command::TrainUnsupervised => {
            let outcome = run_unsupervised(&config, config.known_pi)?;
            write_training(&config, &out, command, &outcome)
        }
        Command::Denoise => denoise(&config, &out),
        Command::Selftest => {
            let report = run_selftest(config.seed);
            println!("{report}");
            fs::write(out.join("selftest.txt"), format!("{report}\n"))?;
            Ok(if report.all_passed() { exit::SUCCESS } else { exit::NUMERICAL })
        }
    }
}

fn bounds(config: &ExperimentConfig, out: &Path) -> Result<u8> {
    let rows = bound_comparison(config.points, config.scale, config.samples, config.repeats, config.seed)?;
    fs::write(out.join("bounds.csv"), rows_to_csv(&rows))?;
    let summary = summarize(&rows);
    fs::write(out.join("bounds_summary.csv"), &summary)?;
    print!("{summary}");
    Ok(exit::SUCCESS)
}

fn write_report(out: &Path, report: &DenoiseReport, decoded: &[DecodedImage], height: usize, width: usize) -> Result<()> {
    fs::write(out.join("report.csv"), report.to_csv())?;
    fs::write(out.join("errors.csv"), report.errors_csv())?;
    let images = out.join("images");
    fs::create_dir_all(&images)?;
    for (i, d) in decoded.iter().enumerate() {
        for (name, x) in [("clean", &d.clean), ("noisy", &d.noisy), ("map", &d.map), ("mean_marginals", &d.mean_marginal)] {
            BinaryImage::new(height, width, x.clone())?.save(&images.join(format!("test_{i:03}_{name}.pbm")))?;
        }
    }
    print!("{}", report.to_csv());
    Ok(())
}

fn write_training(config: &ExperimentConfig, out: &Path, command: Command, outcome: &DenoiseOutcome) -> Result<u8> {
    let mut checkpoint = Checkpoint::new(outcome.state.clone());
    checkpoint.metadata.insert("grid".into(), format!("{}x{}", outcome.height, outcome.width));
    checkpoint.metadata.insert("trained_by".into(), command.name().into());
    checkpoint.metadata.insert("noise".into(), format!("{:?}", config.noise));
    checkpoint.save(&out.join("checkpoint.txt"))?;
    write_report(out, &outcome.report, &outcome.decoded, outcome.height, outcome.width)?;
    Ok(exit::SUCCESS)
}

fn denoise(config: &ExperimentConfig, out: &Path) -> Result<u8> {
    let path = config
        .checkpoint
        .as_ref()
        .ok_or_else(|| CliError::Usage("denoise requires --checkpoint FILE".into()))?;
    let checkpoint = Checkpoint::load(path)?;
    let grid = checkpoint
        .metadata
        .get("grid")
        .and_then(|g| logsupmod::experiments::config::parse_grid(g))
        .ok_or_else(|| logsupmod::Error::Config(format!("checkpoint {} has no grid", path.display())))?;
    let model = DenoiseModel::new(grid.0, grid.1, finalize(&checkpoint.state)?)?;
    let (report, decoded) = run_denoise(config, &model)?;
    write_report(out, &report, &decoded, grid.0, grid.1)?;
    Ok(exit::SUCCESS)
}
