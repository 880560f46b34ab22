use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "logsupmod", version, about = "Bounds, learning and denoising for log-supermodular models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Compare log-partition bounds on conditioned Gaussian-mixture graphs.
    Bounds,
    /// Conditional maximum likelihood on clean/noisy image pairs.
    TrainSupervised,
    /// Latent-variable maximum likelihood on noisy images only.
    TrainUnsupervised,
    /// Decode noisy images with a trained checkpoint.
    Denoise,
    /// Run the invariant suites on small instances.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::TrainSupervised => "train-supervised",
            Command::TrainUnsupervised => "train-unsupervised",
            Command::Denoise => "denoise",
            Command::Selftest => "selftest",
        }
    }
}

/// Values stay strings here; they are validated against the configuration so
/// that the file and the command line share one parser.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// key=value configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Flip probability.
    #[arg(long, global = true, value_name = "PI")]
    pub noise: Option<String>,
    /// Logistic samples M.
    #[arg(long, global = true, value_name = "M")]
    pub samples: Option<String>,
    /// SGD iterations H.
    #[arg(long, global = true, value_name = "H")]
    pub iters: Option<String>,
    /// Step constant C.
    #[arg(long, global = true, value_name = "C")]
    pub step: Option<String>,
    /// Weight or `auto` for cross-validation.
    #[arg(long = "reg-alpha", global = true)]
    pub reg_alpha: Option<String>,
    /// Weight or `auto` for cross-validation.
    #[arg(long = "reg-t", global = true)]
    pub reg_t: Option<String>,
    #[arg(long, global = true, value_name = "HxW")]
    pub grid: Option<String>,
    #[arg(long = "n-train", global = true)]
    pub n_train: Option<String>,
    #[arg(long = "n-test", global = true)]
    pub n_test: Option<String>,
    /// Whether the noise level is known to the unsupervised learner.
    #[arg(long = "known-pi", global = true, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub known_pi: Option<String>,
    /// Directory of P1 PBM images.
    #[arg(long, global = true, value_name = "DIR")]
    pub images: Option<String>,
    /// Model checkpoint for `denoise`.
    #[arg(long, global = true, value_name = "FILE")]
    pub checkpoint: Option<String>,
    /// Points per cluster in `bounds`.
    #[arg(long, global = true, value_name = "N")]
    pub points: Option<String>,
    /// Edge-weight scale c in `bounds`.
    #[arg(long, global = true, value_name = "C")]
    pub scale: Option<String>,
    /// Independent repetitions in `bounds`.
    #[arg(long, global = true)]
    pub repeats: Option<String>,
}

impl Flags {
    /// `(key, value)` overrides in a fixed order.
    pub fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("seed", &self.seed),
            ("noise", &self.noise),
            ("samples", &self.samples),
            ("iters", &self.iters),
            ("step", &self.step),
            ("reg-alpha", &self.reg_alpha),
            ("reg-t", &self.reg_t),
            ("grid", &self.grid),
            ("n-train", &self.n_train),
            ("n-test", &self.n_test),
            ("known-pi", &self.known_pi),
            ("images", &self.images),
            ("checkpoint", &self.checkpoint),
            ("points", &self.points),
            ("scale", &self.scale),
            ("repeats", &self.repeats),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}
