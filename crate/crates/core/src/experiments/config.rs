//! Experiment configuration and its `key=value` text form. Keys are the
//! command-line flag names without the leading dashes.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("malformed value `{value}` for `{key}`")]
    Malformed { key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    /// Flip probability of the noise channel.
    pub noise: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Logistic samples for bound estimates and mean-marginal decoding.
    pub samples: usize,
    /// Stochastic subgradient iterations.
    pub iters: usize,
    /// Step constant `C`.
    pub step: f64,
    /// `None` selects the weight by cross-validation.
    pub reg_alpha: Option<f64>,
    pub reg_t: Option<f64>,
    pub known_pi: bool,
    /// Points per cluster in the bound comparison.
    pub points: usize,
    /// Edge-weight scale `c` of the bound comparison graph.
    pub scale: f64,
    /// Independent repetitions of the bound comparison.
    pub repeats: usize,
    pub images: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            height: 20,
            width: 20,
            noise: 0.1,
            n_train: 30,
            n_test: 30,
            samples: 100,
            iters: 20_000,
            step: 0.1,
            reg_alpha: None,
            reg_t: None,
            known_pi: true,
            points: 5,
            scale: 1.0,
            repeats: 10,
            images: None,
            checkpoint: None,
        }
    }
}

pub const KEYS: [&str; 17] = [
    "seed",
    "grid",
    "noise",
    "n-train",
    "n-test",
    "samples",
    "iters",
    "step",
    "reg-alpha",
    "reg-t",
    "known-pi",
    "points",
    "scale",
    "repeats",
    "images",
    "checkpoint",
    "out",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Malformed {
        key: key.into(),
        value: value.into(),
    })
}

fn parse_reg(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value.trim() == "auto" {
        Ok(None)
    } else {
        let v: f64 = parse(key, value)?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(ConfigError::Malformed {
                key: key.into(),
                value: value.into(),
            });
        }
        Ok(Some(v))
    }
}

/// Parses `HxW`.
pub fn parse_grid(value: &str) -> Option<(usize, usize)> {
    let (h, w) = value.trim().split_once(['x', 'X'])?;
    Some((h.parse().ok()?, w.parse().ok()?))
}

fn opt_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl ExperimentConfig {
    /// Sets one key. `out` is accepted but handled by the caller.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "grid" => {
                let (h, w) = parse_grid(value).ok_or_else(|| ConfigError::Malformed {
                    key: key.into(),
                    value: value.into(),
                })?;
                self.height = h;
                self.width = w;
            }
            "noise" => self.noise = parse(key, value)?,
            "n-train" => self.n_train = parse(key, value)?,
            "n-test" => self.n_test = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "iters" => self.iters = parse(key, value)?,
            "step" => self.step = parse(key, value)?,
            "reg-alpha" => self.reg_alpha = parse_reg(key, value)?,
            "reg-t" => self.reg_t = parse_reg(key, value)?,
            "known-pi" => self.known_pi = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            "scale" => self.scale = parse(key, value)?,
            "repeats" => self.repeats = parse(key, value)?,
            "images" => self.images = opt_path(value),
            "checkpoint" => self.checkpoint = opt_path(value),
            "out" => {}
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Reads `key=value` lines; `#` starts a comment. Returns the `out` value
    /// if present.
    pub fn apply_text(&mut self, text: &str) -> Result<Option<String>, ConfigError> {
        let mut out = None;
        for line in text.lines() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Malformed {
                key: body.into(),
                value: String::new(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            self.set(k, v)?;
            if k == "out" {
                out = Some(v.to_string());
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(0.0..=0.5).contains(&self.noise) {
            return bad(format!("noise {} outside [0, 0.5]", self.noise));
        }
        if self.height == 0 || self.width == 0 {
            return bad(format!("degenerate grid {}x{}", self.height, self.width));
        }
        for (name, v) in [
            ("n-train", self.n_train),
            ("n-test", self.n_test),
            ("samples", self.samples),
            ("iters", self.iters),
            ("points", self.points),
            ("repeats", self.repeats),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return bad(format!("scale must be nonnegative, got {}", self.scale));
        }
        Ok(())
    }

    /// Fully resolved `key=value` text; reading it back yields `self`.
    pub fn to_text(&self) -> String {
        let reg = |r: Option<f64>| r.map_or("auto".to_string(), |v| format!("{v:?}"));
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        let mut s = String::from("# resolved configuration\n");
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "grid={}x{}", self.height, self.width);
        let _ = writeln!(s, "noise={:?}", self.noise);
        let _ = writeln!(s, "n-train={}", self.n_train);
        let _ = writeln!(s, "n-test={}", self.n_test);
        let _ = writeln!(s, "samples={}", self.samples);
        let _ = writeln!(s, "iters={}", self.iters);
        let _ = writeln!(s, "step={:?}", self.step);
        let _ = writeln!(s, "reg-alpha={}", reg(self.reg_alpha));
        let _ = writeln!(s, "reg-t={}", reg(self.reg_t));
        let _ = writeln!(s, "known-pi={}", self.known_pi);
        let _ = writeln!(s, "points={}", self.points);
        let _ = writeln!(s, "scale={:?}", self.scale);
        let _ = writeln!(s, "repeats={}", self.repeats);
        let _ = writeln!(s, "images={}", path(&self.images));
        let _ = writeln!(s, "checkpoint={}", path(&self.checkpoint));
        s
    }
}
