//! Plain-text `key=value` checkpoints. Floats are written with 17 significant
//! digits so every value reads back bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::TrainState;
use crate::error::{Error, Result};

const STATE_KEYS: [&str; 11] = [
    "alpha", "t", "u", "h", "seed", "step", "reg_alpha", "reg_t", "avg_alpha", "avg_t", "avg_u",
];

/// A training state plus free-form metadata (e.g. the image grid).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: TrainState,
    pub metadata: BTreeMap<String, String>,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn floats(vs: &[f64]) -> String {
    vs.iter().map(|&v| float(v)).collect::<Vec<_>>().join(",")
}

fn parse_float(line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad number `{s}`")))
}

fn parse_floats(line: usize, s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_float(line, p)).collect()
}

impl Checkpoint {
    pub fn new(state: TrainState) -> Self {
        Checkpoint {
            state,
            metadata: BTreeMap::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let s = &self.state;
        let mut out = String::from("# logsupmod training checkpoint\n");
        let _ = writeln!(out, "alpha={}", floats(&s.alpha));
        let _ = writeln!(out, "t={}", floats(&s.t));
        let _ = writeln!(out, "u={}", float(s.u));
        let _ = writeln!(out, "h={}", s.h);
        let _ = writeln!(out, "seed={}", s.seed);
        let _ = writeln!(out, "step={}", float(s.step));
        let _ = writeln!(out, "reg_alpha={}", float(s.reg_alpha));
        let _ = writeln!(out, "reg_t={}", float(s.reg_t));
        let _ = writeln!(out, "avg_alpha={}", floats(&s.avg_alpha));
        let _ = writeln!(out, "avg_t={}", floats(&s.avg_t));
        let _ = writeln!(out, "avg_u={}", float(s.avg_u));
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut metadata = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected key=value"))?;
            let (k, v) = (k.trim(), v.trim());
            if STATE_KEYS.contains(&k) {
                if fields.insert(k, (line, v)).is_some() {
                    return Err(Error::parse(line, format!("duplicate key `{k}`")));
                }
            } else {
                metadata.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::parse(0, format!("missing key `{k}`")))
        };
        let list = |k: &str| get(k).and_then(|(l, v)| parse_floats(l, v));
        let scalar = |k: &str| get(k).and_then(|(l, v)| parse_float(l, v));
        let integer = |k: &str| {
            get(k).and_then(|(l, v)| {
                v.parse::<u64>()
                    .map_err(|_| Error::parse(l, format!("bad integer `{v}`")))
            })
        };
        let state = TrainState {
            alpha: list("alpha")?,
            t: list("t")?,
            u: scalar("u")?,
            h: integer("h")?,
            avg_alpha: list("avg_alpha")?,
            avg_t: list("avg_t")?,
            avg_u: scalar("avg_u")?,
            seed: integer("seed")?,
            step: scalar("step")?,
            reg_alpha: scalar("reg_alpha")?,
            reg_t: scalar("reg_t")?,
        };
        if state.alpha.len() != state.avg_alpha.len() || state.t.len() != state.avg_t.len() {
            return Err(Error::parse(0, "averaged and current parameters differ in length"));
        }
        if state.alpha.iter().any(|&a| a < 0.0) {
            return Err(Error::parse(0, "negative mixture weight"));
        }
        Ok(Checkpoint { state, metadata })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Checkpoint::from_text(&std::fs::read_to_string(path)?)
    }
}
