//! Experiment configuration: defaults, a flat `key = value` file format and
//! list parsers shared with the command line.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    NmseVsSnr,
    ComplexityVsNrx,
    Papr,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            other => Err(config_err(
                "format",
                format!("expected csv|svg|both, got `{other}`"),
            )),
        }
    }
}

/// Deliberate corruption used to check that `verify` can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Perturb one synthesized admittance entry by 1e-3 (relative to Y_0).
    Admittance,
    /// Scale the reported KKT multiplier by 1.01.
    Multiplier,
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Fault::None),
            "admittance" => Ok(Fault::Admittance),
            "multiplier" => Ok(Fault::Multiplier),
            other => Err(config_err(
                "fault",
                format!("expected none|admittance|multiplier, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: SweepKind,
    /// `(n_tx, n_rx)` pairs.
    pub sizes: Vec<(usize, usize)>,
    pub snr_db: Vec<f64>,
    pub eps_tx: f64,
    pub eps_rx: f64,
    pub trials: u64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub p_tx: f64,
    pub l_tx: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub workers: usize,
    pub fault: Fault,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    pub fn defaults(kind: SweepKind) -> Self {
        let (sizes, snr_db) = match kind {
            SweepKind::NmseVsSnr => (
                vec![(8, 8), (16, 16)],
                (-2..=6).map(|i| 5.0 * i as f64).collect(),
            ),
            SweepKind::ComplexityVsNrx => {
                let mut sizes = Vec::new();
                for n_tx in [16, 64] {
                    for n_rx in (256..=2048).step_by(256) {
                        sizes.push((n_tx, n_rx));
                    }
                }
                (sizes, vec![])
            }
            SweepKind::Papr => (vec![(16, 16)], vec![0.0]),
            SweepKind::Verify => (vec![(8, 8)], vec![10.0]),
        };
        Self {
            kind,
            sizes,
            snr_db,
            eps_tx: 0.8,
            eps_rx: 0.8,
            trials: 10_000,
            seed: DEFAULT_SEED,
            schemes: Scheme::ALL.to_vec(),
            p_tx: 1.0,
            l_tx: 1,
            out_dir: PathBuf::from("results"),
            format: OutputFormat::Both,
            workers: default_workers(),
            fault: Fault::None,
        }
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "size" | "sizes" => self.sizes = parse_sizes(value)?,
            "snr" | "snr_db" => self.snr_db = parse_snr_list(value)?,
            "eps" => {
                let e = parse_num("eps", value)?;
                self.eps_tx = e;
                self.eps_rx = e;
            }
            "eps_tx" => self.eps_tx = parse_num(key, value)?,
            "eps_rx" => self.eps_rx = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "schemes" => self.schemes = parse_schemes(value)?,
            "p_tx" => self.p_tx = parse_num(key, value)?,
            "l_tx" => self.l_tx = parse_num(key, value)?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "format" => self.format = value.parse()?,
            "workers" => self.workers = parse_num(key, value)?,
            "fault" => self.fault = value.parse()?,
            other => return Err(config_err(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_err("trials", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(config_err("workers", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(config_err("schemes", "must not be empty"));
        }
        if self.sizes.is_empty() {
            return Err(config_err("sizes", "must not be empty"));
        }
        if let Some(&(t, r)) = self.sizes.iter().find(|(t, r)| *t == 0 || *r == 0) {
            return Err(config_err(
                "sizes",
                format!("antenna counts must be positive, got {t}x{r}"),
            ));
        }
        if self.kind != SweepKind::ComplexityVsNrx && self.snr_db.is_empty() {
            return Err(config_err("snr", "must not be empty"));
        }
        if let Some(v) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(config_err("snr", format!("values must be finite, got {v}")));
        }
        for (name, e) in [("eps_tx", self.eps_tx), ("eps_rx", self.eps_rx)] {
            if !(0.0..1.0).contains(&e) {
                return Err(config_err(name, format!("must lie in [0, 1), got {e}")));
            }
        }
        if !(self.p_tx.is_finite() && self.p_tx > 0.0) {
            return Err(config_err("p_tx", "must be positive"));
        }
        if let Some(&(t, _)) = self
            .sizes
            .iter()
            .find(|(t, _)| self.l_tx == 0 || self.l_tx > *t)
        {
            return Err(config_err("l_tx", format!("must lie in 1..={t}")));
        }
        Ok(())
    }
}

pub(crate) fn config_err(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(field: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e: T::Err| config_err(field, format!("`{s}`: {e}")))
}

/// `"16x16,64x64"` (transmit count first). A bare `"16"` means `16x16`.
pub fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let p = p.trim();
            match p.split_once(['x', 'X']) {
                Some((t, r)) => Ok((parse_num("size", t)?, parse_num("size", r)?)),
                None => {
                    let n = parse_num("size", p)?;
                    Ok((n, n))
                }
            }
        })
        .collect()
}

/// Comma-separated dB values, or `start:stop:step`.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, step): (f64, f64, f64) = (
            parse_num("snr", parts[0])?,
            parse_num("snr", parts[1])?,
            parse_num("snr", parts[2])?,
        );
        if step.is_nan() || step <= 0.0 || b < a {
            return Err(config_err(
                "snr",
                "range needs start <= stop and a positive step",
            ));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| a + step * i as f64).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_num("snr", p))
        .collect()
}

pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    let mut out = Vec::new();
    for p in s.split(',').filter(|p| !p.trim().is_empty()) {
        let sc: Scheme = p
            .parse()
            .map_err(|_| config_err("schemes", format!("unknown scheme `{}`", p.trim())))?;
        if !out.contains(&sc) {
            out.push(sc);
        }
    }
    Ok(out)
}
