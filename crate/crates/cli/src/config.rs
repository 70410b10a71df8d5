//! Run configuration: defaults, `key = value` files and flag overrides all
//! go through the same key parser.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fockqi::receiver::Scheme;

use crate::error::{CliError, CliResult};

/// Probe protocols selectable on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    Tmss,
    Pa,
    Ps,
    Pc,
    Nlpa1,
    Nlpa2,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [
        Protocol::Tmss,
        Protocol::Pa,
        Protocol::Ps,
        Protocol::Pc,
        Protocol::Nlpa1,
        Protocol::Nlpa2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Tmss => "tmss",
            Protocol::Pa => "pa",
            Protocol::Ps => "ps",
            Protocol::Pc => "pc",
            Protocol::Nlpa1 => "nlpa1",
            Protocol::Nlpa2 => "nlpa2",
        }
    }

    /// Whether the probe depends on a beam-splitter transmissivity.
    pub fn uses_t(self) -> bool {
        self != Protocol::Tmss
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::usage(format!("unknown protocol '{s}'")))
    }
}

/// Criterion for picking a protocol's operating transmissivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TChoice {
    Entropy,
    Success,
}

impl FromStr for TChoice {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "entropy" => Ok(TChoice::Entropy),
            "success" => Ok(TChoice::Success),
            _ => Err(CliError::usage(format!("t_choice must be entropy or success, got '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    T,
    Kappa,
    K,
    Eta,
    R,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T => "T",
            SweepParam::Kappa => "kappa",
            SweepParam::K => "K",
            SweepParam::Eta => "eta",
            SweepParam::R => "r",
        }
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "T" => Ok(SweepParam::T),
            "kappa" => Ok(SweepParam::Kappa),
            "K" => Ok(SweepParam::K),
            "eta" => Ok(SweepParam::Eta),
            "r" => Ok(SweepParam::R),
            _ => Err(CliError::usage(format!("unknown sweep parameter '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Entropy,
    Success,
    Q,
    PError,
    Exponent,
    Gain,
    SnrDb,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Entropy => "entropy",
            Metric::Success => "success",
            Metric::Q => "q",
            Metric::PError => "p_error",
            Metric::Exponent => "exponent",
            Metric::Gain => "gain",
            Metric::SnrDb => "snr_db",
        }
    }
}

impl FromStr for Metric {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        [
            Metric::Entropy,
            Metric::Success,
            Metric::Q,
            Metric::PError,
            Metric::Exponent,
            Metric::Gain,
            Metric::SnrDb,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| CliError::usage(format!("unknown metric '{s}'")))
    }
}

/// Everything a preset or sweep needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub r: f64,
    pub kappa: f64,
    pub n_th: f64,
    pub eta: Option<f64>,
    pub n_max: usize,
    /// `None` sizes the environment automatically.
    pub env_cutoff: Option<usize>,
    pub t_grid: Vec<f64>,
    pub k_grid: Vec<u64>,
    pub kappa_grid: Vec<f64>,
    pub protocols: Vec<Protocol>,
    pub scheme: Scheme,
    pub out_dir: PathBuf,
    pub t_choice: TChoice,
    /// Auxiliary photons used by the local operations (1: signal mode only,
    /// 2: one operation on each mode).
    pub local_photons: usize,
    pub sweep: Option<SweepParam>,
    pub metric: Option<Metric>,
    pub grid: Option<Vec<f64>>,
}

/// Named transmissivities added to the default grid.
pub const NAMED_T: [f64; 3] = [0.041, 0.125, 0.5];

/// 96 uniform points on [0.01, 0.96] plus the named points.
pub fn default_t_grid() -> Vec<f64> {
    let mut grid = linspace(0.01, 0.96, 96);
    merge_points(&mut grid, &NAMED_T);
    grid
}

/// 25 logarithmically spaced copy counts from 10 to 10⁷.
pub fn default_k_grid() -> Vec<u64> {
    log_k_grid(1.0, 7.0, 25)
}

pub fn default_kappa_grid() -> Vec<f64> {
    linspace(0.001, 0.05, 50)
}

pub fn log_k_grid(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<u64> {
    let mut ks: Vec<u64> = (0..count)
        .map(|i| {
            let e = lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1).max(1) as f64;
            10f64.powf(e).round() as u64
        })
        .collect();
    ks.dedup();
    ks
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let n = (count - 1) as f64;
    (0..count)
        .map(|i| match i {
            0 => start,
            i if i == count - 1 => stop,
            i => (start * (n - i as f64) + stop * i as f64) / n,
        })
        .collect()
}

/// Inserts `points` into a sorted grid, replacing entries within 1e-9.
fn merge_points(grid: &mut Vec<f64>, points: &[f64]) {
    for &p in points {
        grid.retain(|&x| (x - p).abs() > 1e-9);
        grid.push(p);
    }
    grid.sort_by(f64::total_cmp);
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: "custom".into(),
            r: 0.05f64.sqrt().asinh(),
            kappa: 0.01,
            n_th: 1.0,
            eta: None,
            n_max: 24,
            env_cutoff: None,
            t_grid: default_t_grid(),
            k_grid: default_k_grid(),
            kappa_grid: default_kappa_grid(),
            protocols: vec![Protocol::Tmss, Protocol::Pa, Protocol::Ps, Protocol::Pc, Protocol::Nlpa1],
            scheme: Scheme::Dhd,
            out_dir: PathBuf::from("."),
            t_choice: TChoice::Entropy,
            local_photons: 1,
            sweep: None,
            metric: None,
            grid: None,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> CliResult<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| CliError::usage(format!("{key}: '{v}' is not a number")))
}

fn parse_usize(key: &str, v: &str) -> CliResult<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| CliError::usage(format!("{key}: '{v}' is not a non-negative integer")))
}

/// Comma list (`0.1,0.2`) or `start:stop:count`.
pub fn parse_real_grid(key: &str, v: &str) -> CliResult<Vec<f64>> {
    let v = v.trim();
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!("{key}: range must be start:stop:count")));
        }
        let (a, b) = (parse_f64(key, parts[0])?, parse_f64(key, parts[1])?);
        let n = parse_usize(key, parts[2])?;
        if n == 0 {
            return Err(CliError::usage(format!("{key}: count must be >= 1")));
        }
        return Ok(linspace(a, b, n));
    }
    let grid: Vec<f64> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<CliResult<_>>()?;
    if grid.is_empty() {
        return Err(CliError::usage(format!("{key}: grid must not be empty")));
    }
    Ok(grid)
}

pub fn parse_k_grid(key: &str, v: &str) -> CliResult<Vec<u64>> {
    let grid = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|k| *k >= 1.0 && k.fract() == 0.0 && *k < 1e18)
                .map(|k| k as u64)
                .ok_or_else(|| CliError::usage(format!("{key}: '{s}' is not a positive integer")))
        })
        .collect::<CliResult<Vec<u64>>>()?;
    if grid.is_empty() {
        return Err(CliError::usage(format!("{key}: grid must not be empty")));
    }
    Ok(grid)
}

impl RunConfig {
    /// Applies one `key = value` setting; keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim();
        let value = value.trim();
        match key.replace('-', "_").as_str() {
            "preset" => self.preset = value.to_string(),
            "r" => self.r = parse_f64(key, value)?,
            "kappa" => self.kappa = parse_f64(key, value)?,
            "nth" | "n_th" => self.n_th = parse_f64(key, value)?,
            "eta" => {
                self.eta = match value {
                    "" | "none" => None,
                    v => Some(parse_f64(key, v)?),
                }
            }
            "nmax" | "n_max" => self.n_max = parse_usize(key, value)?,
            "env_cutoff" => {
                self.env_cutoff = match value {
                    "auto" => None,
                    v => Some(parse_usize(key, v)?),
                }
            }
            "T" | "t" | "t_grid" => self.t_grid = parse_real_grid(key, value)?,
            "K" | "k" | "k_grid" => self.k_grid = parse_k_grid(key, value)?,
            "kappa_grid" => self.kappa_grid = parse_real_grid(key, value)?,
            "protocols" => {
                self.protocols = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse())
                    .collect::<CliResult<_>>()?
            }
            "scheme" => self.scheme = value.parse().map_err(|e: fockqi::Error| CliError::usage(e.to_string()))?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "t_choice" => self.t_choice = value.parse()?,
            "local_photons" => self.local_photons = parse_usize(key, value)?,
            "sweep" => self.sweep = Some(value.parse()?),
            "metric" => self.metric = Some(value.parse()?),
            "grid" => self.grid = Some(parse_real_grid(key, value)?),
            _ => return Err(CliError::usage(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config text; `#` starts a
    /// comment.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::usage(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Range checks that do not need the library.
    pub fn validate(&self) -> CliResult<()> {
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(0.0..1.0).contains(t)) {
            return Err(CliError::usage("T grid values must lie in [0, 1)"));
        }
        if self.k_grid.is_empty() {
            return Err(CliError::usage("K grid must not be empty"));
        }
        if self.kappa_grid.is_empty() || self.kappa_grid.iter().any(|k| !(0.0..=1.0).contains(k)) {
            return Err(CliError::usage("kappa grid values must lie in [0, 1]"));
        }
        if !(1..=2).contains(&self.local_photons) {
            return Err(CliError::usage("local_photons must be 1 or 2"));
        }
        if self.n_max < 2 {
            return Err(CliError::usage("nmax must be at least 2"));
        }
        if self.protocols.is_empty() {
            return Err(CliError::usage("at least one protocol is required"));
        }
        Ok(())
    }
}
