//! Run configuration: `key=value` files overlaid by command-line flags.

use std::fs;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::CliError;
use quasiweb::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateSel {
    Upper,
    Lower,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

/// Settings shared by every subcommand. Everything is optional here so a
/// config file can supply what the flags leave out.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value settings file; flags take precedence
    #[arg(long)]
    pub config: Option<String>,
    /// wave frequency over oscillator frequency (resonance order)
    #[arg(long)]
    pub mu: Option<usize>,
    /// wave amplitude
    #[arg(long)]
    pub eps: Option<f64>,
    /// effective Planck constant
    #[arg(long)]
    pub hbar0: Option<f64>,
    /// highest oscillator level in the basis
    #[arg(long)]
    pub nmax: Option<usize>,
    /// ladder residue ℓ, levels n = ℓ + μm (0 ≤ ℓ < μ)
    #[arg(long)]
    pub ladder: Option<usize>,
    /// resonance cell, counted from 1 at the origin
    #[arg(long)]
    pub cell: Option<usize>,
    /// which ground state of the cell
    #[arg(long, value_enum)]
    pub state: Option<StateSel>,
    /// stroboscopic time index, t = s·2π/μ
    #[arg(long)]
    pub s: Option<i64>,
    /// outer radius of the polar grid (default 1.5 × the cell's outer radius)
    #[arg(long)]
    pub r_max: Option<f64>,
    /// radial grid points, including r = 0
    #[arg(long)]
    pub nr: Option<usize>,
    /// angular grid points (default 120μ)
    #[arg(long)]
    pub nphi: Option<usize>,
    /// drive periods per classical orbit
    #[arg(long)]
    pub periods: Option<usize>,
    /// integrator steps per drive period (at least 16)
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    /// initial conditions, one `X P` or `X,P` pair per line
    #[arg(long)]
    pub ic_file: Option<String>,
    /// output path; stdout when absent
    #[arg(long)]
    pub out: Option<String>,
    /// output format (default json, csv for `classical`)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// rotation order tested on the quantum fields (default μ)
    #[arg(long)]
    pub fold: Option<usize>,
    /// wrong-order rotation the fold is compared against
    #[arg(long)]
    pub control_fold: Option<usize>,
    /// rotation order tested on the classical section (default μ)
    #[arg(long)]
    pub classical_fold: Option<usize>,
    /// wave amplitude for the classical part of `report` (default eps)
    #[arg(long)]
    pub classical_eps: Option<f64>,
    /// pass threshold for the classical section symmetry error
    #[arg(long)]
    pub classical_max: Option<f64>,
    /// required ratio of control-fold to fold error
    #[arg(long)]
    pub min_ratio: Option<f64>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Config(format!("bad value for {key}: {value:?}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value.trim(), true).map_err(|_| CliError::Config(format!("bad value for {key}: {value:?}")))
}

impl Flags {
    /// Reads `key=value` lines; `#` starts a comment, `-` and `_` are
    /// interchangeable in keys.
    pub fn from_file(path: &str) -> Result<Flags, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Flags, CliError> {
        let mut f = Flags::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            let v = value.trim();
            match key.as_str() {
                "mu" => f.mu = Some(parse(&key, v)?),
                "eps" => f.eps = Some(parse(&key, v)?),
                "hbar0" => f.hbar0 = Some(parse(&key, v)?),
                "nmax" => f.nmax = Some(parse(&key, v)?),
                "ladder" => f.ladder = Some(parse(&key, v)?),
                "cell" => f.cell = Some(parse(&key, v)?),
                "state" => f.state = Some(parse_enum(&key, v)?),
                "s" => f.s = Some(parse(&key, v)?),
                "r_max" => f.r_max = Some(parse(&key, v)?),
                "nr" => f.nr = Some(parse(&key, v)?),
                "nphi" => f.nphi = Some(parse(&key, v)?),
                "periods" => f.periods = Some(parse(&key, v)?),
                "steps_per_period" => f.steps_per_period = Some(parse(&key, v)?),
                "ic_file" => f.ic_file = Some(v.to_string()),
                "out" => f.out = Some(v.to_string()),
                "format" => f.format = Some(parse_enum(&key, v)?),
                "fold" => f.fold = Some(parse(&key, v)?),
                "control_fold" => f.control_fold = Some(parse(&key, v)?),
                "classical_fold" => f.classical_fold = Some(parse(&key, v)?),
                "classical_eps" => f.classical_eps = Some(parse(&key, v)?),
                "classical_max" => f.classical_max = Some(parse(&key, v)?),
                "min_ratio" => f.min_ratio = Some(parse(&key, v)?),
                other => return Err(CliError::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(f)
    }

    /// Values from `self`, falling back to `base`.
    pub fn over(self, base: Flags) -> Flags {
        Flags {
            config: self.config.or(base.config),
            mu: self.mu.or(base.mu),
            eps: self.eps.or(base.eps),
            hbar0: self.hbar0.or(base.hbar0),
            nmax: self.nmax.or(base.nmax),
            ladder: self.ladder.or(base.ladder),
            cell: self.cell.or(base.cell),
            state: self.state.or(base.state),
            s: self.s.or(base.s),
            r_max: self.r_max.or(base.r_max),
            nr: self.nr.or(base.nr),
            nphi: self.nphi.or(base.nphi),
            periods: self.periods.or(base.periods),
            steps_per_period: self.steps_per_period.or(base.steps_per_period),
            ic_file: self.ic_file.or(base.ic_file),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            fold: self.fold.or(base.fold),
            control_fold: self.control_fold.or(base.control_fold),
            classical_fold: self.classical_fold.or(base.classical_fold),
            classical_eps: self.classical_eps.or(base.classical_eps),
            classical_max: self.classical_max.or(base.classical_max),
            min_ratio: self.min_ratio.or(base.min_ratio),
        }
    }
}

/// Fully resolved and validated settings. Serialised verbatim into every
/// output, so a run can be repeated from its own files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: Params,
    pub ladder: usize,
    pub cell: usize,
    pub state: StateSel,
    pub s: i64,
    /// `None` means 1.5 × the outer radius of the cell.
    pub r_max: Option<f64>,
    pub nr: usize,
    pub nphi: usize,
    pub periods: usize,
    pub steps_per_period: usize,
    pub ic_file: Option<String>,
    pub format: Format,
    pub fold: usize,
    pub control_fold: usize,
    pub classical_fold: usize,
    pub classical_eps: f64,
    pub classical_max: f64,
    pub min_ratio: f64,
    /// Output path; left out of the embedded copy.
    #[serde(skip)]
    pub out: Option<String>,
}

fn need<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required setting {key}")))
}

impl RunConfig {
    pub fn resolve(command: &str, flags: Flags) -> Result<RunConfig, CliError> {
        let flags = match flags.config.clone() {
            Some(path) => flags.over(Flags::from_file(&path)?),
            None => flags,
        };
        let mu = need(flags.mu, "mu")?;
        let eps = need(flags.eps, "eps")?;
        let hbar0 = need(flags.hbar0, "hbar0")?;
        let nmax = need(flags.nmax, "nmax")?;
        let params = Params::new(mu, eps, hbar0, nmax).map_err(|e| CliError::Config(e.to_string()))?;
        let default_format = if command == "classical" { Format::Csv } else { Format::Json };
        let cfg = RunConfig {
            command: command.to_string(),
            params,
            ladder: flags.ladder.unwrap_or(0),
            cell: flags.cell.unwrap_or(1),
            state: flags.state.unwrap_or(StateSel::Upper),
            s: flags.s.unwrap_or(0),
            r_max: flags.r_max,
            nr: flags.nr.unwrap_or(400),
            nphi: flags.nphi.unwrap_or(120 * mu),
            periods: flags.periods.unwrap_or(1000),
            steps_per_period: flags.steps_per_period.unwrap_or(256),
            ic_file: flags.ic_file,
            format: flags.format.unwrap_or(default_format),
            fold: flags.fold.unwrap_or(mu),
            control_fold: flags.control_fold.unwrap_or(3),
            classical_fold: flags.classical_fold.unwrap_or(mu),
            classical_eps: flags.classical_eps.unwrap_or(eps),
            classical_max: flags.classical_max.unwrap_or(0.05),
            min_ratio: flags.min_ratio.unwrap_or(5.0),
            out: flags.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.ladder >= self.params.mu {
            return bad(format!("ladder {} must be below mu = {}", self.ladder, self.params.mu));
        }
        if self.cell == 0 {
            return bad("cells are numbered from 1".into());
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("r-max must be positive, got {r}"));
            }
        }
        if self.nr < 2 || self.nphi < 4 {
            return bad(format!("grid needs nr >= 2 and nphi >= 4, got {} x {}", self.nr, self.nphi));
        }
        if self.steps_per_period < 16 {
            return bad(format!("steps-per-period must be >= 16, got {}", self.steps_per_period));
        }
        if self.fold == 0 || self.control_fold == 0 || self.classical_fold == 0 {
            return bad("folds must be positive".into());
        }
        if !self.classical_eps.is_finite()
            || self.classical_max.is_nan()
            || self.classical_max < 0.0
            || self.min_ratio.is_nan()
            || self.min_ratio <= 0.0
        {
            return bad("classical-eps, classical-max and min-ratio must be finite and sensible".into());
        }
        if self.format == Format::Pgm && self.command != "husimi" {
            return bad(format!("pgm output is only available for husimi, not {}", self.command));
        }
        if self.command == "report" && self.format != Format::Json {
            return bad("report is written as json only".into());
        }
        Ok(())
    }
}

/// Reads `X P` (or `X,P`) pairs; `#` starts a comment.
pub fn read_initial_conditions(path: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        let pair = match nums.as_slice() {
            [x, p] => (x.parse::<f64>(), p.parse::<f64>()),
            _ => return Err(CliError::Config(format!("{path}:{}: expected two numbers", lineno + 1))),
        };
        match pair {
            (Ok(x), Ok(p)) if x.is_finite() && p.is_finite() => out.push((x, p)),
            _ => return Err(CliError::Config(format!("{path}:{}: bad number", lineno + 1))),
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("{path}: no initial conditions")));
    }
    Ok(out)
}
