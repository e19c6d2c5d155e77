//! Flags, the optional JSON config and their merge. Values from `--config`
//! win over flags given on the command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dce_core::oracle::GridSpec;
use dce_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dce", version, about = "Strategic default with collateral and reputation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a regime at the given parameters.
    Solve(RunArgs),
    /// Classify the equilibrium region (reputation), date-1 region
    /// (combined, needs --p and --R1) or date-1 contract mode (collateral).
    Classify(RunArgs),
    /// Print the regime's price and prior thresholds.
    Thresholds(RunArgs),
    /// Check the closed forms against the numerical oracles on a fixed matrix.
    Verify(RunArgs),
    /// Solve along one parameter axis.
    Sweep(RunArgs),
    /// Monte Carlo of the combined regime.
    Simulate(RunArgs),
    /// Overlapping-generations simulation.
    Olg(RunArgs),
    /// Figure data (fig2: region map, fig3: date-1 behavior).
    Figures(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Classify(_) => "classify",
            Command::Thresholds(_) => "thresholds",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
            Command::Simulate(_) => "simulate",
            Command::Olg(_) => "olg",
            Command::Figures(_) => "figures",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Solve(a)
            | Command::Classify(a)
            | Command::Thresholds(a)
            | Command::Verify(a)
            | Command::Sweep(a)
            | Command::Simulate(a)
            | Command::Olg(a)
            | Command::Figures(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Collateral,
    Reputation,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Axis {
    #[value(name = "beta")]
    #[serde(rename = "beta")]
    Beta,
    #[value(name = "pi0")]
    #[serde(rename = "pi0")]
    Pi0,
    #[value(name = "y")]
    #[serde(rename = "y")]
    Y,
    #[value(name = "p0")]
    #[serde(rename = "p0")]
    P0,
    #[value(name = "x")]
    #[serde(rename = "x")]
    X,
    #[value(name = "R1")]
    #[serde(rename = "R1")]
    R1,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Beta => "beta",
            Axis::Pi0 => "pi0",
            Axis::Y => "y",
            Axis::P0 => "p0",
            Axis::X => "x",
            Axis::R1 => "R1",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub pi0: Option<f64>,
    /// Flat income, sets y1 = y2.
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub y1: Option<f64>,
    #[arg(long)]
    pub y2: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// Dividend paid to the asset holder each period.
    #[arg(long)]
    pub x: Option<f64>,
    /// Date-0 repayment.
    #[arg(long = "R1")]
    pub r1: Option<f64>,
    /// Date-1 repayment (collateral thresholds).
    #[arg(long = "R2")]
    pub r2: Option<f64>,
    /// Date-1 price.
    #[arg(long)]
    pub p: Option<f64>,
    /// Income growth y2/y1 - 1 for the region map.
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long, value_enum)]
    pub which: Option<Figure>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Sweep range as lo,hi,step.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
    /// Grid size (fig2: cells per side, fig3: price points).
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo paths.
    #[arg(long)]
    pub paths: Option<u64>,
    /// Override the honest share of simulated borrowers.
    #[arg(long)]
    pub honest_share: Option<f64>,
    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long, env = "DCE_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub price_points: Option<usize>,
    #[arg(long)]
    pub contract_points: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run manifest; its values override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parameters in a config file; any subset may be given.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub beta: Option<f64>,
    pub pi0: Option<f64>,
    pub y: Option<f64>,
    pub y1: Option<f64>,
    pub y2: Option<f64>,
    pub p0: Option<f64>,
    pub x: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    pub price_points: Option<usize>,
    pub contract_points: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Contents of `--config file.json`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// If present, must name the subcommand being run.
    pub command: Option<String>,
    pub regime: Option<Regime>,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default)]
    pub grid: GridOverrides,
    #[serde(default)]
    pub output: OutputSpec,
    pub seed: Option<u64>,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
    pub p: Option<f64>,
    pub g: Option<f64>,
    pub which: Option<Figure>,
    pub axis: Option<Axis>,
    pub range: Option<[f64; 3]>,
    pub n: Option<usize>,
    pub paths: Option<u64>,
    pub honest_share: Option<f64>,
    pub periods: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

macro_rules! take {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = Some(v);
        }
    };
}

impl RunArgs {
    /// Flags with the config file (if any) applied on top.
    pub fn resolve(&self, command: &str) -> CliResult<RunArgs> {
        let mut a = self.clone();
        let Some(path) = &self.config else {
            return Ok(a);
        };
        let c = RunConfig::load(path)?;
        if let Some(cmd) = &c.command {
            if cmd != command {
                return Err(CliError::config(format!(
                    "{} is a `{cmd}` manifest, not `{command}`",
                    path.display()
                )));
            }
        }
        take!(a.regime, c.regime);
        take!(a.beta, c.params.beta);
        take!(a.pi0, c.params.pi0);
        take!(a.p0, c.params.p0);
        take!(a.x, c.params.x);
        if c.params.y.is_some() {
            // a config income replaces any income given by flags
            a.y = c.params.y;
            a.y1 = None;
            a.y2 = None;
        }
        if c.params.y1.is_some() || c.params.y2.is_some() {
            a.y = None;
            take!(a.y1, c.params.y1);
            take!(a.y2, c.params.y2);
        }
        take!(a.price_points, c.grid.price_points);
        take!(a.contract_points, c.grid.contract_points);
        take!(a.tolerance, c.grid.tolerance);
        take!(a.out, c.output.path);
        take!(a.format, c.output.format);
        take!(a.seed, c.seed);
        take!(a.r1, c.r1);
        take!(a.r2, c.r2);
        take!(a.p, c.p);
        take!(a.g, c.g);
        take!(a.which, c.which);
        take!(a.axis, c.axis);
        take!(a.range, c.range.map(|r| r.to_vec()));
        take!(a.n, c.n);
        take!(a.paths, c.paths);
        take!(a.honest_share, c.honest_share);
        take!(a.periods, c.periods);
        Ok(a)
    }

    pub fn regime(&self) -> Regime {
        self.regime.unwrap_or(Regime::Combined)
    }

    pub(crate) fn require(&self, name: &str, v: Option<f64>) -> CliResult<f64> {
        v.ok_or_else(|| CliError::config(format!("missing --{name}")))
    }

    /// Incomes as `(y1, y2)`.
    pub fn incomes(&self) -> CliResult<(f64, f64)> {
        match (self.y, self.y1, self.y2) {
            (Some(y), None, None) => Ok((y, y)),
            (None, Some(y1), Some(y2)) => Ok((y1, y2)),
            (Some(_), _, _) => Err(CliError::config("--y cannot be combined with --y1/--y2")),
            _ => Err(CliError::config("missing income: give --y or both --y1 and --y2")),
        }
    }

    /// Validated parameters for `regime`. The reputation regime does not use
    /// the asset, so `p0` defaults to 1 there; the collateral regime has no
    /// lender uncertainty and defaults `pi0` to 0 and incomes to 0.
    pub fn params(&self, regime: Regime) -> CliResult<ModelParams> {
        let beta = self.require("beta", self.beta)?;
        let x = self.x.unwrap_or(0.0);
        let raw = match regime {
            Regime::Combined => {
                let (y1, y2) = self.incomes()?;
                ModelParams::new(beta, self.require("pi0", self.pi0)?, y1, y2, self.require("p0", self.p0)?, x)
            }
            Regime::Reputation => {
                let (y1, y2) = self.incomes()?;
                ModelParams::new(beta, self.require("pi0", self.pi0)?, y1, y2, self.p0.unwrap_or(1.0), x)
            }
            Regime::Collateral => {
                let (y1, y2) = if self.y.is_none() && self.y1.is_none() && self.y2.is_none() {
                    (0.0, 0.0)
                } else {
                    self.incomes()?
                };
                ModelParams::new(beta, self.pi0.unwrap_or(0.0), y1, y2, self.require("p0", self.p0)?, x)
            }
        };
        Ok(raw.validate()?)
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        let d = GridSpec::default();
        Ok(GridSpec::new(
            self.price_points.unwrap_or(d.price_points),
            self.contract_points.unwrap_or(d.contract_points),
            self.tolerance.unwrap_or(d.tolerance),
        )?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
