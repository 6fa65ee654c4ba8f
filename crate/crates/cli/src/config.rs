//! Command-line surface and the resolved run configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_sizer_core::catalog::{self, builtin_usecase, UseCase, CUSTOM_ID_MIN};
use ris_sizer_core::kpi::{self, AveragingDomain, Binning, Criterion, RisSize};
use ris_sizer_core::PhaseStates;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_OUT: &str = "ris-sizer-out";

#[derive(Debug, Parser)]
#[command(name = "ris-sizer", version, about = "Determine RIS sizes across deployment use cases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the built-in use-case catalog.
    ListUsecases(ListArgs),
    /// Evaluate every realization of a use case for each RIS size.
    Sweep(RunArgs),
    /// Minimum RIS size per SNR threshold.
    Size(RunArgs),
    /// Power and SNR probability densities per RIS size.
    Pdf(RunArgs),
    /// Replay a UE trajectory against a fixed BS and RIS.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ListFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value = "table")]
    pub format: ListFormat,
    /// Keep use cases whose name contains this text (case-insensitive), e.g. `mmW`.
    #[arg(long)]
    pub band: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolFormat {
    Csv,
    Json,
}

impl PoolFormat {
    pub fn extension(self) -> &'static str {
        match self {
            PoolFormat::Csv => "csv",
            PoolFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "RIS_SIZER_OUT", default_value = DEFAULT_OUT)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Built-in use case id (1-16).
    #[arg(long, conflicts_with = "usecase_file", required_unless_present = "usecase_file")]
    pub usecase: Option<u32>,
    /// JSON use-case document.
    #[arg(long)]
    pub usecase_file: Option<PathBuf>,
    /// Id assigned to a --usecase-file use case (>= 100).
    #[arg(long, default_value_t = CUSTOM_ID_MIN)]
    pub usecase_id: u32,
    /// Comma-separated sizes, `N` (square) or `NvxNh`.
    #[arg(long)]
    pub sizes: Option<String>,
    /// UE bearings in degrees: a list `a,b,c` or a range `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub bearings: Option<String>,
    #[arg(long, default_value = "5,10,20,30", allow_hyphen_values = true)]
    pub thresholds_db: String,
    /// mean-snr or outage.
    #[arg(long, default_value = "mean-snr")]
    pub criterion: String,
    /// Outage probability bound for the outage criterion.
    #[arg(long, default_value_t = kpi::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[command(flatten)]
    pub out: OutArgs,
    /// Recorded for provenance; realizations are enumerated exhaustively.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (does not change outputs).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Pool file format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: PoolFormat,
    /// Phase states per cell: a count or `continuous`.
    #[arg(long, default_value = "2")]
    pub phase_states: String,
    /// Averaging domain for means.
    #[arg(long, value_enum, default_value = "linear")]
    pub averaging: AveragingArg,
    /// Histogram bins: `fd` (Freedman-Diaconis) or a count shared by all sizes.
    #[arg(long, default_value = "fd")]
    pub bins: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AveragingArg {
    Linear,
    Db,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Trajectory CSV (`x_m,y_m,z_m,label[,snr_db]`); the bundled example when omitted.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Comma-separated path-loss exponents.
    #[arg(long, default_value = "2,1.785")]
    pub ple: String,
    /// Measurement CSV with an `snr_db` column aligned with the trajectory.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    /// JSON replay scenario (BS, RIS, panel, radio, noise); the bundled example when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Histogram binning as configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinSpec {
    FreedmanDiaconis,
    Shared(usize),
}

impl BinSpec {
    /// Binning for one metric given every pool's samples of that metric.
    pub fn binning(&self, all_samples: &[Vec<f64>]) -> Binning {
        match *self {
            BinSpec::FreedmanDiaconis => Binning::FreedmanDiaconis,
            BinSpec::Shared(n) => {
                let finite = all_samples.iter().flatten().copied().filter(|v| v.is_finite());
                let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                if !lo.is_finite() {
                    Binning::Count(n)
                } else if lo == hi {
                    Binning::Edges(vec![lo - 0.5, hi + 0.5])
                } else {
                    let w = (hi - lo) / n as f64;
                    Binning::Edges((0..=n).map(|i| if i == n { hi } else { lo + w * i as f64 }).collect())
                }
            }
        }
    }
}

/// Fully resolved configuration of a sweep/size/pdf run. Execution-only
/// settings (output directory, worker count) are not serialized, so they do
/// not appear in artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub usecase: UseCase,
    pub usecase_source: String,
    pub sizes: Vec<RisSize>,
    pub bearings_deg: Vec<f64>,
    pub thresholds_db: Vec<f64>,
    pub criterion: Criterion,
    pub epsilon: f64,
    pub seed: u64,
    pub phase_states: PhaseStates,
    pub averaging: AveragingDomain,
    pub bins: BinSpec,
    pub e_b: f64,
    pub format: PoolFormat,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: Option<usize>,
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("--{flag}: empty list")));
    }
    items
        .into_iter()
        .map(|s| s.parse::<T>().map_err(|e| CliError::Config(format!("--{flag}: `{s}`: {e}"))))
        .collect()
}

pub fn parse_list_f64(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = parse_list(flag, text)?;
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(CliError::Config(format!("--{flag}: non-finite value {x}")));
    }
    Ok(v)
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` when it lies on the grid).
pub fn parse_bearings(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Config(format!("--bearings: bad number `{s}`")))
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(CliError::Config("--bearings: need start <= stop and step > 0".into()));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + step * i as f64).collect()
        }
        [_] => parse_list_f64("bearings", text)?,
        _ => return Err(CliError::Config("--bearings: expected a list or start:stop:step".into())),
    };
    catalog::validate_bearings(&grid).map_err(|e| CliError::config("--bearings", e))?;
    Ok(grid)
}

pub fn parse_sizes(text: &str) -> CliResult<Vec<RisSize>> {
    let mut sizes: Vec<RisSize> = parse_list("sizes", text)?;
    sizes.sort_by_key(|s| (s.elements(), s.n_v));
    sizes.dedup();
    Ok(sizes)
}

pub fn parse_bins(text: &str) -> CliResult<BinSpec> {
    if text.eq_ignore_ascii_case("fd") {
        return Ok(BinSpec::FreedmanDiaconis);
    }
    match text.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(BinSpec::Shared(n)),
        _ => Err(CliError::Config(format!("--bins: expected `fd` or a count >= 1, got `{text}`"))),
    }
}

pub fn resolve_usecase(args: &RunArgs) -> CliResult<(UseCase, String)> {
    match (&args.usecase, &args.usecase_file) {
        (Some(id), None) => builtin_usecase(*id)
            .map(|u| (u, format!("builtin:{id}")))
            .ok_or_else(|| CliError::Config(format!("--usecase: unknown built-in use case id {id} (expected 1-16)"))),
        (None, Some(path)) => {
            let text = read_input(path, "--usecase-file")?;
            let uc = catalog::load_usecase(&text, args.usecase_id)
                .map_err(|e| CliError::config("--usecase-file", e))?;
            Ok((uc, "file".into()))
        }
        _ => Err(CliError::Config("exactly one of --usecase or --usecase-file is required".into())),
    }
}

pub fn read_input(path: &Path, flag: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{flag}: cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> CliResult<Self> {
        let (usecase, usecase_source) = resolve_usecase(args)?;
        let sizes = match &args.sizes {
            Some(s) => parse_sizes(s)?,
            None => kpi::default_ladder(),
        };
        let bearings_deg = match &args.bearings {
            Some(b) => parse_bearings(b)?,
            None => usecase.bearings(),
        };
        let thresholds_db = parse_list_f64("thresholds-db", &args.thresholds_db)?;
        let criterion: Criterion = args.criterion.parse().map_err(|e| CliError::config("--criterion", e))?;
        if !(0.0..=1.0).contains(&args.epsilon) {
            return Err(CliError::Config(format!("--epsilon: must lie in [0, 1], got {}", args.epsilon)));
        }
        let phase_states: PhaseStates =
            args.phase_states.parse().map_err(|e| CliError::config("--phase-states", e))?;
        if args.workers == Some(0) {
            return Err(CliError::Config("--workers: must be >= 1".into()));
        }
        Ok(RunConfig {
            usecase,
            usecase_source,
            sizes,
            bearings_deg,
            thresholds_db,
            criterion,
            epsilon: args.epsilon,
            seed: args.seed,
            phase_states,
            averaging: match args.averaging {
                AveragingArg::Linear => AveragingDomain::Linear,
                AveragingArg::Db => AveragingDomain::Db,
            },
            bins: parse_bins(&args.bins)?,
            e_b: catalog::defaults::E_B,
            format: args.format,
            out: args.out.out.clone(),
            workers: args.workers,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn sweep_options(&self) -> kpi::SweepOptions {
        kpi::SweepOptions {
            bearings_deg: self.bearings_deg.clone(),
            phase_states: self.phase_states,
            e_b: self.e_b,
            workers: self.workers,
        }
    }
}
