//! Command-line front end: argument parsing, scenario resolution and the
//! three subcommands.

mod commands;
pub mod config;
mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_efficiency_curve, cmd_throughput, cmd_validate, ValidationReport};
pub use config::{RankDistSpec, ScenarioConfig};
pub use table::format_value;

use crate::error::ModelError;
use crate::evolution::NodeStrategy;
use crate::prob::IntegrityMode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bncagg",
    version,
    about = "Frame efficiency and line-network throughput of aggregated BNC packets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame efficiency for every feasible N, one column per scenario.
    EfficiencyCurve(ScenarioArgs),
    /// Per-hop throughput on a line network, one column per scenario.
    Throughput {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Report simulated values with standard-error columns.
        #[arg(long)]
        mc: bool,
    },
    /// Check the analytical model against the exhaustive and Monte Carlo oracles.
    Validate(ScenarioArgs),
}

#[derive(Debug, Default, Args)]
pub struct ScenarioArgs {
    /// Scenario file with [channel], [code], [scenario] and [mc] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Baseline packet loss rate; repeatable.
    #[arg(long)]
    pub plr: Vec<f64>,
    /// Batch size M; repeatable.
    #[arg(long = "batch-size")]
    pub batch_size: Vec<usize>,
    /// BNC payload bytes K.
    #[arg(long)]
    pub payload: Option<usize>,
    /// checksum or fec; repeatable.
    #[arg(long)]
    pub integrity: Vec<IntegrityMode>,
    /// Redundancy bytes F in FEC mode.
    #[arg(long = "fec-bytes")]
    pub fec_bytes: Option<usize>,
    /// Number of links in the line network.
    #[arg(long)]
    pub hops: Option<usize>,
    /// optimal, largest or fixed:N (also n=N); repeatable.
    #[arg(long)]
    pub strategy: Vec<NodeStrategy>,
    /// Maximum UDP-Lite datagram size L.
    #[arg(long)]
    pub mtu: Option<usize>,
    /// degenerate, binomial:RHO or explicit:W1,W2,...
    #[arg(long = "rank-dist")]
    pub rank_dist: Option<RankDistSpec>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials (periods for validate, batches for throughput).
    #[arg(long)]
    pub trials: Option<u64>,
    /// Output file; stdout when omitted or `-`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ScenarioArgs {
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        if !self.plr.is_empty() {
            cfg.plr = self.plr.clone();
        }
        if !self.batch_size.is_empty() {
            cfg.batch_sizes = self.batch_size.clone();
        }
        if !self.integrity.is_empty() {
            cfg.integrity = self.integrity.clone();
        }
        if !self.strategy.is_empty() {
            cfg.strategies = self.strategy.clone();
        }
        cfg.payload = self.payload.unwrap_or(cfg.payload);
        cfg.fec_bytes = self.fec_bytes.unwrap_or(cfg.fec_bytes);
        cfg.hops = self.hops.unwrap_or(cfg.hops);
        cfg.mtu = self.mtu.unwrap_or(cfg.mtu);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        if let Some(r) = &self.rank_dist {
            cfg.rank_dist = r.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one parsed invocation, writing its output to `out`. Returns the
/// process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::EfficiencyCurve(args) => {
            cmd_efficiency_curve(&args.resolve()?, out)?;
            Ok(0)
        }
        Command::Throughput { args, mc } => {
            cmd_throughput(&args.resolve()?, *mc, out)?;
            Ok(0)
        }
        Command::Validate(args) => {
            let report = cmd_validate(&args.resolve()?, out)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

impl Command {
    pub fn out_path(&self) -> Option<&PathBuf> {
        let args = match self {
            Command::EfficiencyCurve(a) | Command::Validate(a) => a,
            Command::Throughput { args, .. } => args,
        };
        args.out.as_ref().filter(|p| p.as_os_str() != "-")
    }
}
