//! Scenario configuration: built-in defaults, an optional sectioned
//! `key = value` file, then command-line overrides.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::evolution::NodeStrategy;
use crate::frame::max_feasible_n;
use crate::prob::{ChannelParams, CodeParams, IntegrityMode, LossModel, RankDistribution};

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum RankDistSpec {
    Degenerate,
    Binomial(f64),
    /// Weights for ranks `1..=M`, normalized on use.
    Explicit(Vec<f64>),
}

impl RankDistSpec {
    pub fn build(&self, batch_size: usize) -> crate::Result<RankDistribution> {
        match self {
            RankDistSpec::Degenerate => Ok(RankDistribution::degenerate(batch_size)),
            RankDistSpec::Binomial(rho) => RankDistribution::truncated_binomial(batch_size, *rho),
            RankDistSpec::Explicit(w) => {
                if w.len() != batch_size {
                    return Err(crate::ModelError::InvalidParams(format!(
                        "explicit rank distribution has {} weights but M = {batch_size}",
                        w.len()
                    )));
                }
                RankDistribution::from_weights(w)
            }
        }
    }
}

impl FromStr for RankDistSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        if lower == "degenerate" {
            return Ok(RankDistSpec::Degenerate);
        }
        let (kind, arg) = lower
            .split_once(':')
            .or_else(|| lower.strip_suffix(')').and_then(|x| x.split_once('(')))
            .ok_or_else(|| format!("unknown rank distribution `{s}`"))?;
        match kind.trim() {
            "binomial" => {
                let rho: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad binomial parameter `{arg}`"))?;
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(format!("binomial parameter {rho} must lie in (0, 1]"));
                }
                Ok(RankDistSpec::Binomial(rho))
            }
            "explicit" => arg
                .split(',')
                .map(|w| {
                    w.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("bad weight `{w}`"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(RankDistSpec::Explicit),
            other => Err(format!("unknown rank distribution `{other}`")),
        }
    }
}

/// Fully resolved scenario grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mtu: usize,
    pub proto_header: usize,
    pub dl_header: usize,
    pub dl_trailer: usize,
    pub batch_sizes: Vec<usize>,
    pub payload: usize,
    /// `None` means `M + 2`.
    pub bnc_header: Option<usize>,
    pub checksum_bytes: usize,
    pub fec_bytes: usize,
    /// Empty means the command's own default.
    pub integrity: Vec<IntegrityMode>,
    pub plr: Vec<f64>,
    pub strategies: Vec<NodeStrategy>,
    pub hops: usize,
    pub rank_dist: RankDistSpec,
    pub seed: u64,
    pub trials: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mtu: 9000,
            proto_header: 28,
            dl_header: 22,
            dl_trailer: 4,
            batch_sizes: vec![4],
            payload: 256,
            bnc_header: None,
            checksum_bytes: 2,
            fec_bytes: 3,
            integrity: Vec::new(),
            plr: vec![0.1, 0.2],
            strategies: vec![
                NodeStrategy::Optimal,
                NodeStrategy::Largest,
                NodeStrategy::Fixed(1),
            ],
            hops: 10,
            rank_dist: RankDistSpec::Binomial(0.8),
            seed: 1,
            trials: 100_000,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    channel: ChannelSection,
    #[serde(default)]
    code: CodeSection,
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    mc: McSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    mtu: Option<usize>,
    proto_header: Option<usize>,
    dl_header: Option<usize>,
    dl_trailer: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeSection {
    batch_size: Option<OneOrMany<usize>>,
    payload: Option<usize>,
    bnc_header: Option<usize>,
    checksum_bytes: Option<usize>,
    fec_bytes: Option<usize>,
    integrity: Option<OneOrMany<String>>,
    rank_dist: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    plr: Option<OneOrMany<f64>>,
    strategy: Option<OneOrMany<String>>,
    hops: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct McSection {
    seed: Option<u64>,
    trials: Option<u64>,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn parse_all<T: FromStr>(field: &str, items: Vec<String>) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    items
        .into_iter()
        .map(|s| s.parse::<T>().map_err(|e| field_error(field, e)))
        .collect()
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().trim().to_string();
            match line {
                Some(line) => CliError::Config(format!("line {line}: {msg}")),
                None => CliError::Config(msg),
            }
        })?;
        let mut cfg = ScenarioConfig::default();
        let c = file.channel;
        cfg.mtu = c.mtu.unwrap_or(cfg.mtu);
        cfg.proto_header = c.proto_header.unwrap_or(cfg.proto_header);
        cfg.dl_header = c.dl_header.unwrap_or(cfg.dl_header);
        cfg.dl_trailer = c.dl_trailer.unwrap_or(cfg.dl_trailer);
        let k = file.code;
        if let Some(m) = k.batch_size {
            cfg.batch_sizes = m.into_vec();
        }
        cfg.payload = k.payload.unwrap_or(cfg.payload);
        cfg.bnc_header = k.bnc_header.or(cfg.bnc_header);
        cfg.checksum_bytes = k.checksum_bytes.unwrap_or(cfg.checksum_bytes);
        cfg.fec_bytes = k.fec_bytes.unwrap_or(cfg.fec_bytes);
        if let Some(i) = k.integrity {
            cfg.integrity = parse_all("code.integrity", i.into_vec())?;
        }
        if let Some(r) = k.rank_dist {
            cfg.rank_dist = r.parse().map_err(|e| field_error("code.rank_dist", e))?;
        }
        let s = file.scenario;
        if let Some(p) = s.plr {
            cfg.plr = p.into_vec();
        }
        if let Some(st) = s.strategy {
            cfg.strategies = parse_all("scenario.strategy", st.into_vec())?;
        }
        cfg.hops = s.hops.unwrap_or(cfg.hops);
        cfg.seed = file.mc.seed.unwrap_or(cfg.seed);
        cfg.trials = file.mc.trials.unwrap_or(cfg.trials);
        Ok(cfg)
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return Err(field_error(
                "batch_size",
                "need at least one value, each >= 1",
            ));
        }
        if self.plr.is_empty() {
            return Err(field_error("plr", "need at least one value"));
        }
        if let Some(bad) = self.plr.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(field_error("plr", format!("{bad} is outside [0, 1)")));
        }
        if self.strategies.is_empty() {
            return Err(field_error("strategy", "need at least one value"));
        }
        if self.hops == 0 {
            return Err(field_error("hops", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(field_error("trials", "must be at least 1"));
        }
        for &m in &self.batch_sizes {
            self.rank_dist
                .build(m)
                .map_err(|e| field_error("rank_dist", e))?;
            for mode in [IntegrityMode::Checksum, IntegrityMode::Fec] {
                let code = self.code(m, mode).map_err(|e| field_error("code", e))?;
                let channel = self.channel(0.0);
                channel.validate().map_err(|e| field_error("channel", e))?;
                max_feasible_n(&channel, &code).map_err(|e| field_error("mtu", e))?;
            }
        }
        Ok(())
    }

    pub fn channel(&self, plr: f64) -> ChannelParams {
        ChannelParams {
            max_payload: self.mtu,
            proto_header: self.proto_header,
            dl_header: self.dl_header,
            dl_trailer: self.dl_trailer,
            loss: LossModel::BaselinePlr(plr),
        }
    }

    pub fn code(&self, batch_size: usize, mode: IntegrityMode) -> crate::Result<CodeParams> {
        let integrity_bytes = match mode {
            IntegrityMode::Checksum => self.checksum_bytes,
            IntegrityMode::Fec => self.fec_bytes,
        };
        CodeParams::new(
            batch_size,
            self.payload,
            self.bnc_header.unwrap_or(batch_size + 2),
            integrity_bytes,
            mode,
        )
    }
}
