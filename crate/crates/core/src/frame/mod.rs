//! Frame sizing, expected rank increment per UDP-Lite packet and the
//! frame-efficiency optimizer over the aggregation count `N`.

mod increments;
pub mod phase;

pub use phase::{PhaseSetCaseI, PhaseSetCaseII};

use crate::error::{ModelError, Result};
use crate::prob::{header_survival, packet_survival, ChannelParams, CodeParams, RankDistribution};

/// `S(N) = P + P_DL + Q + N (H + K + F)`.
pub fn frame_size(n: usize, ch: &ChannelParams, code: &CodeParams) -> Result<usize> {
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    Ok(ch.overhead() + n * code.packet_len())
}

/// Largest `N` with `P + N (H + K + F) <= L`.
pub fn max_feasible_n(ch: &ChannelParams, code: &CodeParams) -> Result<usize> {
    let packet_len = code.packet_len();
    let n = ch.max_payload.saturating_sub(ch.proto_header) / packet_len;
    if n == 0 || ch.max_payload < ch.proto_header {
        return Err(ModelError::Infeasible {
            max_payload: ch.max_payload,
            header: ch.proto_header,
            packet_len,
        });
    }
    Ok(n)
}

/// Everything the expected-rank formulas need at one node: the channel and
/// code, the rank distribution of the batches held by the node, and the
/// derived bit error rate `p`, header survival `d` and packet survival `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationContext {
    channel: ChannelParams,
    code: CodeParams,
    rank_dist: RankDistribution,
    ber: f64,
    d: f64,
    f: f64,
    /// Probability that a batch has nonzero rank; `rank_dist` is conditioned on it.
    active: f64,
}

impl AggregationContext {
    pub fn new(
        channel: ChannelParams,
        code: CodeParams,
        rank_dist: RankDistribution,
    ) -> Result<Self> {
        channel.validate()?;
        code.validate()?;
        let ber = channel.ber(&code)?;
        let d = header_survival(ber, &channel)?;
        let f = packet_survival(ber, &code)?;
        Self::assemble(channel, code, rank_dist, ber, d, f)
    }

    /// Context with survival probabilities given directly instead of derived
    /// from the loss model. `ber` is reported as NaN.
    pub fn with_survival(
        channel: ChannelParams,
        code: CodeParams,
        rank_dist: RankDistribution,
        d: f64,
        f: f64,
    ) -> Result<Self> {
        code.validate()?;
        for (name, x) in [("d", d), ("f", f)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(ModelError::Domain(format!("{name} = {x} is not in [0, 1]")));
            }
        }
        Self::assemble(channel, code, rank_dist, f64::NAN, d, f)
    }

    fn assemble(
        channel: ChannelParams,
        code: CodeParams,
        rank_dist: RankDistribution,
        ber: f64,
        d: f64,
        f: f64,
    ) -> Result<Self> {
        if rank_dist.batch_size() != code.batch_size {
            return Err(ModelError::InvalidParams(format!(
                "rank distribution covers M = {} but the code has M = {}",
                rank_dist.batch_size(),
                code.batch_size
            )));
        }
        Ok(AggregationContext {
            channel,
            code,
            rank_dist,
            ber,
            d,
            f,
            active: 1.0,
        })
    }

    /// Same channel and code with a new rank distribution of the nonzero-rank
    /// batches, which make up a fraction `active` of all batches.
    pub fn with_rank_state(&self, rank_dist: RankDistribution, active: f64) -> Result<Self> {
        if rank_dist.batch_size() != self.code.batch_size {
            return Err(ModelError::InvalidParams(
                "rank distribution has the wrong batch size".into(),
            ));
        }
        if !(0.0..=1.0).contains(&active) {
            return Err(ModelError::Domain(format!(
                "active fraction {active} is not in [0, 1]"
            )));
        }
        Ok(AggregationContext {
            rank_dist,
            active,
            ..self.clone()
        })
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    pub fn code(&self) -> &CodeParams {
        &self.code
    }

    pub fn rank_dist(&self) -> &RankDistribution {
        &self.rank_dist
    }

    pub fn batch_size(&self) -> usize {
        self.code.batch_size
    }

    pub fn ber(&self) -> f64 {
        self.ber
    }

    pub fn header_survival(&self) -> f64 {
        self.d
    }

    pub fn packet_survival(&self) -> f64 {
        self.f
    }

    pub fn active_fraction(&self) -> f64 {
        self.active
    }

    pub fn max_feasible_n(&self) -> Result<usize> {
        max_feasible_n(&self.channel, &self.code)
    }

    /// `d K E / S(N)`, with `E` scaled by the fraction of batches that still
    /// carry rank.
    pub fn frame_efficiency(&self, n: usize) -> Result<f64> {
        let n_max = self.max_feasible_n()?;
        if n == 0 || n > n_max {
            return Err(ModelError::InfeasibleN { n, n_max });
        }
        let e = self.expected_rank_increment(n)?;
        let size = frame_size(n, &self.channel, &self.code)?;
        Ok(self.d * self.code.payload as f64 * e * self.active / size as f64)
    }

    /// Exhaustive scan over `1..=n_max`; ties go to the smallest `N`.
    pub fn optimize_n(&self) -> Result<(usize, EfficiencyProfile)> {
        let n_max = self.max_feasible_n()?;
        let efficiency = (1..=n_max)
            .map(|n| self.frame_efficiency(n))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, e) in efficiency.iter().enumerate() {
            if *e > efficiency[best] {
                best = i;
            }
        }
        let profile = EfficiencyProfile {
            n_max,
            efficiency,
            argmax: best + 1,
        };
        Ok((best + 1, profile))
    }
}

/// Frame efficiency for every feasible `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyProfile {
    pub n_max: usize,
    /// `efficiency[N - 1]`.
    pub efficiency: Vec<f64>,
    pub argmax: usize,
}

impl EfficiencyProfile {
    pub fn at(&self, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.efficiency.get(i))
            .copied()
    }

    pub fn max(&self) -> f64 {
        self.efficiency[self.argmax - 1]
    }
}
