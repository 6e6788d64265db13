//! Hop-by-hop propagation of the batch rank distribution along a line
//! network.
//!
//! Every node disaggregates what it receives, recodes each batch back to `M`
//! packets and re-packs its outgoing stream with its own `N`, starting at
//! phase 0. A batch of rank `r` whose pieces travel in UDP-Lite packets of
//! sizes `g_1, g_2, ...` arrives with rank `min{Σ received, r}`, where each
//! piece delivers `bin_d(·; g_i, f)` packets independently.

use crate::error::{ModelError, Result};
use crate::frame::phase::batch_groups;
use crate::frame::AggregationContext;
use crate::prob::{bin_d_row, RankDistribution};

/// Rank distribution including rank 0; `mass[r]` for `r = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    mass: Vec<f64>,
}

impl RankProfile {
    /// All batches at full rank `M`, as generated at the source.
    pub fn source(batch_size: usize) -> Self {
        let mut mass = vec![0.0; batch_size + 1];
        mass[batch_size] = 1.0;
        RankProfile { mass }
    }

    pub fn from_distribution(dist: &RankDistribution) -> Self {
        let mut mass = vec![0.0];
        mass.extend(dist.iter().map(|(_, m)| m));
        RankProfile { mass }
    }

    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 || mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(ModelError::Domain(
                "rank profile needs nonnegative mass on 0..=M, M >= 1".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ModelError::Domain(format!("rank profile sums to {total}")));
        }
        Ok(RankProfile { mass })
    }

    pub fn batch_size(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `P[rank >= 1]`.
    pub fn active(&self) -> f64 {
        self.mass[1..].iter().sum::<f64>().min(1.0)
    }

    pub fn mean_rank(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(r, m)| r as f64 * m)
            .sum()
    }

    /// Distribution of the nonzero ranks, or `None` if every batch is empty.
    pub fn conditional(&self) -> Option<RankDistribution> {
        let active = self.active();
        if active <= 0.0 {
            return None;
        }
        RankDistribution::from_weights(&self.mass[1..]).ok()
    }
}

/// How a node picks its aggregation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStrategy {
    /// Maximize frame efficiency for the node's own rank distribution.
    Optimal,
    /// Always pack `n_max` BNC packets.
    Largest,
    Fixed(usize),
}

impl NodeStrategy {
    pub fn label(&self) -> String {
        match self {
            NodeStrategy::Optimal => "optimal".into(),
            NodeStrategy::Largest => "largest".into(),
            NodeStrategy::Fixed(n) => format!("n{n}"),
        }
    }

    /// Picks `N` for a node whose batches follow `ctx`'s rank distribution.
    pub fn select(&self, ctx: &AggregationContext) -> Result<usize> {
        let n_max = ctx.max_feasible_n()?;
        match *self {
            NodeStrategy::Optimal => Ok(ctx.optimize_n()?.0),
            NodeStrategy::Largest => Ok(n_max),
            NodeStrategy::Fixed(n) if n >= 1 && n <= n_max => Ok(n),
            NodeStrategy::Fixed(n) => Err(ModelError::InfeasibleN { n, n_max }),
        }
    }
}

impl std::str::FromStr for NodeStrategy {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "optimal" | "opt" => Ok(NodeStrategy::Optimal),
            "largest" | "max" => Ok(NodeStrategy::Largest),
            other => {
                let digits = other
                    .strip_prefix("fixed:")
                    .or_else(|| other.strip_prefix("n="))
                    .or_else(|| other.strip_prefix('n'))
                    .unwrap_or(other);
                digits
                    .parse::<usize>()
                    .ok()
                    .filter(|n| *n >= 1)
                    .map(NodeStrategy::Fixed)
                    .ok_or_else(|| {
                        ModelError::InvalidParams(format!(
                            "unknown strategy '{other}' (expected optimal, largest or fixed:N)"
                        ))
                    })
            }
        }
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Distribution of the number of packets received from a batch split into
/// the given pieces.
fn received_count(groups: &[usize], f: f64, d: f64) -> Vec<f64> {
    groups
        .iter()
        .fold(vec![1.0], |acc, g| convolve(&acc, &bin_d_row(*g, f, d)))
}

/// Distribution of the rank at the next node of a batch with rank `r`,
/// averaged over the batch positions of one `lcm(M, N)` period.
/// Entry `i` is the probability of rank `i`, for `i = 0..=r`.
pub fn batch_reception_distribution(
    r: usize,
    n: usize,
    ctx: &AggregationContext,
) -> Result<Vec<f64>> {
    let m = ctx.batch_size();
    if r > m {
        return Err(ModelError::Domain(format!("rank {r} exceeds M = {m}")));
    }
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    let counts = lineage_counts(m, n, ctx);
    Ok(push_through(&counts, r))
}

fn lineage_counts(m: usize, n: usize, ctx: &AggregationContext) -> Vec<f64> {
    let lineages = batch_groups(m, n);
    let weight = 1.0 / lineages.len() as f64;
    let mut avg = vec![0.0; m + 1];
    for groups in &lineages {
        for (i, p) in received_count(groups, ctx.packet_survival(), ctx.header_survival())
            .iter()
            .enumerate()
        {
            avg[i] += weight * p;
        }
    }
    avg
}

fn push_through(counts: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0; r + 1];
    for (i, p) in counts.iter().enumerate() {
        out[i.min(r)] += p;
    }
    out
}

/// Rank profile at the next node when this node packs `n` BNC packets per
/// UDP-Lite packet.
pub fn evolve_rank_distribution(
    profile: &RankProfile,
    n: usize,
    ctx: &AggregationContext,
) -> Result<RankProfile> {
    let m = ctx.batch_size();
    if profile.batch_size() != m {
        return Err(ModelError::InvalidParams(
            "rank profile has the wrong batch size".into(),
        ));
    }
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    let counts = lineage_counts(m, n, ctx);
    let mut next = vec![0.0; m + 1];
    for (r, weight) in profile.mass.iter().enumerate() {
        if *weight == 0.0 {
            continue;
        }
        for (rank, p) in push_through(&counts, r).iter().enumerate() {
            next[rank] += weight * p;
        }
    }
    // renormalize away rounding drift
    let total: f64 = next.iter().sum();
    next.iter_mut().for_each(|x| *x /= total);
    Ok(RankProfile { mass: next })
}

/// State of one node along the line.
#[derive(Debug, Clone, PartialEq)]
pub struct HopRecord {
    /// 1-based link index.
    pub hop: usize,
    pub n: usize,
    /// Rank profile of the batches held by the sending node.
    pub incoming: RankProfile,
    /// Throughput per byte sent on this link.
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopTrace {
    pub strategy: NodeStrategy,
    pub hops: Vec<HopRecord>,
}

impl HopTrace {
    pub fn efficiencies(&self) -> Vec<f64> {
        self.hops.iter().map(|h| h.efficiency).collect()
    }

    pub fn aggregation_counts(&self) -> Vec<usize> {
        self.hops.iter().map(|h| h.n).collect()
    }
}

/// Context of a node holding batches with the given rank profile. A profile
/// with no rank left keeps the previous distribution with zero active mass.
pub fn node_context(
    base: &AggregationContext,
    profile: &RankProfile,
) -> Result<AggregationContext> {
    match profile.conditional() {
        Some(dist) => base.with_rank_state(dist, profile.active()),
        None => base.with_rank_state(base.rank_dist().clone(), 0.0),
    }
}

/// Runs `hops` links starting from full-rank batches at the source.
/// `base` supplies the channel, code and survival probabilities; its rank
/// distribution is replaced at every node.
pub fn simulate_line_network(
    hops: usize,
    strategy: NodeStrategy,
    base: &AggregationContext,
) -> Result<HopTrace> {
    if hops == 0 {
        return Err(ModelError::InvalidParams(
            "a line network needs at least one hop".into(),
        ));
    }
    let mut profile = RankProfile::source(base.batch_size());
    let mut records = Vec::with_capacity(hops);
    for hop in 1..=hops {
        let ctx = node_context(base, &profile)?;
        let n = strategy.select(&ctx)?;
        let efficiency = ctx.frame_efficiency(n)?;
        let next = evolve_rank_distribution(&profile, n, &ctx)?;
        records.push(HopRecord {
            hop,
            n,
            incoming: profile,
            efficiency,
        });
        profile = next;
    }
    Ok(HopTrace {
        strategy,
        hops: records,
    })
}
