//! Monte Carlo simulation of whole `lcm(M, N)`-packet periods.
//!
//! Each trial draws fresh ranks for every batch of the period, one header
//! event per UDP-Lite packet and one survival event per BNC packet, then
//! counts the rank gained at the receiver. Cross-batch correlation through a
//! shared header is kept. The per-trial total rank `X` relates to the
//! conditional increment `E` by `E[X] = d · (UDP-Lite packets) · E`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::frame::AggregationContext;
use crate::prob::RankDistribution;

use super::gf256::EchelonBasis;
use super::layout::PeriodLayout;
use super::rng::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    /// Received rank is `min{received packets, r}`.
    RankCounting,
    /// Received rank is the GF(256) rank of the received coefficient vectors.
    Gf256Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: u64,
    pub mode: SimMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEstimate {
    /// Empirical expected rank increment per UDP-Lite packet whose header
    /// survives.
    pub mean_increment: f64,
    pub std_error: f64,
    pub trials: u64,
    pub udp_packets_per_period: usize,
    /// `rank_histogram[i]`: batches received with rank `i`, over all trials.
    pub rank_histogram: Vec<u64>,
    /// `ℓ` of every UDP-Lite packet of the simulated period.
    pub phase_lengths: Vec<usize>,
}

impl PeriodEstimate {
    pub fn rank_frequencies(&self) -> Vec<f64> {
        let total: u64 = self.rank_histogram.iter().sum();
        self.rank_histogram
            .iter()
            .map(|c| *c as f64 / total as f64)
            .collect()
    }
}

#[derive(Clone)]
struct Tally {
    sum: u64,
    sum_sq: u128,
    histogram: Vec<u64>,
}

impl Tally {
    fn new(m: usize) -> Self {
        Tally {
            sum: 0,
            sum_sq: 0,
            histogram: vec![0; m + 1],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
        self
    }
}

/// Per-thread scratch space.
struct Scratch {
    headers: Vec<bool>,
    packets: Vec<bool>,
    ranks: Vec<usize>,
    basis: EchelonBasis,
    row: Vec<u8>,
}

pub fn simulate_period(
    ctx: &AggregationContext,
    n: usize,
    cfg: &TrialConfig,
) -> Result<PeriodEstimate> {
    if cfg.trials == 0 {
        return Err(ModelError::InvalidParams(
            "at least one trial is required".into(),
        ));
    }
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    let d = ctx.header_survival();
    if d <= 0.0 {
        return Err(ModelError::Domain(
            "headers never survive; the conditional increment is undefined".into(),
        ));
    }
    let m = ctx.batch_size();
    let layout = PeriodLayout::new(m, n);
    let cdf = cumulative(ctx.rank_dist());
    let f = ctx.packet_survival();

    let tally = (0..cfg.trials)
        .into_par_iter()
        .fold(
            || {
                (
                    Tally::new(m),
                    Scratch {
                        headers: vec![false; layout.udp_packets],
                        packets: vec![false; layout.packets],
                        ranks: vec![0; layout.batches.len()],
                        basis: EchelonBasis::new(m),
                        row: vec![0; m],
                    },
                )
            },
            |(mut tally, mut scratch), trial| {
                let x = run_trial(
                    &layout,
                    &cdf,
                    d,
                    f,
                    cfg,
                    trial,
                    &mut scratch,
                    &mut tally.histogram,
                );
                tally.sum += x;
                tally.sum_sq += u128::from(x) * u128::from(x);
                (tally, scratch)
            },
        )
        .map(|(t, _)| t)
        .reduce(|| Tally::new(m), Tally::merge);

    let t = cfg.trials as f64;
    let scale = layout.udp_packets as f64 * d;
    let mean = tally.sum as f64 / t;
    let var = if cfg.trials > 1 {
        let centered = tally.sum_sq as f64 - (tally.sum as f64) * mean;
        (centered / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(PeriodEstimate {
        mean_increment: mean / scale,
        std_error: (var / t).sqrt() / scale,
        trials: cfg.trials,
        udp_packets_per_period: layout.udp_packets,
        rank_histogram: tally.histogram,
        phase_lengths: layout.phase_lengths(),
    })
}

fn cumulative(dist: &RankDistribution) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    dist.iter()
        .filter(|(_, h)| *h > 0.0)
        .map(|(r, h)| {
            acc += h;
            (r, acc)
        })
        .collect()
}

fn draw_rank<R: Rng>(cdf: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    cdf.iter()
        .find(|(_, c)| u < *c)
        .or(cdf.last())
        .map(|(r, _)| *r)
        .unwrap_or(0)
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    layout: &PeriodLayout,
    cdf: &[(usize, f64)],
    d: f64,
    f: f64,
    cfg: &TrialConfig,
    trial: u64,
    s: &mut Scratch,
    histogram: &mut [u64],
) -> u64 {
    let mut rng = trial_rng(cfg.seed, trial);
    // loss events first so both modes see the same channel realization
    for h in s.headers.iter_mut() {
        *h = rng.random_bool(d);
    }
    for p in s.packets.iter_mut() {
        *p = rng.random_bool(f);
    }
    for r in s.ranks.iter_mut() {
        *r = draw_rank(cdf, &mut rng);
    }

    let m = layout.batch_size;
    let mut total = 0u64;
    let mut packet = 0;
    for (b, pieces) in layout.batches.iter().enumerate() {
        let r = s.ranks[b];
        let received_rank = match cfg.mode {
            SimMode::RankCounting => {
                let mut count = 0;
                for piece in pieces {
                    let header = s.headers[piece.udp];
                    for _ in 0..piece.len {
                        if header && s.packets[packet] {
                            count += 1;
                        }
                        packet += 1;
                    }
                }
                count.min(r)
            }
            SimMode::Gf256Matrix => {
                // systematic recoding: the first r packets carry the unit
                // vectors, the remaining M - r are random combinations
                s.basis.clear(r);
                s.row.resize(r, 0);
                let mut index = 0;
                for piece in pieces {
                    let header = s.headers[piece.udp];
                    for _ in 0..piece.len {
                        if index < r {
                            s.row.iter_mut().for_each(|x| *x = 0);
                            s.row[index] = 1;
                        } else {
                            rng.fill(&mut s.row[..]);
                        }
                        if header && s.packets[packet] && s.basis.rank() < r {
                            s.basis.insert(&s.row);
                        }
                        index += 1;
                        packet += 1;
                    }
                }
                debug_assert_eq!(index, m);
                s.basis.rank()
            }
        };
        histogram[received_rank] += 1;
        total += received_rank as u64;
    }
    total
}
