//! Full line-network simulation: the source emits full-rank batches, and at
//! every hop the sender packs `M` recoded packets per batch into UDP-Lite
//! packets, the channel drops headers and packets, and the receiver keeps
//! `min{received, rank}`.
//!
//! The per-hop aggregation counts are those chosen by the analytical trace
//! for the same strategy, so the two can be compared hop by hop. Batches are
//! processed in blocks; each block uses its own random stream and the
//! per-block throughputs give the standard error.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::evolution::{simulate_line_network, NodeStrategy};
use crate::frame::{frame_size, AggregationContext};

use super::rng::trial_rng;

const MIN_BLOCK: usize = 256;
const MAX_ALIGNED_BLOCK: usize = 1 << 16;
const FALLBACK_BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct HopEstimate {
    pub hop: usize,
    pub n: usize,
    /// Delivered payload bytes (`K` per unit of rank) per byte sent.
    pub throughput: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub strategy: NodeStrategy,
    pub batches: u64,
    pub block_size: usize,
    pub hops: Vec<HopEstimate>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Batches per block: a multiple of every hop's period (in batches) when
/// that stays small, so no hop sends a partially filled UDP-Lite packet.
fn block_size(m: usize, plan: &[usize]) -> usize {
    let mut aligned = 1usize;
    for &n in plan {
        let per_period = n / gcd(m, n);
        aligned = aligned / gcd(aligned, per_period) * per_period;
        if aligned > MAX_ALIGNED_BLOCK {
            return FALLBACK_BLOCK;
        }
    }
    aligned * MIN_BLOCK.div_ceil(aligned)
}

struct BlockResult {
    ranks: Vec<u64>,
    bytes: Vec<u64>,
}

pub fn simulate_end_to_end(
    hops: usize,
    strategy: NodeStrategy,
    ctx: &AggregationContext,
    seed: u64,
    batches: u64,
) -> Result<EndToEndReport> {
    if batches == 0 {
        return Err(ModelError::InvalidParams(
            "at least one batch is required".into(),
        ));
    }
    let trace = simulate_line_network(hops, strategy, ctx)?;
    let plan = trace.aggregation_counts();
    let m = ctx.batch_size();
    let block = block_size(m, &plan);
    let blocks = batches.div_ceil(block as u64);
    let (d, f) = (ctx.header_survival(), ctx.packet_survival());
    let overhead = ctx.channel().overhead() as u64;
    let packet_len = ctx.code().packet_len() as u64;

    let results: Vec<BlockResult> = (0..blocks)
        .into_par_iter()
        .map(|b| run_block(m, block, &plan, d, f, overhead, packet_len, seed, b))
        .collect();

    let payload = ctx.code().payload as f64;
    let mut out = Vec::with_capacity(hops);
    for (h, &n) in plan.iter().enumerate() {
        let ranks: u64 = results.iter().map(|r| r.ranks[h]).sum();
        let bytes: u64 = results.iter().map(|r| r.bytes[h]).sum();
        let throughput = payload * ranks as f64 / bytes as f64;
        let per_block: Vec<f64> = results
            .iter()
            .map(|r| payload * r.ranks[h] as f64 / r.bytes[h] as f64)
            .collect();
        out.push(HopEstimate {
            hop: h + 1,
            n,
            throughput,
            std_error: std_error(&per_block),
        });
    }
    Ok(EndToEndReport {
        strategy,
        batches: blocks * block as u64,
        block_size: block,
        hops: out,
    })
}

fn std_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn run_block(
    m: usize,
    block: usize,
    plan: &[usize],
    d: f64,
    f: f64,
    overhead: u64,
    packet_len: u64,
    seed: u64,
    index: u64,
) -> BlockResult {
    let mut rng = trial_rng(seed, index);
    let mut ranks = vec![m; block];
    let mut received = vec![0usize; block];
    let mut out = BlockResult {
        ranks: Vec::with_capacity(plan.len()),
        bytes: Vec::with_capacity(plan.len()),
    };
    let total_packets = block * m;
    for &n in plan {
        received.iter_mut().for_each(|c| *c = 0);
        let udp_packets = total_packets.div_ceil(n);
        for u in 0..udp_packets {
            let header = rng.random_bool(d);
            let end = ((u + 1) * n).min(total_packets);
            for packet in u * n..end {
                if rng.random_bool(f) && header {
                    received[packet / m] += 1;
                }
            }
        }
        let full = (total_packets / n) as u64;
        let tail = (total_packets % n) as u64;
        let mut bytes = full * (overhead + n as u64 * packet_len);
        if tail > 0 {
            bytes += overhead + tail * packet_len;
        }
        for (r, c) in ranks.iter_mut().zip(&received) {
            *r = (*r).min(*c);
        }
        out.ranks.push(ranks.iter().map(|r| *r as u64).sum());
        out.bytes.push(bytes);
    }
    out
}

/// Analytical `K N / S(N)` for a lossless hop, handy for checks.
pub fn lossless_throughput(ctx: &AggregationContext, n: usize) -> Result<f64> {
    Ok((ctx.code().payload * n) as f64 / frame_size(n, ctx.channel(), ctx.code())? as f64)
}
