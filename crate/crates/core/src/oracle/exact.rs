//! Exact expected rank increment by brute-force enumeration of reception
//! outcomes over one period of the packing layout.
//!
//! The period of `lcm(M, N)` BNC packets is laid out explicitly. For each
//! batch and each UDP-Lite packet it touches, every combination of header
//! and packet survival events up to that packet is enumerated, with the
//! packet's own header fixed to "delivered". By linearity of expectation the
//! per-batch sums add up to the conditional rank gain of the whole period;
//! correlations between batches sharing a header do not change it.

use crate::error::{ModelError, Result};
use crate::frame::AggregationContext;

use super::layout::PeriodLayout;

pub const ENUMERATION_BOUND: u64 = 1 << 24;

/// Conditional expected rank increment per UDP-Lite packet, summed over
/// all outcomes. Matches `AggregationContext::expected_rank_increment`.
pub fn enumerate_period_exact(ctx: &AggregationContext, n: usize) -> Result<f64> {
    let m = ctx.batch_size();
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    let layout = PeriodLayout::new(m, n);
    let batches: Vec<Vec<usize>> = layout
        .batches
        .iter()
        .map(|b| b.iter().map(|p| p.len).collect())
        .collect();

    let mut terms: u64 = 0;
    for pieces in &batches {
        let mut packets = 0;
        for (t, size) in pieces.iter().enumerate() {
            packets += size;
            terms = terms.saturating_add(1u64 << (t + packets).min(63));
        }
    }
    if terms > ENUMERATION_BOUND {
        return Err(ModelError::EnumerationTooLarge {
            terms,
            bound: ENUMERATION_BOUND,
        });
    }

    let d = ctx.header_survival();
    let f = ctx.packet_survival();
    let ranks: Vec<(usize, f64)> = ctx.rank_dist().iter().filter(|(_, h)| *h > 0.0).collect();

    let mut total = 0.0;
    for pieces in &batches {
        for target in 0..pieces.len() {
            total += piece_gain(&pieces[..=target], d, f, &ranks);
        }
    }
    Ok(total / layout.udp_packets as f64)
}

/// Expected gain of the last piece given that its header survives.
fn piece_gain(pieces: &[usize], d: f64, f: f64, ranks: &[(usize, f64)]) -> f64 {
    let earlier_headers = pieces.len() - 1;
    let packets: usize = pieces.iter().sum();
    let bits = earlier_headers + packets;
    let mut sum = 0.0;
    for mask in 0u64..(1u64 << bits) {
        let on = |i: usize| mask >> i & 1 == 1;
        let mut weight = 1.0;
        for h in 0..earlier_headers {
            weight *= if on(h) { d } else { 1.0 - d };
        }
        let mut before = 0usize;
        let mut now = 0usize;
        let mut bit = earlier_headers;
        for (piece, size) in pieces.iter().enumerate() {
            let header_ok = piece == earlier_headers || on(piece);
            for _ in 0..*size {
                let ok = on(bit);
                weight *= if ok { f } else { 1.0 - f };
                if ok && header_ok {
                    if piece == earlier_headers {
                        now += 1;
                    } else {
                        before += 1;
                    }
                }
                bit += 1;
            }
        }
        if weight == 0.0 || now == 0 {
            continue;
        }
        let gain: f64 = ranks
            .iter()
            .map(|&(r, h)| h * ((before + now).min(r) - before.min(r)) as f64)
            .sum();
        sum += weight * gain;
    }
    sum
}
