//! Periodic packing structure of batches into UDP-Lite packets.
//!
//! Batches of `M` BNC packets are sent back to back and cut into UDP-Lite
//! packets of `N` BNC packets each, so the layout repeats every
//! `lcm(M, N)` BNC packets. The phase `ℓ` of a UDP-Lite packet is the number
//! of BNC packets it holds from the batch its first BNC packet belongs to.

use crate::error::{ModelError, Result};

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn check(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(ModelError::InvalidParams(format!(
            "M = {m} and N = {n} must both be positive"
        )));
    }
    Ok(())
}

/// Phases of the case `M <= N`: `ℓ ∈ g·{1, ..., M/g}`, each with weight `g/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSetCaseI {
    pub batch_size: usize,
    pub aggregation: usize,
    pub g: usize,
    pub phases: Vec<usize>,
}

impl PhaseSetCaseI {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        check(m, n)?;
        if m > n {
            return Err(ModelError::InvalidParams(format!(
                "case I requires M <= N, got M = {m}, N = {n}"
            )));
        }
        let g = gcd(m, n);
        Ok(PhaseSetCaseI {
            batch_size: m,
            aggregation: n,
            g,
            phases: (1..=m / g).map(|i| i * g).collect(),
        })
    }

    pub fn weight(&self) -> f64 {
        self.g as f64 / self.batch_size as f64
    }

    /// Number of complete batches packed after the leading batch, summed
    /// over one period: `Σ_ℓ floor((N - ℓ) / M)`.
    pub fn complete_batches_after_lead(&self) -> usize {
        self.phases
            .iter()
            .map(|l| (self.aggregation - l) / self.batch_size)
            .sum()
    }
}

/// Phases of the case `M > N`.
///
/// Partial phases `ℓ ∈ g·{1, ..., (N - g)/g}` each have weight `g/M`; the
/// full phase `ℓ = N` has weight `(M - N + g)/M`, split evenly over the
/// valid `(s, k)` lineages.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSetCaseII {
    pub batch_size: usize,
    pub aggregation: usize,
    pub g: usize,
    pub partial: Vec<usize>,
    pub lineages: Vec<(usize, usize)>,
}

impl PhaseSetCaseII {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        check(m, n)?;
        if m <= n {
            return Err(ModelError::InvalidParams(format!(
                "case II requires M > N, got M = {m}, N = {n}"
            )));
        }
        let g = gcd(m, n);
        let partial = (1..n / g).map(|i| i * g).collect();
        let s_max = (m - n).min(n - g);
        let lineages = (0..=s_max / g)
            .map(|i| i * g)
            .flat_map(|s| (0..(m - s) / n).map(move |k| (s, k)))
            .collect();
        Ok(PhaseSetCaseII {
            batch_size: m,
            aggregation: n,
            g,
            partial,
            lineages,
        })
    }

    pub fn partial_weight(&self) -> f64 {
        self.g as f64 / self.batch_size as f64
    }

    pub fn full_weight(&self) -> f64 {
        (self.batch_size - self.aggregation + self.g) as f64 / self.batch_size as f64
    }

    pub fn lineage_weight(&self) -> f64 {
        self.g as f64 / self.batch_size as f64
    }

    pub fn contains(&self, s: usize, k: usize) -> bool {
        self.lineages.contains(&(s, k))
    }

    /// `(M - N + g) / g`: occurrences of `ℓ = N` per period.
    pub fn full_phase_count(&self) -> usize {
        (self.batch_size - self.aggregation + self.g) / self.g
    }
}

/// `ℓ` of every UDP-Lite packet in one period, in sending order.
pub fn phase_sequence(m: usize, n: usize) -> Vec<usize> {
    let period = lcm(m, n);
    (0..period / n)
        .map(|u| {
            let start = u * n;
            let batch_end = (start / m + 1) * m;
            batch_end.min(start + n) - start
        })
        .collect()
}

/// For every batch of one period, the number of its BNC packets in the
/// first UDP-Lite packet it appears in, reduced modulo `N`.
pub fn first_packet_counts(m: usize, n: usize) -> Vec<usize> {
    batch_groups(m, n).iter().map(|g| g[0] % n).collect()
}

/// For every batch of one period, the sizes of its consecutive pieces in
/// successive UDP-Lite packets.
pub fn batch_groups(m: usize, n: usize) -> Vec<Vec<usize>> {
    let period = lcm(m, n);
    (0..period / m)
        .map(|b| {
            let end = (b + 1) * m;
            let mut pos = b * m;
            let mut groups = Vec::new();
            while pos < end {
                let next = end.min((pos / n + 1) * n);
                groups.push(next - pos);
                pos = next;
            }
            groups
        })
        .collect()
}

/// Batches in one period that fit entirely inside a single UDP-Lite packet.
pub fn unsplit_batches(m: usize, n: usize) -> usize {
    batch_groups(m, n).iter().filter(|g| g.len() == 1).count()
}
