//! Expected rank increment of a batch at the next node, per UDP-Lite
//! packet, given that the packet's payload is delivered.
//!
//! Under the large-field assumption, receiving `i` packets of a batch of
//! rank `r` yields rank `min{i, r}`. A batch whose earlier pieces delivered
//! `i` packets therefore gains `(min{j, r - i})⁺` from `j` new packets.

use super::phase::{gcd, PhaseSetCaseI, PhaseSetCaseII};
use super::AggregationContext;
use crate::error::{ModelError, Result};
use crate::prob::{bin_d_row, binom_row};

fn positive_min(j: usize, r: usize, received: usize) -> f64 {
    j.min(r.saturating_sub(received)) as f64
}

impl AggregationContext {
    /// `β'(ℓ)`: a fresh batch with `ℓ` packets in the current UDP-Lite packet.
    pub fn beta_prime(&self, l: usize) -> Result<f64> {
        if l > self.batch_size() {
            return Err(ModelError::Domain(format!(
                "ℓ = {l} exceeds the batch size {}",
                self.batch_size()
            )));
        }
        Ok(self.beta_prime_raw(l))
    }

    pub(crate) fn beta_prime_raw(&self, l: usize) -> f64 {
        if l == 0 {
            return 0.0;
        }
        let row = binom_row(l, self.f);
        self.rank_dist
            .iter()
            .map(|(r, h)| {
                h * row
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * j.min(r) as f64)
                    .sum::<f64>()
            })
            .sum()
    }

    /// `β(ℓ)`: the last `ℓ` packets of a batch whose first `M - ℓ` packets
    /// went out in one earlier UDP-Lite packet.
    pub fn beta(&self, l: usize) -> Result<f64> {
        let m = self.batch_size();
        if l == 0 || l > m {
            return Err(ModelError::Domain(format!("ℓ = {l} must lie in 1..={m}")));
        }
        Ok(self.beta_raw(l))
    }

    pub(crate) fn beta_raw(&self, l: usize) -> f64 {
        let m = self.batch_size();
        let current = binom_row(l, self.f);
        let earlier = bin_d_row(m - l, self.f, self.d);
        self.rank_dist
            .iter()
            .map(|(r, h)| {
                let inner: f64 = current
                    .iter()
                    .enumerate()
                    .map(|(j, bj)| {
                        bj * earlier
                            .iter()
                            .enumerate()
                            .map(|(i, bi)| bi * positive_min(j, r, i))
                            .sum::<f64>()
                    })
                    .sum();
                h * inner
            })
            .sum()
    }

    /// `ω_{r,j,b̄}(α, μ)`: expected increment from `j` new packets when `μ`
    /// packets were already received and `α` full earlier UDP-Lite packets
    /// plus one earliest packet holding `b̄` BNC packets remain to account for.
    pub fn omega(
        &self,
        n: usize,
        r: usize,
        j: usize,
        b_bar: usize,
        alpha: usize,
        mu: usize,
    ) -> Result<f64> {
        if n == 0 {
            return Err(ModelError::Domain("N must be at least 1".into()));
        }
        if b_bar >= n {
            return Err(ModelError::Domain(format!(
                "b̄ = {b_bar} must be below N = {n}"
            )));
        }
        let limit = self.batch_size().div_ceil(n);
        if alpha > limit {
            return Err(ModelError::RecursionDepth { alpha, limit });
        }
        Ok(OmegaTable::build(self, n, r, j, b_bar, alpha, mu).value())
    }

    /// `γ(ℓ)`: the final `ℓ < N` packets of a batch whose other `M - ℓ`
    /// packets were spread over `⌈(M - ℓ)/N⌉` earlier UDP-Lite packets.
    pub fn gamma(&self, n: usize, l: usize) -> Result<f64> {
        let m = self.batch_size();
        if l == 0 || l >= n || l >= m {
            return Err(ModelError::Domain(format!(
                "ℓ = {l} must lie in 1..min(N, M) for N = {n}, M = {m}"
            )));
        }
        Ok(self.gamma_raw(n, l))
    }

    pub(crate) fn gamma_raw(&self, n: usize, l: usize) -> f64 {
        let m = self.batch_size();
        let rest = m - l;
        self.lineage_increment(n, l, rest % n, rest / n)
    }

    /// `γ'(s, k)`: a full UDP-Lite packet (`ℓ = N`) of a batch that earlier
    /// contributed `s` packets to its first UDP-Lite packet and filled `k`
    /// more.
    pub fn gamma_prime(&self, n: usize, s: usize, k: usize) -> Result<f64> {
        let m = self.batch_size();
        let phases = PhaseSetCaseII::new(m, n)?;
        if !phases.contains(s, k) {
            return Err(ModelError::InvalidPhase { s, k, m, n });
        }
        Ok(self.lineage_increment(n, n, s, k))
    }

    /// `Σ_r ℏ_r Σ_j bin(j; current, f) ω_{r,j,b̄}(α, 0)`.
    fn lineage_increment(&self, n: usize, current: usize, b_bar: usize, alpha: usize) -> f64 {
        let row = binom_row(current, self.f);
        self.rank_dist
            .iter()
            .filter(|(_, h)| *h > 0.0)
            .map(|(r, h)| {
                h * row
                    .iter()
                    .enumerate()
                    .map(|(j, bj)| bj * OmegaTable::build(self, n, r, j, b_bar, alpha, 0).value())
                    .sum::<f64>()
            })
            .sum()
    }

    /// `E`: expected rank increment per UDP-Lite packet, averaged over the
    /// phases of one `lcm(M, N)` period.
    pub fn expected_rank_increment(&self, n: usize) -> Result<f64> {
        let m = self.batch_size();
        if n == 0 {
            return Err(ModelError::Domain("N must be at least 1".into()));
        }
        if m <= n {
            let phases = PhaseSetCaseI::new(m, n)?;
            let full = self.beta_prime_raw(m);
            let total: f64 = phases
                .phases
                .iter()
                .map(|&l| {
                    self.beta_raw(l)
                        + self.beta_prime_raw((n - l) % m)
                        + ((n - l) / m) as f64 * full
                })
                .sum();
            Ok(phases.weight() * total)
        } else {
            let phases = PhaseSetCaseII::new(m, n)?;
            let partial: f64 = phases
                .partial
                .iter()
                .map(|&l| self.gamma_raw(n, l) + self.beta_prime_raw(n - l))
                .sum();
            let full: f64 = phases
                .lineages
                .iter()
                .map(|&(s, k)| self.lineage_increment(n, n, s, k))
                .sum();
            Ok(gcd(m, n) as f64 / m as f64 * (partial + full))
        }
    }
}

/// Memo of `ω` over `(α, μ)` for fixed `(r, j, b̄)`. Level `a` holds
/// `μ ∈ 0..=(α_top - a) N + μ_0`.
struct OmegaTable {
    top: Vec<f64>,
}

impl OmegaTable {
    fn build(
        ctx: &AggregationContext,
        n: usize,
        r: usize,
        j: usize,
        b_bar: usize,
        alpha: usize,
        mu: usize,
    ) -> Self {
        if j == 0 {
            return OmegaTable { top: vec![0.0] };
        }
        let width = |a: usize| (alpha - a) * n + 1;
        let base_row = bin_d_row(b_bar, ctx.f, ctx.d);
        let mut level: Vec<f64> = (0..width(0))
            .map(|offset| {
                let received = mu + offset;
                base_row
                    .iter()
                    .enumerate()
                    .map(|(i, b)| b * positive_min(j, r, received + i))
                    .sum()
            })
            .collect();
        if alpha > 0 {
            let full_row = bin_d_row(n, ctx.f, ctx.d);
            for a in 1..=alpha {
                level = (0..width(a))
                    .map(|offset| {
                        full_row
                            .iter()
                            .enumerate()
                            .map(|(i, b)| b * level[offset + i])
                            .sum()
                    })
                    .collect();
            }
        }
        OmegaTable { top: level }
    }

    fn value(&self) -> f64 {
        self.top[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{ChannelParams, CodeParams, IntegrityMode, LossModel, RankDistribution};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ctx(m: usize, hbar: RankDistribution, d: f64, f: f64) -> AggregationContext {
        let ch = ChannelParams::jumbo_udplite_ipv4(LossModel::BaselinePlr(0.1));
        let code = CodeParams::minimal(m, 256, 2, IntegrityMode::Checksum).unwrap();
        AggregationContext::with_survival(ch, code, hbar, d, f).unwrap()
    }

    /// Expected increment of `current` new packets for a batch whose earlier
    /// pieces travelled in UDP-Lite packets of the given sizes, by summing
    /// over every header and packet outcome.
    fn brute_increment(
        hbar: &RankDistribution,
        earlier: &[usize],
        current: usize,
        d: f64,
        f: f64,
    ) -> f64 {
        let headers = earlier.len();
        let packets: usize = earlier.iter().sum::<usize>() + current;
        let mut total = 0.0;
        for mask in 0u32..(1 << (headers + packets)) {
            let bit = |i: usize| mask >> i & 1 == 1;
            let mut weight = 1.0;
            for h in 0..headers {
                weight *= if bit(h) { d } else { 1.0 - d };
            }
            for p in 0..packets {
                weight *= if bit(headers + p) { f } else { 1.0 - f };
            }
            let mut before = 0;
            let mut offset = headers;
            for (h, size) in earlier.iter().enumerate() {
                for p in 0..*size {
                    if bit(h) && bit(offset + p) {
                        before += 1;
                    }
                }
                offset += size;
            }
            let now = (0..current).filter(|p| bit(offset + p)).count();
            let gain: f64 = hbar
                .iter()
                .map(|(r, h)| h * ((before + now).min(r) - before.min(r)) as f64)
                .sum();
            total += weight * gain;
        }
        total
    }

    #[test]
    fn beta_prime_examples() {
        let c = ctx(2, RankDistribution::new(vec![0.5, 0.5]).unwrap(), 1.0, 0.5);
        assert_eq!(c.beta_prime(0).unwrap(), 0.0);
        assert_abs_diff_eq!(c.beta_prime(2).unwrap(), 0.875, epsilon = 1e-15);
        assert!(c.beta_prime(3).is_err());

        let lossless = ctx(5, RankDistribution::degenerate(5), 1.0, 1.0);
        for l in 0..=5 {
            assert_abs_diff_eq!(lossless.beta_prime(l).unwrap(), l as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn beta_examples() {
        let c = ctx(
            4,
            RankDistribution::truncated_binomial(4, 0.8).unwrap(),
            0.7,
            0.6,
        );
        assert_abs_diff_eq!(
            c.beta(4).unwrap(),
            c.beta_prime(4).unwrap(),
            epsilon = 1e-15
        );
        assert!(c.beta(0).is_err());
        assert!(c.beta(5).is_err());

        let lossless = ctx(5, RankDistribution::degenerate(5), 1.0, 1.0);
        for l in 1..=5 {
            assert_abs_diff_eq!(lossless.beta(l).unwrap(), l as f64, epsilon = 1e-15);
        }

        let hbar = RankDistribution::new(vec![0.5, 0.5]).unwrap();
        let small = ctx(2, hbar.clone(), 0.5, 0.5);
        // 0.5 [ (r=1) 0.5·0.75 ] + 0.5 [ (r=2) 0.5 ] by hand
        assert_abs_diff_eq!(small.beta(1).unwrap(), 0.4375, epsilon = 1e-15);
        assert_abs_diff_eq!(
            small.beta(1).unwrap(),
            brute_increment(&hbar, &[1], 1, 0.5, 0.5),
            epsilon = 1e-15
        );
    }

    #[test]
    fn omega_examples() {
        let c = ctx(3, RankDistribution::degenerate(3), 0.8, 0.5);
        assert_abs_diff_eq!(c.omega(2, 3, 2, 0, 0, 1).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.omega(2, 3, 2, 0, 0, 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(c.omega(2, 3, 0, 1, 1, 0).unwrap(), 0.0);

        // r = 3, j = 2, b̄ = 1, α = 1, μ = 0, N = 2, f = 0.5, d = 1
        let c = ctx(3, RankDistribution::degenerate(3), 1.0, 0.5);
        let brute = {
            // earlier received i ~ Bin(3, 0.5)
            let probs = [0.125, 0.375, 0.375, 0.125];
            probs
                .iter()
                .enumerate()
                .map(|(i, p)| p * 2usize.min(3usize.saturating_sub(i)) as f64)
                .sum::<f64>()
        };
        assert_abs_diff_eq!(brute, 1.375, epsilon = 1e-15);
        assert_abs_diff_eq!(c.omega(2, 3, 2, 1, 1, 0).unwrap(), brute, epsilon = 1e-15);
    }

    #[test]
    fn omega_guards() {
        let c = ctx(4, RankDistribution::degenerate(4), 0.9, 0.9);
        assert!(matches!(
            c.omega(2, 4, 1, 0, 3, 0),
            Err(ModelError::RecursionDepth { alpha: 3, limit: 2 })
        ));
        assert!(c.omega(2, 4, 1, 2, 1, 0).is_err());
    }

    #[test]
    fn gamma_matches_enumeration() {
        let hbar = RankDistribution::uniform(7);
        let c = ctx(7, hbar.clone(), 0.9, 0.5);
        // M = 7, N = 5, ℓ = 2: the other five packets filled one earlier packet
        let brute = brute_increment(&hbar, &[5], 2, 0.9, 0.5);
        assert_abs_diff_eq!(c.gamma(5, 2).unwrap(), brute, epsilon = 1e-12);
        // M = 7, N = 3, ℓ = 1: pieces 3, 3 before
        let brute = brute_increment(&hbar, &[3, 3], 1, 0.9, 0.5);
        assert_abs_diff_eq!(c.gamma(3, 1).unwrap(), brute, epsilon = 1e-12);
        // M = 7, N = 3, ℓ = 2: pieces 2, 3 before
        let brute = brute_increment(&hbar, &[2, 3], 2, 0.9, 0.5);
        assert_abs_diff_eq!(c.gamma(3, 2).unwrap(), brute, epsilon = 1e-12);
        assert!(c.gamma(3, 3).is_err());
        assert!(c.gamma(3, 0).is_err());
    }

    #[test]
    fn gamma_reduces_to_beta_with_one_earlier_packet() {
        let hbar = RankDistribution::truncated_binomial(5, 0.7).unwrap();
        let c = ctx(5, hbar, 0.85, 0.75);
        // N = 4, ℓ = 2: M - ℓ = 3 < N
        assert_abs_diff_eq!(c.gamma(4, 2).unwrap(), c.beta(2).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.gamma(4, 3).unwrap(), c.beta(3).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn gamma_lossless() {
        let hbar = RankDistribution::new(vec![0.1, 0.1, 0.2, 0.2, 0.1, 0.1, 0.2]).unwrap();
        let c = ctx(7, hbar.clone(), 1.0, 1.0);
        for (n, l) in [(5, 2), (3, 1), (4, 3), (6, 1)] {
            let expected: f64 = hbar
                .iter()
                .map(|(r, h)| h * positive_min(l, r, 7 - l))
                .sum();
            assert_abs_diff_eq!(c.gamma(n, l).unwrap(), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn gamma_prime_examples() {
        let hbar = RankDistribution::degenerate(7);
        let c = ctx(7, hbar.clone(), 0.95, 0.8);
        assert_abs_diff_eq!(
            c.gamma_prime(5, 0, 0).unwrap(),
            c.beta_prime(5).unwrap(),
            epsilon = 1e-14
        );
        let brute = brute_increment(&hbar, &[2], 5, 0.95, 0.8);
        assert_abs_diff_eq!(c.gamma_prime(5, 2, 0).unwrap(), brute, epsilon = 1e-12);
        assert!(matches!(
            c.gamma_prime(5, 3, 0),
            Err(ModelError::InvalidPhase { .. })
        ));

        // M = 7, N = 2: s ∈ {0, 1}; (1, 2) has one earliest piece and two full packets
        let brute = brute_increment(&hbar, &[1, 2, 2], 2, 0.95, 0.8);
        assert_abs_diff_eq!(c.gamma_prime(2, 1, 2).unwrap(), brute, epsilon = 1e-12);

        let hbar = RankDistribution::uniform(7);
        let lossless = ctx(7, hbar.clone(), 1.0, 1.0);
        for (s, k) in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)] {
            let expected: f64 = hbar
                .iter()
                .map(|(r, h)| h * positive_min(2, r, s + 2 * k))
                .sum();
            assert_abs_diff_eq!(
                lossless.gamma_prime(2, s, k).unwrap(),
                expected,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn expected_increment_lossless_is_n() {
        for m in 1..=9 {
            let c = ctx(m, RankDistribution::degenerate(m), 1.0, 1.0);
            for n in 1..=12 {
                assert_abs_diff_eq!(
                    c.expected_rank_increment(n).unwrap(),
                    n as f64,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn single_packet_batches() {
        let c = ctx(1, RankDistribution::degenerate(1), 0.8, 0.7);
        for n in 1..=6 {
            let e = c.expected_rank_increment(n).unwrap();
            assert_abs_diff_eq!(e, n as f64 * c.beta_prime(1).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn no_packet_survives() {
        let c = ctx(4, RankDistribution::uniform(4), 0.9, 0.0);
        for n in 1..=9 {
            assert_eq!(c.expected_rank_increment(n).unwrap(), 0.0);
        }
    }

    proptest! {
        #[test]
        fn beta_prime_monotone_and_beta_bounded(
            m in 1usize..10,
            f in 0.0f64..=1.0,
            d in 0.0f64..=1.0,
            rho in 0.05f64..0.95,
        ) {
            let c = ctx(m, RankDistribution::truncated_binomial(m, rho).unwrap(), d, f);
            for l in 1..=m {
                prop_assert!(c.beta_prime(l).unwrap() + 1e-12 >= c.beta_prime(l - 1).unwrap());
                prop_assert!(c.beta(l).unwrap() <= c.beta_prime(l).unwrap() + 1e-12);
            }
        }

        #[test]
        fn expected_increment_bounded(
            m in 1usize..10,
            n in 1usize..14,
            f in 0.0f64..=1.0,
            d in 0.0f64..=1.0,
            rho in 0.05f64..0.95,
        ) {
            let c = ctx(m, RankDistribution::truncated_binomial(m, rho).unwrap(), d, f);
            let e = c.expected_rank_increment(n).unwrap();
            prop_assert!(e >= -1e-12 && e <= n as f64 + 1e-12);
        }
    }
}
