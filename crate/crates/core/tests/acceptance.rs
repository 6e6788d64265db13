//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use bncagg::cli::{run, Cli};
use bncagg::frame::phase::{gcd, phase_sequence, unsplit_batches};
use bncagg::frame::{PhaseSetCaseI, PhaseSetCaseII};
use bncagg::oracle::rng::trial_rng;
use bncagg::oracle::{
    enumerate_period_exact, simulate_end_to_end, simulate_period, GfMatrix, SimMode, TrialConfig,
};
use bncagg::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn channel(plr: f64) -> ChannelParams {
    ChannelParams::jumbo_udplite_ipv4(LossModel::BaselinePlr(plr))
}

fn code(m: usize, k: usize, mode: IntegrityMode) -> CodeParams {
    let f = match mode {
        IntegrityMode::Checksum => 2,
        IntegrityMode::Fec => 3,
    };
    CodeParams::minimal(m, k, f, mode).unwrap()
}

fn binomial_ctx(m: usize, k: usize, plr: f64) -> AggregationContext {
    let dist = RankDistribution::truncated_binomial(m, 0.8).unwrap();
    AggregationContext::new(channel(plr), code(m, k, IntegrityMode::Checksum), dist).unwrap()
}

fn feasibility() -> Outcome {
    let a = max_feasible_n(&channel(0.1), &code(4, 256, IntegrityMode::Checksum)).unwrap();
    let b = max_feasible_n(&channel(0.1), &code(4, 110, IntegrityMode::Checksum)).unwrap();
    outcome(
        a == 33 && b == 76,
        format!("n_max(K=256)={a}, n_max(K=110)={b}"),
    )
}

fn optimal_aggregation() -> Outcome {
    let ctx = binomial_ctx(4, 110, 0.25);
    let (n, profile) = ctx.optimize_n().unwrap();
    let (e75, e76) = (profile.at(75).unwrap(), profile.at(76).unwrap());
    outcome(
        n == 75 && e76 < e75,
        format!("argmax={n}, eff(75)={e75:.6}, eff(76)={e76:.6}"),
    )
}

fn non_monotonicity() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for (plr, lo, hi) in [(0.1, 0.718, 0.724), (0.2, 0.661, 0.667)] {
        let eff = binomial_ctx(4, 256, plr).optimize_n().unwrap().1.efficiency;
        let dip = (1..eff.len()).any(|i| eff[i] < eff[i - 1]);
        let band = &eff[14..33];
        let min = band.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let in_band = min >= lo - 0.002 && max <= hi + 0.002;
        passed &= dip && in_band;
        detail.push(format!(
            "PLR={plr}: dip={dip}, N in 15..=33 spans [{min:.4}, {max:.4}] vs [{lo}, {hi}]±0.002"
        ));
    }
    outcome(passed, detail.join("; "))
}

fn identities() -> Outcome {
    // the case M <= N identity as stated: Σ_ℓ floor((N - ℓ)/M) = (N - M + g)/g
    let mut literal_failures = 0;
    let mut first_failure = None;
    let mut corrected_failures = 0;
    let mut case_two_failures = 0;
    for m in 2..=200usize {
        for n in 2..=200usize {
            let g = gcd(m, n);
            if m <= n {
                let set = PhaseSetCaseI::new(m, n).unwrap();
                let sum = set.complete_batches_after_lead();
                if sum != (n - m + g) / g {
                    literal_failures += 1;
                    first_failure.get_or_insert((m, n, sum, (n - m + g) / g));
                }
                if sum != (n - m) / g || unsplit_batches(m, n) != (n - m + g) / g {
                    corrected_failures += 1;
                }
            } else {
                let set = PhaseSetCaseII::new(m, n).unwrap();
                let seq = phase_sequence(m, n);
                let full = seq.iter().filter(|l| **l == n).count();
                let partial = seq.len() - full;
                if full != (m - n + g) / g
                    || full != set.lineages.len()
                    || partial != (n - g) / g
                    || set.partial.len() != partial
                {
                    case_two_failures += 1;
                }
            }
        }
    }
    let (m, n, lhs, rhs) = first_failure.unwrap_or((0, 0, 0, 0));
    outcome(
        literal_failures == 0 && case_two_failures == 0,
        format!(
            "case I sum = (N-M+g)/g fails on {literal_failures} pairs (first M={m}, N={n}: {lhs} != {rhs}); \
             corrected sum = (N-M)/g with (N-M+g)/g unsplit batches fails on {corrected_failures}; \
             case II phase counts fail on {case_two_failures}"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for m in 1..=8 {
        let dists = [
            RankDistribution::degenerate(m),
            RankDistribution::truncated_binomial(m, 0.7).unwrap(),
        ];
        for f in [0.3, 0.65, 0.9] {
            for d in [0.5, 0.8, 0.97] {
                for dist in &dists {
                    let ctx = AggregationContext::with_survival(
                        channel(0.1),
                        code(m, 256, IntegrityMode::Checksum),
                        dist.clone(),
                        d,
                        f,
                    )
                    .unwrap();
                    for n in 1..=8 {
                        let a = ctx.expected_rank_increment(n).unwrap();
                        let b = enumerate_period_exact(&ctx, n).unwrap();
                        worst = worst.max((a - b).abs());
                        cases += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst < 1e-12,
        format!("{cases} cases, max |Δ| = {worst:.3e}"),
    )
}

fn monte_carlo() -> Outcome {
    let ctx = binomial_ctx(4, 256, 0.1);
    let mut passed = true;
    let mut detail = Vec::new();
    for n in [1, 16, 33] {
        let exact = ctx.expected_rank_increment(n).unwrap();
        for mode in [SimMode::RankCounting, SimMode::Gf256Matrix] {
            let cfg = TrialConfig {
                seed: 20_240_601,
                trials: 1_000_000,
                mode,
            };
            let est = simulate_period(&ctx, n, &cfg).unwrap();
            let z = (est.mean_increment - exact) / est.std_error;
            passed &= z.abs() < 3.0;
            let tag = match mode {
                SimMode::RankCounting => "count",
                SimMode::Gf256Matrix => "gf256",
            };
            detail.push(format!("N={n} {tag} z={z:+.2}"));
        }
    }
    outcome(passed, detail.join(", "))
}

fn crossing() -> Outcome {
    let trace = |mode, strategy| {
        let ctx = AggregationContext::new(
            channel(0.2),
            code(4, 256, mode),
            RankDistribution::degenerate(4),
        )
        .unwrap();
        simulate_line_network(10, strategy, &ctx)
            .unwrap()
            .efficiencies()
    };
    let strategies = [
        NodeStrategy::Optimal,
        NodeStrategy::Largest,
        NodeStrategy::Fixed(1),
    ];
    let check: Vec<Vec<f64>> = strategies
        .iter()
        .map(|s| trace(IntegrityMode::Checksum, *s))
        .collect();
    let fec: Vec<Vec<f64>> = strategies
        .iter()
        .map(|s| trace(IntegrityMode::Fec, *s))
        .collect();
    let single = &check[2];
    let crosses = check[..2]
        .iter()
        .all(|c| c[0] > single[0] && c[9] < single[9]);
    let dominates = fec
        .iter()
        .zip(&check)
        .all(|(f, c)| f.iter().zip(c).all(|(a, b)| a > b));
    outcome(
        crosses && dominates,
        format!(
            "hop 1: opt={:.4} largest={:.4} n1={:.4}; hop 10: opt={:.4} largest={:.4} n1={:.4}; fec dominates={dominates}",
            check[0][0], check[1][0], single[0], check[0][9], check[1][9], single[9]
        ),
    )
}

fn cli_output(args: &[&str]) -> Vec<u8> {
    let cli = Cli::try_parse_from(std::iter::once("bncagg").chain(args.iter().copied())).unwrap();
    let mut buf = Vec::new();
    run(&cli, &mut buf).unwrap();
    buf
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 4] = [
        &["efficiency-curve"],
        &["efficiency-curve", "--payload", "110", "--plr", "0.25"],
        &["throughput"],
        &[
            "throughput",
            "--batch-size",
            "8",
            "--batch-size",
            "16",
            "--plr",
            "0.2",
        ],
    ];
    let csv_same = commands.iter().all(|c| cli_output(c) == cli_output(c));
    let mc_cmd = ["throughput", "--mc", "--trials", "20000", "--hops", "4"];
    let mc_same = cli_output(&mc_cmd) == cli_output(&mc_cmd);

    let ctx = binomial_ctx(4, 256, 0.1);
    let cfg = TrialConfig {
        seed: 5,
        trials: 200_000,
        mode: SimMode::Gf256Matrix,
    };
    let in_pool = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let period = simulate_period(&ctx, 33, &cfg).unwrap();
            let line = simulate_end_to_end(4, NodeStrategy::Largest, &ctx, 5, 50_000).unwrap();
            (period, line)
        })
    };
    let (a, b) = (in_pool(1), in_pool(4));
    let workers_same =
        a.0 == b.0 && a.1 == b.1 && a.0.mean_increment.to_bits() == b.0.mean_increment.to_bits();
    outcome(
        csv_same && mc_same && workers_same,
        format!("analytical csv identical={csv_same}, mc csv identical={mc_same}, 1 vs 4 workers identical={workers_same}"),
    )
}

fn gf_full_rank() -> Outcome {
    let samples = 100_000u64;
    let full = (0..samples)
        .filter(|t| {
            GfMatrix::random(4, 8, &mut trial_rng(99, *t))
                .unwrap()
                .rank()
                == 4
        })
        .count();
    let freq = full as f64 / samples as f64;
    outcome(
        freq >= 0.999,
        format!("full rank in {full}/{samples} = {freq:.6}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("feasibility bounds", feasibility),
        ("optimal aggregation", optimal_aggregation),
        ("non-monotonicity and bands", non_monotonicity),
        ("phase identities", identities),
        ("oracle equivalence", oracle_equivalence),
        ("monte carlo agreement", monte_carlo),
        ("throughput crossing", crossing),
        ("determinism", determinism),
        ("gf256 full rank", gf_full_rank),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({:.2?}) {}",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed(),
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
