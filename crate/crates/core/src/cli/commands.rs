use std::io::Write;

use rayon::prelude::*;

use crate::evolution::{simulate_line_network, NodeStrategy};
use crate::frame::phase::{phase_sequence, unsplit_batches};
use crate::frame::{AggregationContext, PhaseSetCaseI, PhaseSetCaseII};
use crate::oracle::rng::trial_rng;
use crate::oracle::{
    enumerate_period_exact, simulate_end_to_end, simulate_period, GfMatrix, SimMode, TrialConfig,
};
use crate::prob::{ChannelParams, CodeParams, IntegrityMode, LossModel, RankDistribution};

use super::config::ScenarioConfig;
use super::table::{format_value, Table};
use super::CliError;

#[derive(Debug, Clone, Copy)]
struct Scenario {
    batch_size: usize,
    plr: f64,
    integrity: IntegrityMode,
}

impl Scenario {
    fn name(&self) -> String {
        format!(
            "M{}_plr{}_{}",
            self.batch_size,
            self.plr,
            self.integrity.as_str()
        )
    }
}

fn scenarios(cfg: &ScenarioConfig, default_modes: &[IntegrityMode]) -> Vec<Scenario> {
    let modes = if cfg.integrity.is_empty() {
        default_modes
    } else {
        &cfg.integrity[..]
    };
    let mut out = Vec::new();
    for &batch_size in &cfg.batch_sizes {
        for &plr in &cfg.plr {
            for &integrity in modes {
                out.push(Scenario {
                    batch_size,
                    plr,
                    integrity,
                });
            }
        }
    }
    out
}

fn context(
    cfg: &ScenarioConfig,
    s: &Scenario,
    rank_dist: RankDistribution,
) -> Result<AggregationContext, CliError> {
    let code = cfg.code(s.batch_size, s.integrity)?;
    Ok(AggregationContext::new(
        cfg.channel(s.plr),
        code,
        rank_dist,
    )?)
}

/// `N, <scenario>...` for `N = 1..n_max`; cells past a scenario's own
/// `n_max` are left empty.
pub fn cmd_efficiency_curve(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let grid = scenarios(cfg, &[IntegrityMode::Checksum]);
    let curves: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|s| {
            let ctx = context(cfg, s, cfg.rank_dist.build(s.batch_size)?)?;
            Ok(ctx.optimize_n()?.1.efficiency)
        })
        .collect::<Result<_, CliError>>()?;
    let rows = curves.iter().map(Vec::len).max().unwrap_or(0);
    let mut header = vec!["N".to_string()];
    header.extend(grid.iter().map(Scenario::name));
    let table = Table {
        header,
        rows: (0..rows)
            .map(|i| {
                let mut row = vec![(i + 1).to_string()];
                row.extend(
                    curves
                        .iter()
                        .map(|c| c.get(i).map_or(String::new(), |v| format_value(*v))),
                );
                row
            })
            .collect(),
    };
    table.write_csv(out)?;
    Ok(())
}

/// `hop, <scenario>_<strategy>...`; with `mc`, each column is simulated
/// and followed by its standard error.
pub fn cmd_throughput(cfg: &ScenarioConfig, mc: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let mut grid: Vec<(Scenario, NodeStrategy)> = Vec::new();
    for s in scenarios(cfg, &[IntegrityMode::Checksum, IntegrityMode::Fec]) {
        for &strategy in &cfg.strategies {
            grid.push((s, strategy));
        }
    }
    let columns: Vec<Vec<Vec<f64>>> = grid
        .par_iter()
        .map(|(s, strategy)| {
            let ctx = context(cfg, s, RankDistribution::degenerate(s.batch_size))?;
            if mc {
                let report = simulate_end_to_end(cfg.hops, *strategy, &ctx, cfg.seed, cfg.trials)?;
                Ok(vec![
                    report.hops.iter().map(|h| h.throughput).collect(),
                    report.hops.iter().map(|h| h.std_error).collect(),
                ])
            } else {
                Ok(vec![
                    simulate_line_network(cfg.hops, *strategy, &ctx)?.efficiencies()
                ])
            }
        })
        .collect::<Result<_, CliError>>()?;

    let mut header = vec!["hop".to_string()];
    for (s, strategy) in &grid {
        let name = format!("{}_{}", s.name(), strategy.label());
        if mc {
            header.push(format!("{name}_se"));
            header.insert(header.len() - 1, name);
        } else {
            header.push(name);
        }
    }
    let table = Table {
        header,
        rows: (0..cfg.hops)
            .map(|h| {
                let mut row = vec![(h + 1).to_string()];
                for col in columns.iter().flatten() {
                    row.push(format_value(col[h]));
                }
                row
            })
            .collect(),
    };
    table.write_csv(out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub observed: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, observed: f64, tolerance: f64, strict: bool) -> CheckResult {
    let passed = if strict {
        observed < tolerance
    } else {
        observed <= tolerance
    };
    CheckResult {
        name,
        passed,
        observed,
        tolerance,
    }
}

/// Mismatches of the case `M <= N` counting identities over `[2, 200]²`.
fn case_one_mismatches() -> usize {
    let mut bad = 0;
    for m in 2..=200 {
        for n in m..=200 {
            let set = PhaseSetCaseI::new(m, n).expect("valid phase set");
            let g = set.g;
            if set.complete_batches_after_lead() != (n - m) / g
                || unsplit_batches(m, n) != (n - m + g) / g
            {
                bad += 1;
            }
        }
    }
    bad
}

/// Mismatches between the case `M > N` phase sets and the packing layout.
fn case_two_mismatches() -> usize {
    let mut bad = 0;
    for m in 3..=200 {
        for n in 2..m {
            let set = PhaseSetCaseII::new(m, n).expect("valid phase set");
            let seq = phase_sequence(m, n);
            let full = seq.iter().filter(|l| **l == n).count();
            let mut partial: Vec<usize> = seq.into_iter().filter(|l| *l != n).collect();
            partial.sort_unstable();
            if full != set.full_phase_count()
                || full != set.lineages.len()
                || partial != set.partial
            {
                bad += 1;
            }
        }
    }
    bad
}

fn small_grid_contexts() -> Vec<AggregationContext> {
    let mut out = Vec::new();
    for m in 1..=8 {
        let channel = ChannelParams::jumbo_udplite_ipv4(LossModel::BaselinePlr(0.1));
        let code = CodeParams::minimal(m, 256, 2, IntegrityMode::Checksum).expect("valid code");
        let dists = [
            RankDistribution::degenerate(m),
            RankDistribution::truncated_binomial(m, 0.8).expect("valid rho"),
        ];
        for f in [0.35, 0.7, 0.95] {
            for d in [0.6, 0.85, 1.0] {
                for dist in &dists {
                    out.push(
                        AggregationContext::with_survival(channel, code, dist.clone(), d, f)
                            .expect("valid survival"),
                    );
                }
            }
        }
    }
    out
}

fn exhaustive_max_delta() -> Result<f64, CliError> {
    let deltas: Vec<f64> = small_grid_contexts()
        .par_iter()
        .map(|ctx| {
            let mut worst: f64 = 0.0;
            for n in 1..=8 {
                let a = ctx.expected_rank_increment(n)?;
                let b = enumerate_period_exact(ctx, n)?;
                worst = worst.max((a - b).abs());
            }
            Ok(worst)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(deltas.into_iter().fold(0.0, f64::max))
}

fn lossless_max_delta() -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for m in 1..=8 {
        let channel = ChannelParams::jumbo_udplite_ipv4(LossModel::BaselinePlr(0.0));
        let code = CodeParams::minimal(m, 256, 2, IntegrityMode::Checksum)?;
        let ctx = AggregationContext::new(channel, code, RankDistribution::degenerate(m))?;
        for n in 1..=16 {
            worst = worst.max((ctx.expected_rank_increment(n)? - n as f64).abs());
        }
    }
    Ok(worst)
}

pub fn cmd_validate(
    cfg: &ScenarioConfig,
    out: &mut dyn Write,
) -> Result<ValidationReport, CliError> {
    let mut checks = vec![
        check(
            "case_i_identities",
            case_one_mismatches() as f64,
            0.0,
            false,
        ),
        check(
            "case_ii_phase_counts",
            case_two_mismatches() as f64,
            0.0,
            false,
        ),
        check(
            "exhaustive_max_abs_delta",
            exhaustive_max_delta()?,
            1e-12,
            true,
        ),
        check("lossless_max_abs_delta", lossless_max_delta()?, 1e-12, true),
    ];

    let channel = ChannelParams::jumbo_udplite_ipv4(LossModel::BaselinePlr(0.1));
    let code = CodeParams::minimal(4, 256, 2, IntegrityMode::Checksum)?;
    let ctx =
        AggregationContext::new(channel, code, RankDistribution::truncated_binomial(4, 0.8)?)?;
    let (mut z_count, mut z_gf, mut z_modes): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in [1, 16, 33] {
        let exact = ctx.expected_rank_increment(n)?;
        let run = |mode| {
            simulate_period(
                &ctx,
                n,
                &TrialConfig {
                    seed: cfg.seed,
                    trials: cfg.trials,
                    mode,
                },
            )
        };
        let counting = run(SimMode::RankCounting)?;
        let gf = run(SimMode::Gf256Matrix)?;
        let z = |delta: f64, se: f64| {
            if se > 0.0 {
                delta.abs() / se
            } else if delta == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        z_count = z_count.max(z(counting.mean_increment - exact, counting.std_error));
        z_gf = z_gf.max(z(gf.mean_increment - exact, gf.std_error));
        z_modes = z_modes.max(z(
            gf.mean_increment - counting.mean_increment,
            counting.std_error,
        ));
    }
    checks.push(check("mc_counting_max_z", z_count, 3.0, false));
    checks.push(check("mc_gf256_max_z", z_gf, 3.0, false));
    checks.push(check("mc_mode_agreement_max_z", z_modes, 3.0, false));

    let samples = cfg.trials.min(100_000);
    let full = (0..samples)
        .into_par_iter()
        .filter(|t| {
            let mut rng = trial_rng(cfg.seed, *t);
            GfMatrix::random(4, 8, &mut rng)
                .map(|m| m.rank() == 4)
                .unwrap_or(false)
        })
        .count();
    let deficient = 1.0 - full as f64 / samples as f64;
    checks.push(check(
        "gf256_4x8_rank_deficient_fraction",
        deficient,
        0.001,
        false,
    ));

    writeln!(out, "check,status,observed,tolerance")?;
    for c in &checks {
        writeln!(
            out,
            "{},{},{},{}",
            c.name,
            if c.passed { "pass" } else { "fail" },
            format_value(c.observed),
            format_value(c.tolerance)
        )?;
    }
    Ok(ValidationReport { checks })
}
