//! Command execution: a `RunSpec` fully describes one experiment, and
//! `run_command` turns it into an `ExperimentReport` deterministically
//! (identical specs, identical seeds give identical reports modulo timing).

use std::time::Instant;

use anyhow::{bail, Context};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sdlog::pipelines::fixtures::{make_dlog_fixture, make_order_fixture, make_rsa_fixture};
use sdlog::pipelines::{
    factor_rsa, order_with_hint, solve_short_dlog, FactorConfig, Recovered, SolveConfig,
};

use crate::checks;
use crate::report::{
    Aggregates, BoundCheck, ExperimentReport, ReportParams, Timing, TrialRecord,
};

/// Shared solve knobs as they appear on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOpts {
    pub s: u32,
    pub ell: Option<u32>,
    pub trials: usize,
    pub max_rounds: u32,
    pub subset_cap: u64,
    pub samples_per_round: Option<usize>,
}

impl SolveOpts {
    fn config(&self, seed: u64, stream: u64) -> SolveConfig {
        let mut cfg = SolveConfig::new(self.s).with_seed(seed, stream);
        cfg.ell = self.ell;
        cfg.max_rounds = self.max_rounds;
        cfg.subset_cap = self.subset_cap;
        if let Some(t) = self.samples_per_round {
            cfg.samples_per_round = t;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandSpec {
    Dlog {
        m: u32,
        d: Option<u64>,
        group_bits: Option<u32>,
        opts: SolveOpts,
    },
    Factor {
        fixture_bits: u32,
        reduced_exponent: bool,
        tight_m: bool,
        opts: SolveOpts,
    },
    Order {
        m: u32,
        d: Option<u64>,
        order_bits: Option<u32>,
        opts: SolveOpts,
    },
    Analyze {
        m: u32,
        ell: Option<u32>,
        s: u32,
        d: Option<u64>,
        all_d: bool,
        samples: usize,
        lattices: usize,
    },
    Sweep {
        m_list: Vec<u32>,
        s_list: Vec<u32>,
        opts: SolveOpts,
    },
    Selftest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: CommandSpec,
    pub seed: u64,
    pub jobs: usize,
}

/// Run trials with a deterministic trial-to-stream mapping; worker count
/// does not influence the results, only the wall time.
fn run_trials<F>(jobs: usize, trials: usize, f: F) -> anyhow::Result<(Vec<TrialRecord>, Vec<f64>)>
where
    F: Fn(usize) -> anyhow::Result<TrialRecord> + Sync,
{
    let timed = |i: usize| -> anyhow::Result<(TrialRecord, f64)> {
        let t0 = Instant::now();
        let rec = f(i)?;
        Ok((rec, t0.elapsed().as_secs_f64() * 1e3))
    };
    let results: Vec<anyhow::Result<(TrialRecord, f64)>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(timed).collect()
        })
    } else {
        (0..trials).map(timed).collect()
    };
    let mut records = Vec::with_capacity(trials);
    let mut times = Vec::with_capacity(trials);
    for r in results {
        let (rec, ms) = r?;
        records.push(rec);
        times.push(ms);
    }
    Ok((records, times))
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn run_command(spec: &RunSpec) -> anyhow::Result<ExperimentReport> {
    let t0 = Instant::now();
    let mut report = match &spec.command {
        CommandSpec::Dlog {
            m,
            d,
            group_bits,
            opts,
        } => run_dlog(spec, *m, *d, *group_bits, opts)?,
        CommandSpec::Factor {
            fixture_bits,
            reduced_exponent,
            tight_m,
            opts,
        } => run_factor(spec, *fixture_bits, *reduced_exponent, *tight_m, opts)?,
        CommandSpec::Order {
            m,
            d,
            order_bits,
            opts,
        } => run_order(spec, *m, *d, *order_bits, opts)?,
        CommandSpec::Analyze {
            m,
            ell,
            s,
            d,
            all_d,
            samples,
            lattices,
        } => run_analyze(spec, *m, *ell, *s, *d, *all_d, *samples, *lattices)?,
        CommandSpec::Sweep { m_list, s_list, opts } => run_sweep(spec, m_list, s_list, opts)?,
        CommandSpec::Selftest => run_selftest(spec)?,
    };
    report.timing.total_ms = t0.elapsed().as_secs_f64() * 1e3;
    report.aggregates = Aggregates::from_trials(&report.trials, &report.checks);
    Ok(report)
}

/// Exit code contract: 0 on success, 1 on experiment failure.
pub fn exit_code(report: &ExperimentReport) -> i32 {
    let trials_ok = report.trials.is_empty() || report.aggregates.successes > 0;
    let checks_ok = report.checks.iter().all(|c| c.pass);
    if trials_ok && checks_ok {
        0
    } else {
        1
    }
}

fn base_report(command: &str, seed: u64) -> ExperimentReport {
    ExperimentReport {
        command: command.into(),
        params: ReportParams {
            seed,
            ..Default::default()
        },
        trials: vec![],
        aggregates: Aggregates::default(),
        checks: vec![],
        timing: Timing::default(),
    }
}

fn fill_solve_params(params: &mut ReportParams, opts: &SolveOpts) {
    params.s = Some(opts.s);
    params.ell = opts.ell;
    params.trials = Some(opts.trials);
    params.max_rounds = Some(opts.max_rounds);
    params.subset_cap = Some(opts.subset_cap);
    params.samples_per_round = opts.samples_per_round;
}

fn run_dlog(
    spec: &RunSpec,
    m: u32,
    d: Option<u64>,
    group_bits: Option<u32>,
    opts: &SolveOpts,
) -> anyhow::Result<ExperimentReport> {
    let mut report = base_report("dlog", spec.seed);
    report.params.m = Some(m);
    report.params.d = d;
    fill_solve_params(&mut report.params, opts);

    let (trials, times) = run_trials(spec.jobs, opts.trials, |i| {
        let mut rng = trial_rng(spec.seed, 2 * i as u64 + 1);
        let fixture = make_dlog_fixture(m, opts.s, opts.ell, group_bits, d, &mut rng)?;
        let cfg = opts.config(spec.seed, 2 * i as u64 + 2);
        let out = solve_short_dlog(&fixture.instance, |c| fixture.verify(c), &cfg)?;
        let (success, recovered) = match &out.recovered {
            Some(Recovered::Dlog(v)) => (fixture.verify(v), Some(v.to_string())),
            _ => (false, None),
        };
        Ok(TrialRecord {
            trial: i,
            m,
            s: opts.s,
            ell: fixture.instance.params().ell(),
            rounds: out.rounds,
            samples_drawn: out.samples_drawn,
            good_pairs: out.good_pairs,
            subsets_tried: out.subsets_tried,
            success,
            recovered,
            register_width: Some(fixture.instance.params().first_register_bits()),
            order_requirement_met: None,
        })
    })?;
    report.trials = trials;
    report.timing.per_trial_ms = times;
    Ok(report)
}

fn run_factor(
    spec: &RunSpec,
    fixture_bits: u32,
    reduced_exponent: bool,
    tight_m: bool,
    opts: &SolveOpts,
) -> anyhow::Result<ExperimentReport> {
    if !(8..=64).contains(&fixture_bits) {
        bail!("--fixture-bits must be between 8 and 64");
    }
    let half_bits = fixture_bits / 2;
    let mut report = base_report("factor", spec.seed);
    report.params.fixture_bits = Some(fixture_bits);
    report.params.reduced_exponent = Some(reduced_exponent);
    report.params.tight_m = Some(tight_m);
    fill_solve_params(&mut report.params, opts);

    let (trials, times) = run_trials(spec.jobs, opts.trials, |i| {
        let mut rng = trial_rng(spec.seed, 2 * i as u64 + 1);
        let fixture = make_rsa_fixture(half_bits, &mut rng)?;
        let n = fixture.n();
        let mut cfg = FactorConfig::new(opts.s);
        cfg.solve = opts.config(spec.seed, 2 * i as u64 + 2);
        cfg.reduced_exponent = reduced_exponent;
        cfg.tight_m = tight_m;
        let out = factor_rsa(&n, Some(half_bits), &cfg, Some(&fixture))?;
        let (success, recovered) = match &out.factors {
            Some((p, q)) => (p * q == n, Some(format!("{p};{q}"))),
            None => (false, None),
        };
        Ok(TrialRecord {
            trial: i,
            m: out.params.m(),
            s: opts.s,
            ell: out.params.ell(),
            rounds: out.rounds,
            samples_drawn: out.samples_drawn,
            good_pairs: out.good_pairs,
            subsets_tried: out.subsets_tried,
            success,
            recovered,
            register_width: Some(out.params.first_register_bits()),
            order_requirement_met: out.order_requirement_met,
        })
    })?;
    report.trials = trials;
    report.timing.per_trial_ms = times;

    // Structural exponent accounting: width = l + m, and with default ell
    // it stays within 2 bits of n + ceil(n/s).
    if opts.ell.is_none() {
        let expected = half_bits + half_bits.div_ceil(opts.s);
        let worst = report
            .trials
            .iter()
            .map(|t| (t.register_width.unwrap_or(0) as i64 - expected as i64).abs())
            .max()
            .unwrap_or(0);
        report.checks.push(BoundCheck {
            name: "exponent_width_accounting".into(),
            pass: worst <= 2,
            measured: worst as f64,
            bound: 2.0,
            margin: 2.0 - worst as f64,
            details: format!("|l+m - (n + ceil(n/s))| with n={half_bits} s={}", opts.s),
        });
    }
    Ok(report)
}

fn run_order(
    spec: &RunSpec,
    m: u32,
    d: Option<u64>,
    order_bits: Option<u32>,
    opts: &SolveOpts,
) -> anyhow::Result<ExperimentReport> {
    let ell_effective = opts.ell.unwrap_or_else(|| m.div_ceil(opts.s));
    let order_bits = order_bits.unwrap_or(ell_effective + m + 2);
    let mut report = base_report("order", spec.seed);
    report.params.m = Some(m);
    report.params.d = d;
    report.params.order_bits = Some(order_bits);
    fill_solve_params(&mut report.params, opts);

    let (trials, times) = run_trials(spec.jobs, opts.trials, |i| {
        let mut rng = trial_rng(spec.seed, 2 * i as u64 + 1);
        let fixture = make_order_fixture(m, opts.s, opts.ell, order_bits, d, &mut rng)?;
        let cfg = opts.config(spec.seed, 2 * i as u64 + 2);
        let out = order_with_hint(&fixture.group, &fixture.generator, &fixture.r0, m, &cfg)?;
        let (success, recovered) = match &out.order {
            Some(r) => (
                *r == fixture.r && fixture.generator.pow(r)?.is_identity(),
                Some(r.to_string()),
            ),
            None => (false, None),
        };
        Ok(TrialRecord {
            trial: i,
            m,
            s: opts.s,
            ell: ell_effective,
            rounds: out.rounds,
            samples_drawn: out.samples_drawn,
            good_pairs: out.good_pairs,
            subsets_tried: out.subsets_tried,
            success,
            recovered,
            register_width: Some(ell_effective + m),
            order_requirement_met: None,
        })
    })?;
    report.trials = trials;
    report.timing.per_trial_ms = times;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_analyze(
    spec: &RunSpec,
    m: u32,
    ell: Option<u32>,
    s: u32,
    d: Option<u64>,
    all_d: bool,
    samples: usize,
    lattices: usize,
) -> anyhow::Result<ExperimentReport> {
    let ell = ell.unwrap_or_else(|| m.div_ceil(s));
    if ell + m > 20 {
        bail!("analyze needs l + m <= 20; got {}", ell + m);
    }
    let mut report = base_report("analyze", spec.seed);
    report.params.m = Some(m);
    report.params.ell = Some(ell);
    report.params.s = Some(s);
    report.params.d = d;
    report.params.all_d = Some(all_d);
    report.params.samples = Some(samples);
    report.params.lattices = Some(lattices);

    let ds: Vec<u64> = match (d, all_d) {
        (Some(d), false) => vec![d],
        _ => checks::all_secrets(m),
    };
    let d_tv = d.unwrap_or(if m >= 2 { 3 % (1 << m) } else { 1 }).max(1);

    report.checks.push(checks::window_moment_check(m, ell, &ds)?);
    report.checks.push(checks::good_count_check(m, ell, &ds)?);
    report.checks.push(checks::good_probability_check(m, ell, &ds)?);
    report.checks.push(checks::good_mass_check(m, ell, &ds)?);
    // The brute-force oracle is quadratic in the state count; sweep a
    // representative spread of secrets when the full range would drag.
    let oracle_ds: Vec<u64> = if ds.len() > 16 && 2 * ell + m > 10 {
        ds.iter()
            .copied()
            .step_by(ds.len().div_ceil(16))
            .chain([1, 1 << (m - 1), (1 << m) - 1])
            .collect::<std::collections::BTreeSet<u64>>()
            .into_iter()
            .collect()
    } else {
        ds.clone()
    };
    if let Some(c) = checks::oracle_check(m, ell, &oracle_ds)? {
        report.checks.push(c);
    }
    report
        .checks
        .push(checks::sampler_tv_check(m, ell, d_tv, samples, spec.seed)?);
    // The rarity bound is m-independent; clamp m so the per-lattice good-j
    // enumeration stays interactive.
    report
        .checks
        .push(checks::short_vector_check(m.clamp(4, 10), s, lattices, spec.seed)?);
    report
        .checks
        .push(checks::fiber_uniformity_check(m, ell, d_tv, samples.min(100_000), spec.seed)?);
    Ok(report)
}

fn run_sweep(
    spec: &RunSpec,
    m_list: &[u32],
    s_list: &[u32],
    opts: &SolveOpts,
) -> anyhow::Result<ExperimentReport> {
    if m_list.is_empty() || s_list.is_empty() {
        bail!("sweep needs non-empty --m-list and --s-list");
    }
    let mut report = base_report("sweep", spec.seed);
    fill_solve_params(&mut report.params, opts);

    let mut trial_base = 0usize;
    for &m in m_list {
        for &s in s_list {
            let cell_opts = SolveOpts {
                s,
                ell: opts.ell,
                ..opts.clone()
            };
            let (mut trials, mut times) = run_trials(spec.jobs, opts.trials, |i| {
                let idx = trial_base + i;
                let mut rng = trial_rng(spec.seed, 2 * idx as u64 + 1);
                let fixture = make_dlog_fixture(m, s, cell_opts.ell, None, None, &mut rng)?;
                let cfg = cell_opts.config(spec.seed, 2 * idx as u64 + 2);
                let out = solve_short_dlog(&fixture.instance, |c| fixture.verify(c), &cfg)?;
                let (success, recovered) = match &out.recovered {
                    Some(Recovered::Dlog(v)) => (fixture.verify(v), Some(v.to_string())),
                    _ => (false, None),
                };
                Ok(TrialRecord {
                    trial: idx,
                    m,
                    s,
                    ell: fixture.instance.params().ell(),
                    rounds: out.rounds,
                    samples_drawn: out.samples_drawn,
                    good_pairs: out.good_pairs,
                    subsets_tried: out.subsets_tried,
                    success,
                    recovered,
                    register_width: Some(fixture.instance.params().first_register_bits()),
                    order_requirement_met: None,
                })
            })?;
            trial_base += opts.trials;
            report.trials.append(&mut trials);
            report.timing.per_trial_ms.append(&mut times);
        }
    }
    Ok(report)
}

fn run_selftest(spec: &RunSpec) -> anyhow::Result<ExperimentReport> {
    let mut report = base_report("selftest", spec.seed);
    let ds = checks::all_secrets(4);
    report.checks.push(checks::window_moment_check(4, 2, &ds)?);
    report.checks.push(checks::good_count_check(4, 2, &ds)?);
    report.checks.push(checks::good_probability_check(4, 2, &ds)?);
    report.checks.push(checks::good_mass_check(4, 2, &ds)?);
    if let Some(c) = checks::oracle_check(4, 2, &ds)? {
        report.checks.push(c);
    }
    report
        .checks
        .push(checks::sampler_tv_check(2, 1, 3, 60_000, spec.seed)?);
    report
        .checks
        .push(checks::short_vector_check(8, 2, 400, spec.seed)?);
    report
        .checks
        .push(checks::fiber_uniformity_check(2, 1, 3, 40_000, spec.seed)?);

    // Miniature end-to-end runs of each pipeline.
    let dlog_spec = RunSpec {
        command: CommandSpec::Dlog {
            m: 8,
            d: None,
            group_bits: None,
            opts: SolveOpts {
                s: 2,
                ell: None,
                trials: 4,
                max_rounds: 3,
                subset_cap: 10_000,
                samples_per_round: None,
            },
        },
        seed: spec.seed,
        jobs: spec.jobs,
    };
    let dlog_report = run_command(&dlog_spec)?;
    report.checks.push(BoundCheck {
        name: "selftest_dlog_pipeline".into(),
        pass: dlog_report.aggregates.successes > 0,
        measured: dlog_report.aggregates.success_rate,
        bound: 0.25,
        margin: dlog_report.aggregates.success_rate - 0.25,
        details: "4 trials at m=8 s=2".into(),
    });

    let factor_spec = RunSpec {
        command: CommandSpec::Factor {
            fixture_bits: 16,
            reduced_exponent: false,
            tight_m: false,
            opts: SolveOpts {
                s: 2,
                ell: None,
                trials: 2,
                max_rounds: 3,
                subset_cap: 10_000,
                samples_per_round: None,
            },
        },
        seed: spec.seed,
        jobs: spec.jobs,
    };
    let factor_report = run_command(&factor_spec)?;
    report.checks.push(BoundCheck {
        name: "selftest_factor_pipeline".into(),
        pass: factor_report.aggregates.successes > 0,
        measured: factor_report.aggregates.success_rate,
        bound: 0.25,
        margin: factor_report.aggregates.success_rate - 0.25,
        details: "2 fixtures at 16 bits, s=2".into(),
    });

    // Quadratic recovery identities, exact.
    let id_143 = sdlog::factors_from_half_sum(&BigInt::from(143), &BigInt::from(12))
        == Some((BigInt::from(13), BigInt::from(11)));
    let id_221 = sdlog::factors_from_half_sum(&BigInt::from(221), &BigInt::from(15))
        == Some((BigInt::from(17), BigInt::from(13)));
    report.checks.push(BoundCheck {
        name: "selftest_quadratic_identities".into(),
        pass: id_143 && id_221,
        measured: (id_143 && id_221) as u8 as f64,
        bound: 1.0,
        margin: 0.0,
        details: "143 -> (13,11), 221 -> (17,13)".into(),
    });

    // Determinism: the dlog report reproduces byte for byte modulo timing.
    let again = run_command(&dlog_spec)?;
    let identical = crate::report::json_without_timing(&dlog_report)
        == crate::report::json_without_timing(&again);
    report.checks.push(BoundCheck {
        name: "selftest_determinism".into(),
        pass: identical,
        measured: identical as u8 as f64,
        bound: 1.0,
        margin: 0.0,
        details: "re-run report identical modulo timing".into(),
    });
    Ok(report)
}
