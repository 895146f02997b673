use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdlog_cli::report::OutputFormat;
use sdlog_cli::run::{exit_code, run_command, CommandSpec, RunSpec, SolveOpts};

/// Experiment runner for short discrete logarithm recovery, RSA factoring
/// and order finding with side information, plus distribution and lattice
/// bound verification.
#[derive(Parser)]
#[command(name = "sdlog", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Base seed; trial i uses streams derived from (seed, i).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results are independent of this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Tradeoff parameter: pairs combined per recovery.
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Second-register width override (default ceil(m/s)).
    #[arg(long)]
    ell: Option<u32>,
    /// Independent trials.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 3)]
    max_rounds: u32,
    #[arg(long, default_value_t = 10_000)]
    subset_cap: u64,
    /// Samples per round (default 8 s).
    #[arg(long)]
    samples_per_round: Option<usize>,
}

impl SolveArgs {
    fn opts(&self) -> SolveOpts {
        SolveOpts {
            s: self.s,
            ell: self.ell,
            trials: self.trials,
            max_rounds: self.max_rounds,
            subset_cap: self.subset_cap,
            samples_per_round: self.samples_per_round,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Recover a short discrete logarithm on random safe-prime fixtures.
    Dlog {
        /// Bit bound on the secret: 0 < d < 2^m.
        #[arg(long)]
        m: u32,
        /// Fix the secret instead of drawing it per trial.
        #[arg(long)]
        d: Option<u64>,
        /// Safe-prime size override (default l+m+3).
        #[arg(long)]
        group_bits: Option<u32>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Factor random RSA fixtures via the short-dlog reduction.
    Factor {
        /// Bit length of N (each prime gets half).
        #[arg(long, default_value_t = 20)]
        fixture_bits: u32,
        /// Use the shorter exponent (N-1) - 2^n.
        #[arg(long)]
        reduced_exponent: bool,
        /// m = n instead of the conservative n + 1.
        #[arg(long)]
        tight_m: bool,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Find a group order from an additive hint r0 with 0 <= r - r0 < 2^m.
    Order {
        /// Bit bound on the hint window.
        #[arg(long)]
        m: u32,
        /// Fix r - r0 instead of drawing it per trial.
        #[arg(long)]
        d: Option<u64>,
        /// Bit length of the subgroup order (default l+m+2).
        #[arg(long)]
        order_bits: Option<u32>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Verify the distribution identities, probability bounds, oracle
    /// agreement, sampler law and short-vector rarity.
    Analyze {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long, default_value_t = 2)]
        s: u32,
        /// Check a single secret...
        #[arg(long)]
        d: Option<u64>,
        /// ...or every d below 2^m (the default when --d is absent).
        #[arg(long)]
        all_d: bool,
        /// Sampler draws for the TV check.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Lattices for the short-vector rate.
        #[arg(long, default_value_t = 2000)]
        lattices: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Grid of dlog experiments over m and s.
    Sweep {
        /// Comma-separated m values, e.g. 8,10,12.
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<u32>,
        /// Comma-separated s values, e.g. 1,2.
        #[arg(long, value_delimiter = ',', required = true)]
        s_list: Vec<u32>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Reduced-size run of the full verification and pipeline suite.
    Selftest {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn split(cli: Command) -> (CommandSpec, CommonOpts) {
    match cli {
        Command::Dlog {
            m,
            d,
            group_bits,
            solve,
            common,
        } => (
            CommandSpec::Dlog {
                m,
                d,
                group_bits,
                opts: solve.opts(),
            },
            common,
        ),
        Command::Factor {
            fixture_bits,
            reduced_exponent,
            tight_m,
            solve,
            common,
        } => (
            CommandSpec::Factor {
                fixture_bits,
                reduced_exponent,
                tight_m,
                opts: solve.opts(),
            },
            common,
        ),
        Command::Order {
            m,
            d,
            order_bits,
            solve,
            common,
        } => (
            CommandSpec::Order {
                m,
                d,
                order_bits,
                opts: solve.opts(),
            },
            common,
        ),
        Command::Analyze {
            m,
            ell,
            s,
            d,
            all_d,
            samples,
            lattices,
            common,
        } => (
            CommandSpec::Analyze {
                m,
                ell,
                s,
                d,
                all_d,
                samples,
                lattices,
            },
            common,
        ),
        Command::Sweep {
            m_list,
            s_list,
            solve,
            common,
        } => (
            CommandSpec::Sweep {
                m_list,
                s_list,
                opts: solve.opts(),
            },
            common,
        ),
        Command::Selftest { common } => (CommandSpec::Selftest, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = split(cli.command);
    let spec = RunSpec {
        command,
        seed: common.seed,
        jobs: common.jobs.max(1),
    };
    let report = match run_command(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let rendered = sdlog_cli::report::emit_report(&report, common.format);
    if let Some(path) = &common.out {
        if let Err(e) = std::fs::write(path, &rendered) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{rendered}");
    }
    ExitCode::from(exit_code(&report) as u8)
}
