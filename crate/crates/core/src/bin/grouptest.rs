use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grouptest::cli::{self, BernoulliParam, CliError, CliResult, Overrides, PresetOptions};
use grouptest::decoders::DEFAULT_SSS_BUDGET;

#[derive(Parser)]
#[command(name = "grouptest", version, about = "Group testing simulations and rate curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads, 0 = one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    sss_budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BernoulliChoice {
    Ln2OverK,
    OneOverK,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON config and write a CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Write rate and capacity curves over a theta grid.
    TheoryCurves {
        #[arg(long, default_value_t = 0.01)]
        theta_min: f64,
        #[arg(long, default_value_t = 0.99)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the coupon-collector formulas by enumeration and Monte Carlo.
    CouponCheck {
        #[arg(long, default_value_t = 6)]
        t_max: u64,
        #[arg(long, default_value_t = 6)]
        c_max: u64,
        #[arg(long, default_value_t = 2000)]
        mc_trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Success curves for (N=500, K=10) and (N=2000, K=100).
    ReproFig2 {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum, default_value = "ln2-over-k")]
        bernoulli_p: BernoulliChoice,
    },
    /// Rate curves over theta in [0.01, 0.99].
    ReproFig1 {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(f)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, out, run } => {
            let overrides = Overrides {
                seed: run.seed,
                trials: run.trials,
                sss_budget: run.sss_budget,
            };
            let rows = with_threads(run.threads, || cli::cmd_simulate(&config, &out, overrides))?;
            eprintln!("wrote {rows} rows to {}", out.display());
        }
        Command::TheoryCurves {
            theta_min,
            theta_max,
            step,
            out,
        } => {
            let rows = cli::cmd_theory_curves(theta_min, theta_max, step, &out)?;
            eprintln!("wrote {rows} rows to {}", out.display());
        }
        Command::CouponCheck {
            t_max,
            c_max,
            mc_trials,
            seed,
        } => {
            let lines = cli::cmd_coupon_check(t_max, c_max, mc_trials, seed)?;
            for line in &lines {
                println!("{line}");
            }
            let failed = lines.iter().filter(|l| !l.passed).count();
            if failed > 0 {
                return Err(CliError::Runtime(format!("{failed} coupon checks failed")));
            }
        }
        Command::ReproFig2 {
            out,
            run,
            bernoulli_p,
        } => {
            let defaults = PresetOptions::default();
            let opts = PresetOptions {
                seed: run.seed.unwrap_or(defaults.seed),
                trials: run.trials.unwrap_or(defaults.trials),
                sss_budget: run.sss_budget.unwrap_or(DEFAULT_SSS_BUDGET),
                bernoulli: match bernoulli_p {
                    BernoulliChoice::Ln2OverK => BernoulliParam::Ln2OverK,
                    BernoulliChoice::OneOverK => BernoulliParam::OneOverK,
                },
            };
            let written = with_threads(run.threads, || cli::repro_fig2(&out, &opts))?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::ReproFig1 { out } => {
            let path = cli::repro_fig1(&out)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
