use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use uavcov_cli::analyze::cmd_analyze;
use uavcov_cli::simulate::cmd_simulate;
use uavcov_cli::sweep::{cmd_sweep, SweepParam};
use uavcov_cli::validate::{cmd_validate, ValidateOptions};
use uavcov_cli::{CliError, Overrides, Scenario};

/// Coverage of a ground user served by a UAV among mobile interfering UAVs.
///
/// Exit codes: 0 success, 1 check failure, 2 input error.
#[derive(Debug, Parser)]
#[command(name = "uavcov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario JSON file; the built-in default scenario when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output file (analyze, sweep, validate) or directory (simulate).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    replications: Option<usize>,

    /// SIR threshold grid in dB, comma separated, replacing the scenario grid.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    psi_db: Option<Vec<f64>>,

    /// Worker threads for sweeps and replications.
    #[arg(long, global = true, env = "UAVCOV_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytical coverage over the threshold grid.
    Analyze,
    /// Monte Carlo campaign with summary and histograms.
    Simulate,
    /// Reduced-scale invariant checks; nonzero exit on any failure.
    Validate {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Analytical coverage for several values of one parameter.
    Sweep {
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    #[value(name = "M")]
    Interferers,
    #[value(name = "m0")]
    M0,
    #[value(name = "m1")]
    M1,
    #[value(name = "h0")]
    H0,
    #[value(name = "p_s")]
    StayProbability,
}

impl From<ParamArg> for SweepParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Interferers => SweepParam::Interferers,
            ParamArg::M0 => SweepParam::M0,
            ParamArg::M1 => SweepParam::M1,
            ParamArg::H0 => SweepParam::H0,
            ParamArg::StayProbability => SweepParam::StayProbability,
        }
    }
}

const FAULT: f64 = 1e-3;

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Input(
                "UAVCOV_WORKERS / --workers must be >= 1".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start {n} workers: {e}")))?;
    }
    let overrides = Overrides {
        seed: cli.seed,
        replications: cli.replications,
        psi_db: cli.psi_db,
    };
    let scenario = Scenario::load(cli.scenario.as_deref(), &overrides)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Analyze => cmd_analyze(&scenario, out),
        Command::Simulate => cmd_simulate(&scenario, out).map(|_| ()),
        Command::Validate { inject_fault } => {
            let options = ValidateOptions {
                upsilon_fault: inject_fault.then_some(FAULT),
            };
            cmd_validate(&scenario, out, &options).map(|_| ())
        }
        Command::Sweep { param, values } => cmd_sweep(&scenario, param.into(), &values, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
