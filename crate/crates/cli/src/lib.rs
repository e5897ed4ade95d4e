//! Command-line front end: one subcommand per pipeline stage or numeric
//! suite, TOML configs in, JSON reports out.
//!
//! Exit codes: 0 when every check or tolerance passes, 1 on a check
//! failure, 2 on configuration or usage errors.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::construct::{run_construct, ConstructError, ConstructRequest};
use commands::verify::{run_evolve, run_madelung, run_vacuum, VerifyError};
use config::{read_toml, PdeConfig, ScenarioConfig};
use jetcartan::report::{to_json_stable, ConstructReport, VerifyReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "jetcartan",
    about = "Construct scale-group connections for evolution equations on jet coordinates and verify the induced systems numerically",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomised symbolic equivalence checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Override the spatial dimension from the config
    #[arg(long)]
    dim: Option<usize>,
    /// Gauge policy: paper-canonical | zero-alpha-t
    #[arg(long)]
    policy: Option<String>,
    /// Proportionality constant for the gauge subgroup (a complex constant
    /// expression, e.g. "1" or "2+I")
    #[arg(long)]
    lambda: Option<String>,
    /// Use the diffusion variant (time coefficient 1 instead of i)
    #[arg(long)]
    diffusion: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dump the evolved field per time slice as CSV (finest resolution)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full symbolic construction pipeline
    Construct(ConstructArgs),
    /// Run the pipeline and report the gauge-subgroup constraints
    Gauge(ConstructArgs),
    /// Run the pipeline and report the torsion-free reduction
    VerifyTorsion(ConstructArgs),
    /// Solve the vacuum boundary value problem and measure convergence
    Vacuum(ScenarioArgs),
    /// Evolution suites: direct, split-vs-direct, continuity form
    Evolve(ScenarioArgs),
    /// Decomposition residual suite
    Madelung(ScenarioArgs),
    /// Summarise an existing JSON report
    Report {
        /// Report file written by another command
        #[arg(long)]
        input: PathBuf,
    },
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    match cli.command {
        Command::Construct(args) => construct_command(&args, "construct"),
        Command::Gauge(args) => construct_command(&args, "gauge"),
        Command::VerifyTorsion(args) => construct_command(&args, "verify-torsion"),
        Command::Vacuum(args) => scenario_command(&args, SuiteKind::Vacuum),
        Command::Evolve(args) => scenario_command(&args, SuiteKind::Evolve),
        Command::Madelung(args) => scenario_command(&args, SuiteKind::Madelung),
        Command::Report { input } => report_command(&input),
    }
}

fn construct_command(args: &ConstructArgs, command: &str) -> i32 {
    let config: PdeConfig = match read_toml(&args.common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_USAGE;
        }
    };
    let request = ConstructRequest {
        config,
        policy_override: args.policy.clone(),
        lambda_override: args.lambda.clone(),
        dim_override: args.dim,
        diffusion: args.diffusion,
        seed: args.common.seed,
    };
    let report = match run_construct(&request, command) {
        Ok(r) => r,
        Err(ConstructError::Config(m)) => {
            eprintln!("error: {}", m);
            return EXIT_USAGE;
        }
        Err(ConstructError::Pipeline(e)) => {
            eprintln!("error: construction failed: {}", e);
            return EXIT_USAGE;
        }
    };
    for check in &report.checks {
        eprintln!(
            "{} {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name
        );
    }
    if emit(&args.common.out, &to_json_stable(&report)).is_err() {
        return EXIT_USAGE;
    }
    if report.all_checks_pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILURE
    }
}

enum SuiteKind {
    Vacuum,
    Evolve,
    Madelung,
}

fn scenario_command(args: &ScenarioArgs, kind: SuiteKind) -> i32 {
    let config: ScenarioConfig = match read_toml(&args.common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_USAGE;
        }
    };
    let seed = args.common.seed;
    let result = match kind {
        SuiteKind::Vacuum => run_vacuum(&config, seed),
        SuiteKind::Evolve => run_evolve(&config, seed, args.csv.as_deref()),
        SuiteKind::Madelung => run_madelung(&config, seed),
    };
    let report = match result {
        Ok(r) => r,
        Err(VerifyError::Config(m)) => {
            eprintln!("error: {}", m);
            return EXIT_USAGE;
        }
        Err(VerifyError::Numeric(e)) => {
            eprintln!("error: numeric suite failed: {}", e);
            return EXIT_USAGE;
        }
    };
    print_verify_rows(&report);
    if emit(&args.common.out, &to_json_stable(&report)).is_err() {
        return EXIT_USAGE;
    }
    if report.overall_pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILURE
    }
}

fn print_verify_rows(report: &VerifyReport) {
    for row in &report.rows {
        if row.op == "info" {
            eprintln!("INFO {} = {:.6e}", row.name, row.value);
        } else {
            eprintln!(
                "{} {} = {:.6e} {} {:.6e}",
                if row.pass { "PASS" } else { "FAIL" },
                row.name,
                row.value,
                row.op,
                row.threshold
            );
        }
    }
}

fn report_command(input: &Path) -> i32 {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", input.display(), e);
            return EXIT_USAGE;
        }
    };
    if let Ok(report) = serde_json::from_str::<ConstructReport>(&text) {
        println!(
            "{} report (dimension {}, time coefficient {}, policy {})",
            report.command, report.dimension, report.time_coefficient, report.policy
        );
        println!("vacuum residual: {}", report.vacuum_residual.infix);
        for check in &report.checks {
            println!(
                "  {} {}",
                if check.pass { "PASS" } else { "FAIL" },
                check.name
            );
        }
        return if report.all_checks_pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILURE
        };
    }
    if let Ok(report) = serde_json::from_str::<VerifyReport>(&text) {
        println!("{} suite report", report.suite);
        print_verify_rows(&report);
        return if report.overall_pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILURE
        };
    }
    eprintln!("error: {} is not a recognised report", input.display());
    EXIT_USAGE
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), ()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {}", path.display(), e);
        }),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}
