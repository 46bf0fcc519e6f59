use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blocknorm_cli::config::{JobKind, Overrides};
use blocknorm_cli::report::{Tool, ValidationReport};
use blocknorm_cli::{execute, load, EXIT_CONFIG, EXIT_INTERNAL};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blocknorm", version, about = "Block summing norms of multilinear operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every job in the config.
    Run(Common),
    /// Run only `norm` jobs.
    Norm(Common),
    /// Run only `summing-norm` jobs.
    SummingNorm(Common),
    /// Run only `check` jobs.
    Check(Common),
    /// Run only `witness` jobs.
    Witness(Common),
    /// Validate the config and print diagnostics.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Job config (JSON).
    config: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for jobs without their own.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "BLOCKNORM_SEED", hide = true)]
    env_seed: Option<u64>,
    /// Random restarts per search.
    #[arg(long)]
    budget: Option<usize>,
    /// Tolerance for identities [default: 1e-12].
    #[arg(long)]
    tol_identity: Option<f64>,
    /// Tolerance for inequality chains [default: 1e-9].
    #[arg(long)]
    tol_chain: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

fn write_out(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (only, args, validate_only) = match cli.command {
        Command::Run(a) => (None, a, false),
        Command::Norm(a) => (Some(JobKind::Norm), a, false),
        Command::SummingNorm(a) => (Some(JobKind::SummingNorm), a, false),
        Command::Check(a) => (Some(JobKind::Check), a, false),
        Command::Witness(a) => (Some(JobKind::Witness), a, false),
        Command::Validate(a) => (None, a, true),
    };
    let overrides = Overrides {
        seed: args.seed,
        env_seed: args.env_seed,
        budget: args.budget,
        tol_identity: args.tol_identity,
        tol_chain: args.tol_chain,
    };
    let loaded = load(&args.config, &overrides);
    if validate_only {
        let diagnostics = loaded.as_ref().err().cloned().unwrap_or_default();
        let rep = ValidationReport { tool: Tool::current(), valid: diagnostics.is_empty(), diagnostics };
        let text = serde_json::to_string_pretty(&rep).expect("report serializes") + "\n";
        if let Err(e) = write_out(args.out.as_deref(), &text) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL as u8);
        }
        return ExitCode::from(if rep.valid { 0 } else { EXIT_CONFIG as u8 });
    }
    let (cfg, model) = match loaded {
        Ok(x) => x,
        Err(diags) => {
            for d in diags {
                eprintln!("error: {d}");
            }
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let report = execute(&cfg, &model, only, args.jobs);
    for r in report.results.iter().filter(|r| r.error.is_some()) {
        eprintln!("error: job {}: {}", r.name, r.error.as_deref().unwrap_or_default());
    }
    if let Err(e) = write_out(args.out.as_deref(), &report.to_json()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INTERNAL as u8);
    }
    ExitCode::from(report.exit_code() as u8)
}
