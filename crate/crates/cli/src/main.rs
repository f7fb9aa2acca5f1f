use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hctps_cli::{cmd_run, verify, FunctionSelection, Mode, RunError, RunManifest, VerifyOptions};
use hctps_core::{SubcubeTable, EVALS_PER_DIM};
use hctps_service::Service;

#[derive(Parser)]
#[command(name = "hctps", version, about = "Two-phase human-steered GA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run GA baselines or scripted two-phase schedules and write result tables.
    Run(RunArgs),
    /// Run the verification suite and print one line per criterion.
    Verify(VerifyArgs),
    /// Serve the experiment API over HTTP.
    Serve(ServeArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Function id (F1..F14) or `all`.
    #[arg(long, default_value = "all")]
    function: FunctionSelection,
    #[arg(long, default_value_t = 30)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = EVALS_PER_DIM)]
    budget_per_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::HctpsFixture)]
    mode: Mode,
    /// Octant (1..=8) for `--mode hctps-custom`.
    #[arg(long)]
    octant: Option<usize>,
    /// Scale exponent m, shrinking the subcube by (1/2)^m, for `--mode hctps-custom`.
    #[arg(long = "scale-exp")]
    scale_exp: Option<u32>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Read every setting from a manifest file instead of the flags above.
    #[arg(long, conflicts_with_all = ["function", "dim", "runs", "budget_per_dim", "seed", "mode", "octant", "scale_exp", "out"])]
    manifest: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Directory with replacement `functions.json` / `subcubes.json` fixtures.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long, default_value_t = EVALS_PER_DIM)]
    budget_per_dim: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Only run the named criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory for experiment files.
    #[arg(long, default_value = "out/experiments")]
    store: PathBuf,
}

fn run(args: RunArgs) -> Result<(), RunError> {
    let manifest = match args.manifest {
        Some(path) => RunManifest::load(&path)?,
        None => RunManifest {
            function: args.function,
            dim: args.dim,
            n_runs: args.runs,
            seed: args.seed,
            budget_per_dim: args.budget_per_dim,
            mode: args.mode,
            octant: args.octant,
            scale_exponent: args.scale_exp,
            out: args.out,
        },
    };
    let output = cmd_run(&manifest, &SubcubeTable::builtin())?;
    for path in &output.experiment_files {
        println!("{}", path.display());
    }
    print!("{}", hctps_cli::tables::to_markdown(&output.rows));
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Verify(args) => {
            let unknown: Vec<&String> = args.only.iter().filter(|n| !hctps_cli::verify::CRITERIA.contains(&n.as_str())).collect();
            if !unknown.is_empty() {
                eprintln!("error: unknown criteria {unknown:?}; known: {}", hctps_cli::verify::CRITERIA.join(", "));
                return ExitCode::from(2);
            }
            let opts = VerifyOptions {
                fixtures_dir: args.fixtures,
                budget_per_dim: args.budget_per_dim,
                seed: args.seed,
                runs: args.runs,
                only: args.only,
                ..VerifyOptions::default()
            };
            let results = verify(&opts);
            for c in &results {
                println!("{c}");
            }
            let failed = results.iter().filter(|c| !c.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Serve(args) => {
            let service = match Service::open(&args.store) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(3);
                }
            };
            let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
            match rt.block_on(hctps_service::serve(service, args.addr)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
