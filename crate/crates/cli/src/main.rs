use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use double_layer_cli::commands::{self, Context};
use double_layer_cli::config::RunConfig;
use double_layer_cli::output::Format;
use double_layer_cli::CliError;

#[derive(Parser)]
#[command(name = "dlayer", version, about = "Double-layer scattering, bound ladders and squeezed limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Resonance / eigenvalue tolerance, overriding the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// a(k), b(k), |T|², |R|² on a k-grid.
    Scatter,
    /// Bound ladders along an ε-sweep with convergence classification.
    Boundstates,
    /// Region, resonance residual, θ, α and squeezed κ of a family.
    Resonance,
    /// φ(x) for a scattering or bound state.
    Wavefunction,
    /// δ′ pairing ⟨V_ε|φ⟩ against its distributional limit.
    Deltaprime,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--tol must be positive, got {t}")));
        }
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let ctx = Context { format: cli.format, tol: cli.tol };
    let out = match cli.command {
        Command::Scatter => commands::scatter(&cfg, &ctx)?,
        Command::Boundstates => commands::boundstates(&cfg, &ctx)?,
        Command::Resonance => commands::resonance(&cfg, &ctx)?,
        Command::Wavefunction => commands::wavefunction(&cfg, &ctx)?,
        Command::Deltaprime => commands::deltaprime(&cfg, &ctx)?,
    };
    out.write_all(&cli.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
