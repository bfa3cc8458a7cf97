use std::path::PathBuf;
use std::process::ExitCode;

use aircont_cli::validate::Faults;
use aircont_cli::{run, CliError, Command, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Stability regions, control MSE sweeps and closed-loop trajectories for
/// over-the-air versus multi-hop wireless control.
#[derive(Parser)]
#[command(name = "aircont", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep (δ, τ/δ) and write the stability-region CSV.
    Stability(Common),
    /// Average control MSE over random channels and gains.
    MseSweep(Common),
    /// Ideal, over-the-air and multi-hop closed-loop trajectories.
    Simulate(Common),
    /// Check the numerical kernels against independent oracles.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Scale the closed-form over-the-air MSE by (1 + F) before checking.
        #[arg(long, value_name = "F", hide = true)]
        perturb_mse_air: Option<f64>,
    },
    /// Print the scaling factors both schemes pick for the [sim] channel.
    ScalingDebug(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults are used for anything missing.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; its manifest goes to <OUT>.manifest.toml.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (does not affect results).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(path.display().to_string(), e))?;
            RunConfig::from_toml(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    Ok(match common.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, faults) = match &cli.command {
        Cmd::Stability(c) => (Command::Stability, c, Faults::default()),
        Cmd::MseSweep(c) => (Command::MseSweep, c, Faults::default()),
        Cmd::Simulate(c) => (Command::Simulate, c, Faults::default()),
        Cmd::ScalingDebug(c) => (Command::ScalingDebug, c, Faults::default()),
        Cmd::Validate {
            common,
            perturb_mse_air,
        } => (
            Command::Validate,
            common,
            Faults {
                mse_air_scale: perturb_mse_air.unwrap_or(0.0),
            },
        ),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = load(common).and_then(|cfg| {
        let stdout = std::io::stdout();
        run(
            command,
            &cfg,
            common.out.as_deref(),
            &faults,
            &mut stdout.lock(),
        )
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
