use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exactborn::born::BornOrder;
use exactborn_cli::commands::{cmd_born, cmd_profile, cmd_sweep, cmd_transfer, cmd_verify, Context};
use exactborn_cli::config::RunConfig;
use exactborn_cli::output::OutputDir;

/// Verification suites and amplitude exports for media with an exact first Born approximation.
#[derive(Debug, Parser)]
#[command(name = "exactborn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured suites and write report.json.
    Verify(Common),
    /// Export Born amplitudes over a sphere of detectors.
    Born(Common),
    /// Export eta along x and the support report.
    Profile(Common),
    /// Export amplitudes from the transfer route.
    Transfer(Common),
    /// Invisibility across a list of wavenumbers.
    Sweep(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration; default ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Born order: 1 or 2.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: u8,
    /// Treat the compliance-dependent checks as required.
    #[arg(long)]
    expect_compliant: bool,
    /// Seed for randomized checks (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Physical alpha for rescaling lengths on output.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn setup(args: &Common) -> Result<(Context, OutputDir), String> {
    let mut config = RunConfig::load(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(format!("--alpha must be positive, got {}", args.alpha));
    }
    let base = args.config.parent();
    let medium = config.build_medium(base).map_err(|e| format!("medium: {e}"))?;
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = OutputDir::acquire(&dir).map_err(|e| e.to_string())?;
    out.write_text("config.json", &config.to_json())
        .map_err(|e| e.to_string())?;
    let order = BornOrder::from_number(args.order).map_err(|e| e.to_string())?;
    let ctx = Context {
        config,
        medium,
        expect_compliant: args.expect_compliant,
        order,
        alpha_out: args.alpha,
    };
    Ok((ctx, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&Common, fn(&Context, &OutputDir) -> exactborn::Result<bool>) = match &cli.command {
        Command::Verify(a) => (a, cmd_verify),
        Command::Born(a) => (a, cmd_born),
        Command::Profile(a) => (a, cmd_profile),
        Command::Transfer(a) => (a, cmd_transfer),
        Command::Sweep(a) => (a, cmd_sweep),
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let (ctx, out) = match setup(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&ctx, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
