use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qkswap_cli::commands::{self, CacheAction, FeaturesOutcome, RunOptions};
use qkswap_cli::config;
use qkswap_cli::report::tables_text;
use qkswap_cli::synth::SynthSpec;
use qkswap_cli::CliResult;

#[derive(Parser)]
#[command(name = "qkswap", version, about = "Kernel-swap experiments for audio anti-spoofing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract mel-spectrogram features for every manifest entry.
    Features {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the cross-validated protocol and write the results directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the fold seed and the shared PCA seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Comma-separated model names; default is every configured model.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic two-class feature artifact and manifest.
    Synth {
        #[arg(long, default_value_t = 100)]
        n_per_class: usize,
        /// Distance between class means, in standard deviations.
        #[arg(long)]
        separation: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-derive and rewrite the tables of a completed run.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect or clear the Gram-matrix cache.
    Cache {
        #[arg(value_enum)]
        action: CacheCmd,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cache directory; takes precedence over --config.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheCmd {
    List,
    Verify,
    Clear,
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Features { config, jobs } => {
            let cfg = config::load(&config)?;
            match commands::features(&cfg, jobs.or(cfg.config.jobs))? {
                FeaturesOutcome::CacheHit(p) => println!("cache hit: {}", p.display()),
                FeaturesOutcome::Wrote { path, rows, cols } => {
                    println!("wrote {rows} x {cols} features to {}", path.display())
                }
            }
        }
        Command::Run { config, seed, jobs, models, out } => {
            let cfg = config::load(&config)?;
            let opts = RunOptions { seed, jobs, models, out };
            let (dir, record) = commands::run(cfg, &opts)?;
            print!("{}", tables_text(&record.summary));
            println!("\nresults written to {}", dir.display());
        }
        Command::Synth { n_per_class, separation, seed, dim, out } => {
            let spec = SynthSpec { n_per_class, separation, seed, dim };
            let art = commands::synth(&spec, &out)?;
            println!("wrote {} synthetic rows ({dim} features) to {}", art.set.len(), out.display());
        }
        Command::Report { out } => {
            let record = commands::report(&out)?;
            print!("{}", tables_text(&record.summary));
        }
        Command::Cache { action, config, out, dir } => {
            let dir = commands::cache_dir(dir.as_deref(), config.as_deref(), out.as_deref())?;
            let action = match action {
                CacheCmd::List => CacheAction::List,
                CacheCmd::Verify => CacheAction::Verify,
                CacheCmd::Clear => CacheAction::Clear,
            };
            for line in commands::cache(&dir, action)? {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
