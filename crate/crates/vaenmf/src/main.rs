use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use vaenmf::cli::{cmd_enhance, cmd_eval, cmd_synth, cmd_train};

#[derive(Parser)]
#[command(
    name = "vaenmf",
    version,
    about = "Semi-supervised speech enhancement: VAE speech prior + NMF noise model"
)]
struct Cli {
    /// Override every configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Utterance-level parallelism for eval (1 keeps runs exactly ordered).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the speech prior on a directory of clean WAV files.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enhance a noisy WAV file.
    Enhance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional per-iteration diagnostics CSV.
        #[arg(long)]
        diag: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the synthetic-mixture SDR experiment.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Write synthetic speech/noise/mixture WAVs.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let result = match &cli.command {
        Command::Train {
            corpus,
            config,
            out,
        } => cmd_train(corpus, config, out, cli.seed),
        Command::Enhance {
            model,
            input,
            out,
            diag,
            config,
        } => cmd_enhance(model, input, out, diag.as_deref(), config.as_deref(), cli.seed),
        Command::Eval {
            model,
            config,
            report,
        } => cmd_eval(model, config, report, cli.seed, cli.jobs),
        Command::Synth { config, out } => cmd_synth(config, out, cli.seed),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
