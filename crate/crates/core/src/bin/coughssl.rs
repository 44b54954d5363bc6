use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cough_ssl::pipeline::{run_all, run_stage, PipelineConfig, Stage};
use cough_ssl::synth::{generate, SynthConfig};
use cough_ssl::Error;

#[derive(Parser)]
#[command(name = "coughssl", version, about = "Relabel a crowdsourced cough corpus with expert-model agreement")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Override the training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the TPE budget per model kind.
    #[arg(long)]
    budget: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize, low-pass and resample every recording.
    Preprocess(ConfigArg),
    /// Segment coughs and estimate each recording's SNR.
    Segment(ConfigArg),
    /// Filter recordings and extract per-cough features.
    Features(ConfigArg),
    /// Train one model per eligible expert annotator.
    TrainExperts(ConfigArg),
    /// Propagate pseudo-labels and apply the agreement scheme.
    SslRelabel(ConfigArg),
    /// Train the final model on agreed labels and a baseline on user labels.
    TrainFinal(ConfigArg),
    /// Score both models on the held-out recordings.
    Evaluate(ConfigArg),
    /// PSD, ROC and SHAP reports from cached artifacts.
    Report(ConfigArg),
    /// Every stage in order.
    Run(ConfigArg),
    /// Write a synthetic corpus and a matching config file.
    Synth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600)]
        recordings: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn load(arg: &ConfigArg) -> Result<PipelineConfig, Error> {
    let mut cfg = PipelineConfig::load(&arg.config)?;
    if let Some(s) = arg.seed {
        cfg.training.seed = s;
    }
    if let Some(b) = arg.budget {
        cfg.training.budget = b;
    }
    if let Some(o) = &arg.output_dir {
        cfg.paths.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synth(out: &PathBuf, recordings: usize, seed: u64) -> Result<(), Error> {
    let corpus = generate(&SynthConfig {
        n_recordings: recordings,
        seed,
        ..SynthConfig::default()
    })?;
    corpus.write(out)?;
    let mut cfg = PipelineConfig::new("audio", "metadata.csv", "out");
    cfg.training.budget = 30;
    let path = out.join("config.toml");
    std::fs::write(&path, cfg.to_toml()?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    println!("wrote {recordings} recordings and {}", path.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let (stage, arg) = match &cli.command {
        Command::Synth { out, recordings, seed } => return synth(out, *recordings, *seed),
        Command::Run(arg) => return run_all(&load(arg)?),
        Command::Preprocess(a) => (Stage::Preprocess, a),
        Command::Segment(a) => (Stage::Segment, a),
        Command::Features(a) => (Stage::Features, a),
        Command::TrainExperts(a) => (Stage::TrainExperts, a),
        Command::SslRelabel(a) => (Stage::SslRelabel, a),
        Command::TrainFinal(a) => (Stage::TrainFinal, a),
        Command::Evaluate(a) => (Stage::Evaluate, a),
        Command::Report(a) => (Stage::Report, a),
    };
    run_stage(stage, &load(arg)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
