use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jamdet::config::{PathsSection, RunConfig};
use jamdet::nn::ModelKind;
use jamdet::pipeline::SweepAxis;
use jamdet::sim::DatasetMode;

mod commands;

#[derive(Parser)]
#[command(name = "jamdet", version, about = "Jammer detection for ISAC radar with variational autoencoders")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML); omitted keys take the reference values.
    #[arg(long, global = true, conflicts_with = "desk_scale")]
    config: Option<PathBuf>,
    /// Reduced setup that trains in seconds rather than hours.
    #[arg(long, global = true)]
    desk_scale: bool,
    /// Root for datasets/, checkpoints/ and out/; overrides the config paths.
    #[arg(long, global = true, env = "JAMDET_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Override the number of training epochs for every model.
    #[arg(long, global = true)]
    epochs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the resolved configuration as TOML.
    Config,
    /// Generate a dataset file.
    Gen {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Number of observations (default: configured train/test count).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Signal-to-jammer ratio in dB for test sets.
        #[arg(long)]
        sjr: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train a detector on a jammer-free dataset.
    Train {
        #[arg(long, default_value = "vae")]
        model: ModelKind,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        latent_dim: Option<usize>,
        /// Checkpoint path.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score a test set and report the calibrated operating point.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Training dataset whose validation tail calibrates the threshold.
        #[arg(long)]
        calibration: PathBuf,
        /// Target false-alarm rate (default: first configured value).
        #[arg(long)]
        pfa: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train and evaluate across the SJR or latent-dimension axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values replacing the configured list.
        #[arg(long)]
        values: Option<String>,
        /// Models for the SJR axis.
        #[arg(long, value_delimiter = ',', default_value = "vae,ae")]
        models: Vec<ModelKind>,
        /// Training dataset; generated from the configuration when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarise a dataset or checkpoint file.
    Inspect { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Train,
    Test,
}

impl From<Mode> for DatasetMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Train => DatasetMode::Train,
            Mode::Test => DatasetMode::Test,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Sjr,
    LatentDim,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Sjr => SweepAxis::Sjr,
            Axis::LatentDim => SweepAxis::LatentDim,
        }
    }
}

fn resolve(g: &Global) -> jamdet::Result<RunConfig> {
    let mut cfg = match (&g.config, g.desk_scale) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, true) => RunConfig::desk_scale(),
        (None, false) => RunConfig::default(),
    };
    if let Some(dir) = &g.out_dir {
        cfg.paths = PathsSection::under(dir);
    }
    if let Some(epochs) = g.epochs {
        cfg.training.vae.train.epochs = epochs;
        cfg.training.ae.train.epochs = epochs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> jamdet::Result<()> {
    let cfg = resolve(&cli.global)?;
    match cli.command {
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Gen { mode, n, seed, sjr, output } => commands::gen(&cfg, mode.into(), n, seed, sjr, output),
        Command::Train { model, dataset, latent_dim, output } => {
            commands::train(&cfg, model, &dataset, latent_dim, output)
        }
        Command::Eval { checkpoint, dataset, calibration, pfa, output } => {
            commands::eval(&cfg, &checkpoint, &dataset, &calibration, pfa, output)
        }
        Command::Sweep { axis, values, models, dataset, output } => {
            commands::sweep(cfg, axis.into(), values.as_deref(), &models, dataset, output)
        }
        Command::Inspect { path } => commands::inspect(&path),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
