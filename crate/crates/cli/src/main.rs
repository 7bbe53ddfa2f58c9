use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scorepath::config::{self, ScoreSource};
use scorepath::run;

/// Score-driven path following: rendering, training, verification,
/// certification, simulation, and sweeps.
#[derive(Parser)]
#[command(name = "scorepath", version, about)]
struct Cli {
    /// Override every seed in the loaded config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, or a `.json`/`.csv` file path for single-file
    /// commands.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render depth scans at configured poses.
    Render(Common),
    /// Generate a labeled scan dataset CSV.
    Dataset(Common),
    /// Train the linear SVM score model.
    Train(Common),
    /// Check the score conditions on a grid and plot the partial fields.
    Verify(Common),
    /// Solve the score's zero curve and slope bounds.
    Curve(Common),
    /// Build a stability certificate.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Trained model JSON; overrides the config's score source.
        #[arg(long)]
        score: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Simulate one closed-loop trajectory.
    Simulate(Common),
    /// Run the ratio sweep and export trajectories, summary, and plots.
    Sweep(Common),
}

fn dispatch(cli: Cli) -> scorepath::CliResult<()> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Render(c) => {
            let mut cfg: config::RenderConfig = config::load_config(c.config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            run::cmd_render(&cfg, &c.out)
        }
        Cmd::Dataset(c) => {
            let mut cfg: config::DatasetConfig = config::load_config(c.config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            run::cmd_dataset(&cfg, &c.out)
        }
        Cmd::Train(c) => {
            let mut cfg: config::TrainConfig = config::load_config(c.config.as_deref())?;
            if let Some(s) = seed {
                cfg.data.seed = s;
                cfg.hyper.seed = s;
            }
            run::cmd_train(&cfg, &c.out)
        }
        Cmd::Verify(c) => {
            let cfg: config::VerifyCliConfig = config::load_config(c.config.as_deref())?;
            run::cmd_verify(&cfg, &c.out)
        }
        Cmd::Curve(c) => {
            let cfg: config::CurveCliConfig = config::load_config(c.config.as_deref())?;
            run::cmd_curve(&cfg, &c.out)
        }
        Cmd::Certify { common, score, gamma, alpha, beta } => {
            let mut cfg: config::CertifyCliConfig = config::load_config(common.config.as_deref())?;
            if let Some(path) = score {
                cfg.score = ScoreSource::Model { path };
            }
            if let Some(g) = gamma {
                cfg.gamma = g;
            }
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(b) = beta {
                cfg.beta = b;
            }
            if let Some(s) = seed {
                cfg.certify.seed = s;
            }
            run::cmd_certify(&cfg, &common.out)
        }
        Cmd::Simulate(c) => {
            let cfg: config::SimulateConfig = config::load_config(c.config.as_deref())?;
            run::cmd_simulate(&cfg, &c.out)
        }
        Cmd::Sweep(c) => {
            let mut cfg: config::SweepCliConfig = config::load_config(c.config.as_deref())?;
            if let Some(s) = seed {
                cfg.sweep.seed = s;
            }
            run::cmd_sweep(&cfg, &c.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
