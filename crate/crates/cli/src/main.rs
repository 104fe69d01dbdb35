use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dci_lab::{config::Config, execute, presets, resolve_threads, Command, Invocation, Result};

#[derive(Parser)]
#[command(
    name = "dci-lab",
    version,
    about = "Distance-weighted class impurity scoring and active-learning simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Score the rows of a query CSV against the dataset
    Score {
        #[command(flatten)]
        common: Common,
        /// Query CSV with the dataset's feature columns
        #[arg(long)]
        queries: Option<PathBuf>,
    },
    /// Evaluate DCI over a regular grid of a 2D dataset
    Grid {
        #[command(flatten)]
        common: Common,
    },
    /// Run active-learning simulations and write learning curves
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Uncertainty-vs-accuracy decile study
    Analyze {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Config file (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named preset; the config file and --set override it
    #[arg(long)]
    preset: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: DCI_LAB_THREADS, then all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Override a config key, e.g. --set dci.alpha=2.0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn invocation(cli: Cli) -> Result<Invocation> {
    let (command, common, queries) = match cli.command {
        Sub::Score { common, queries } => (Command::Score, common, queries),
        Sub::Grid { common } => (Command::Grid, common, None),
        Sub::Simulate { common } => (Command::Simulate, common, None),
        Sub::Analyze { common } => (Command::Analyze, common, None),
    };
    let mut config = match &common.preset {
        Some(name) => presets::preset(name)?,
        None => Config::default(),
    };
    if let Some(path) = &common.config {
        config.merge(&Config::load(path)?);
    }
    for pair in &common.overrides {
        config.set_pair(pair)?;
    }
    if let Some(q) = queries {
        config.set("score.queries", &q.display().to_string())?;
    }
    if let Some(seed) = common.seed {
        config.set("seed", &seed.to_string())?;
    }
    let env = std::env::var("DCI_LAB_THREADS").ok();
    Ok(Invocation {
        command,
        config,
        out: common.out,
        threads: resolve_threads(common.threads, env.as_deref())?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match invocation(cli).and_then(|inv| execute(&inv).map(|m| (inv, m))) {
        Ok((inv, manifest)) => {
            for (_, file) in &manifest.outputs {
                println!("{}", inv.out.join(file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dci-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
