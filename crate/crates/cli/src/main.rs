//! `nodeclass` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nodeclass_cli::{
    cmd_evaluate, cmd_experiment, cmd_features, cmd_stats, CliError, ExperimentConfig, ModelChoice,
};

#[derive(Parser)]
#[command(
    name = "nodeclass",
    version,
    about = "Node classification experiments on citation graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Dataset prefix, expanded to PREFIX.content and PREFIX.cites.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Restrict to the largest weakly connected component.
    #[arg(long, global = true)]
    lcc: bool,
    /// Skip the size-4 motif counts.
    #[arg(long, global = true)]
    no_motif4: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extract topological measures for every node.
    Features,
    /// Class association tests, class profiles and neighbor class correlation.
    Stats,
    /// Accuracy sweep over train fractions and models.
    Experiment {
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        #[arg(long)]
        splits: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<ModelChoice>>,
    },
    /// A single model at a single train fraction.
    Evaluate {
        #[arg(long)]
        model: Option<ModelChoice>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        splits: Option<usize>,
    },
}

fn resolve(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let c = &cli.common;
    let mut config = match &c.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(dir) = &c.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(prefix) = &c.dataset {
        config.dataset.prefix = Some(prefix.clone());
        config.dataset.content = None;
        config.dataset.cites = None;
    }
    config.dataset.lcc |= c.lcc;
    if c.no_motif4 {
        config.features.include_motif4 = false;
    }
    match &cli.command {
        Command::Experiment {
            fractions,
            splits,
            models,
        } => {
            let sweep = &mut config.experiment;
            if let Some(f) = fractions {
                sweep.fractions = f.clone();
            }
            if let Some(n) = splits {
                sweep.n_splits = *n;
            }
            if let Some(m) = models {
                sweep.models = m.clone();
                let run = sweep.models.clone();
                sweep
                    .comparisons
                    .retain(|pair| pair.iter().all(|x| run.contains(x)));
            }
        }
        Command::Evaluate {
            model,
            fraction,
            splits,
        } => {
            let ev = &mut config.evaluate;
            ev.model = model.unwrap_or(ev.model);
            ev.fraction = fraction.unwrap_or(ev.fraction);
            ev.n_splits = splits.unwrap_or(ev.n_splits);
        }
        Command::Features | Command::Stats => {}
    }
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = resolve(&cli)?;
    let (name, out) = match cli.command {
        Command::Features => ("features", cmd_features(&config)),
        Command::Stats => ("stats", cmd_stats(&config)),
        Command::Experiment { .. } => ("experiment", cmd_experiment(&config)),
        Command::Evaluate { .. } => ("evaluate", cmd_evaluate(&config)),
    };
    let out = out.with_context(|| format!("{name} failed"))?;
    for f in &out.files {
        println!("{}", out.dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                CliError::EXIT_USAGE
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<CliError>()
                .map_or(CliError::EXIT_USAGE, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
