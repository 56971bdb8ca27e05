use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{commands, Oversample, RunConfig};
use crate::baselines::Baseline;
use crate::detector::Calibration;
use crate::error::{IdsError, Result};

#[derive(Debug, Parser)]
#[command(name = "hierids", version, about = "Hierarchical intrusion detection on NSL-KDD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Histograms, correlations, scatter pairs and constant features
    Explore(CommonArgs),
    /// Train and calibrate the stage-one autoencoder
    TrainBinary(CommonArgs),
    /// Train the stage-two attack classifier(s)
    TrainMulticlass(CommonArgs),
    /// Fit and score the supervised binary baselines
    Baselines(CommonArgs),
    /// Run both stages on the test file with saved models
    Evaluate(CommonArgs),
    /// train-binary, train-multiclass and evaluate in one go
    Pipeline(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training file in KDD format (KDDTrain+.txt)
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test file in KDD format (KDDTest+.txt)
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random component
    #[arg(long)]
    pub seed: Option<u64>,
    /// Label-to-category CSV (defaults to the built-in table)
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// quantile:<q> or labeled-f1
    #[arg(long)]
    pub calibration: Option<String>,
    /// on, off or both
    #[arg(long)]
    pub oversample: Option<String>,
    /// Comma-separated baseline names
    #[arg(long, value_delimiter = ',')]
    pub baselines: Option<Vec<String>>,
    /// Override any config field: dotted.path=<json>, e.g. detector.train.max_epochs=20
    #[arg(long = "set", value_name = "PATH=JSON")]
    pub set: Vec<String>,
    /// Only log warnings and errors
    #[arg(short, long)]
    pub quiet: bool,
}

fn apply_set(value: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| IdsError::Config(format!("--set expects PATH=JSON, got '{assignment}'")))?;
    let new: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut slot = value;
    for key in path.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|o| o.get_mut(key))
            .ok_or_else(|| IdsError::Config(format!("--set: unknown config field '{path}'")))?;
    }
    *slot = new;
    Ok(())
}

impl CommonArgs {
    /// Defaults, then the config file, then `--set`, then typed flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if !self.set.is_empty() {
            let mut v = serde_json::to_value(&cfg)?;
            for s in &self.set {
                apply_set(&mut v, s)?;
            }
            cfg = serde_json::from_value(v).map_err(|e| IdsError::Config(format!("--set: {e}")))?;
        }
        if let Some(p) = &self.train {
            cfg.train = Some(p.clone());
        }
        if let Some(p) = &self.test {
            cfg.test = Some(p.clone());
        }
        if let Some(p) = &self.out {
            cfg.out = p.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.taxonomy {
            cfg.taxonomy = Some(p.clone());
        }
        if let Some(c) = &self.calibration {
            cfg.calibration = c.parse::<Calibration>()?;
        }
        if let Some(o) = &self.oversample {
            cfg.oversample = o.parse::<Oversample>()?;
        }
        if let Some(names) = &self.baselines {
            cfg.baselines = names.iter().map(|n| n.parse::<Baseline>()).collect::<Result<_>>()?;
        }
        Ok(cfg)
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

fn dispatch(cmd: &Command) -> Result<()> {
    let args = match cmd {
        Command::Explore(a)
        | Command::TrainBinary(a)
        | Command::TrainMulticlass(a)
        | Command::Baselines(a)
        | Command::Evaluate(a)
        | Command::Pipeline(a) => a,
    };
    init_logging(args.quiet);
    let cfg = args.resolve()?;
    match cmd {
        Command::Explore(_) => commands::cmd_explore(&cfg).map(drop),
        Command::TrainBinary(_) => commands::cmd_train_binary(&cfg).map(drop),
        Command::TrainMulticlass(_) => commands::cmd_train_multiclass(&cfg).map(drop),
        Command::Baselines(_) => commands::cmd_baselines(&cfg).map(drop),
        Command::Evaluate(_) => commands::cmd_evaluate(&cfg).map(drop),
        Command::Pipeline(_) => commands::cmd_pipeline(&cfg).map(drop),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 success, 1 internal failure,
/// 2 usage or configuration error, 3 data validation error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
