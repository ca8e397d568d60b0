//! Command-line front end.
//!
//! Every run writes its tables and a `summary.json` (carrying the seed and
//! the fully resolved configuration) to the output directory. Failures print
//! one JSON line `{"error": ..., "kind": ...}` to stderr and exit nonzero.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbs::io::AnalysisConfig;
use sbs::regression::CenteringFamily;

#[derive(Parser)]
#[command(name = "sbs", version, about = "Bayesian nonparametric competing-risks analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical estimators and the SBS posterior predictive for pooled data.
    FitNonparametric {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Posterior sampling of the regression model and predictive curves.
    FitRegression {
        #[arg(long)]
        data: PathBuf,
        /// Fit the centering model alone.
        #[arg(long)]
        parametric: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Simulation study of Kolmogorov-Smirnov distances.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Patient blocks drawn from the reinforced urn process, with a trace.
    UrnDemo {
        #[command(flatten)]
        common: Common,
    },
    /// Prior concentration of the regression model around its centering.
    ConcentrationCurve {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reinforcement mass.
    #[arg(long)]
    m: Option<f64>,
    /// Centering family: weibull or lognormal.
    #[arg(long)]
    model: Option<CenteringFamily>,
    /// Number of time bins of the subcommand's grid.
    #[arg(long)]
    bins: Option<usize>,
}

impl Common {
    fn load(&self) -> sbs::Result<AnalysisConfig> {
        let mut config = match &self.config {
            Some(path) => AnalysisConfig::from_path(path)?,
            None => AnalysisConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        if let Some(m) = self.m {
            config.m = m;
        }
        if let Some(model) = self.model {
            config.model = model;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> sbs::Result<()> {
    match cli.command {
        Command::FitNonparametric { data, common } => {
            let mut config = common.load()?;
            if let Some(bins) = common.bins {
                config.grid.bins = Some(bins);
            }
            commands::fit_nonparametric(&data, config.resolve()?)
        }
        Command::FitRegression { data, parametric, common } => {
            let mut config = common.load()?;
            if let Some(bins) = common.bins {
                config.grid.bins = Some(bins);
            }
            config.parametric |= parametric;
            commands::fit_regression(&data, config.resolve()?)
        }
        Command::Simulate { common } => {
            let mut config = common.load()?;
            if let Some(bins) = common.bins {
                config.simulation.bins = bins;
            }
            if let Some(seed) = common.seed {
                config.simulation.seed = seed;
            }
            commands::simulate(config.resolve()?)
        }
        Command::UrnDemo { common } => {
            let mut config = common.load()?;
            if let Some(bins) = common.bins {
                config.urn.bins = bins;
            }
            commands::urn_demo(config.resolve()?)
        }
        Command::ConcentrationCurve { common } => {
            let mut config = common.load()?;
            if let Some(bins) = common.bins {
                config.concentration.bins = bins;
            }
            commands::concentration_curve(config.resolve()?)
        }
    }
}

fn report(message: &str, kind: &str) {
    let line = serde_json::json!({ "error": message.replace('\n', " ").trim(), "kind": kind });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&e.to_string(), "usage");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e.to_string(), e.kind());
            ExitCode::FAILURE
        }
    }
}
