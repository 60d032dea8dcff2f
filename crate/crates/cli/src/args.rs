//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Command, ExperimentConfig, Format};

#[derive(Debug, Parser)]
#[command(name = "cbi", version, about = "Zero sets of CBI processes: classification, flows, Laplace exponents, cutout simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (default: $CBI_REPORT_DIR/<command>.<ext>, else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct Pair {
    /// Branching mechanism, e.g. `stable:d=1,alpha=2`.
    #[arg(long)]
    pub psi: String,
    /// Immigration mechanism, e.g. `stable:d=0.5,beta=1`.
    #[arg(long)]
    pub phi: String,
}

#[derive(Debug, Args)]
pub struct Experiment {
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    /// Largest box-counting cell is 2^-grid_from.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_from: Option<i32>,
    /// Smallest box-counting cell is 2^-grid_to.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_to: Option<i32>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Classify the state 0 (polar, transient, recurrent; heavy or light).
    Classify {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        output: Output,
    },
    /// Table of v_t and v_t(lambda).
    Vflow {
        #[arg(long)]
        psi: String,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Laplace exponent L(q) of the subordinator whose range is the zero set.
    Laplace {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Density and tail of the last zero.
    Gzero {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate the zero set as a random cutout.
    Simulate {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        experiment: Experiment,
        /// Also write the intervals of replicate 0.
        #[arg(long)]
        dump_intervals: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Zero set of the stable Ornstein-Uhlenbeck process.
    Ou {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        experiment: Experiment,
        #[command(flatten)]
        output: Output,
    },
    /// Run the experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn with_output(mut c: ExperimentConfig, o: Output) -> ExperimentConfig {
    c.out = o.out;
    c.format = o.format;
    c
}

fn with_pair(mut c: ExperimentConfig, p: Pair) -> ExperimentConfig {
    c.psi = Some(p.psi);
    c.phi = Some(p.phi);
    c
}

fn with_experiment(mut c: ExperimentConfig, e: Experiment) -> ExperimentConfig {
    c.horizon = Some(e.horizon);
    c.eps = Some(e.eps);
    c.reps = Some(e.reps);
    c.seed = Some(e.seed);
    c.grid_from = e.grid_from;
    c.grid_to = e.grid_to;
    c
}

impl Sub {
    /// The equivalent config, or the config file to load.
    pub fn into_config(self) -> Result<ExperimentConfig, PathBuf> {
        Ok(match self {
            Sub::Classify { pair, output } => with_output(with_pair(ExperimentConfig::new(Command::Classify), pair), output),
            Sub::Vflow { psi, t, lambda, output } => {
                let mut c = ExperimentConfig::new(Command::Vflow);
                c.psi = Some(psi);
                c.t = t;
                c.lambda = lambda;
                with_output(c, output)
            }
            Sub::Laplace { pair, q, output } => {
                let mut c = with_pair(ExperimentConfig::new(Command::Laplace), pair);
                c.q = q;
                with_output(c, output)
            }
            Sub::Gzero { pair, t, output } => {
                let mut c = with_pair(ExperimentConfig::new(Command::Gzero), pair);
                c.t = t;
                with_output(c, output)
            }
            Sub::Simulate { pair, experiment, dump_intervals, output } => {
                let mut c = with_experiment(with_pair(ExperimentConfig::new(Command::Simulate), pair), experiment);
                c.dump_intervals = dump_intervals;
                with_output(c, output)
            }
            Sub::Ou { alpha, experiment, output } => {
                let mut c = with_experiment(ExperimentConfig::new(Command::Ou), experiment);
                c.alpha = Some(alpha);
                with_output(c, output)
            }
            Sub::Run { config } => return Err(config),
        })
    }
}
