//! Flat experiment configuration shared by the subcommands and `run --config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Vflow,
    Laplace,
    Gzero,
    Simulate,
    Ou,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Vflow => "vflow",
            Command::Laplace => "laplace",
            Command::Gzero => "gzero",
            Command::Simulate => "simulate",
            Command::Ou => "ou",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Command::Simulate | Command::Ou)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub psi: Option<String>,
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default, rename = "T")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub dump_intervals: bool,
    /// Box-counting cell sizes run over `2^-grid_from ..= 2^-grid_to`.
    #[serde(default)]
    pub grid_from: Option<i32>,
    #[serde(default)]
    pub grid_to: Option<i32>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            psi: None,
            phi: None,
            horizon: None,
            eps: None,
            reps: None,
            seed: None,
            q: Vec::new(),
            t: Vec::new(),
            lambda: None,
            alpha: None,
            out: None,
            format: None,
            dump_intervals: false,
            grid_from: None,
            grid_to: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Vflow | Command::Laplace | Command::Gzero | Command::Simulate => Format::Csv,
            Command::Classify | Command::Ou => Format::Json,
        })
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Usage(format!("{} needs --{name}", self.command.name())))
    }

    pub fn psi_spec(&self) -> Result<&str, CliError> {
        self.psi.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs --psi", self.command.name())))
    }

    pub fn phi_spec(&self) -> Result<&str, CliError> {
        self.phi.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs --phi", self.command.name())))
    }

    pub fn horizon(&self) -> Result<f64, CliError> {
        self.need(self.horizon, "T")
    }

    pub fn eps(&self) -> Result<f64, CliError> {
        self.need(self.eps, "eps")
    }

    pub fn reps(&self) -> Result<usize, CliError> {
        self.need(self.reps, "reps")
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.need(self.seed, "seed")
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.need(self.alpha, "alpha")
    }

    /// Checks that do not need the mechanisms parsed.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.command {
            Command::Classify => {
                self.psi_spec()?;
                self.phi_spec()?;
            }
            Command::Vflow => {
                self.psi_spec()?;
                nonempty(&self.t, "t")?;
            }
            Command::Laplace => {
                self.psi_spec()?;
                self.phi_spec()?;
                nonempty(&self.q, "q")?;
            }
            Command::Gzero => {
                self.psi_spec()?;
                self.phi_spec()?;
                nonempty(&self.t, "t")?;
            }
            Command::Simulate => {
                self.psi_spec()?;
                self.phi_spec()?;
            }
            Command::Ou => {
                self.alpha()?;
            }
        }
        if self.command.is_stochastic() {
            self.seed()?;
            let (t, eps) = (self.horizon()?, self.eps()?);
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("T={t} must be positive")));
            }
            if !(eps > 0.0 && eps <= t / 10.0) {
                return Err(CliError::Usage(format!("eps={eps} must lie in (0, T/10]")));
            }
            if self.reps()? < 1 {
                return Err(CliError::Usage("reps must be at least 1".into()));
            }
        }
        Ok(())
    }
}

fn nonempty(v: &[f64], name: &str) -> Result<(), CliError> {
    if v.is_empty() {
        Err(CliError::Usage(format!("--{name} needs at least one value")))
    } else {
        Ok(())
    }
}
