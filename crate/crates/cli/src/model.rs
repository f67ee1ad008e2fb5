use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mhrev::models::{
    asymmetric_cycle, dhn_label, dhn_sampler, torus_walk, triangle, upward_skip_free,
    winning_streak,
};
use mhrev::{stationary_distribution, ProbabilityVector, StochasticKernel};

use crate::error::{CliError, Result};
use crate::io::{default_states, KernelFile, Kind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Triangle,
    Dhn,
    Ws,
    Skipfree,
    Cycle,
    Torus,
}

/// Where the chain comes from: a kernel file or a builtin model.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Kernel file (JSON, or CSV matrix).
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub model: Option<Model>,

    /// Size parameter: m for dhn and ws.
    #[arg(long, default_value_t = 3)]
    pub m: usize,

    /// Cycle length for cycle and torus.
    #[arg(long, default_value_t = 5)]
    pub n: usize,

    /// Torus dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,

    /// Clockwise probability for cycle and torus.
    #[arg(long, default_value_t = 0.7)]
    pub p: f64,
}

pub struct Chain {
    pub kernel: StochasticKernel,
    pub pi: ProbabilityVector,
    pub states: Vec<String>,
}

impl Source {
    pub fn file(&self) -> Result<KernelFile> {
        match (&self.input, self.model) {
            (Some(path), _) => KernelFile::load(path),
            (None, Some(model)) => {
                let (kernel, states) = self.build(model)?;
                Ok(KernelFile::new(kernel.matrix(), Kind::Stochastic, states))
            }
            (None, None) => Err(CliError::Parse("one of --input or --model is required".into())),
        }
    }

    fn build(&self, model: Model) -> Result<(StochasticKernel, Vec<String>)> {
        let kernel = match model {
            Model::Triangle => triangle(),
            Model::Dhn => dhn_sampler(self.m)?,
            Model::Ws => winning_streak(self.m)?,
            Model::Skipfree => upward_skip_free(),
            Model::Cycle => asymmetric_cycle(self.n, self.p)?,
            Model::Torus => torus_walk(self.n, self.d, self.p)?,
        };
        let states = match model {
            Model::Dhn => (0..kernel.dim()).map(|i| dhn_label(self.m, i).to_string()).collect(),
            Model::Ws | Model::Triangle | Model::Cycle | Model::Torus => {
                (0..kernel.dim()).map(|i| i.to_string()).collect()
            }
            Model::Skipfree => default_states(kernel.dim()),
        };
        Ok((kernel, states))
    }

    pub fn chain(&self) -> Result<Chain> {
        let file = self.file()?;
        let kernel = file.stochastic()?;
        let pi = stationary_distribution(&kernel)?;
        Ok(Chain {
            kernel,
            pi,
            states: file.states,
        })
    }
}
