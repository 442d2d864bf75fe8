//! File-backed run configuration. Unknown keys are rejected; every field
//! has a default so a config file only lists what it changes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbp::TrainConfig;
use crate::sim::SweepConfig;
use crate::toric::MatrixKind;

/// Code the weights are trained on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainCode {
    pub d: usize,
    pub matrix: MatrixKind,
}

impl Default for TrainCode {
    fn default() -> Self {
        TrainCode {
            d: 4,
            matrix: MatrixKind::Overcomplete,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Monte Carlo worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub sweep: SweepConfig,
    pub train: TrainConfig,
    pub train_code: TrainCode,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        RunConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        let s = &self.sweep;
        s.stop.validate()?;
        if s.distances.is_empty() || s.epsilons.is_empty() || s.variants.is_empty() {
            return Err(Error::Config("sweep grid has an empty axis".into()));
        }
        if let Some(&d) = s.distances.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDistance(d));
        }
        for &e in &s.epsilons {
            crate::noise::DepolarizingChannel::new(e)?;
        }
        if s.bp_iterations == Some(0) {
            return Err(Error::Config("bp_iterations must be positive".into()));
        }
        if s.weights_file.is_none() && s.variants.iter().any(|v| v.needs_weights()) {
            return Err(Error::Config("a weighted variant is listed but no weights_file is set".into()));
        }
        self.train.validate()?;
        if self.train_code.d < 3 {
            return Err(Error::InvalidDistance(self.train_code.d));
        }
        Ok(())
    }
}
