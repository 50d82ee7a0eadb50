// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem dimensions shared by every experiment.
///
/// `m` boolean inputs, `d` hidden neurons, exactly `s` inputs active per
/// sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub m: usize,
    pub d: usize,
    pub s: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ProblemConfig {
    pub fn new(m: usize, d: usize, s: usize, seed: u64) -> Result<Self> {
        let config = Self { m, d, s, seed };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::config(format!("m must be at least 2, got {}", self.m)));
        }
        if self.d < 1 {
            return Err(Error::config("d must be at least 1"));
        }
        if self.s < 1 || self.s > self.m {
            return Err(Error::config(format!(
                "s must lie in 1..={}, got {}",
                self.m, self.s
            )));
        }
        Ok(())
    }

    /// Number of readout rows, one per ordered pair including the unused diagonal.
    pub fn outputs(&self) -> usize {
        self.m * self.m
    }

    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}
