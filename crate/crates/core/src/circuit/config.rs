use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Reset,
    Depolarize,
    Dephase,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Reset => "reset",
            NoiseKind::Depolarize => "depolarize",
            NoiseKind::Dephase => "dephase",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reset" => Ok(NoiseKind::Reset),
            "depolarize" | "depolarizing" => Ok(NoiseKind::Depolarize),
            "dephase" | "dephasing" => Ok(NoiseKind::Dephase),
            _ => Err(Error::Parse(format!("unknown noise kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Ancilla columns are eliminated as soon as they appear.
    Compressed,
    /// Every ancilla keeps its own column; signs are exact.
    FullAncilla,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub l: usize,
    pub p: f64,
    pub q_t: f64,
    pub q: f64,
    pub noise_kind: NoiseKind,
    pub steps: usize,
    pub mode: SimMode,
    pub with_unitaries: bool,
    pub record_time_series: bool,
    pub seed: u64,
}

impl CircuitConfig {
    /// Compressed mode with unitaries and `T = 5L`.
    pub fn new(l: usize, p: f64, q_t: f64, q: f64, noise_kind: NoiseKind) -> Self {
        Self {
            l,
            p,
            q_t,
            q,
            noise_kind,
            steps: 5 * l,
            mode: SimMode::Compressed,
            with_unitaries: true,
            record_time_series: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_unitaries(mut self, on: bool) -> Self {
        self.with_unitaries = on;
        self
    }

    pub fn with_time_series(mut self, on: bool) -> Self {
        self.record_time_series = on;
        self
    }

    /// Noise probability per qubit per step.
    pub fn q_noise(&self) -> f64 {
        self.q * self.q_t
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || !self.l.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("L must be even and at least 2, got {}", self.l)));
        }
        for (name, v) in [("p", self.p), ("q_t", self.q_t), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("T must be at least 1".into()));
        }
        Ok(())
    }

    /// Short stable digest of the configuration.
    pub fn config_hash(&self) -> String {
        short_hash(&serde_json::to_string(self).expect("config serializes"))
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
