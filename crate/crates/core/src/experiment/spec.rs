use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chi::{ChiConfig, InitialStateSpec};
use crate::circuit::{short_hash, CircuitConfig, NoiseKind, SimMode};
use crate::error::{Error, Result};

/// Experiment scale presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// L ≤ 128, 10³ realizations per point.
    #[default]
    Desk,
    /// L ≤ 256, 6×10³ realizations per point.
    Large,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "large" => Ok(Self::Large),
            _ => Err(Error::InvalidConfig(format!("unknown profile {s:?} (expected desk or large)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Sweep,
    Slowdown,
    Chi,
}

/// A grid of circuit configurations, one point per `(L, q)`.
///
/// Field names follow [`CircuitConfig`]; `steps` defaults to `5L` per size and
/// `q`, when set, replaces the grid by a single value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub noise_kind: NoiseKind,
    pub p: f64,
    pub q_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    pub q_start: f64,
    pub q_stop: f64,
    pub q_step: f64,
    pub l: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub mode: SimMode,
    pub with_unitaries: bool,
    pub seed: u64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Convergence threshold for `slowdown`.
    pub threshold: f64,
    /// Device input for `chi`; one symbol is repeated over all qubits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encode_depth: Option<usize>,
    /// Also run `chi` with σ = ρ.
    pub control: bool,
}

impl SweepSpec {
    pub fn defaults(command: Command, profile: Profile) -> Self {
        let base = Self {
            noise_kind: NoiseKind::Reset,
            p: 0.0,
            q_t: 0.1,
            q: None,
            q_start: 0.44,
            q_stop: 0.56,
            q_step: 0.01,
            l: vec![16, 32, 64, 128],
            steps: None,
            mode: SimMode::Compressed,
            with_unitaries: true,
            seed: 1,
            n: 1000,
            out: None,
            threshold: crate::observables::CONVERGENCE_THRESHOLD,
            rho: None,
            sigma: None,
            encode_depth: None,
            control: false,
        };
        match (command, profile) {
            (Command::Sweep, Profile::Desk) => base,
            (Command::Sweep, Profile::Large) => Self { l: vec![32, 64, 128, 256], n: 6000, ..base },
            (Command::Slowdown, Profile::Desk) => Self { q: Some(0.5), l: vec![32, 64, 128], ..base },
            (Command::Slowdown, Profile::Large) => Self { q: Some(0.5), l: vec![32, 64, 128, 256], n: 6000, ..base },
            (Command::Chi, profile) => Self {
                noise_kind: NoiseKind::Depolarize,
                q_start: 0.30,
                q_stop: 0.42,
                mode: SimMode::FullAncilla,
                l: if profile == Profile::Desk { vec![8, 12, 16] } else { vec![8, 12, 16, 20] },
                n: if profile == Profile::Desk { 3000 } else { 6000 },
                ..base
            },
        }
    }

    /// Profile defaults overridden by the keys present in `text`.
    pub fn from_toml(text: &str, command: Command, profile: Profile) -> Result<Self> {
        let overrides: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut merged = toml::Table::try_from(Self::defaults(command, profile)).map_err(|e| Error::Parse(e.to_string()))?;
        merged.extend(overrides);
        let spec: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.l.is_empty() {
            return Err(Error::InvalidConfig("l must list at least one size".into()));
        }
        if self.q.is_none() && !(self.q_step > 0.0 && self.q_stop >= self.q_start) {
            return Err(Error::InvalidConfig("q grid is empty".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidConfig("threshold must be positive".into()));
        }
        for &l in &self.l {
            for q in self.q_grid() {
                self.circuit(l, q).validate()?;
            }
        }
        for s in [&self.rho, &self.sigma].into_iter().flatten() {
            InitialStateSpec::parse(s)?;
        }
        Ok(())
    }

    /// Grid values `q_start + k·q_step ≤ q_stop`, rounded to 10 decimals.
    pub fn q_grid(&self) -> Vec<f64> {
        if let Some(q) = self.q {
            return vec![q];
        }
        let count = ((self.q_stop - self.q_start) / self.q_step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| ((self.q_start + k as f64 * self.q_step) * 1e10).round() / 1e10).collect()
    }

    /// `(L, q)` pairs in output order: sizes as listed, then ascending `q`.
    pub fn points(&self) -> Vec<(usize, f64)> {
        let grid = self.q_grid();
        self.l.iter().flat_map(|&l| grid.iter().map(move |&q| (l, q))).collect()
    }

    pub fn circuit(&self, l: usize, q: f64) -> CircuitConfig {
        CircuitConfig::new(l, self.p, self.q_t, q, self.noise_kind)
            .with_steps(self.steps.unwrap_or(5 * l))
            .with_mode(self.mode)
            .with_unitaries(self.with_unitaries)
            .with_seed(self.seed)
    }

    pub fn chi_config(&self, l: usize, q: f64) -> Result<ChiConfig> {
        let mut cfg = ChiConfig::new(self.circuit(l, q), self.n);
        if let Some(r) = &self.rho {
            cfg.rho = state_for(r, l)?;
        }
        if let Some(s) = &self.sigma {
            cfg.sigma = state_for(s, l)?;
        }
        if let Some(d) = self.encode_depth {
            cfg.encode_depth = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Digest identifying the spec and command.
    pub fn hash(&self, command: Command) -> String {
        let mut spec = self.clone();
        spec.out = None;
        short_hash(&serde_json::to_string(&(command, spec)).expect("spec serializes"))
    }
}

fn state_for(s: &str, l: usize) -> Result<InitialStateSpec> {
    let parsed = InitialStateSpec::parse(s)?;
    match parsed.len() {
        1 => Ok(InitialStateSpec::all(l, parsed.0[0])),
        n if n == l => Ok(parsed),
        n => Err(Error::InvalidConfig(format!("state {s:?} has {n} symbols, expected 1 or {l}"))),
    }
}

/// Input and initial guess for `collapse`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSpec {
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Observable tag to collapse; defaults to the tag of the first row.
    #[serde(default)]
    pub observable: Option<String>,
    #[serde(default)]
    pub q_c: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default)]
    pub weighted: bool,
    #[serde(default)]
    pub x_window: Option<f64>,
    #[serde(default = "default_factor")]
    pub threshold_factor: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_degree() -> usize {
    crate::scaling::DEFAULT_DEGREE
}

fn default_factor() -> f64 {
    1.1
}

impl Default for CollapseSpec {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl CollapseSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Parameters of `oracle-check`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_chi_cases")]
    pub chi_cases: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_cases() -> usize {
    200
}

fn default_chi_cases() -> usize {
    20
}

impl Default for OracleSpec {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl OracleSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
