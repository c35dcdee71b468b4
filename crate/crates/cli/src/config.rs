//! Experiment configuration file.
//!
//! TOML with three optional tables; every key has a default.
//!
//! ```toml
//! [scenario]
//! n_aon = 5
//! n_ton = 5
//! slot_scenario = "small-collision"  # equal | large-collision | explicit
//! beta = 0.01                        # sigma_I = beta, sigma_S = 1 + beta
//! # sigma_idle / sigma_success / sigma_collision when slot_scenario = "explicit"
//! rate = 1.0
//! alpha = 0.9
//! p_r = 0.5
//! # initial_age = 1.01               # defaults to sigma_S
//!
//! [run]
//! n_runs = 2000
//! n_stages = 300
//! seed = 1
//! mode = "competition"               # cooperation
//! accounting = "realized"            # expected
//!
//! [sweep]
//! alpha = []                         # discount factors
//! p_r = []                           # device biases
//! network_ages = []                  # msne / stage inputs
//! sizes = []                         # N_A = N_T values for freq
//! ```

use std::path::Path;

use aoi_coexist::{
    Mode, NetworkSizes, PayoffAccounting, RunConfig, ScenarioParams, SlotLengths,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FULL_SCALE_RUNS: usize = 100_000;
pub const FULL_SCALE_STAGES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SlotScenario {
    /// `sigma_C = 0.1 sigma_S`
    #[default]
    SmallCollision,
    /// `sigma_C = sigma_S`
    Equal,
    /// `sigma_C = 2 sigma_S`
    LargeCollision,
    Explicit,
}

impl SlotScenario {
    pub fn collision_ratio(&self) -> Option<f64> {
        match self {
            SlotScenario::SmallCollision => Some(0.1),
            SlotScenario::Equal => Some(1.0),
            SlotScenario::LargeCollision => Some(2.0),
            SlotScenario::Explicit => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    #[default]
    Competition,
    Cooperation,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Competition => Mode::Competition,
            ModeName::Cooperation => Mode::Cooperation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingName {
    #[default]
    Realized,
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_aon: usize,
    pub n_ton: usize,
    pub slot_scenario: SlotScenario,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_idle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_collision: Option<f64>,
    pub rate: f64,
    pub alpha: f64,
    pub p_r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_age: Option<f64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            n_aon: 5,
            n_ton: 5,
            slot_scenario: SlotScenario::SmallCollision,
            beta: 0.01,
            sigma_idle: None,
            sigma_success: None,
            sigma_collision: None,
            rate: 1.0,
            alpha: 0.9,
            p_r: 0.5,
            initial_age: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub n_runs: usize,
    pub n_stages: usize,
    pub seed: u64,
    pub mode: ModeName,
    pub accounting: AccountingName,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            n_runs: 2000,
            n_stages: 300,
            seed: 1,
            mode: ModeName::Competition,
            accounting: AccountingName::Realized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub alpha: Vec<f64>,
    pub p_r: Vec<f64>,
    pub network_ages: Vec<f64>,
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub run: RunSection,
    pub sweep: SweepSection,
}

/// The default acceptance grid `{0.05, 0.15, ..., 0.95}`.
pub fn default_axis() -> Vec<f64> {
    (0..10).map(|k| (5 + 10 * k) as f64 / 100.0).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn slot_lengths(&self) -> Result<SlotLengths, CliError> {
        let s = &self.scenario;
        let slots = match s.slot_scenario.collision_ratio() {
            Some(ratio) => {
                if s.sigma_idle.is_some() || s.sigma_success.is_some() || s.sigma_collision.is_some()
                {
                    return Err(CliError::Config(
                        "explicit sigma_* keys need slot_scenario = \"explicit\"".into(),
                    ));
                }
                SlotLengths::from_beta(s.beta, ratio)?
            }
            None => match (s.sigma_idle, s.sigma_success, s.sigma_collision) {
                (Some(i), Some(su), Some(c)) => SlotLengths::new(i, su, c)?,
                _ => {
                    return Err(CliError::Config(
                        "slot_scenario = \"explicit\" needs sigma_idle, sigma_success and sigma_collision"
                            .into(),
                    ))
                }
            },
        };
        Ok(slots)
    }

    /// Ratio `sigma_C / sigma_S` as reported in CSV output.
    pub fn collision_ratio(&self) -> Result<f64, CliError> {
        let slots = self.slot_lengths()?;
        Ok(self
            .scenario
            .slot_scenario
            .collision_ratio()
            .unwrap_or(slots.sigma_collision() / slots.sigma_success()))
    }

    pub fn params(&self) -> Result<ScenarioParams, CliError> {
        let s = &self.scenario;
        let slots = self.slot_lengths()?;
        let mut p = ScenarioParams::new(NetworkSizes::new(s.n_aon, s.n_ton)?, slots)
            .with_rate(s.rate)
            .with_alpha(s.alpha)
            .with_p_r(s.p_r);
        if let Some(age) = s.initial_age {
            p = p.with_initial_age(age);
        }
        p.validate()?;
        Ok(p)
    }

    pub fn run_config(&self, mode: Mode) -> Result<RunConfig, CliError> {
        let accounting = match self.run.accounting {
            AccountingName::Realized => PayoffAccounting::Realized,
            AccountingName::Expected => PayoffAccounting::Expected,
        };
        let cfg = RunConfig::new(self.params()?, self.run.n_stages, mode, self.run.seed)
            .with_accounting(accounting);
        cfg.validate()?;
        if self.run.n_runs == 0 {
            return Err(CliError::Config("n_runs must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn alpha_axis(&self, fallback: Vec<f64>) -> Vec<f64> {
        if self.sweep.alpha.is_empty() {
            fallback
        } else {
            self.sweep.alpha.clone()
        }
    }

    pub fn pr_axis(&self, fallback: Vec<f64>) -> Vec<f64> {
        if self.sweep.p_r.is_empty() {
            fallback
        } else {
            self.sweep.p_r.clone()
        }
    }
}
