//! Optional JSON configuration shared by all commands.

use std::path::{Path, PathBuf};

use polaris_core::policy::{parameter_grid, PolicyError, PolicyParams, Scenario};
use polaris_core::profiling::StoreConfig;
use serde::{Deserialize, Serialize};

use crate::datagen::{default_targets, CalibrationTarget};
use crate::io::{read_json, FileError};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "POLARIS_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Extra or overriding scenario definitions, looked up before the canonical five.
    pub scenarios: Option<Vec<Scenario>>,
    pub grid: Option<GridConfig>,
    pub targets: Option<Vec<CalibrationTarget>>,
    pub store: Option<StoreConfig>,
    pub refresh_period: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub events_per_cell: Option<usize>,
}

impl Config {
    /// Loads `path`, else the file named by `POLARIS_CONFIG`, else defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, FileError> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => read_json(&p),
            None => Ok(Self::default()),
        }
    }

    pub fn scenario(&self, name: &str) -> Option<Scenario> {
        self.scenarios
            .iter()
            .flatten()
            .find(|s| s.name().eq_ignore_ascii_case(name))
            .cloned()
            .or_else(|| Scenario::canonical(name))
    }

    /// Configured scenarios if any, otherwise the canonical five.
    pub fn scenario_set(&self) -> Vec<Scenario> {
        match &self.scenarios {
            Some(s) if !s.is_empty() => s.clone(),
            _ => Scenario::all_canonical(),
        }
    }

    pub fn grid(&self) -> Result<Vec<PolicyParams>, PolicyError> {
        match &self.grid {
            None => Ok(parameter_grid()),
            Some(g) => g
                .lambda
                .iter()
                .flat_map(|l| g.mu.iter().map(move |m| PolicyParams::new(*l, *m)))
                .collect(),
        }
    }

    pub fn targets(&self) -> Vec<CalibrationTarget> {
        self.targets.clone().unwrap_or_else(default_targets)
    }

    pub fn store_config(&self) -> StoreConfig {
        self.store.unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polaris_core::domain::MechanismKind;

    #[test]
    fn parses_partial_config() {
        let c: Config = serde_json::from_str(
            r#"{"scenarios": [{"name": "lte-only", "allowed": ["HO_LTE"]}],
                "grid": {"lambda": [0.5], "mu": [0, 1]},
                "store": {"min_n": 10}}"#,
        )
        .unwrap();
        assert_eq!(c.scenario("LTE-only").unwrap().allowed().len(), 1);
        assert_eq!(c.scenario("no-BWP").unwrap().name(), "no-BWP");
        assert_eq!(c.grid().unwrap().len(), 2);
        assert_eq!(c.store_config(), StoreConfig { window: 1024, min_n: 10 });
        assert_eq!(c.targets().len(), 9);
        assert_eq!(c.scenario_set().len(), 1);
        assert!(c.scenario("LTE-only").unwrap().allows(MechanismKind::HoLte));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(serde_json::from_str::<Config>(r#"{"scenarios": [{"name": "x", "allowed": []}]}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"colour": 1}"#).is_err());
        let c: Config = serde_json::from_str(r#"{"grid": {"lambda": [2], "mu": [0]}}"#).unwrap();
        assert!(c.grid().is_err());
    }
}
