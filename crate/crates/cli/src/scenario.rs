use std::path::Path;

use serde::{Deserialize, Serialize};
use uavcov::{
    db_to_linear, derive_stay_probability, FadingConfig, MobilityConfig, NetworkConfig, SimConfig,
};

use crate::error::{CliError, Result};

/// A complete run description. Thresholds are in dB here and converted once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub fading: FadingConfig,
    #[serde(default)]
    pub mobility: MobilityConfig,
    pub psi_grid_db: Vec<f64>,
    #[serde(default)]
    pub sim: SimConfig,
}

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub psi_db: Option<Vec<f64>>,
}

impl Default for Scenario {
    /// Cylinder of radius 40 m and height 30 m, serving UAV at 10 m, two
    /// interferers, free-space path loss, Rayleigh fading.
    fn default() -> Self {
        Scenario {
            network: NetworkConfig {
                radius: 40.0,
                height: 30.0,
                serving_altitude: 10.0,
                interferers: 2,
                path_loss_exponent: 2.0,
            },
            fading: FadingConfig::new(1, 1),
            mobility: MobilityConfig::default(),
            psi_grid_db: (-4..=6).map(|i| f64::from(i) * 5.0).collect(),
            sim: SimConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes to JSON")
    }

    /// Read `path` (or the built-in default when absent), apply overrides and validate.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut scenario = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Input(format!("cannot read scenario {}: {e}", p.display()))
                })?;
                Scenario::from_json(&text)?
            }
            None => Scenario::default(),
        };
        scenario.apply(overrides);
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.sim.seed = seed;
        }
        if let Some(r) = overrides.replications {
            self.sim.replications = r;
        }
        if let Some(grid) = &overrides.psi_db {
            self.psi_grid_db = grid.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.psi_grid_db.is_empty() {
            return Err(CliError::Input(
                "psi_grid_db: must contain at least one threshold".into(),
            ));
        }
        if let Some(bad) = self.psi_grid_db.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Input(format!(
                "psi_grid_db: {bad} is not a finite dB value"
            )));
        }
        if let Some(w) = self.psi_grid_db.windows(2).find(|w| w[1] <= w[0]) {
            return Err(CliError::Input(format!(
                "psi_grid_db: must be strictly increasing ({} is followed by {})",
                w[0], w[1]
            )));
        }
        self.network.validate()?;
        self.fading.validate(self.network.height)?;
        self.mobility.validate()?;
        self.sim.validate()?;
        Ok(())
    }

    pub fn psi_linear(&self) -> Vec<f64> {
        self.psi_grid_db.iter().map(|&d| db_to_linear(d)).collect()
    }

    pub fn stay_probability(&self) -> Result<f64> {
        Ok(derive_stay_probability(&self.mobility, &self.network)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.psi_grid_db.first(), Some(&-20.0));
        assert_eq!(s.psi_grid_db.last(), Some(&30.0));
        assert!((s.stay_probability().unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn optional_sections_default() {
        let text = r#"{
            "network": {"radius_m": 40, "height_m": 30, "serving_altitude_m": 10,
                        "interferers": 2, "path_loss_exponent": 2},
            "fading": {"m0": 1, "mi": 1},
            "psi_grid_db": [0]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.mobility, MobilityConfig::default());
        assert_eq!(s.sim, SimConfig::default());
    }

    #[test]
    fn grid_must_increase() {
        let mut s = Scenario {
            psi_grid_db: vec![0.0, 0.0],
            ..Scenario::default()
        };
        assert!(
            matches!(s.validate(), Err(CliError::Input(m)) if m.contains("strictly increasing"))
        );
        s.psi_grid_db.clear();
        assert_eq!(s.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&Scenario::default().to_json()).unwrap();
        v["network"]["radius"] = 1.into();
        let err = Scenario::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("radius"), "{err}");
    }

    #[test]
    fn overrides_take_precedence() {
        let mut s = Scenario::default();
        s.apply(&Overrides {
            seed: Some(9),
            replications: Some(4),
            psi_db: Some(vec![1.0]),
        });
        assert_eq!(
            (s.sim.seed, s.sim.replications, s.psi_grid_db.clone()),
            (9, 4, vec![1.0])
        );
    }
}
