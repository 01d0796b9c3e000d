//! Network, fading and mobility parameters shared by the analysis and the simulator.
//!
//! All lengths are in meters, speeds in m/s and times in seconds. The JSON field
//! names carry the unit as a suffix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and population of the network.
///
/// Interferers live in a cylinder of radius `radius` and height `height` centred on
/// the reference user; the serving UAV hovers at `serving_altitude` above the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(rename = "radius_m")]
    pub radius: f64,
    #[serde(rename = "height_m")]
    pub height: f64,
    #[serde(rename = "serving_altitude_m")]
    pub serving_altitude: f64,
    pub interferers: usize,
    pub path_loss_exponent: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        positive("network.radius_m", self.radius)?;
        positive("network.height_m", self.height)?;
        positive("network.serving_altitude_m", self.serving_altitude)?;
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 2.0) {
            return Err(Error::config(
                "network.path_loss_exponent",
                format!("must be >= 2, got {}", self.path_loss_exponent),
            ));
        }
        Ok(())
    }

    /// Largest UAV-to-user distance, `sqrt(R^2 + H^2)`.
    pub fn max_distance(&self) -> f64 {
        self.radius.hypot(self.height)
    }

    /// The closed-form distance laws order their branches as `H < R`.
    pub fn require_closed_form_geometry(&self) -> Result<()> {
        if self.height < self.radius {
            Ok(())
        } else {
            Err(Error::UnsupportedGeometry {
                height: self.height,
                radius: self.radius,
            })
        }
    }
}

/// One altitude band of the altitude-dependent fading mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltitudeBand {
    #[serde(rename = "lower_m")]
    pub lower: f64,
    #[serde(rename = "upper_m")]
    pub upper: f64,
    pub m: u32,
}

/// Nakagami-m parameters of the serving and interfering links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingConfig {
    pub m0: u32,
    pub mi: u32,
    #[serde(default)]
    pub altitude_dependent: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bands: Vec<AltitudeBand>,
}

impl FadingConfig {
    pub fn new(m0: u32, mi: u32) -> Self {
        FadingConfig {
            m0,
            mi,
            altitude_dependent: false,
            bands: Vec::new(),
        }
    }

    /// Altitude-dependent mode with thirds of `[0, height]` mapped to m = 1, 2, 3.
    pub fn altitude_thirds(m0: u32, height: f64) -> Self {
        let third = height / 3.0;
        FadingConfig {
            m0,
            mi: 1,
            altitude_dependent: true,
            bands: vec![
                AltitudeBand {
                    lower: 0.0,
                    upper: third,
                    m: 1,
                },
                AltitudeBand {
                    lower: third,
                    upper: 2.0 * third,
                    m: 2,
                },
                AltitudeBand {
                    lower: 2.0 * third,
                    upper: height,
                    m: 3,
                },
            ],
        }
    }

    pub fn validate(&self, height: f64) -> Result<()> {
        if self.m0 == 0 {
            return Err(Error::config("fading.m0", "must be >= 1"));
        }
        if self.mi == 0 {
            return Err(Error::config("fading.mi", "must be >= 1"));
        }
        if !self.altitude_dependent {
            return Ok(());
        }
        if self.bands.is_empty() {
            return Err(Error::config(
                "fading.bands",
                "altitude-dependent fading needs at least one band",
            ));
        }
        let tol = 1e-9 * height.max(1.0);
        let mut expected_lower = 0.0;
        for (i, band) in self.bands.iter().enumerate() {
            if band.m == 0 {
                return Err(Error::config(
                    format!("fading.bands[{i}].m"),
                    "must be >= 1",
                ));
            }
            if (band.lower - expected_lower).abs() > tol {
                return Err(Error::config(
                    format!("fading.bands[{i}].lower_m"),
                    format!(
                        "bands must tile [0, H] in order; expected {expected_lower}, got {}",
                        band.lower
                    ),
                ));
            }
            if band.upper <= band.lower {
                return Err(Error::config(
                    format!("fading.bands[{i}].upper_m"),
                    "upper bound must exceed lower bound",
                ));
            }
            expected_lower = band.upper;
        }
        if (expected_lower - height).abs() > tol {
            return Err(Error::config(
                "fading.bands",
                format!("bands end at {expected_lower} but must end at H = {height}"),
            ));
        }
        Ok(())
    }

    /// Fading parameter of an interferer flying at `altitude`.
    ///
    /// Bands are half-open `[lower, upper)` except the last, which includes `H`.
    pub fn interferer_m(&self, altitude: f64) -> u32 {
        if !self.altitude_dependent {
            return self.mi;
        }
        self.bands
            .iter()
            .find(|b| altitude < b.upper)
            .or(self.bands.last())
            .map_or(self.mi, |b| b.m)
    }
}

/// Parameters of the mixed vertical-waypoint / spatial-random-walk mobility model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityConfig {
    #[serde(rename = "v_min_mps")]
    pub v_min: f64,
    #[serde(rename = "v_max_mps")]
    pub v_max: f64,
    #[serde(rename = "tau_min_s")]
    pub tau_min: f64,
    #[serde(rename = "tau_max_s")]
    pub tau_max: f64,
    #[serde(rename = "r_prime_m")]
    pub r_prime: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_s_override: Option<f64>,
}

impl Default for MobilityConfig {
    /// Speeds in [0.2, 10] m/s, dwell in [2, 6] s, 10 m random-walk range.
    fn default() -> Self {
        MobilityConfig {
            v_min: 0.2,
            v_max: 10.0,
            tau_min: 2.0,
            tau_max: 6.0,
            r_prime: 10.0,
            p_s_override: None,
        }
    }
}

impl MobilityConfig {
    pub fn validate(&self) -> Result<()> {
        positive("mobility.v_min_mps", self.v_min)?;
        if !(self.v_max.is_finite() && self.v_max > self.v_min) {
            return Err(Error::config(
                "mobility.v_max_mps",
                format!("must exceed v_min ({}), got {}", self.v_min, self.v_max),
            ));
        }
        if !(self.tau_min.is_finite() && self.tau_min >= 0.0) {
            return Err(Error::config(
                "mobility.tau_min_s",
                format!("must be >= 0, got {}", self.tau_min),
            ));
        }
        if !(self.tau_max.is_finite() && self.tau_max >= self.tau_min) {
            return Err(Error::config(
                "mobility.tau_max_s",
                format!(
                    "must be >= tau_min ({}), got {}",
                    self.tau_min, self.tau_max
                ),
            ));
        }
        positive("mobility.r_prime_m", self.r_prime)?;
        if let Some(p) = self.p_s_override {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(
                    "mobility.p_s_override",
                    format!("must lie in [0, 1], got {p}"),
                ));
            }
        }
        Ok(())
    }

    /// Mean vertical leg length of the waypoint process on `[0, height]`.
    pub fn mean_leg_length(&self, height: f64) -> f64 {
        height / 3.0
    }

    pub fn mean_dwell_time(&self) -> f64 {
        0.5 * (self.tau_min + self.tau_max)
    }

    /// `E[L / v] = E[L] ln(v_max / v_min) / (v_max - v_min)` for independent `L` and `v`.
    pub fn mean_move_time(&self, height: f64) -> f64 {
        (self.v_max / self.v_min).ln() / (self.v_max - self.v_min) * self.mean_leg_length(height)
    }

    /// Mean spatial hop length `R'/1.5` of the random walk.
    pub fn spatial_speed(&self) -> f64 {
        self.r_prime / 1.5
    }
}

/// Steady-state probability that an interferer is dwelling (spatial phase).
pub fn derive_stay_probability(mob: &MobilityConfig, net: &NetworkConfig) -> Result<f64> {
    mob.validate()?;
    net.validate()?;
    if let Some(p) = mob.p_s_override {
        return Ok(p);
    }
    let dwell = mob.mean_dwell_time();
    let moving = mob.mean_move_time(net.height);
    Ok(dwell / (dwell + moving))
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be > 0, got {value}")))
    }
}
