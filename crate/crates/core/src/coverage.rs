//! Coverage probability of the reference user under Nakagami-m fading.
//!
//! With serving gain `g0 ~ Gamma(m0, 1/m0)`,
//! `P[g0 h0^(-α) > ψ I] = Σ_{k<m0} (-s)^k / k! · L_I^(k)(s)` at `s = m0 ψ h0^α`.
//! The `k`-th Taylor coefficient of `L_I` is `L_I^(k)/k!`, so the sum is simply
//! `Σ_k (-s)^k coeffs[k]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FadingConfig, NetworkConfig};
use crate::error::{Error, Result};
use crate::interference::laplace_jet;

/// Above this `m0` the alternating sum grows before it cancels.
pub const CONDITIONING_WARN_M0: u32 = 8;
const CLAMP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct CoverageQuery<'a> {
    /// SIR threshold, linear scale.
    pub psi: f64,
    pub network: &'a NetworkConfig,
    pub fading: &'a FadingConfig,
    pub stay_probability: f64,
}

impl CoverageQuery<'_> {
    /// Laplace argument `m0 ψ h0^α` at which the jet is expanded.
    pub fn laplace_point(&self) -> f64 {
        f64::from(self.fading.m0)
            * self.psi
            * self
                .network
                .serving_altitude
                .powf(self.network.path_loss_exponent)
    }

    fn with_psi(&self, psi: f64) -> Self {
        CoverageQuery { psi, ..*self }
    }
}

pub fn coverage_probability(q: &CoverageQuery<'_>) -> Result<f64> {
    if !(q.psi.is_finite() && q.psi > 0.0) {
        return Err(Error::Domain {
            what: "SIR threshold",
            value: q.psi,
            reason: "ψ must be finite and > 0 (linear scale)".into(),
        });
    }
    q.fading.validate(q.network.height)?;
    let m0 = q.fading.m0;
    if m0 > CONDITIONING_WARN_M0 {
        log::warn!(
            "m0 = {m0}: the coverage sum alternates with growing terms and may lose accuracy"
        );
    }
    let s0 = q.laplace_point();
    let jet = laplace_jet(
        s0,
        (m0 - 1) as usize,
        q.network,
        q.fading,
        q.stay_probability,
    )?;
    let mut power = 1.0;
    let terms = jet.coeffs().iter().map(|c| {
        let t = power * c;
        power *= -s0;
        t
    });
    let p = neumaier_sum(terms);
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&p) {
        return Err(Error::Consistency(format!(
            "coverage probability evaluated to {p} at ψ = {} (m0 = {m0})",
            q.psi
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub psi: f64,
    pub p_cov: std::result::Result<f64, String>,
}

/// One coverage evaluation per threshold, in grid order; failures are reported per point.
pub fn coverage_sweep(psi_grid: &[f64], template: &CoverageQuery<'_>) -> Vec<SweepPoint> {
    psi_grid
        .par_iter()
        .map(|&psi| SweepPoint {
            psi,
            p_cov: coverage_probability(&template.with_psi(psi)).map_err(|e| e.to_string()),
        })
        .collect()
}
