//! Reduced-scale version of the invariant suite, run against one scenario.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use uavcov::interference::{laplace_jet, laplace_transform_binomial_sum, upsilon_quadrature};
use uavcov::simulator::snapshot_distance_phase_split;
use uavcov::special::{hyp2f1, Hyp2F1Args};
use uavcov::{
    coverage_probability, laplace_transform, CoverageQuery, DistanceDistribution, FadingConfig,
    NetworkConfig, Phase, UpsilonTerm,
};

use crate::error::{CliError, Result};
use crate::output::write_json;
use crate::scenario::Scenario;
use crate::simulate;

pub const VALIDATE_FORMAT: &str = "uavcov-validate/1";
/// Snapshot budget of the simulation-backed checks.
pub const REDUCED_SNAPSHOTS: u64 = 50_000;
const REDUCED_STRIDE: u64 = 20;

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Relative perturbation applied to the closed-form Υ before comparison.
    pub upsilon_fault: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn rel(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}

fn check(name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn analysis_network(scenario: &Scenario) -> NetworkConfig {
    NetworkConfig {
        interferers: scenario.network.interferers.max(1),
        ..scenario.network
    }
}

fn anchors(scenario: &Scenario) -> Result<(bool, String)> {
    let net = analysis_network(scenario);
    let mut bad = Vec::new();
    let f = FadingConfig::new(2, 2);
    if laplace_transform(0.0, &net, &f, 0.5)? != 1.0 {
        bad.push("L_I(0) != 1".to_string());
    }
    let empty = NetworkConfig {
        interferers: 0,
        ..net
    };
    for psi in scenario.psi_linear() {
        let q = CoverageQuery {
            psi,
            network: &empty,
            fading: &f,
            stay_probability: 0.5,
        };
        if coverage_probability(&q)? != 1.0 {
            bad.push(format!("P_cov(M=0) != 1 at psi {psi}"));
        }
    }
    for phase in Phase::ALL {
        let d = DistanceDistribution::for_network(phase, &net)?;
        if d.cdf(0.0)? != 0.0 || d.cdf(d.max_distance())? != 1.0 {
            bad.push(format!("{} distance CDF endpoints", phase.name()));
        }
    }
    for (a, z) in [(0, -5.0), (2, 0.0)] {
        if hyp2f1(&Hyp2F1Args::new(a, 1.5, z)?)? != 1.0 {
            bad.push(format!("2F1 with a={a}, z={z}"));
        }
    }
    let detail = if bad.is_empty() {
        "all exact".into()
    } else {
        bad.join("; ")
    };
    Ok((bad.is_empty(), detail))
}

fn closed_form_vs_quadrature(scenario: &Scenario, fault: f64) -> Result<(bool, String)> {
    let net = analysis_network(scenario);
    let mut worst: f64 = 0.0;
    for phase in Phase::ALL {
        let term = UpsilonTerm::new(phase, &net)?;
        for m in 1..=3 {
            for i in 0..12 {
                let s = 10f64.powf(-2.0 + 8.0 * f64::from(i) / 11.0);
                let closed = term.closed_form(s, m)? * (1.0 + fault);
                worst = worst.max(rel(closed, upsilon_quadrature(phase, s, m, &net)?));
            }
        }
    }
    Ok((
        worst <= 1e-8,
        format!("max rel err {worst:.2e} (tol 1e-8, 72 points)"),
    ))
}

fn binomial_collapse(scenario: &Scenario) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.sim.seed);
    let mut worst: f64 = 0.0;
    for big_m in 1..=10 {
        let net = NetworkConfig {
            interferers: big_m,
            ..scenario.network
        };
        let f = FadingConfig::new(1, scenario.fading.mi);
        for _ in 0..5 {
            let s = 10f64.powf(rng.gen_range(-2.0..6.0));
            let p_s: f64 = rng.gen();
            let explicit = laplace_transform_binomial_sum(s, &net, &f, p_s)?;
            worst = worst.max(rel(explicit, laplace_transform(s, &net, &f, p_s)?));
        }
    }
    Ok((
        worst <= 1e-13,
        format!("max rel err {worst:.2e} (tol 1e-13)"),
    ))
}

fn jet_vs_finite_differences(scenario: &Scenario) -> Result<(bool, String)> {
    let net = analysis_network(scenario);
    let p_s = scenario.stay_probability()?;
    let f = FadingConfig::new(2, scenario.fading.mi);
    let mut worst: f64 = 0.0;
    for psi in scenario.psi_linear() {
        let s0 = CoverageQuery {
            psi,
            network: &net,
            fading: &f,
            stay_probability: p_s,
        }
        .laplace_point();
        let jet = laplace_jet(s0, 1, &net, &f, p_s)?;
        let d = 1e-5 * s0;
        let fd = (laplace_transform(s0 + d, &net, &f, p_s)?
            - laplace_transform(s0 - d, &net, &f, p_s)?)
            / (2.0 * d);
        worst = worst.max(rel(jet.derivative(1), fd));
    }
    Ok((
        worst <= 1e-5,
        format!("max rel err of dL/ds {worst:.2e} (tol 1e-5)"),
    ))
}

/// Run every check; a check that cannot be evaluated counts as failed.
pub fn validate(scenario: &Scenario, options: &ValidateOptions) -> Result<Report> {
    let analytic = !scenario.fading.altitude_dependent;
    if analytic {
        scenario.network.require_closed_form_geometry()?;
    }
    let mut checks = vec![
        check("anchors", anchors(scenario)),
        check(
            "closed_form_vs_quadrature",
            closed_form_vs_quadrature(scenario, options.upsilon_fault.unwrap_or(0.0)),
        ),
        check("binomial_collapse", binomial_collapse(scenario)),
        check(
            "jet_vs_finite_differences",
            jet_vs_finite_differences(scenario),
        ),
    ];

    let mut reduced = scenario.clone();
    reduced.sim.n_snapshots = scenario.sim.n_snapshots.min(REDUCED_SNAPSHOTS);
    reduced.sim.stride = scenario.sim.stride.max(REDUCED_STRIDE);
    reduced.sim.validate()?;
    let seeds = simulate::seeds_for(&reduced);
    let tally = simulate::run(&reduced, &seeds)?;
    let split = snapshot_distance_phase_split(&tally);
    let net = &scenario.network;
    let p_s = scenario.stay_probability()?;

    if net.interferers > 0 {
        checks.push(check(
            "distance_laws",
            Phase::ALL
                .into_iter()
                .map(|phase| Ok((phase, split.distance_ks(phase, net)?)))
                .collect::<Result<Vec<_>>>()
                .map(|ks| {
                    let passed = ks.iter().all(|(_, d)| *d < 0.02);
                    let parts: Vec<String> = ks
                        .iter()
                        .map(|(p, d)| format!("KS {} {d:.2e}", p.name()))
                        .collect();
                    (passed, format!("{} (tol 0.02)", parts.join(", ")))
                }),
        ));
        checks.push(check(
            "altitude_laws",
            Phase::ALL
                .into_iter()
                .map(|phase| Ok((phase, split.altitude_chi_square(phase, net.height)?)))
                .collect::<Result<Vec<_>>>()
                .map(|tests| {
                    let passed = tests.iter().all(|(_, t)| t.p_value > 1e-3);
                    let parts: Vec<String> = tests
                        .iter()
                        .map(|(p, t)| format!("{} p {:.3}", p.name(), t.p_value))
                        .collect();
                    (passed, format!("chi2 {} (p > 1e-3)", parts.join(", ")))
                }),
        ));
        let dwell = tally.dwelling_fraction();
        checks.push(check(
            "steady_state",
            split.stay_count_tv(p_s).map_err(CliError::from).map(|tv| {
                let z = (dwell.mean - p_s) / dwell.std_error;
                (
                    z.abs() <= 3.0 && tv < 0.02,
                    format!(
                        "dwelling {:.4} vs p_s {p_s:.4} ({z:+.2} SE), TV {tv:.4}",
                        dwell.mean
                    ),
                )
            }),
        ));
    }

    if analytic {
        let template = CoverageQuery {
            psi: 1.0,
            network: net,
            fading: &scenario.fading,
            stay_probability: p_s,
        };
        let result = tally
            .psi
            .iter()
            .zip(tally.coverage())
            .map(|(&psi, est)| {
                let exact = coverage_probability(&CoverageQuery { psi, ..template })?;
                let tol = 4.0 * est.std_error.max(1e-3);
                Ok(((est.mean - exact).abs(), tol))
            })
            .collect::<Result<Vec<_>>>()
            .map(|diffs| {
                let passed = diffs.iter().all(|(d, tol)| d <= tol);
                let worst = diffs.iter().map(|(d, _)| *d).fold(0.0, f64::max);
                (
                    passed,
                    format!(
                        "max |sim - analysis| {worst:.4} over {} thresholds (tol 4 SE)",
                        diffs.len()
                    ),
                )
            });
        checks.push(check("analysis_vs_simulation", result));
    } else {
        checks.push(Check {
            name: "analysis_vs_simulation",
            passed: true,
            detail: format!("skipped: {}", simulate::SIMULATION_ONLY),
        });
    }

    Ok(Report {
        format: VALIDATE_FORMAT,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Print one line per check, optionally save the report, and fail on any failed check.
pub fn cmd_validate(
    scenario: &Scenario,
    out: Option<&Path>,
    options: &ValidateOptions,
) -> Result<Report> {
    let report = validate(scenario, options)?;
    for c in &report.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", c.name, c.detail);
    }
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    if !report.passed {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        return Err(CliError::CheckFailed(format!(
            "failed checks: {}",
            failed.join(", ")
        )));
    }
    Ok(report)
}
