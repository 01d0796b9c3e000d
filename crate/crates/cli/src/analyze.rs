use std::path::Path;

use serde::Serialize;
use uavcov::{coverage_sweep, upsilon, CoverageQuery, Phase};

use crate::error::{CliError, Result};
use crate::output::{num, opt, write_atomic, write_json, CsvTable};
use crate::scenario::Scenario;

pub const ANALYZE_FORMAT: &str = "uavcov-analyze/1";
pub const ANALYZE_COLUMNS: [&str; 7] = [
    "psi_db",
    "psi_linear",
    "p_cov",
    "s0",
    "upsilon_static",
    "upsilon_moving",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
    pub psi_db: f64,
    pub psi_linear: f64,
    pub p_cov: Option<f64>,
    /// Laplace argument `m0 ψ h0^α`.
    pub s0: f64,
    pub upsilon_static: Option<f64>,
    pub upsilon_moving: Option<f64>,
    pub status: String,
}

#[derive(Debug, Serialize)]
struct AnalysisReport<'a> {
    format: &'static str,
    stay_probability: f64,
    scenario: &'a Scenario,
    rows: &'a [AnalysisRow],
}

/// Analytical coverage over the scenario grid. Per-point failures are kept in `status`.
pub fn analyze(scenario: &Scenario) -> Result<Vec<AnalysisRow>> {
    if scenario.fading.altitude_dependent {
        return Err(CliError::Input(
            "fading.altitude_dependent: no closed-form analysis exists for altitude-dependent fading \
             (simulation-only); use `simulate`"
                .into(),
        ));
    }
    let net = &scenario.network;
    net.require_closed_form_geometry()?;
    let p_s = scenario.stay_probability()?;
    let template = CoverageQuery {
        psi: 1.0,
        network: net,
        fading: &scenario.fading,
        stay_probability: p_s,
    };
    let psi = scenario.psi_linear();
    let points = coverage_sweep(&psi, &template);
    let rows = scenario
        .psi_grid_db
        .iter()
        .zip(points)
        .map(|(&psi_db, point)| {
            let s0 = CoverageQuery {
                psi: point.psi,
                ..template
            }
            .laplace_point();
            let st = upsilon(Phase::Static, s0, scenario.fading.mi, net);
            let mo = upsilon(Phase::Moving, s0, scenario.fading.mi, net);
            let status = match (&point.p_cov, &st, &mo) {
                (Err(e), _, _) => e.clone(),
                (_, Err(e), _) | (_, _, Err(e)) => e.to_string(),
                _ => "ok".to_string(),
            };
            AnalysisRow {
                psi_db,
                psi_linear: point.psi,
                p_cov: point.p_cov.ok(),
                s0,
                upsilon_static: st.ok(),
                upsilon_moving: mo.ok(),
                status,
            }
        })
        .collect();
    Ok(rows)
}

pub fn to_csv(rows: &[AnalysisRow]) -> String {
    let mut t = CsvTable::new(ANALYZE_FORMAT, &ANALYZE_COLUMNS);
    for r in rows {
        t.row(&[
            num(r.psi_db),
            num(r.psi_linear),
            opt(r.p_cov),
            num(r.s0),
            opt(r.upsilon_static),
            opt(r.upsilon_moving),
            r.status.clone(),
        ]);
    }
    t.as_str().to_string()
}

/// Write the table to `out` (JSON for a `.json` path, CSV otherwise) or CSV to stdout.
pub fn cmd_analyze(scenario: &Scenario, out: Option<&Path>) -> Result<()> {
    let rows = analyze(scenario)?;
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let report = AnalysisReport {
                format: ANALYZE_FORMAT,
                stay_probability: scenario.stay_probability()?,
                scenario,
                rows: &rows,
            };
            write_json(path, &report)?;
        }
        Some(path) => write_atomic(path, to_csv(&rows).as_bytes())?,
        None => print!("{}", to_csv(&rows)),
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        return Err(CliError::CheckFailed(format!(
            "{failed} of {} grid points could not be evaluated (see the status column)",
            rows.len()
        )));
    }
    Ok(())
}
