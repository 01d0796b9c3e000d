use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::analyze::analyze;
use crate::error::{CliError, Result};
use crate::output::{num, opt, write_atomic, write_json, CsvTable};
use crate::scenario::Scenario;

pub const SWEEP_FORMAT: &str = "uavcov-sweep/1";
pub const SWEEP_COLUMNS: [&str; 6] = ["param", "value", "psi_db", "psi_linear", "p_cov", "status"];

/// Scenario parameter varied by `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    /// Number of interferers.
    #[serde(rename = "M")]
    Interferers,
    #[serde(rename = "m0")]
    M0,
    #[serde(rename = "m1")]
    M1,
    /// Serving altitude in metres.
    #[serde(rename = "h0")]
    H0,
    /// Stay probability, overriding the one derived from mobility.
    #[serde(rename = "p_s")]
    StayProbability,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Interferers => "M",
            SweepParam::M0 => "m0",
            SweepParam::M1 => "m1",
            SweepParam::H0 => "h0",
            SweepParam::StayProbability => "p_s",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let integer = || {
            if value.fract() == 0.0 && (0.0..=f64::from(u32::MAX)).contains(&value) {
                Ok(value as u32)
            } else {
                Err(CliError::Input(format!(
                    "{}: expected a non-negative integer, got {value}",
                    self.name()
                )))
            }
        };
        let mut s = base.clone();
        match self {
            SweepParam::Interferers => s.network.interferers = integer()? as usize,
            SweepParam::M0 => s.fading.m0 = integer()?,
            SweepParam::M1 => s.fading.mi = integer()?,
            SweepParam::H0 => s.network.serving_altitude = value,
            SweepParam::StayProbability => s.mobility.p_s_override = Some(value),
        }
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub psi_db: f64,
    pub psi_linear: f64,
    pub p_cov: Option<f64>,
    pub status: String,
}

/// Analytical coverage over the scenario grid for each value of `param`.
pub fn sweep(base: &Scenario, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::Input("--values: need at least one value".into()));
    }
    let scenarios = values
        .iter()
        .map(|&v| param.apply(base, v).map(|s| (v, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (value, scenario) in scenarios {
        rows.extend(analyze(&scenario)?.into_iter().map(|r| SweepRow {
            param,
            value,
            psi_db: r.psi_db,
            psi_linear: r.psi_linear,
            p_cov: r.p_cov,
            status: r.status,
        }));
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut t = CsvTable::new(SWEEP_FORMAT, &SWEEP_COLUMNS);
    for r in rows {
        t.row(&[
            r.param.to_string(),
            num(r.value),
            num(r.psi_db),
            num(r.psi_linear),
            opt(r.p_cov),
            r.status.clone(),
        ]);
    }
    t.as_str().to_string()
}

pub fn cmd_sweep(
    base: &Scenario,
    param: SweepParam,
    values: &[f64],
    out: Option<&Path>,
) -> Result<()> {
    let rows = sweep(base, param, values)?;
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => write_json(path, &rows)?,
        Some(path) => write_atomic(path, to_csv(&rows).as_bytes())?,
        None => print!("{}", to_csv(&rows)),
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        return Err(CliError::CheckFailed(format!(
            "{failed} sweep points could not be evaluated"
        )));
    }
    Ok(())
}
