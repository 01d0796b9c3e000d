use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use uavcov::simulator::{replication_seeds, snapshot_distance_phase_split, PhaseHistograms};
use uavcov::stats::{binomial_pmf, Estimate};
use uavcov::{coverage_probability, run_replications, Campaign, CoverageQuery, Phase, Tally};

use crate::error::{CliError, Result};
use crate::output::{num, write_atomic, write_json, CsvTable};
use crate::scenario::Scenario;

pub const SIMULATE_FORMAT: &str = "uavcov-simulate/1";
pub const COVERAGE_COLUMNS: [&str; 5] = [
    "psi_db",
    "psi_linear",
    "p_cov_sim",
    "std_error",
    "p_cov_analytical",
];
pub const HISTOGRAM_COLUMNS: [&str; 4] = ["lower_m", "upper_m", "static", "moving"];
pub const SIMULATION_ONLY: &str = "n/a (simulation-only)";

/// Analytical counterpart of an empirical coverage value, when one exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Analytical {
    Value(f64),
    Unavailable(String),
}

impl Analytical {
    fn cell(&self) -> String {
        match self {
            Analytical::Value(x) => num(*x),
            Analytical::Unavailable(why) => why.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub psi_db: f64,
    pub psi_linear: f64,
    pub p_cov_sim: f64,
    pub std_error: f64,
    pub p_cov_analytical: Analytical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counts {
    pub snapshots: u64,
    pub batches: usize,
    pub interferer_snapshots: u64,
    pub hop_proposals: u64,
    pub hops_stayed: u64,
    pub interior_hops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub format: &'static str,
    pub seed: u64,
    pub replication_seeds: Vec<u64>,
    pub scenario: Scenario,
    pub stay_probability: f64,
    pub counts: Counts,
    pub coverage: Vec<CoverageRow>,
    pub dwelling_fraction: Estimate,
    /// Observed law of the number of dwelling interferers and its binomial model.
    pub stay_count_law: Vec<f64>,
    pub stay_count_binomial: Vec<f64>,
    pub stay_count_tv: f64,
    pub interior_hop_mean_m: f64,
    pub serving_gain_mean: f64,
    pub interferer_gain_mean: BTreeMap<u32, f64>,
}

/// Seeds of each replication: the scenario seed itself for a single run.
pub fn seeds_for(scenario: &Scenario) -> Vec<u64> {
    match scenario.sim.replications {
        1 => vec![scenario.sim.seed],
        k => replication_seeds(scenario.sim.seed, k),
    }
}

pub fn run(scenario: &Scenario, seeds: &[u64]) -> Result<Tally> {
    let psi = scenario.psi_linear();
    let campaign = Campaign {
        network: &scenario.network,
        fading: &scenario.fading,
        mobility: &scenario.mobility,
        psi: &psi,
        sim: scenario.sim,
    };
    log::info!(
        "simulating {} snapshots over {} replication(s)",
        scenario.sim.n_snapshots,
        seeds.len()
    );
    Ok(run_replications(&campaign, seeds)?)
}

fn analytical(scenario: &Scenario, p_s: f64) -> Vec<Analytical> {
    if scenario.fading.altitude_dependent {
        return vec![Analytical::Unavailable(SIMULATION_ONLY.into()); scenario.psi_grid_db.len()];
    }
    scenario
        .psi_linear()
        .into_iter()
        .map(|psi| {
            let q = CoverageQuery {
                psi,
                network: &scenario.network,
                fading: &scenario.fading,
                stay_probability: p_s,
            };
            match coverage_probability(&q) {
                Ok(p) => Analytical::Value(p),
                Err(e) => Analytical::Unavailable(format!("n/a ({e})")),
            }
        })
        .collect()
}

pub fn summarize(scenario: &Scenario, seeds: &[u64], tally: &Tally) -> Result<Summary> {
    let p_s = scenario.stay_probability()?;
    let coverage = scenario
        .psi_grid_db
        .iter()
        .zip(&tally.psi)
        .zip(tally.coverage())
        .zip(analytical(scenario, p_s))
        .map(
            |(((&psi_db, &psi_linear), est), p_cov_analytical)| CoverageRow {
                psi_db,
                psi_linear,
                p_cov_sim: est.mean,
                std_error: est.std_error,
                p_cov_analytical,
            },
        )
        .collect();
    Ok(Summary {
        format: SIMULATE_FORMAT,
        seed: scenario.sim.seed,
        replication_seeds: seeds.to_vec(),
        scenario: scenario.clone(),
        stay_probability: p_s,
        counts: Counts {
            snapshots: tally.snapshots(),
            batches: tally.batches.len(),
            interferer_snapshots: tally.batches.iter().map(|b| b.interferer_snapshots).sum(),
            hop_proposals: tally.hop_proposals,
            hops_stayed: tally.hops_stayed,
            interior_hops: tally.interior_hops.count,
        },
        coverage,
        dwelling_fraction: tally.dwelling_fraction(),
        stay_count_law: tally.stay_count_law(),
        stay_count_binomial: binomial_pmf(tally.interferers as u64, p_s)?,
        stay_count_tv: snapshot_distance_phase_split(tally).stay_count_tv(p_s)?,
        interior_hop_mean_m: tally.interior_hops.mean,
        serving_gain_mean: tally.serving_gains.mean,
        interferer_gain_mean: tally
            .interferer_gains
            .iter()
            .map(|(m, g)| (*m, g.mean))
            .collect(),
    })
}

pub fn coverage_csv(summary: &Summary) -> String {
    let mut t = CsvTable::new(SIMULATE_FORMAT, &COVERAGE_COLUMNS);
    for r in &summary.coverage {
        t.row(&[
            num(r.psi_db),
            num(r.psi_linear),
            num(r.p_cov_sim),
            num(r.std_error),
            r.p_cov_analytical.cell(),
        ]);
    }
    t.as_str().to_string()
}

pub fn histogram_csv(h: &PhaseHistograms) -> String {
    let mut t = CsvTable::new(SIMULATE_FORMAT, &HISTOGRAM_COLUMNS);
    let (st, mo) = (h.get(Phase::Static), h.get(Phase::Moving));
    let edges = st.edges();
    for (i, e) in edges.windows(2).enumerate() {
        t.row(&[
            num(e[0]),
            num(e[1]),
            st.counts[i].to_string(),
            mo.counts[i].to_string(),
        ]);
    }
    t.as_str().to_string()
}

/// Run the campaign and write `summary.json`, `coverage.csv` and the two histograms into `out`.
pub fn cmd_simulate(scenario: &Scenario, out: Option<&Path>) -> Result<Summary> {
    let dir = out.ok_or_else(|| CliError::Input("simulate needs --out <directory>".into()))?;
    if dir.exists() && !dir.is_dir() {
        return Err(CliError::Input(format!(
            "--out {} is not a directory",
            dir.display()
        )));
    }
    let seeds = seeds_for(scenario);
    let tally = run(scenario, &seeds)?;
    let summary = summarize(scenario, &seeds, &tally)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_atomic(&dir.join("coverage.csv"), coverage_csv(&summary).as_bytes())?;
    write_atomic(
        &dir.join("distance_histogram.csv"),
        histogram_csv(&tally.distance).as_bytes(),
    )?;
    write_atomic(
        &dir.join("altitude_histogram.csv"),
        histogram_csv(&tally.altitude).as_bytes(),
    )?;
    Ok(summary)
}
