//! Discrete-time Monte Carlo of the mixed mobility model with Nakagami fading.
//!
//! Each interferer alternates between vertical waypoint legs (moving) and pauses
//! (dwelling). While dwelling it makes one horizontal random-walk hop per step,
//! drawn uniformly from the disk of radius `R'`. Time left over inside a step
//! after a phase change carries into the next phase, so snapshot phases follow the
//! continuous-time renewal process exactly for any `dt`.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, UnitDisc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{FadingConfig, MobilityConfig, NetworkConfig};
use crate::distributions::{AltitudePdf, DistanceDistribution, Phase};
use crate::error::{Error, Result};
use crate::stats::{
    batch_means, binomial_pmf, chi_square, total_variation, ChiSquareTest, Estimate, Histogram,
    RunningMoments,
};

pub const DISTANCE_BINS: usize = 5000;
pub const ALTITUDE_BINS: usize = 30;
const RESAMPLE_RETRIES: usize = 100;

/// What a dwelling interferer does with a hop proposal that leaves the disk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryRule {
    /// Stay in place for this step. Keeps the uniform law on the disk stationary.
    #[default]
    Stay,
    /// Redraw up to 100 times, then stay. Its stationary density is proportional
    /// to the feasible fraction of the hop disk, so it thins out near the rim.
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_snapshots: u64,
    pub warmup_steps: u64,
    #[serde(rename = "dt_s")]
    pub dt: f64,
    pub stride: u64,
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub boundary: BoundaryRule,
    #[serde(default = "twenty")]
    pub batches: usize,
}

fn one() -> usize {
    1
}

fn twenty() -> usize {
    20
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_snapshots: 100_000,
            warmup_steps: 10_000,
            dt: 1.0,
            stride: 10,
            seed: 1,
            replications: 1,
            boundary: BoundaryRule::Stay,
            batches: 20,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(
                "sim.dt_s",
                format!("must be finite and > 0, got {}", self.dt),
            ));
        }
        if self.stride == 0 {
            return Err(Error::config("sim.stride", "must be >= 1"));
        }
        if self.replications == 0 {
            return Err(Error::config("sim.replications", "must be >= 1"));
        }
        if self.batches == 0 {
            return Err(Error::config("sim.batches", "must be >= 1"));
        }
        let per_replication = self.n_snapshots / self.replications as u64;
        if per_replication < self.batches as u64 {
            return Err(Error::config(
                "sim.n_snapshots",
                format!(
                    "each of the {} replications needs at least {} snapshots (one per batch)",
                    self.replications, self.batches
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionPhase {
    Moving { waypoint: f64, speed: f64 },
    Dwelling { remaining: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub id: usize,
    /// Horizontal position relative to the reference user.
    pub position: [f64; 2],
    pub altitude: f64,
    pub phase: MotionPhase,
}

impl UavState {
    pub fn phase(&self) -> Phase {
        match self.phase {
            MotionPhase::Moving { .. } => Phase::Moving,
            MotionPhase::Dwelling { .. } => Phase::Static,
        }
    }

    pub fn horizontal_distance(&self) -> f64 {
        self.position[0].hypot(self.position[1])
    }

    /// Distance to the reference user on the ground at the origin.
    pub fn distance(&self) -> f64 {
        self.horizontal_distance().hypot(self.altitude)
    }
}

/// A random-walk hop attempted during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    /// Horizontal distance from the centre before the hop.
    pub start_radius: f64,
    /// Length of the accepted displacement, `None` if the UAV stayed.
    pub length: Option<f64>,
    pub proposals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    radius: f64,
    height: f64,
    mobility: MobilityConfig,
    boundary: BoundaryRule,
}

impl MobilityModel {
    pub fn new(
        net: &NetworkConfig,
        mobility: &MobilityConfig,
        boundary: BoundaryRule,
    ) -> Result<Self> {
        net.validate()?;
        mobility.validate()?;
        Ok(MobilityModel {
            radius: net.radius,
            height: net.height,
            mobility: *mobility,
            boundary,
        })
    }

    fn draw_leg<R: Rng + ?Sized>(&self, rng: &mut R) -> MotionPhase {
        let m = &self.mobility;
        MotionPhase::Moving {
            waypoint: rng.gen::<f64>() * self.height,
            speed: m.v_min + (m.v_max - m.v_min) * rng.gen::<f64>(),
        }
    }

    fn draw_dwell<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = &self.mobility;
        m.tau_min + (m.tau_max - m.tau_min) * rng.gen::<f64>()
    }

    /// Uniform in the cylinder, heading for a fresh waypoint.
    pub fn initial_state<R: Rng + ?Sized>(&self, id: usize, rng: &mut R) -> UavState {
        UavState {
            id,
            position: uniform_in_disk(self.radius, rng),
            altitude: rng.gen::<f64>() * self.height,
            phase: self.draw_leg(rng),
        }
    }

    fn hop<R: Rng + ?Sized>(&self, state: &mut UavState, rng: &mut R) -> Hop {
        let start_radius = state.horizontal_distance();
        let tries = match self.boundary {
            BoundaryRule::Stay => 1,
            BoundaryRule::Resample => RESAMPLE_RETRIES,
        };
        for attempt in 1..=tries {
            let u = uniform_in_disk(self.mobility.r_prime, rng);
            let proposal = [state.position[0] + u[0], state.position[1] + u[1]];
            if proposal[0].hypot(proposal[1]) <= self.radius {
                state.position = proposal;
                return Hop {
                    start_radius,
                    length: Some(u[0].hypot(u[1])),
                    proposals: attempt,
                };
            }
        }
        Hop {
            start_radius,
            length: None,
            proposals: tries,
        }
    }

    /// Advance one UAV by `dt` seconds. A hop is made if the step starts in a dwell.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut UavState, dt: f64, rng: &mut R) -> Option<Hop> {
        let hop = match state.phase {
            MotionPhase::Dwelling { .. } => Some(self.hop(state, rng)),
            MotionPhase::Moving { .. } => None,
        };
        let mut left = dt;
        loop {
            match state.phase {
                MotionPhase::Moving { waypoint, speed } => {
                    let gap = waypoint - state.altitude;
                    let needed = gap.abs() / speed;
                    if needed > left {
                        state.altitude += gap.signum() * speed * left;
                        break;
                    }
                    state.altitude = waypoint;
                    left -= needed;
                    state.phase = MotionPhase::Dwelling {
                        remaining: self.draw_dwell(rng),
                    };
                }
                MotionPhase::Dwelling { remaining } => {
                    if remaining > left {
                        state.phase = MotionPhase::Dwelling {
                            remaining: remaining - left,
                        };
                        break;
                    }
                    left -= remaining;
                    state.phase = self.draw_leg(rng);
                }
            }
        }
        assert!(
            state.horizontal_distance() <= self.radius
                && (0.0..=self.height).contains(&state.altitude),
            "UAV {} left the cylinder: {:?}",
            state.id,
            state
        );
        hop
    }
}

/// Uniform point in the disk of radius `r`.
pub fn uniform_in_disk<R: Rng + ?Sized>(r: f64, rng: &mut R) -> [f64; 2] {
    let [x, y]: [f64; 2] = UnitDisc.sample(rng);
    [r * x, r * y]
}

/// Unit-mean Gamma(m, 1/m) power gain.
pub fn nakagami_gain<R: Rng + ?Sized>(m: u32, rng: &mut R) -> f64 {
    let m = f64::from(m);
    Gamma::new(m, 1.0 / m)
        .expect("fading parameter is validated >= 1")
        .sample(rng)
}

/// One draw of the channel at a snapshot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotSample {
    pub distances: Vec<f64>,
    pub phases: Vec<Phase>,
    pub fading_m: Vec<u32>,
    pub serving_gain: f64,
    pub gains: Vec<f64>,
    /// `Σ g_i w_i^(-α)`.
    pub interference: f64,
    /// `g0 h0^(-α) / I`; infinite without interferers.
    pub sir: f64,
}

impl SnapshotSample {
    pub fn draw<R: Rng + ?Sized>(
        states: &[UavState],
        net: &NetworkConfig,
        fading: &FadingConfig,
        rng: &mut R,
    ) -> Self {
        let mut sample = SnapshotSample::default();
        sample.redraw(states, net, fading, rng);
        sample
    }

    /// Refill in place, reusing allocations.
    pub fn redraw<R: Rng + ?Sized>(
        &mut self,
        states: &[UavState],
        net: &NetworkConfig,
        fading: &FadingConfig,
        rng: &mut R,
    ) {
        let alpha = net.path_loss_exponent;
        self.distances.clear();
        self.phases.clear();
        self.fading_m.clear();
        self.gains.clear();
        self.serving_gain = nakagami_gain(fading.m0, rng);
        let mut interference = 0.0;
        for s in states {
            let w = s.distance();
            let m = fading.interferer_m(s.altitude);
            let g = nakagami_gain(m, rng);
            interference += g * w.powf(-alpha);
            self.distances.push(w);
            self.phases.push(s.phase());
            self.fading_m.push(m);
            self.gains.push(g);
        }
        self.interference = interference;
        self.sir = self.serving_gain * net.serving_altitude.powf(-alpha) / interference;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchTally {
    pub snapshots: u64,
    /// Snapshots with SIR above each threshold.
    pub covered: Vec<u64>,
    /// Interferer-snapshots spent dwelling.
    pub dwelling: u64,
    pub interferer_snapshots: u64,
}

impl BatchTally {
    fn new(thresholds: usize) -> Self {
        BatchTally {
            snapshots: 0,
            covered: vec![0; thresholds],
            dwelling: 0,
            interferer_snapshots: 0,
        }
    }

    fn merge(&mut self, other: &BatchTally) {
        self.snapshots += other.snapshots;
        for (a, b) in self.covered.iter_mut().zip(&other.covered) {
            *a += b;
        }
        self.dwelling += other.dwelling;
        self.interferer_snapshots += other.interferer_snapshots;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseHistograms {
    #[serde(rename = "static")]
    pub dwelling: Histogram,
    pub moving: Histogram,
}

impl PhaseHistograms {
    fn new(hi: f64, bins: usize) -> Self {
        PhaseHistograms {
            dwelling: Histogram::new(0.0, hi, bins),
            moving: Histogram::new(0.0, hi, bins),
        }
    }

    pub fn get(&self, phase: Phase) -> &Histogram {
        match phase {
            Phase::Static => &self.dwelling,
            Phase::Moving => &self.moving,
        }
    }

    fn get_mut(&mut self, phase: Phase) -> &mut Histogram {
        match phase {
            Phase::Static => &mut self.dwelling,
            Phase::Moving => &mut self.moving,
        }
    }

    fn merge(&mut self, other: &PhaseHistograms) -> Result<()> {
        self.dwelling.merge(&other.dwelling)?;
        self.moving.merge(&other.moving)
    }
}

/// Everything recorded by a campaign. Merging is by batch index, so the
/// result does not depend on how the work was split across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    /// Linear SIR thresholds.
    pub psi: Vec<f64>,
    pub interferers: usize,
    pub batches: Vec<BatchTally>,
    /// `stay_counts[n]`: snapshots with exactly `n` interferers dwelling.
    pub stay_counts: Vec<u64>,
    pub distance: PhaseHistograms,
    pub altitude: PhaseHistograms,
    /// Accepted hop lengths of hops starting at least `R'` inside the rim.
    pub interior_hops: RunningMoments,
    pub hop_proposals: u64,
    pub hops_stayed: u64,
    /// Interferer gain moments per fading parameter.
    pub interferer_gains: BTreeMap<u32, RunningMoments>,
    pub serving_gains: RunningMoments,
}

impl Tally {
    fn new(psi: &[f64], net: &NetworkConfig, batches: usize) -> Self {
        Tally {
            psi: psi.to_vec(),
            interferers: net.interferers,
            batches: vec![BatchTally::new(psi.len()); batches],
            stay_counts: vec![0; net.interferers + 1],
            distance: PhaseHistograms::new(net.max_distance(), DISTANCE_BINS),
            altitude: PhaseHistograms::new(net.height, ALTITUDE_BINS),
            interior_hops: RunningMoments::default(),
            hop_proposals: 0,
            hops_stayed: 0,
            interferer_gains: BTreeMap::new(),
            serving_gains: RunningMoments::default(),
        }
    }

    pub fn merge(&mut self, other: &Tally) -> Result<()> {
        if self.psi != other.psi
            || self.interferers != other.interferers
            || self.batches.len() != other.batches.len()
        {
            return Err(Error::Consistency(
                "cannot merge tallies of different campaigns".into(),
            ));
        }
        for (a, b) in self.batches.iter_mut().zip(&other.batches) {
            a.merge(b);
        }
        for (a, b) in self.stay_counts.iter_mut().zip(&other.stay_counts) {
            *a += b;
        }
        self.distance.merge(&other.distance)?;
        self.altitude.merge(&other.altitude)?;
        self.interior_hops.merge(&other.interior_hops);
        self.hop_proposals += other.hop_proposals;
        self.hops_stayed += other.hops_stayed;
        for (m, moments) in &other.interferer_gains {
            self.interferer_gains.entry(*m).or_default().merge(moments);
        }
        self.serving_gains.merge(&other.serving_gains);
        Ok(())
    }

    pub fn snapshots(&self) -> u64 {
        self.batches.iter().map(|b| b.snapshots).sum()
    }

    /// Empirical coverage per threshold with batch-means standard errors.
    pub fn coverage(&self) -> Vec<Estimate> {
        (0..self.psi.len())
            .map(|i| {
                let per_batch: Vec<f64> = self
                    .batches
                    .iter()
                    .filter(|b| b.snapshots > 0)
                    .map(|b| b.covered[i] as f64 / b.snapshots as f64)
                    .collect();
                batch_means(&per_batch)
            })
            .collect()
    }

    pub fn dwelling_fraction(&self) -> Estimate {
        let per_batch: Vec<f64> = self
            .batches
            .iter()
            .filter(|b| b.interferer_snapshots > 0)
            .map(|b| b.dwelling as f64 / b.interferer_snapshots as f64)
            .collect();
        batch_means(&per_batch)
    }

    /// Relative frequencies of the number of dwelling interferers.
    pub fn stay_count_law(&self) -> Vec<f64> {
        let total: u64 = self.stay_counts.iter().sum();
        self.stay_counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect()
    }
}

/// Inputs of one simulation campaign.
#[derive(Debug, Clone, Copy)]
pub struct Campaign<'a> {
    pub network: &'a NetworkConfig,
    pub fading: &'a FadingConfig,
    pub mobility: &'a MobilityConfig,
    /// Linear SIR thresholds.
    pub psi: &'a [f64],
    pub sim: SimConfig,
}

impl Campaign<'_> {
    fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.fading.validate(self.network.height)?;
        self.mobility.validate()?;
        self.sim.validate()?;
        if let Some(bad) = self.psi.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Domain {
                what: "SIR threshold",
                value: *bad,
                reason: "thresholds must be finite and > 0 (linear scale)".into(),
            });
        }
        Ok(())
    }
}

/// Run a single replication of `n_snapshots` snapshots from `seed`.
pub fn run_campaign(c: &Campaign<'_>, seed: u64, n_snapshots: u64) -> Result<Tally> {
    c.validate()?;
    let sim = &c.sim;
    if n_snapshots < sim.batches as u64 {
        return Err(Error::config(
            "sim.n_snapshots",
            "need at least one snapshot per batch",
        ));
    }
    let model = MobilityModel::new(c.network, c.mobility, sim.boundary)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uavs: Vec<UavState> = (0..c.network.interferers)
        .map(|id| model.initial_state(id, &mut rng))
        .collect();
    let mut tally = Tally::new(c.psi, c.network, sim.batches);
    let interior = c.network.radius - c.mobility.r_prime;

    let advance = |uavs: &mut [UavState], rng: &mut ChaCha8Rng, tally: &mut Tally, record: bool| {
        for u in uavs.iter_mut() {
            if let Some(hop) = model.step(u, sim.dt, rng) {
                if !record {
                    continue;
                }
                tally.hop_proposals += hop.proposals as u64;
                match hop.length {
                    Some(len) if hop.start_radius <= interior => tally.interior_hops.push(len),
                    Some(_) => {}
                    None => tally.hops_stayed += 1,
                }
            }
        }
    };

    for _ in 0..sim.warmup_steps {
        advance(&mut uavs, &mut rng, &mut tally, false);
    }

    let mut sample = SnapshotSample::default();
    let batches = sim.batches as u64;
    for j in 0..n_snapshots {
        for _ in 0..sim.stride {
            advance(&mut uavs, &mut rng, &mut tally, true);
        }
        sample.redraw(&uavs, c.network, c.fading, &mut rng);
        let batch = &mut tally.batches[(j * batches / n_snapshots) as usize];
        batch.snapshots += 1;
        for (count, &psi) in batch.covered.iter_mut().zip(c.psi) {
            if sample.sir > psi {
                *count += 1;
            }
        }
        let dwelling = sample
            .phases
            .iter()
            .filter(|&&p| p == Phase::Static)
            .count();
        batch.dwelling += dwelling as u64;
        batch.interferer_snapshots += uavs.len() as u64;
        tally.stay_counts[dwelling] += 1;
        for (u, (&w, &phase)) in uavs.iter().zip(sample.distances.iter().zip(&sample.phases)) {
            tally.distance.get_mut(phase).add(w);
            tally.altitude.get_mut(phase).add(u.altitude);
        }
        for (&m, &g) in sample.fading_m.iter().zip(&sample.gains) {
            tally.interferer_gains.entry(m).or_default().push(g);
        }
        tally.serving_gains.push(sample.serving_gain);
    }
    Ok(tally)
}

/// Distinct per-replication seeds derived from one base seed.
pub fn replication_seeds(base: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    let mut seen = HashSet::new();
    let mut seeds = Vec::with_capacity(count);
    while seeds.len() < count {
        let s: u64 = rng.gen();
        if seen.insert(s) {
            seeds.push(s);
        }
    }
    seeds
}

/// Run one replication per seed in parallel and merge them in seed order.
/// `c.sim.n_snapshots` is split evenly, the remainder going to the first seeds.
pub fn run_replications(c: &Campaign<'_>, seeds: &[u64]) -> Result<Tally> {
    if seeds.is_empty() {
        return Err(Error::config("sim.replications", "need at least one seed"));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = seeds.iter().find(|s| !seen.insert(**s)) {
        return Err(Error::config(
            "sim.seed",
            format!(
                "seed {dup} is used by more than one replication; replications must be independent"
            ),
        ));
    }
    let k = seeds.len() as u64;
    let base = c.sim.n_snapshots / k;
    let extra = c.sim.n_snapshots % k;
    let parts: Vec<Result<Tally>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| run_campaign(c, seed, base + u64::from((i as u64) < extra)))
        .collect();
    let mut parts = parts.into_iter();
    let mut total = parts.next().expect("at least one replication")?;
    for part in parts {
        total.merge(&part?)?;
    }
    Ok(total)
}

/// Phase-conditioned empirical laws of one campaign.
#[derive(Debug, Clone, Copy)]
pub struct PhaseSplit<'a> {
    tally: &'a Tally,
}

pub fn snapshot_distance_phase_split(tally: &Tally) -> PhaseSplit<'_> {
    PhaseSplit { tally }
}

impl PhaseSplit<'_> {
    /// `(w, F̂(w))` at the histogram edges.
    pub fn empirical_cdf(&self, phase: Phase) -> Vec<(f64, f64)> {
        let h = self.tally.distance.get(phase);
        let total = h.total() as f64;
        let mut cumulative = 0u64;
        let mut out = vec![(h.lo, 0.0)];
        for (count, edge) in h.counts.iter().zip(h.edges().into_iter().skip(1)) {
            cumulative += count;
            out.push((edge, cumulative as f64 / total));
        }
        out
    }

    pub fn samples(&self, phase: Phase) -> u64 {
        self.tally.distance.get(phase).total()
    }

    /// KS distance (at histogram resolution) against the model distance CDF.
    pub fn distance_ks(&self, phase: Phase, net: &NetworkConfig) -> Result<f64> {
        let law = DistanceDistribution::for_network(phase, net)?;
        let h = self.tally.distance.get(phase);
        let mut err = None;
        let d = h.ks_at_edges(|w| {
            law.cdf(w.min(law.max_distance())).unwrap_or_else(|e| {
                err = Some(e);
                f64::NAN
            })
        });
        match err {
            Some(e) => Err(e),
            None => Ok(d),
        }
    }

    pub fn altitude_chi_square(&self, phase: Phase, height: f64) -> Result<ChiSquareTest> {
        let law = AltitudePdf::new(phase, height);
        let h = self.tally.altitude.get(phase);
        let edges = h.edges();
        let probs: Vec<f64> = edges
            .windows(2)
            .map(|e| law.cdf(e[1]) - law.cdf(e[0]))
            .collect();
        chi_square(&h.counts, &probs)
    }

    /// Total-variation distance of the dwelling-count law from `Binomial(M, p_s)`.
    pub fn stay_count_tv(&self, p_s: f64) -> Result<f64> {
        let model = binomial_pmf(self.tally.interferers as u64, p_s)?;
        Ok(total_variation(&self.tally.stay_count_law(), &model))
    }
}
