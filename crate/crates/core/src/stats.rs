//! Goodness-of-fit statistics and histogram tallies used by the simulator checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::error::{Error, Result};

/// Fixed-width histogram on `[lo, hi]`; the top edge is folded into the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Samples falling outside `[lo, hi]`.
    pub outside: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(
            hi > lo && bins > 0,
            "histogram needs hi > lo and at least one bin"
        );
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            outside: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, x: f64) {
        if !(self.lo..=self.hi).contains(&x) {
            self.outside += 1;
            return;
        }
        let n = self.counts.len();
        let idx = ((x - self.lo) / (self.hi - self.lo) * n as f64) as usize;
        self.counts[idx.min(n - 1)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        let width = (self.hi - self.lo) / n as f64;
        (0..=n).map(|i| self.lo + width * i as f64).collect()
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.bins() != other.bins() {
            return Err(Error::Consistency(
                "cannot merge histograms with different binning".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
        Ok(())
    }

    /// Largest gap between the empirical and model CDF over the bin edges.
    ///
    /// This under-estimates the exact KS distance by at most the mass of one bin.
    pub fn ks_at_edges<F: FnMut(f64) -> f64>(&self, mut cdf: F) -> f64 {
        let total = self.total() as f64;
        if total == 0.0 {
            return 0.0;
        }
        let mut cumulative = 0u64;
        let mut worst: f64 = (cdf(self.lo)).abs();
        for (count, edge) in self.counts.iter().zip(self.edges().into_iter().skip(1)) {
            cumulative += count;
            worst = worst.max((cumulative as f64 / total - cdf(edge)).abs());
        }
        worst
    }
}

/// Exact one-sample Kolmogorov–Smirnov distance; sorts `samples` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of observed counts against model bin probabilities.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != probabilities.len() || observed.len() < 2 {
        return Err(Error::Consistency(
            "chi-square needs matching bins (at least two)".into(),
        ));
    }
    let n: u64 = observed.iter().sum();
    let n = n as f64;
    let mut statistic = 0.0;
    for (&o, &p) in observed.iter().zip(probabilities) {
        let e = n * p;
        if e <= 0.0 {
            return Err(Error::Consistency(format!("empty expected bin (p = {p})")));
        }
        statistic += (o as f64 - e).powi(2) / e;
    }
    let dof = observed.len() - 1;
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::Consistency(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - law.cdf(statistic),
    })
}

pub fn binomial_pmf(n: u64, p: f64) -> Result<Vec<f64>> {
    let law = Binomial::new(p, n).map_err(|e| Error::Domain {
        what: "binomial probability",
        value: p,
        reason: e.to_string(),
    })?;
    Ok((0..=n).map(|k| law.pmf(k)).collect())
}

/// `½ Σ |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share support");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Mean and standard error of a statistic from equally weighted batch means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

pub fn batch_means(batches: &[f64]) -> Estimate {
    let k = batches.len();
    if k == 0 {
        return Estimate {
            mean: f64::NAN,
            std_error: f64::NAN,
        };
    }
    let mean = batches.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return Estimate {
            mean,
            std_error: f64::NAN,
        };
    }
    let var = batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Estimate {
        mean,
        std_error: (var / k as f64).sqrt(),
    }
}

/// Streaming mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}
