//! Altitude and UAV-to-user distance laws of an interferer in each mobility phase.
//!
//! An interferer is either dwelling at a waypoint while making spatial excursions
//! ([`Phase::Static`], altitude uniform on `[0, H]`) or climbing/descending along a
//! waypoint leg ([`Phase::Moving`], altitude density `6x/H^2 - 6x^2/H^3`). Its
//! horizontal position is uniform on the disk of radius `R` in both phases, so the
//! distance `W = sqrt(h^2 + Z^2)` has a three-branch law with breakpoints at `H`
//! and `R` (the branch order requires `H < R`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// Mobility phase of an interferer at a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Dwelling at a waypoint, making spatial random-walk hops.
    Static,
    /// Travelling vertically towards the next waypoint.
    Moving,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::Static, Phase::Moving];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Static => "static",
            Phase::Moving => "moving",
        }
    }
}

/// Round-off allowed when clamping CDF values into `[0, 1]`.
const CDF_CLAMP: f64 = 1e-14;
const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudePdf {
    pub phase: Phase,
    pub height: f64,
}

impl AltitudePdf {
    pub fn new(phase: Phase, height: f64) -> Self {
        AltitudePdf { phase, height }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let h = self.height;
        if !(0.0..=h).contains(&x) {
            return 0.0;
        }
        match self.phase {
            Phase::Static => 1.0 / h,
            Phase::Moving => 6.0 * x / (h * h) - 6.0 * x * x / (h * h * h),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let u = (x / self.height).clamp(0.0, 1.0);
        match self.phase {
            Phase::Static => u,
            Phase::Moving => u * u * (3.0 - 2.0 * u),
        }
    }

    /// Inverse CDF. The moving phase solves `3u^2 - 2u^3 = p` by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self.phase {
            Phase::Static => p * self.height,
            Phase::Moving => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                while hi - lo > BISECTION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if mid * mid * (3.0 - 2.0 * mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi) * self.height
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// Closed-form law of the distance from an interferer to the reference user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceDistribution {
    phase: Phase,
    radius: f64,
    height: f64,
}

impl DistanceDistribution {
    pub fn new(phase: Phase, radius: f64, height: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0 && height.is_finite() && height > 0.0) {
            return Err(Error::config(
                "distance distribution",
                format!("radius and height must be positive (R = {radius}, H = {height})"),
            ));
        }
        if height >= radius {
            return Err(Error::UnsupportedGeometry { height, radius });
        }
        Ok(DistanceDistribution {
            phase,
            radius,
            height,
        })
    }

    pub fn for_network(phase: Phase, net: &NetworkConfig) -> Result<Self> {
        Self::new(phase, net.radius, net.height)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn altitude(&self) -> AltitudePdf {
        AltitudePdf::new(self.phase, self.height)
    }

    /// Upper end of the support, `sqrt(R^2 + H^2)`.
    pub fn max_distance(&self) -> f64 {
        self.radius.hypot(self.height)
    }

    /// Branch breakpoints `[0, H, R, sqrt(R^2 + H^2)]`.
    pub fn breakpoints(&self) -> [f64; 4] {
        [0.0, self.height, self.radius, self.max_distance()]
    }

    fn check_support(&self, w: f64, what: &'static str) -> Result<f64> {
        let top = self.max_distance();
        let slack = 1e-12 * top;
        if !(w.is_finite() && w >= -slack && w <= top + slack) {
            return Err(Error::Domain {
                what,
                value: w,
                reason: format!("support is [0, {top}]"),
            });
        }
        Ok(w.clamp(0.0, top))
    }

    pub fn cdf(&self, w: f64) -> Result<f64> {
        let w = self.check_support(w, "distance cdf")?;
        let (r, h) = (self.radius, self.height);
        let r2 = r * r;
        let w2 = w * w;
        let value = match self.phase {
            Phase::Static => {
                if w < h {
                    2.0 / 3.0 * w2 * w / (r2 * h)
                } else if w < r {
                    (w2 - h * h / 3.0) / r2
                } else {
                    let e = w2 - r2;
                    (w2 - h * h / 3.0) / r2 - 2.0 / 3.0 * e * e.sqrt() / (r2 * h)
                }
            }
            Phase::Moving => {
                let h2 = h * h;
                if w < h {
                    let w4 = w2 * w2;
                    -0.8 * w4 * w / (r2 * h2 * h) + 1.5 * w4 / (r2 * h2)
                } else if w < r {
                    (w2 - 0.3 * h2) / r2
                } else {
                    let e = w2 - r2;
                    (w2 - 0.3 * h2) / r2 - 1.5 * e * e / (r2 * h2)
                        + 0.8 * e * e * e.sqrt() / (r2 * h2 * h)
                }
            }
        };
        if !(-CDF_CLAMP..=1.0 + CDF_CLAMP).contains(&value) {
            return Err(Error::Consistency(format!(
                "{} distance cdf at w = {w} evaluated to {value}",
                self.phase.name()
            )));
        }
        Ok(value.clamp(0.0, 1.0))
    }

    pub fn pdf(&self, w: f64) -> Result<f64> {
        let w = self.check_support(w, "distance pdf")?;
        Ok(self.density(w))
    }

    /// Density without the support check; zero outside `[0, sqrt(R^2 + H^2)]`.
    pub(crate) fn density(&self, w: f64) -> f64 {
        if !(0.0..=self.max_distance()).contains(&w) {
            return 0.0;
        }
        let (r, h) = (self.radius, self.height);
        let r2 = r * r;
        let value = match self.phase {
            Phase::Static => {
                if w < h {
                    2.0 * w * w / (r2 * h)
                } else if w < r {
                    2.0 * w / r2
                } else {
                    2.0 * w / r2 - 2.0 * w * (w * w - r2).sqrt() / (r2 * h)
                }
            }
            Phase::Moving => {
                let h2 = h * h;
                if w < h {
                    let w3 = w * w * w;
                    -4.0 * w3 * w / (r2 * h2 * h) + 6.0 * w3 / (r2 * h2)
                } else if w < r {
                    2.0 * w / r2
                } else {
                    let e = w * w - r2;
                    2.0 * w / r2 - 6.0 * w * e / (r2 * h2) + 4.0 * w * e * e.sqrt() / (r2 * h2 * h)
                }
            }
        };
        // the last branch vanishes at the top of the support; clip round-off
        value.max(0.0)
    }

    /// Draw a distance: altitude from the phase law, horizontal radius `R sqrt(U)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let h = self.altitude().sample(rng);
        let z = self.radius * rng.gen::<f64>().sqrt();
        h.hypot(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};
    use proptest::prelude::*;

    fn dist(phase: Phase) -> DistanceDistribution {
        DistanceDistribution::new(phase, 40.0, 30.0).unwrap()
    }

    #[test]
    fn anchor_values() {
        let st = dist(Phase::Static);
        let mo = dist(Phase::Moving);
        assert_eq!(st.cdf(0.0).unwrap(), 0.0);
        assert_eq!(mo.cdf(0.0).unwrap(), 0.0);
        assert!((st.cdf(30.0).unwrap() - 0.375).abs() < 1e-15);
        assert!((st.cdf(50.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((mo.cdf(50.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((mo.cdf(30.0).unwrap() - 0.39375).abs() < 1e-15);
        // middle branch 1 - (3/10) H^2/R^2
        assert!((mo.cdf(40.0).unwrap() - 0.83125).abs() < 1e-15);
        assert!((st.pdf(35.0).unwrap() - 0.04375).abs() < 1e-16);
        assert_eq!(st.pdf(0.0).unwrap(), 0.0);
        assert_eq!(mo.pdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn branches_meet_at_breakpoints() {
        for phase in Phase::ALL {
            let d = dist(phase);
            for &bp in &[30.0, 40.0] {
                let below = d.cdf(bp * (1.0 - 1e-15)).unwrap();
                let at = d.cdf(bp).unwrap();
                assert!((below - at).abs() < 1e-12, "{phase:?} at {bp}");
            }
        }
        // static CDF at H equals (2/3) H^2 / R^2 from both sides
        let expected = 2.0 / 3.0 * 900.0 / 1600.0;
        assert!((dist(Phase::Static).cdf(30.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn pdf_is_numerical_derivative_of_cdf() {
        for phase in Phase::ALL {
            let d = dist(phase);
            for &w in &[5.0, 29.0, 35.0, 45.0, 49.5] {
                let h = 1e-5;
                let fd = (d.cdf(w + h).unwrap() - d.cdf(w - h).unwrap()) / (2.0 * h);
                assert!((fd - d.pdf(w).unwrap()).abs() < 1e-8, "{phase:?} w={w}");
            }
        }
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        let opts = QuadOptions::default();
        for phase in Phase::ALL {
            let d = dist(phase);
            let top = d.max_distance();
            for i in 1..=100 {
                let w = top * f64::from(i) / 100.0;
                let pts: Vec<f64> = d
                    .breakpoints()
                    .iter()
                    .copied()
                    .filter(|&p| p < w)
                    .chain([w])
                    .collect();
                let integral = crate::quadrature::integrate_with_breakpoints(
                    |x| d.pdf(x).unwrap(),
                    &pts,
                    &opts,
                )
                .unwrap()
                .value;
                assert!(
                    (integral - d.cdf(w).unwrap()).abs() < 1e-9,
                    "{phase:?} w={w}"
                );
            }
            let total = integrate(
                |x| d.pdf(x).unwrap(),
                0.0,
                top,
                &QuadOptions::relative(1e-12),
            )
            .unwrap();
            assert!((total.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn out_of_support_is_an_error() {
        let d = dist(Phase::Static);
        assert!(matches!(d.cdf(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(d.pdf(50.1), Err(Error::Domain { .. })));
        assert!(matches!(
            DistanceDistribution::new(Phase::Moving, 30.0, 30.0),
            Err(Error::UnsupportedGeometry { .. })
        ));
    }

    #[test]
    fn moving_altitude_quantile_inverts_cdf() {
        let alt = AltitudePdf::new(Phase::Moving, 30.0);
        for &p in &[0.0, 0.01, 0.3, 0.5, 0.77, 1.0] {
            let x = alt.quantile(p);
            assert!((alt.cdf(x) - p).abs() < 1e-11);
        }
    }

    #[test]
    fn flat_cylinder_reduces_to_disk() {
        use rand::SeedableRng;
        let d = DistanceDistribution::new(Phase::Moving, 40.0, 1e-6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let w = d.sample(&mut rng);
            assert!((0.0..=40.0 + 1e-6).contains(&w));
        }
        for &w in &[5.0, 20.0, 39.0] {
            assert!((d.cdf(w).unwrap() - w * w / 1600.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(w1 in 0.0f64..50.0, w2 in 0.0f64..50.0, moving in any::<bool>()) {
            let d = dist(if moving { Phase::Moving } else { Phase::Static });
            let (lo, hi) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
            prop_assert!(d.cdf(lo).unwrap() <= d.cdf(hi).unwrap() + 1e-15);
            prop_assert!(d.pdf(lo).unwrap() >= 0.0);
        }
    }
}
