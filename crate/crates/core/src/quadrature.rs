//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! Panels are kept in a max-heap keyed by their error estimate; the worst panel is
//! bisected until the summed estimate meets `max(abs_tol, rel_tol * |I|)`.
//! Callers pass breakpoints where the integrand has kinks so that no panel
//! straddles one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Weights of the embedded 7-point Gauss rule at XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    /// Purely relative stopping rule, for integrands whose magnitude spans many decades.
    pub fn relative(rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol,
            ..QuadOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = kronrod.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs().max(roundoff);
    Panel {
        lo,
        hi,
        value,
        error,
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_with_breakpoints(f, &[a, b], opts)
}

/// Integrate `f` over `[points[0], points[last]]`, never straddling an interior point.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2
        || points
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
    {
        return Err(Error::Domain {
            what: "quadrature breakpoints",
            value: points.first().copied().unwrap_or(f64::NAN),
            reason: "need at least two non-decreasing breakpoints".into(),
        });
    }
    let mut heap: BinaryHeap<Panel> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();
    let mut panels = heap.len();
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::Numerical {
                context: "adaptive quadrature (non-finite integrand)".into(),
                partial: value,
                bound: error,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error,
                panels,
            });
        }
        if panels >= opts.max_panels {
            return Err(Error::Numerical {
                context: format!("adaptive quadrature after {panels} panels"),
                partial: value,
                bound: error,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                panels,
            });
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // cannot split further in floating point
            return Err(Error::Numerical {
                context: "adaptive quadrature (panel below resolution)".into(),
                partial: value,
                bound: error,
            });
        }
        heap.push(kronrod15(&f, worst.lo, mid));
        heap.push(kronrod15(&f, mid, worst.hi));
        panels += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // G7 is exact to degree 13, so the estimate vanishes and one panel suffices
        let r = integrate(|x| x.powi(13), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0 / 14.0).abs() < 1e-15);
        assert_eq!(r.panels, 1);
        // K15 alone is exact to degree 22
        let r = integrate(|x| x.powi(22), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_transcendental() {
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, &QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_square_root_singularity() {
        // ∫_0^1 sqrt(x) dx = 2/3
        let r = integrate(f64::sqrt, 0.0, 1.0, &QuadOptions::relative(1e-12)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
        // ∫_0^1 x^(-1/2) dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &QuadOptions::relative(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let f = |x: f64| (x - 0.3).abs();
        let r = integrate_with_breakpoints(f, &[0.0, 0.3, 1.0], &QuadOptions::default()).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
        assert_eq!(r.panels, 2);
    }

    #[test]
    fn relative_mode_resolves_tiny_integrals() {
        let r = integrate(|x| 1e-30 * x.exp(), 0.0, 1.0, &QuadOptions::relative(1e-12)).unwrap();
        let exact = 1e-30 * (std::f64::consts::E - 1.0);
        assert!((r.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions {
            max_panels: 3,
            ..QuadOptions::relative(1e-14)
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }
}
