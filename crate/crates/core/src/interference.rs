//! Laplace transform of the aggregate interference at the reference user.
//!
//! With `M` interferers that independently dwell with probability `p_s`,
//!
//! ```text
//! L_I(s) = Σ_n C(M, n) [p_s Υ_st(s)]^n [(1 - p_s) Υ_mo(s)]^(M - n)
//!        = [p_s Υ_st(s) + (1 - p_s) Υ_mo(s)]^M
//! Υ(s)   = E_W[(1 + s W^(-α) / m)^(-m)]
//! ```
//!
//! For `α = 2` each `Υ` is a finite combination of power integrals of the
//! per-branch densities (the `I_l` and `J_l` terms below), all of which are
//! `2F1(l, b; b + 1; z)` values. Expanding `(y / (y + s/m))^m` binomially gives the
//! textbook alternating sum over `l`; that sum cancels catastrophically once
//! `s / m` dwarfs `H^2` (at `s = 1e6` the `O(1)` terms cancel down to `~1e-8`).
//! [`UpsilonTerm::closed_form`] therefore sums it analytically: the `m`-th
//! difference of `I_l` in `l` is a single `I_m` with `κ` raised by `2m`, and the
//! `J` terms become a positive sum of the same family. The literal alternating
//! form is kept as [`UpsilonTerm::binomial_expansion`].

use crate::config::{FadingConfig, NetworkConfig};
use crate::distributions::{DistanceDistribution, Phase};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::{integrate_with_breakpoints, QuadOptions};
use crate::special::{hyp2f1, pochhammer, Hyp2F1Args};

/// Relative tolerance of every Υ quadrature.
pub const UPSILON_QUAD_REL_TOL: f64 = 1e-11;

fn quad_options() -> QuadOptions {
    // purely relative: Υ spans many decades across s
    QuadOptions::relative(UPSILON_QUAD_REL_TOL)
}

/// `α = 2` closed-form integrals at a fixed Laplace argument `s` and fading `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    radius: f64,
    height: f64,
    s: f64,
    m: u32,
}

impl ClosedForm {
    pub fn new(net: &NetworkConfig, s: f64, m: u32) -> Result<Self> {
        net.validate()?;
        net.require_closed_form_geometry()?;
        if net.path_loss_exponent != 2.0 {
            return Err(Error::Unsupported(format!(
                "closed forms exist only for path-loss exponent 2 (got {})",
                net.path_loss_exponent
            )));
        }
        check_laplace_argument(s)?;
        if m == 0 {
            return Err(Error::config("fading m", "must be >= 1"));
        }
        Ok(ClosedForm {
            radius: net.radius,
            height: net.height,
            s,
            m,
        })
    }

    /// `m / s`, the scale of `y = w^2` inside `(1 + m y / s)^(-l)`.
    fn inverse_scale(&self) -> f64 {
        f64::from(self.m) / self.s
    }

    /// `∫_0^upper y^(β-1) (1 + m y / s)^(-l) dy`.
    fn power_integral(&self, l: u32, beta: f64, upper: f64) -> Result<f64> {
        if upper == 0.0 {
            return Ok(0.0);
        }
        let plain = upper.powf(beta) / beta;
        if l == 0 {
            return Ok(plain);
        }
        if self.s == 0.0 {
            return Ok(0.0);
        }
        let z = -self.inverse_scale() * upper;
        Ok(plain * hyp2f1(&Hyp2F1Args::new(l, beta, z)?)?)
    }

    /// `I_l(a, b, ℓ, κ) = ℓ/(2R^2) ∫_a^b y^(κ/2 - 1) (1 + m y / s)^(-l) dy`, i.e.
    /// `ℓ/R^2 [b^(κ/2)/κ F(l, κ/2; 1 + κ/2; -m b/s) - (same at a)]`.
    pub fn integral_i(&self, l: u32, lower: f64, upper: f64, ell: f64, kappa: u32) -> Result<f64> {
        if !(1..=5).contains(&kappa) {
            return Err(Error::Domain {
                what: "I_l exponent κ",
                value: f64::from(kappa),
                reason: "κ must lie in 1..=5".into(),
            });
        }
        if !(lower >= 0.0 && upper > lower) {
            return Err(Error::Domain {
                what: "I_l limits",
                value: lower,
                reason: format!("need 0 <= a < b, got a = {lower}, b = {upper}"),
            });
        }
        let beta = 0.5 * f64::from(kappa);
        let top = self.power_integral(l, beta, upper)?;
        let bottom = self.power_integral(l, beta, lower)?;
        Ok(ell / (2.0 * self.radius * self.radius) * (top - bottom))
    }

    /// `J_l(a3, a4, ℓ, κ) = ℓ/(2R^2) ∫_{R^2}^{R^2+H^2} (y - R^2)^(κ/2) (1 + m y / s)^(-l) dy`
    /// `= ℓ H^(κ+2) / ((κ+2) R^2) (s / (s + m R^2))^l F(l, κ/2+1; κ/2+2; -H^2/(R^2 + s/m))`.
    ///
    /// At `s = 0` the prefactor vanishes for `l >= 1`.
    pub fn integral_j(&self, l: u32, ell: f64, kappa: u32) -> Result<f64> {
        if kappa != 1 && kappa != 3 {
            return Err(Error::Domain {
                what: "J_l exponent κ",
                value: f64::from(kappa),
                reason: "κ must be 1 or 3".into(),
            });
        }
        let (r2, h2) = (self.radius * self.radius, self.height * self.height);
        let kf = f64::from(kappa);
        let base = ell * self.height.powf(kf + 2.0) / ((kf + 2.0) * r2);
        if l == 0 {
            return Ok(base);
        }
        let mf = f64::from(self.m);
        let damping = (self.s / (self.s + mf * r2)).powi(l as i32);
        if damping == 0.0 {
            return Ok(0.0);
        }
        let z = -h2 / (r2 + self.s / mf);
        Ok(base * damping * hyp2f1(&Hyp2F1Args::new(l, 0.5 * kf + 1.0, z)?)?)
    }

    /// `Σ_l C(m,l) (-1)^l I_l(a, b, ℓ, κ) = (m/s)^m I_m(a, b, ℓ, κ + 2m)`.
    fn collapsed_i(&self, lower: f64, upper: f64, ell: f64, kappa: u32) -> Result<f64> {
        let beta = 0.5 * f64::from(kappa) + f64::from(self.m);
        let m = self.m as i32;
        let c = self.inverse_scale();
        let scaled = |u: f64| -> Result<f64> {
            if u == 0.0 {
                return Ok(0.0);
            }
            let x = c * u;
            let f = hyp2f1(&Hyp2F1Args::new(self.m, beta, -x)?)?;
            Ok(x.powi(m) * u.powf(beta - f64::from(self.m)) / beta * f)
        };
        let diff = scaled(upper)? - scaled(lower)?;
        Ok(ell / (2.0 * self.radius * self.radius) * diff)
    }

    /// `Σ_l C(m,l) (-1)^l J_l(ℓ, κ)`: expanding `y^m = (R^2 + z)^m` leaves positive terms
    /// `(m / (s + m R^2))^m Σ_j C(m,j) R^(2(m-j)) (H^2)^β / β F(m, β; β+1; -H^2/(R^2 + s/m))`
    /// with `β = κ/2 + j + 1`.
    fn collapsed_j(&self, ell: f64, kappa: u32) -> Result<f64> {
        let (r2, h2) = (self.radius * self.radius, self.height * self.height);
        let mf = f64::from(self.m);
        let z = -h2 / (r2 + self.s / mf);
        let prefactor = (mf / (self.s + mf * r2)).powi(self.m as i32);
        let mut binom = 1.0;
        let mut sum = 0.0;
        for j in 0..=self.m {
            if j > 0 {
                binom *= f64::from(self.m - j + 1) / f64::from(j);
            }
            let beta = 0.5 * f64::from(kappa) + f64::from(j) + 1.0;
            let f = hyp2f1(&Hyp2F1Args::new(self.m, beta, z)?)?;
            sum += binom * r2.powi((self.m - j) as i32) * h2.powf(beta) / beta * f;
        }
        Ok(ell / (2.0 * r2) * prefactor * sum)
    }
}

/// One `I_l` or `J_l` term of a Υ decomposition, with its sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    I {
        sign: f64,
        lower: f64,
        upper: f64,
        ell: f64,
        kappa: u32,
    },
    J {
        sign: f64,
        ell: f64,
        kappa: u32,
    },
}

/// Breakpoints `a1..a4` and coefficients `ℓ1..ℓ5` of the Υ decomposition of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonTerm {
    pub phase: Phase,
    /// `[0, H^α, R^α, (R^2 + H^2)^(α/2)]`
    pub breakpoints: [f64; 4],
    /// `[2/H, 2/H, 6/H^2, 4/H^3, 6R^2/H^2]`
    pub ell: [f64; 5],
    network: NetworkConfig,
}

impl UpsilonTerm {
    pub fn new(phase: Phase, net: &NetworkConfig) -> Result<Self> {
        net.validate()?;
        net.require_closed_form_geometry()?;
        let (r, h, alpha) = (net.radius, net.height, net.path_loss_exponent);
        let breakpoints = [
            0.0,
            h.powf(alpha),
            r.powf(alpha),
            (r * r + h * h).powf(0.5 * alpha),
        ];
        let ell = [
            2.0 / h,
            2.0 / h,
            6.0 / (h * h),
            4.0 / (h * h * h),
            6.0 * r * r / (h * h),
        ];
        Ok(UpsilonTerm {
            phase,
            breakpoints,
            ell,
            network: *net,
        })
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let [a1, a2, a3, a4] = self.breakpoints;
        let [l1, l2, l3, l4, l5] = self.ell;
        let i = |sign: f64, lower: f64, upper: f64, ell: f64, kappa: u32| Piece::I {
            sign,
            lower,
            upper,
            ell,
            kappa,
        };
        match self.phase {
            Phase::Static => vec![
                i(1.0, a1, a2, l1, 3),
                i(1.0, a2, a3, 2.0, 2),
                i(1.0, a3, a4, 2.0, 2),
                Piece::J {
                    sign: -1.0,
                    ell: l2,
                    kappa: 1,
                },
            ],
            Phase::Moving => vec![
                i(1.0, a1, a2, l3, 4),
                i(-1.0, a1, a2, l4, 5),
                i(1.0, a2, a3, 2.0, 2),
                i(1.0, a3, a4, 2.0, 2),
                i(-1.0, a3, a4, l3, 4),
                i(1.0, a3, a4, l5, 2),
                Piece::J {
                    sign: 1.0,
                    ell: l4,
                    kappa: 3,
                },
            ],
        }
    }

    /// Υ(s) from the binomially collapsed closed form (production path).
    pub fn closed_form(&self, s: f64, m: u32) -> Result<f64> {
        if s == 0.0 {
            check_laplace_argument(s)?;
            return Ok(1.0);
        }
        let cf = ClosedForm::new(&self.network, s, m)?;
        self.pieces().iter().try_fold(0.0, |acc, piece| {
            let v = match *piece {
                Piece::I {
                    sign,
                    lower,
                    upper,
                    ell,
                    kappa,
                } => sign * cf.collapsed_i(lower, upper, ell, kappa)?,
                Piece::J { sign, ell, kappa } => sign * cf.collapsed_j(ell, kappa)?,
            };
            Ok(acc + v)
        })
    }

    /// Υ(s) as the literal alternating sum `Σ_l C(m,l) (-1)^l [Σ pieces]`.
    ///
    /// The terms are `O(1)` while the result decays like `(m H^2 / s)^m`, so accuracy
    /// degrades once `s / m` passes `H^2`. Kept as an independent check of the
    /// collapsed form at moderate `s`.
    pub fn binomial_expansion(&self, s: f64, m: u32) -> Result<f64> {
        let cf = ClosedForm::new(&self.network, s, m)?;
        let pieces = self.pieces();
        let mut total = 0.0;
        let mut binom = 1.0;
        for l in 0..=m {
            if l > 0 {
                binom *= f64::from(m - l + 1) / f64::from(l);
            }
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let mut bracket = 0.0;
            for piece in &pieces {
                bracket += match *piece {
                    Piece::I {
                        sign,
                        lower,
                        upper,
                        ell,
                        kappa,
                    } => sign * cf.integral_i(l, lower, upper, ell, kappa)?,
                    Piece::J { sign, ell, kappa } => sign * cf.integral_j(l, ell, kappa)?,
                };
            }
            total += sign * binom * bracket;
        }
        Ok(total)
    }
}

fn check_laplace_argument(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "Laplace argument s",
            value: s,
            reason: "s must be finite and >= 0".into(),
        })
    }
}

/// `Υ(s) = E_W[(1 + s W^(-α)/m)^(-m)]` for one phase.
///
/// Closed form for `α = 2`, adaptive quadrature against the phase density otherwise.
pub fn upsilon(phase: Phase, s: f64, m: u32, net: &NetworkConfig) -> Result<f64> {
    net.validate()?;
    net.require_closed_form_geometry()?;
    check_laplace_argument(s)?;
    if m == 0 {
        return Err(Error::config("fading m", "must be >= 1"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    if net.path_loss_exponent == 2.0 {
        UpsilonTerm::new(phase, net)?.closed_form(s, m)
    } else {
        upsilon_quadrature(phase, s, m, net)
    }
}

/// Υ(s) by adaptive quadrature of `E_W[(W^α / (W^α + s/m))^m]`.
pub fn upsilon_quadrature(phase: Phase, s: f64, m: u32, net: &NetworkConfig) -> Result<f64> {
    upsilon_derivative(phase, 0, s, m, net)
}

/// k-th derivative of Υ by differentiating under the expectation:
/// `Υ^(k)(s) = (-1)^k (m)_k m^(-k) E_W[W^(αm) (W^α + s/m)^(-(m+k))]`.
pub fn upsilon_derivative(
    phase: Phase,
    k: u32,
    s: f64,
    m: u32,
    net: &NetworkConfig,
) -> Result<f64> {
    net.validate()?;
    check_laplace_argument(s)?;
    if m == 0 {
        return Err(Error::config("fading m", "must be >= 1"));
    }
    if k > 0 && s == 0.0 {
        return Err(Error::Domain {
            what: "Laplace argument s",
            value: s,
            reason: "derivatives of Υ need s > 0".into(),
        });
    }
    let dist = DistanceDistribution::for_network(phase, net)?;
    let alpha = net.path_loss_exponent;
    let shift = s / f64::from(m);
    let (mi, ki) = (m as i32, (m + k) as i32);
    let integrand = |w: f64| {
        let wa = w.powf(alpha);
        dist.density(w) * (wa / (wa + shift)).powi(mi) * (wa + shift).powi(-(ki - mi))
    };
    let expectation = integrate_with_breakpoints(integrand, &dist.breakpoints(), &quad_options())
        .map_err(|e| match e {
            Error::Numerical {
                context,
                partial,
                bound,
            } => Error::Numerical {
                context: format!(
                    "Υ^({k}) quadrature ({} phase, s = {s}): {context}",
                    phase.name()
                ),
                partial,
                bound,
            },
            other => other,
        })?
        .value;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * pochhammer(f64::from(m), k) * f64::from(m).powi(-(k as i32)) * expectation)
}

fn check_analysis_inputs(net: &NetworkConfig, fading: &FadingConfig, p_s: f64) -> Result<()> {
    net.validate()?;
    net.require_closed_form_geometry()?;
    fading.validate(net.height)?;
    if fading.altitude_dependent {
        return Err(Error::Unsupported(
            "altitude-dependent fading has no closed form; it is simulation-only".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_s) {
        return Err(Error::config(
            "stay probability",
            format!("must lie in [0, 1], got {p_s}"),
        ));
    }
    Ok(())
}

/// `L_I(s) = [p_s Υ_st(s) + (1 - p_s) Υ_mo(s)]^M`.
pub fn laplace_transform(
    s: f64,
    net: &NetworkConfig,
    fading: &FadingConfig,
    p_s: f64,
) -> Result<f64> {
    check_analysis_inputs(net, fading, p_s)?;
    check_laplace_argument(s)?;
    if net.interferers == 0 {
        return Ok(1.0);
    }
    let st = upsilon(Phase::Static, s, fading.mi, net)?;
    let mo = upsilon(Phase::Moving, s, fading.mi, net)?;
    Ok((p_s * st + (1.0 - p_s) * mo).powi(net.interferers as i32))
}

/// `L_I(s)` as the explicit binomial sum over the number of dwelling interferers.
pub fn laplace_transform_binomial_sum(
    s: f64,
    net: &NetworkConfig,
    fading: &FadingConfig,
    p_s: f64,
) -> Result<f64> {
    check_analysis_inputs(net, fading, p_s)?;
    check_laplace_argument(s)?;
    let big_m = net.interferers;
    if big_m == 0 {
        return Ok(1.0);
    }
    let st = p_s * upsilon(Phase::Static, s, fading.mi, net)?;
    let mo = (1.0 - p_s) * upsilon(Phase::Moving, s, fading.mi, net)?;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for n in 0..=big_m {
        if n > 0 {
            binom *= (big_m - n + 1) as f64 / n as f64;
        }
        sum += binom * st.powi(n as i32) * mo.powi((big_m - n) as i32);
    }
    Ok(sum)
}

fn phase_jet(phase: Phase, s0: f64, order: usize, m: u32, net: &NetworkConfig) -> Result<Jet> {
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(upsilon(phase, s0, m, net)?);
    let mut factorial = 1.0;
    for k in 1..=order {
        factorial *= k as f64;
        coeffs.push(upsilon_derivative(phase, k as u32, s0, m, net)? / factorial);
    }
    Ok(Jet::from_coeffs(coeffs))
}

/// Taylor jet of `L_I` at `s0` up to `order`.
pub fn laplace_jet(
    s0: f64,
    order: usize,
    net: &NetworkConfig,
    fading: &FadingConfig,
    p_s: f64,
) -> Result<Jet> {
    check_analysis_inputs(net, fading, p_s)?;
    check_laplace_argument(s0)?;
    if net.interferers == 0 {
        return Ok(Jet::constant(1.0, order));
    }
    let st = phase_jet(Phase::Static, s0, order, fading.mi, net)?;
    let mo = phase_jet(Phase::Moving, s0, order, fading.mi, net)?;
    let mixture = &st.scale(p_s) + &mo.scale(1.0 - p_s);
    Ok(mixture.powi(net.interferers as u32))
}
