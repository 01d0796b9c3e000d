//! Gauss hypergeometric function for the `c = b + 1` family with integer `a` and
//! non-positive argument, plus the gamma-function helpers it needs.
//!
//! Every power integral of the form `∫_0^u y^(b-1) (1 + k y)^(-a) dy` reduces to
//! `u^b / b · 2F1(a, b; b + 1; -k u)`, so this is the only family the closed-form
//! interference expressions ever evaluate.
//!
//! Evaluation strategy, by argument `z = -X`:
//!
//! * `a = 0` or `z = 0`: exactly 1.
//! * integer `b` and `a >= b + 1`: the Euler transform terminates, leaving a
//!   positive polynomial of degree `a - b - 1`.
//! * `X <= 1/2`: the defining series.
//! * `1/2 < X <= max(2, 2b)`: the Pfaff transform onto `x = X / (1 + X) < 1`, a
//!   series with positive terms.
//! * larger `X`: the `1/z` connection formula (non-integer `b`) or the exact
//!   finite sum of elementary integrals (integer `b`).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Series iteration cap.
pub const SERIES_MAX_TERMS: usize = 10_000;
const SERIES_REL_EPS: f64 = 1e-16;
const DIRECT_SERIES_LIMIT: f64 = 0.5;

/// Arguments of `2F1(a, b; b + 1; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Args {
    a: u32,
    b: f64,
    z: f64,
}

impl Hyp2F1Args {
    pub fn new(a: u32, b: f64, z: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain {
                what: "hyp2f1 parameter b",
                value: b,
                reason: "b must be positive".into(),
            });
        }
        if !(z.is_finite() && z <= 0.0) {
            return Err(Error::Domain {
                what: "hyp2f1 argument z",
                value: z,
                reason: "z must be finite and non-positive".into(),
            });
        }
        Ok(Hyp2F1Args { a, b, z })
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.b + 1.0
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// `2F1(a, b; b + 1; z)` for the argument family described in the module docs.
pub fn hyp2f1(args: &Hyp2F1Args) -> Result<f64> {
    let Hyp2F1Args { a, b, z } = *args;
    if a == 0 || z == 0.0 {
        return Ok(1.0);
    }
    let af = f64::from(a);
    let integer_b = is_integer(b);
    if integer_b && af >= b + 1.0 {
        return Ok(terminating_euler(a, b, z));
    }
    let x = -z;
    if x <= DIRECT_SERIES_LIMIT {
        return hyp2f1_series(af, b, b + 1.0, z);
    }
    if x <= 2.0_f64.max(2.0 * b) {
        return hyp2f1_pfaff(args);
    }
    if integer_b {
        Ok(integer_b_large_argument(a, b.round() as u32, x))
    } else {
        connection_large_argument(a, b, x)
    }
}

/// Defining series `Σ (a)_n (b)_n / ((c)_n n!) z^n`, valid for `|z| < 1`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z.is_nan() || z.abs() >= 1.0 {
        return Err(Error::Domain {
            what: "hyp2f1 series",
            value: z,
            reason: "the series needs |z| < 1".into(),
        });
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() <= SERIES_REL_EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Numerical {
        context: format!("2F1({a}, {b}; {c}; {z}) series"),
        partial: sum,
        bound: term.abs(),
    })
}

/// Pfaff route `(1 - z)^(-a) 2F1(a, 1; b + 1; z / (z - 1))`.
///
/// The mapped argument lies in `[0, 1)`, so every series term is positive.
pub fn hyp2f1_pfaff(args: &Hyp2F1Args) -> Result<f64> {
    let Hyp2F1Args { a, b, z } = *args;
    if a == 0 || z == 0.0 {
        return Ok(1.0);
    }
    let af = f64::from(a);
    let mapped = z / (z - 1.0);
    let inner = hyp2f1_series(af, 1.0, b + 1.0, mapped)?;
    Ok((1.0 - z).powf(-af) * inner)
}

/// General real-parameter `2F1(a, b; c; z)` for `z <= 0`, by direct series for
/// `|z| < 1` and the Pfaff transform otherwise.
///
/// This is slow near `z -> -∞` and exists for consistency checks such as the
/// Gauss contiguous relations.
pub fn hyp2f1_general(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z > 0.0 {
        return Err(Error::Domain {
            what: "hyp2f1_general argument z",
            value: z,
            reason: "only z <= 0 is supported".into(),
        });
    }
    if z > -0.5 {
        hyp2f1_series(a, b, c, z)
    } else {
        Ok((1.0 - z).powf(-a) * hyp2f1_series(a, c - b, c, z / (z - 1.0))?)
    }
}

/// Rising factorial `x (x + 1) ... (x + k - 1)`; the empty product is 1.
pub fn pochhammer(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x + f64::from(i)))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of `|Γ(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
    }
}

/// `Γ(x)` for real `x` away from the poles at non-positive integers.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
    }
}

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| {
            acc + c / (x + i as f64 + 1.0)
        })
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

/// Euler transform `(1 - z)^(1 - a) 2F1(b + 1 - a, 1; b + 1; z)`, a polynomial
/// when `b + 1 - a = -n` with `n >= 0`. For `z <= 0` all terms are non-negative.
fn terminating_euler(a: u32, b: f64, z: f64) -> f64 {
    let n = (f64::from(a) - b - 1.0).round() as u32;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = f64::from(k);
        term *= (kf - f64::from(n)) / (b + 1.0 + kf) * z;
        sum += term;
    }
    (1.0 - z).powf(1.0 - f64::from(a)) * sum
}

/// `1/z` connection formula specialised to `c = b + 1` with `b - a` not an integer:
///
/// `F = b/(b-a) X^(-a) 2F1(a, a-b; a-b+1; -1/X) + Γ(b+1) Γ(a-b) / Γ(a) X^(-b)`.
fn connection_large_argument(a: u32, b: f64, x: f64) -> Result<f64> {
    let af = f64::from(a);
    let d = af - b;
    let inner = hyp2f1_series(af, d, d + 1.0, -1.0 / x)?;
    let first = b / (b - af) * x.powf(-af) * inner;
    let second = gamma(b + 1.0) * gamma(d) / gamma(af) * x.powf(-b);
    Ok(first + second)
}

/// Integer `b`: with `v = 1 + X t`,
/// `F = b X^(-b) Σ_j C(b-1, j) (-1)^(b-1-j) ∫_1^(1+X) v^(j-a) dv`.
fn integer_b_large_argument(a: u32, b: u32, x: f64) -> f64 {
    let ln_x = x.ln();
    let ln_1px = x.ln_1p();
    let bf = f64::from(b);
    let mut binom = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 0..b {
        if j > 0 {
            binom *= f64::from(b - j) / f64::from(j);
        }
        let sign = if (b - 1 - j).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let p = i64::from(j) - i64::from(a) + 1;
        // X^(-b) ∫_1^(1+X) v^(p-1) dv
        let scaled = if p == 0 {
            ln_1px * (-bf * ln_x).exp()
        } else {
            let pf = p as f64;
            ((pf * ln_1px - bf * ln_x).exp() - (-bf * ln_x).exp()) / pf
        };
        let t = sign * binom * scaled;
        // Neumaier summation
        let next = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    bf * (sum + comp)
}
