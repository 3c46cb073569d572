//! Special functions used by the closed-form detection probabilities.
//!
//! Log-gamma and the complementary error function come from `libm`; the rest
//! is built here: regularized incomplete gamma for positive order,
//! the upper incomplete gamma `Γ(a, x)` for arbitrary real `a`, and the extended
//! incomplete gamma `Γ(a, x, b, 1) = ∫_x^∞ t^{a-1} exp(-t - b/t) dt`, both as an
//! alternating series with a truncation bound and by adaptive quadrature.

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_inf, QuadOptions};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Hard cap on the number of series terms summed by [`ext_inc_gamma_series`].
pub const SERIES_TERM_CAP: usize = 200;

/// Result of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxResult {
    pub value: f64,
    /// Upper bound on the truncation error of `value`.
    pub error_bound: f64,
    pub terms_used: usize,
    /// Floating-point rounding estimate, `ε_mach · Σ|term|`.
    pub rounding: f64,
}

/// Gaussian Q-function, the standard normal upper tail.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Γ(a)` for `a > 0`.
pub fn ln_gamma(a: f64) -> f64 {
    libm::lgamma_r(a).0
}

/// `Γ(a)`, exact for small positive integers.
pub fn gamma(a: f64) -> f64 {
    if a.fract() == 0.0 && (1.0..=170.0).contains(&a) {
        (2..a as u32).fold(1.0, |acc, k| acc * k as f64)
    } else {
        libm::tgamma(a)
    }
}

/// Power series for `P(a, x)`, used when `x < a + 1`.
fn reg_lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..100_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

/// `Q(a, x)` from the continued fraction, used when `x ≥ a + 1`.
fn reg_upper_gamma_cf(a: f64, x: f64) -> f64 {
    (ln_upper_gamma_cf_core(a, x) - x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized lower incomplete gamma `P(a, x)` for `a > 0`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else if x < a + 1.0 {
        reg_lower_gamma_series(a, x)
    } else {
        1.0 - reg_upper_gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)` for `a > 0`.
pub fn reg_upper_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x < a + 1.0 {
        1.0 - reg_lower_gamma_series(a, x)
    } else {
        reg_upper_gamma_cf(a, x)
    }
}

/// Exponential integral `E1(x)` by its power series, for `0 < x < ~2`.
fn exp_int_e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `ln(x^{-a} e^x Γ(a, x))` from the Legendre continued fraction (modified
/// Lentz). Converges for every real `a` when `x > 0`; fast once `x ≳ 1`.
fn ln_upper_gamma_cf_core(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h.ln()
}

/// `ln(e^x Γ(a, x))` for `x > 0` and any real `a`.
///
/// This exponentially scaled form stays finite where `Γ(a, x)` itself
/// underflows, which the mixture formulas rely on for large `x`.
pub fn ln_upper_gamma_scaled(a: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !a.is_finite() {
        return Err(Error::Domain(format!("scaled Γ({a}, {x}) needs finite x > 0")));
    }
    if x >= 1.0 && (a <= 1.0 || x > a - 1.0) {
        return Ok(a * x.ln() + ln_upper_gamma_cf_core(a, x));
    }
    if a > 0.0 {
        let q = reg_upper_gamma(a, x);
        return Ok(x + ln_gamma(a) + q.ln());
    }
    // x < 1 and a <= 0: walk down from the order in (0, 1] (or 0) by
    // Γ(s, x) = (x^s e^{-x} - Γ(s+1, x)) / (-s), which is stable for small x.
    let steps = (-a).floor() as usize + usize::from(a.fract() != 0.0);
    let start = a + steps as f64;
    let mut scaled = if start == 0.0 {
        x.exp() * exp_int_e1_series(x)
    } else {
        (x + ln_gamma(start) + reg_upper_gamma(start, x).ln()).exp()
    };
    let mut s = start;
    for _ in 0..steps {
        s -= 1.0;
        scaled = (x.powf(s) - scaled) / (-s);
    }
    Ok(scaled.ln())
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt`.
pub fn upper_inc_gamma(a: f64, x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("Γ({a}, {x}) needs x ≥ 0")));
    }
    if x == 0.0 {
        if a <= 0.0 {
            return Err(Error::Domain(format!("Γ({a}, 0) diverges for a ≤ 0")));
        }
        return Ok(gamma(a));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok((ln_upper_gamma_scaled(a, x)? - x).exp())
}

/// Lower incomplete gamma `γ(a, x) = Γ(a) - Γ(a, x)`, `a > 0`.
pub fn lower_inc_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("γ({a}, x) needs a > 0")));
    }
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("γ({a}, {x}) needs x ≥ 0")));
    }
    Ok(gamma(a) * reg_lower_gamma(a, x))
}

/// Adaptive truncation of `Γ(a, x, b, 1) ≈ Σ_{n=0}^{N} (-b)^n / n! · Γ(a - n, x)`.
///
/// Terms are added until the tail bound
/// `ε(a, x, b, N) = e^b Γ(a-N-1, x) γ(N+1, b) / Γ(N+1)` drops to `tol`.
/// Fails when [`SERIES_TERM_CAP`] terms are not enough, or when the alternating
/// terms are so large that rounding alone exceeds `tol`.
pub fn ext_inc_gamma_series(a: f64, x: f64, b: f64, tol: f64) -> Result<ApproxResult> {
    if !(x > 0.0) || !(b >= 0.0) || !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "series Γ({a}, {x}, {b}, 1) needs x > 0, b ≥ 0, tol > 0"
        )));
    }
    if b == 0.0 {
        return Ok(ApproxResult {
            value: upper_inc_gamma(a, x)?,
            error_bound: 0.0,
            terms_used: 1,
            rounding: 0.0,
        });
    }
    let ln_b = b.ln();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut bound = f64::INFINITY;
    for n in 0..SERIES_TERM_CAP {
        let nf = n as f64;
        let ln_mag = nf * ln_b - ln_gamma(nf + 1.0) + ln_upper_gamma_scaled(a - nf, x)? - x;
        let mag = ln_mag.exp();
        sum += if n % 2 == 0 { mag } else { -mag };
        abs_sum += mag;
        let ln_bound =
            b + ln_upper_gamma_scaled(a - nf - 1.0, x)? - x + reg_lower_gamma(nf + 1.0, b).ln();
        bound = ln_bound.exp();
        if bound <= tol {
            let rounding = f64::EPSILON * abs_sum;
            if rounding > tol {
                return Err(Error::SlowConvergence {
                    tol,
                    terms: n + 1,
                    bound: rounding,
                });
            }
            return Ok(ApproxResult {
                value: sum,
                error_bound: bound,
                terms_used: n + 1,
                rounding,
            });
        }
    }
    Err(Error::SlowConvergence {
        tol,
        terms: SERIES_TERM_CAP,
        bound,
    })
}

/// Reference value of `Γ(a, x, b, 1)` by adaptive quadrature of its defining
/// integral, split at `x + T` with an exponential map on the tail.
pub fn ext_inc_gamma_quadrature(a: f64, x: f64, b: f64) -> Result<f64> {
    if x < 0.0 || b < 0.0 || (x == 0.0 && b == 0.0 && a <= 0.0) {
        return Err(Error::Domain(format!("Γ({a}, {x}, {b}, 1) diverges")));
    }
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        ((a - 1.0) * t.ln() - t - b / t).exp()
    };
    let span = 30.0 + 2.0 * a.abs() + 4.0 * b.sqrt();
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_panels: 5000,
    };
    Ok(integrate_to_inf(integrand, x, span, 1.0, opts)?.value)
}

/// `ln(e^c Γ(a, c, b, 1))` by quadrature of
/// `∫_0^∞ (c+u)^{a-1} exp(-u - b/(c+u)) du`, normalized at its peak so that
/// extreme `c` and `b` neither overflow nor underflow.
pub(crate) fn ln_ext_gamma_scaled_quad(a: f64, c: f64, b: f64) -> Result<f64> {
    let log_f = |u: f64| {
        let t = c + u;
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (a - 1.0) * t.ln() - u - b / t
        }
    };
    // Stationary point of the log-integrand in t = c + u.
    let am1 = a - 1.0;
    let t_star = 0.5 * (am1 + (am1 * am1 + 4.0 * b).sqrt());
    let u_peak = (t_star - c).max(0.0);
    let t_peak = c + u_peak;
    let curv = if t_peak > 0.0 {
        am1 / (t_peak * t_peak) + 2.0 * b / (t_peak * t_peak * t_peak)
    } else {
        1.0
    };
    let width = if curv > 0.0 { (1.0 / curv).sqrt().min(1.0) } else { 1.0 };
    let width = if t_peak > 0.0 { width.min(t_peak.max(1e-300)) } else { width };
    let peak = log_f(u_peak);
    if !peak.is_finite() {
        return Err(Error::Domain(format!("scaled Γ({a}, {c}, {b}, 1) not finite")));
    }
    let f = |u: f64| (log_f(u) - peak).exp();
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_panels: 4000,
    };

    let mut total = 0.0;
    // Left of the peak (only when the peak is interior).
    if u_peak > 0.0 {
        let mut right = u_peak;
        let mut step = width;
        loop {
            let left = (u_peak - step).max(0.0);
            total += integrate(f, left, right, opts)?.value;
            if left == 0.0 {
                break;
            }
            right = left;
            step *= 8.0;
        }
    }
    // Right of the peak, geometric panels out to where the e^{-u} decay dominates.
    let reach = u_peak + 60.0 + 60.0 * width + 4.0 * am1.abs();
    let mut left = u_peak;
    let mut step = width;
    while left < reach {
        let right = (u_peak + step).min(reach);
        total += integrate(f, left, right, opts)?.value;
        left = right;
        step *= 8.0;
    }
    total += integrate_to_inf(f, reach, 0.0, 1.0, opts)?.value;
    Ok(peak + total.ln())
}

/// `ln(e^c Γ(a, c, b, 1))` for `c > 0`.
///
/// Uses the alternating series when its truncation bound and rounding
/// estimate certify near machine precision, and scaled quadrature otherwise.
pub fn ln_ext_inc_gamma_scaled(a: f64, c: f64, b: f64) -> Result<f64> {
    if !(c > 0.0) || !(b >= 0.0) {
        return Err(Error::Domain(format!("scaled Γ({a}, {c}, {b}, 1) needs c > 0, b ≥ 0")));
    }
    if b == 0.0 {
        return ln_upper_gamma_scaled(a, c);
    }
    if b <= 4.0 * c && c < 600.0 {
        let reference = ln_upper_gamma_scaled(a, c)? - c;
        let tol = 1e-14 * reference.exp() * (-b / c).exp();
        if tol > 0.0 {
            if let Ok(s) = ext_inc_gamma_series(a, c, b, tol) {
                if s.value > 0.0 {
                    return Ok(s.value.ln() + c);
                }
            }
        }
    }
    ln_ext_gamma_scaled_quad(a, c, b)
}
