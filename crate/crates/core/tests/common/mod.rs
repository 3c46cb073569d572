//! Independent numerical oracles shared by the integration tests. None of
//! them call into the library's special functions or quadrature.

#![allow(dead_code)]

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + inner + f(b)) * h / 3.0
}

/// `e^{-z} Σ_{k<n} z^k/k!`, the regularized upper gamma at integer order.
pub fn poisson_upper(n: u32, z: f64) -> f64 {
    let mut term = (-z).exp();
    let mut sum = term;
    for k in 1..n {
        term *= z / k as f64;
        sum += term;
    }
    sum
}

pub fn poisson_lower(n: u32, z: f64) -> f64 {
    1.0 - poisson_upper(n, z)
}

/// `∫_x^∞ t^{a-1} e^{-t-b/t} dt` by Simpson in `u = ln t`.
pub fn ext_gamma_oracle(a: f64, x: f64, b: f64) -> f64 {
    let hi = (x + 120.0 + 4.0 * a.abs()).ln();
    let lo = x.ln();
    let panels = (((hi - lo) / 2e-4) as usize).max(2000);
    simpson(|u| (a * u - u.exp() - b * (-u).exp()).exp(), lo, hi, panels)
}

/// Normal upper tail by Simpson on the density.
pub fn q_oracle(x: f64) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x >= 0.0 {
        simpson(pdf, x, x + 40.0, 400_000)
    } else {
        1.0 - q_oracle(-x)
    }
}

/// Busy-channel CDF of the unimpaired detector by integrating the
/// conditional chi-square CDF over the exponential signal energy.
pub fn ideal_busy_cdf_oracle(x: f64, sigma_h2: f64, sigma_s2: f64, sigma_w2: f64, n_s: u32) -> f64 {
    1.0 - single_exponential_survival(x, sigma_w2 / 2.0, sigma_h2 * sigma_s2 / 2.0, n_s)
}

/// Survival of the statistic when `σ² = floor + mean·E` for one unit
/// exponential `E`; the weight is truncated where it drops below e^{-45}.
pub fn single_exponential_survival(x: f64, floor: f64, mean: f64, n_s: u32) -> f64 {
    let cdf = simpson(
        |e| poisson_lower(n_s, n_s as f64 * x / (2.0 * (floor + e))) * (-e / mean).exp() / mean,
        0.0,
        45.0 * mean,
        400_000,
    );
    1.0 - cdf
}

use sense_rf::detection::{mixture_quadrature_cdf, ExpPolyDensity, OccupancyVector};
use sense_rf::impairments::{
    epsilon_from_irr, front_end_coefficients, FrontEndCoefficients, ImpairmentProfile, IqiSpec, PaModel, PhnSpec,
    SpectrumConfig,
};

/// Impaired profile on the reference band: clipping at `ibo_db`, IQ imbalance
/// at `irr_db` with a 3° phase mismatch, 100 Hz linewidth, unit noise and
/// fading power.
pub fn impaired_profile(snr_db: f64, ibo_db: f64, irr_db: f64) -> ImpairmentProfile {
    let theta = 3f64.to_radians();
    ImpairmentProfile {
        pa: PaModel::clipping(10f64.powf(ibo_db / 10.0)),
        iqi: IqiSpec { epsilon: epsilon_from_irr(irr_db, theta).unwrap(), theta },
        phn: PhnSpec { beta3db: 100.0, gamma0_mag2: 1.0 },
        ..ImpairmentProfile::ideal(10f64.powf(snr_db / 10.0), 1.0, 1.0)
    }
}

/// Coefficients of channel 2 for the 6 dB back-off, 25 dB IRR, 0 dB SNR scenario.
pub fn reference_coefficients() -> FrontEndCoefficients {
    front_end_coefficients(&SpectrumConfig::reference(), &impaired_profile(0.0, 6.0, 25.0), 2).unwrap()
}

/// CDF by integrating the conditional chi-square CDF against the convolved
/// density of the active signal terms, bypassing the partial-fraction sum.
pub fn mixture_oracle_cdf(x: f64, occ: OccupancyVector, fec: &FrontEndCoefficients, n_s: u32) -> f64 {
    let comps: Vec<(f64, u32)> = fec
        .component_means()
        .into_iter()
        .zip(occ.multiplicity())
        .filter(|&(a, m)| m > 0 && a > 0.0)
        .collect();
    if comps.is_empty() {
        return poisson_lower(n_s, n_s as f64 * x / (2.0 * fec.a5));
    }
    mixture_quadrature_cdf(x, fec.a5, &ExpPolyDensity::new(&comps).unwrap(), n_s).unwrap()
}
