//! Front-end impairment coefficients: IQ imbalance, amplifier nonlinearity
//! (Bussgang gain and distortion power) and oscillator phase-noise leakage.
//!
//! Everything here is linear scale. Decibel conversion happens at the
//! configuration boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::montecarlo::block_rng;
use crate::special::{gamma, gaussian_q};

/// Wideband channelization: `channels` channels of width
/// `signal_band + guard_band` sampled at `sample_rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    pub channels: u32,
    pub sample_rate: f64,
    pub signal_band: f64,
    pub guard_band: f64,
}

impl SpectrumConfig {
    pub fn new(channels: u32, sample_rate: f64, signal_band: f64, guard_band: f64) -> Result<Self> {
        if channels < 2 || !channels.is_multiple_of(2) {
            return Err(Error::Config(format!("channel count {channels} must be even and ≥ 2")));
        }
        if !(signal_band > 0.0) || !(guard_band >= 0.0) || !(sample_rate > 0.0) {
            return Err(Error::Config("bandwidths must be positive".into()));
        }
        let ratio = sample_rate / signal_band;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::Config(format!("rate reduction W/W_sb = {ratio} is not an integer")));
        }
        if ratio.round() < channels as f64 {
            return Err(Error::Config(format!("rate reduction {ratio} is below the channel count {channels}")));
        }
        Ok(SpectrumConfig { channels, sample_rate, signal_band, guard_band })
    }

    /// Eight 1 MHz channels with 125 kHz guard bands sampled at 9 MHz.
    pub fn reference() -> Self {
        SpectrumConfig { channels: 8, sample_rate: 9e6, signal_band: 1e6, guard_band: 125e3 }
    }

    pub fn check_channel(&self, k: i32) -> Result<()> {
        let half = (self.channels / 2) as i32;
        if k == 0 || k.abs() > half {
            return Err(Error::Config(format!("channel {k} outside ±1..±{half}")));
        }
        Ok(())
    }

    /// Normalized center frequency `sign(k)(2|k| - 1)/(2K)`.
    pub fn center_freq(&self, k: i32) -> f64 {
        let k_abs = k.unsigned_abs() as f64;
        k.signum() as f64 * (2.0 * k_abs - 1.0) / (2.0 * self.channels as f64)
    }

    /// Normalized cut-off frequency `W_sb / (2W)`.
    pub fn cutoff(&self) -> f64 {
        self.signal_band / (2.0 * self.sample_rate)
    }

    /// Frequency-adjacent channels `(lower, upper)`; channels ±1 are adjacent.
    pub fn neighbors(&self, k: i32) -> (Option<i32>, Option<i32>) {
        let half = (self.channels / 2) as i32;
        let step = |j: i32, d: i32| {
            let n = j + d;
            if n == 0 {
                Some(n + d)
            } else if n.abs() > half {
                None
            } else {
                Some(n)
            }
        };
        (step(k, -1), step(k, 1))
    }

    /// Band-edge channel, missing one frequency neighbor.
    pub fn is_edge(&self, k: i32) -> bool {
        k.unsigned_abs() == self.channels / 2
    }
}

/// Which printed-formula reading of the clipping gain to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClippingReading {
    /// `1 - e^{-IBO} + √(2π)·IBO·Q(2·IBO)`, token by token.
    Literal,
    /// `1 - e^{-IBO} + √(2π·IBO)·Q(√(2·IBO))`, radicals extended over IBO.
    GroupedRoot,
    /// `1 - e^{-IBO} + √(π·IBO)·Q(√(2·IBO))`, the Bussgang gain of an envelope
    /// limiter driven by circular complex Gaussian input.
    #[default]
    Bussgang,
}

/// Which form of the polynomial-amplifier coefficients to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolynomialReading {
    /// `α = Σ β_{n+1} 2^{-n/2} σ_s² Γ(1+n/2)` and the matching `γ_n` sum.
    Literal,
    /// Exact moments of `f(s) = Σ_m β_m s|s|^{m-1}` for `s ~ CN(0, σ_s²)`.
    #[default]
    Moments,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PaModel {
    Ideal,
    /// Envelope clipping at input back-off `ibo = A_o²/σ_s²` (linear).
    Clipping { ibo: f64, reading: ClippingReading },
    /// Memoryless envelope polynomial with coefficients `β_1, β_2, …`.
    Polynomial { coeffs: Vec<Complex64>, reading: PolynomialReading },
}

impl PaModel {
    pub fn clipping(ibo: f64) -> Self {
        PaModel::Clipping { ibo, reading: ClippingReading::default() }
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        PaModel::Polynomial { coeffs, reading: PolynomialReading::default() }
    }

    /// Applies the amplifier characteristic to one complex sample.
    pub fn apply(&self, s: Complex64, sigma_s2: f64) -> Complex64 {
        match self {
            PaModel::Ideal => s,
            PaModel::Clipping { ibo, .. } => {
                let level = (ibo * sigma_s2).sqrt();
                let r = s.norm();
                if r > level {
                    s * (level / r)
                } else {
                    s
                }
            }
            PaModel::Polynomial { coeffs, .. } => {
                let r = s.norm();
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, beta)| beta * s * r.powi(m as i32))
                    .sum()
            }
        }
    }
}

/// Amplitude (`epsilon`) and phase (`theta`, radians) mismatch of the IQ mixer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqiSpec {
    pub epsilon: f64,
    pub theta: f64,
}

impl IqiSpec {
    pub const MATCHED: IqiSpec = IqiSpec { epsilon: 1.0, theta: 0.0 };
}

/// Oscillator phase noise: 3 dB bandwidth in Hz and common-phase-error power `|γ₀|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhnSpec {
    pub beta3db: f64,
    pub gamma0_mag2: f64,
}

impl PhnSpec {
    pub const NONE: PhnSpec = PhnSpec { beta3db: 0.0, gamma0_mag2: 1.0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpairmentProfile {
    pub pa: PaModel,
    pub iqi: IqiSpec,
    pub phn: PhnSpec,
    pub sigma_s2: f64,
    pub sigma_w2: f64,
    pub sigma_h2: f64,
}

impl ImpairmentProfile {
    /// An impairment-free front end.
    pub fn ideal(sigma_s2: f64, sigma_w2: f64, sigma_h2: f64) -> Self {
        ImpairmentProfile {
            pa: PaModel::Ideal,
            iqi: IqiSpec::MATCHED,
            phn: PhnSpec::NONE,
            sigma_s2,
            sigma_w2,
            sigma_h2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_s2 > 0.0 && self.sigma_w2 > 0.0 && self.sigma_h2 > 0.0) {
            return Err(Error::Config("signal, noise and channel powers must be positive".into()));
        }
        if !(self.iqi.epsilon > 0.0) {
            return Err(Error::Config("IQ amplitude mismatch must be positive".into()));
        }
        if !(self.phn.beta3db >= 0.0) || !(self.phn.gamma0_mag2 > 0.0 && self.phn.gamma0_mag2 <= 1.0) {
            return Err(Error::Config("phase noise needs β ≥ 0 and |γ₀|² in (0, 1]".into()));
        }
        match &self.pa {
            PaModel::Clipping { ibo, .. } if !(*ibo > 0.0) => {
                Err(Error::Config("input back-off must be positive".into()))
            }
            PaModel::Polynomial { coeffs, .. } if coeffs.is_empty() => {
                Err(Error::Config("polynomial amplifier needs at least one coefficient".into()))
            }
            _ => Ok(()),
        }
    }

    /// Occupied-channel SNR `σ_h² σ_s² / σ_w²`.
    pub fn snr(&self) -> f64 {
        self.sigma_h2 * self.sigma_s2 / self.sigma_w2
    }
}

/// `(K1, K2) = ((1 + ε e^{-jθ})/2, (1 - ε e^{jθ})/2)`.
pub fn iqi_coefficients(spec: IqiSpec) -> (Complex64, Complex64) {
    let k1 = (Complex64::new(1.0, 0.0) + Complex64::from_polar(spec.epsilon, -spec.theta)) / 2.0;
    let k2 = (Complex64::new(1.0, 0.0) - Complex64::from_polar(spec.epsilon, spec.theta)) / 2.0;
    (k1, k2)
}

/// Image rejection ratio `|K1/K2|²` in dB; `+∞` for a matched mixer.
pub fn irr_db(spec: IqiSpec) -> f64 {
    let (k1, k2) = iqi_coefficients(spec);
    let k2 = k2.norm_sqr();
    if k2 == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (k1.norm_sqr() / k2).log10()
}

/// Largest IRR reachable at phase mismatch `theta`, attained at `ε = 1`.
pub fn irr_supremum_db(theta: f64) -> f64 {
    irr_db(IqiSpec { epsilon: 1.0, theta })
}

/// Amplitude mismatch `ε ≥ 1` that gives the requested IRR at phase mismatch
/// `theta`. IRR is symmetric under `ε ↔ 1/ε` up to scale, and strictly
/// decreasing in `ε` on `[1, ∞)`, so bisection there finds the unique root.
pub fn epsilon_from_irr(irr_db_target: f64, theta: f64) -> Result<f64> {
    let sup = irr_supremum_db(theta);
    if !irr_db_target.is_finite() || irr_db_target >= sup {
        if irr_db_target.is_infinite() && sup.is_infinite() {
            return Ok(1.0);
        }
        return Err(Error::InfeasibleIrr { requested_db: irr_db_target, supremum_db: sup });
    }
    if irr_db_target <= 0.0 {
        return Err(Error::InfeasibleIrr { requested_db: irr_db_target, supremum_db: sup });
    }
    let f = |eps: f64| irr_db(IqiSpec { epsilon: eps, theta }) - irr_db_target;
    let mut lo = 1.0;
    let mut hi = 2.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Clipping gain `α` under `reading`, defined even where the matching
/// distortion power would come out negative.
pub fn clipping_gain(ibo: f64, reading: ClippingReading) -> Result<f64> {
    if !(ibo > 0.0) {
        return Err(Error::Domain(format!("input back-off {ibo} must be positive")));
    }
    if ibo.is_infinite() {
        return Ok(1.0);
    }
    let tail = match reading {
        ClippingReading::Literal => (2.0 * PI).sqrt() * ibo * gaussian_q(2.0 * ibo),
        ClippingReading::GroupedRoot => (2.0 * PI * ibo).sqrt() * gaussian_q((2.0 * ibo).sqrt()),
        ClippingReading::Bussgang => (PI * ibo).sqrt() * gaussian_q((2.0 * ibo).sqrt()),
    };
    Ok(1.0 - (-ibo).exp() + tail)
}

/// Bussgang gain and distortion power of an envelope clipper.
pub fn clipping_pa(ibo: f64, sigma_s2: f64, reading: ClippingReading) -> Result<(f64, f64)> {
    let alpha = clipping_gain(ibo, reading)?;
    if ibo.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let sigma_e2 = sigma_s2 * (1.0 - alpha * alpha - (-ibo).exp());
    if sigma_e2 < -1e-12 {
        return Err(Error::NegativeVariance(sigma_e2));
    }
    Ok((alpha, sigma_e2.max(0.0)))
}

/// Bussgang gain and distortion power of a polynomial amplifier.
pub fn polynomial_pa(
    coeffs: &[Complex64],
    sigma_s2: f64,
    reading: PolynomialReading,
) -> Result<(Complex64, f64)> {
    if coeffs.is_empty() {
        return Err(Error::Domain("polynomial amplifier needs at least one coefficient".into()));
    }
    let m = coeffs.len();
    // β̂_m: 1-based, zero past the last coefficient.
    let beta_hat = |i: usize| -> Complex64 {
        if i >= 1 && i <= m {
            coeffs[i - 1]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    // γ_n = Σ_{m=1}^{n-1} β̂_m β̂*_{n-m}
    let conv = |n: usize| -> Complex64 { (1..n).map(|i| beta_hat(i) * beta_hat(n - i).conj()).sum() };
    let (alpha, power) = match reading {
        PolynomialReading::Literal => {
            let alpha: Complex64 = (0..m)
                .map(|n| beta_hat(n + 1) * 2f64.powf(-(n as f64) / 2.0) * sigma_s2 * gamma(1.0 + n as f64 / 2.0))
                .sum();
            let power: Complex64 = (2..=2 * m)
                .map(|n| conv(n) * 2f64.powf(-(n as f64) / 2.0) * sigma_s2 * gamma(1.0 + n as f64 / 2.0))
                .sum();
            (alpha, power.re)
        }
        PolynomialReading::Moments => {
            // E|s|^p = σ_s^p Γ(1 + p/2) for s ~ CN(0, σ_s²)
            let sigma = sigma_s2.sqrt();
            let alpha: Complex64 = (1..=m)
                .map(|i| beta_hat(i) * sigma.powi(i as i32 - 1) * gamma((i as f64 + 3.0) / 2.0))
                .sum();
            let power: Complex64 = (2..=2 * m)
                .map(|n| conv(n) * sigma.powi(n as i32) * gamma(1.0 + n as f64 / 2.0))
                .sum();
            (alpha, power.re)
        }
    };
    let sigma_e2 = power - alpha.norm_sqr() * sigma_s2;
    if sigma_e2 < -1e-12 * power.abs().max(sigma_s2) {
        return Err(Error::NegativeVariance(sigma_e2));
    }
    Ok((alpha, sigma_e2.max(0.0)))
}

/// `(α, σ_e²)` for any amplifier model.
pub fn pa_coefficients(pa: &PaModel, sigma_s2: f64) -> Result<(Complex64, f64)> {
    match pa {
        PaModel::Ideal => Ok((Complex64::new(1.0, 0.0), 0.0)),
        PaModel::Clipping { ibo, reading } => {
            let (a, e) = clipping_pa(*ibo, sigma_s2, *reading)?;
            Ok((Complex64::new(a, 0.0), e))
        }
        PaModel::Polynomial { coeffs, reading } => polynomial_pa(coeffs, sigma_s2, *reading),
    }
}

/// Monte Carlo estimate of the Bussgang decomposition `f(s) = α s + e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangEstimate {
    pub alpha: Complex64,
    pub alpha_stderr: f64,
    pub sigma_e2: f64,
    pub sigma_e2_stderr: f64,
}

/// Estimates `α = E[f(s)s*]/E|s|²` and `σ_e² = E|f(s) - αs|²` from `trials`
/// draws of `s ~ CN(0, σ_s²)`. Deterministic for a given `(seed, trials)`.
pub fn bussgang_oracle(pa: &PaModel, sigma_s2: f64, trials: usize, seed: u64) -> BussgangEstimate {
    if let PaModel::Ideal = pa {
        return BussgangEstimate {
            alpha: Complex64::new(1.0, 0.0),
            alpha_stderr: 0.0,
            sigma_e2: 0.0,
            sigma_e2_stderr: 0.0,
        };
    }
    const BLOCK: usize = 1 << 14;
    let blocks = trials.div_ceil(BLOCK);
    let draws: Vec<(Complex64, Complex64)> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = block_rng(seed, b as u64);
            let n = BLOCK.min(trials - b * BLOCK);
            let scale = (sigma_s2 / 2.0).sqrt();
            (0..n)
                .map(move |_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let s = Complex64::new(re, im) * scale;
                    (s, pa.apply(s, sigma_s2))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = draws.len() as f64;
    let cross: Complex64 = draws.iter().map(|(s, f)| f * s.conj()).sum();
    let power: f64 = draws.iter().map(|(s, _)| s.norm_sqr()).sum();
    let alpha = cross / power;
    let resid: Vec<(f64, f64)> = draws
        .iter()
        .map(|(s, f)| ((f - alpha * s).norm_sqr(), s.norm_sqr()))
        .collect();
    let sigma_e2 = resid.iter().map(|r| r.0).sum::<f64>() / n;
    let var_e2 = resid.iter().map(|r| (r.0 - sigma_e2).powi(2)).sum::<f64>() / (n - 1.0);
    let mean_s2 = power / n;
    let mean_e2_s2 = resid.iter().map(|r| r.0 * r.1).sum::<f64>() / n;
    BussgangEstimate {
        alpha,
        alpha_stderr: (mean_e2_s2 / n).sqrt() / mean_s2,
        sigma_e2,
        sigma_e2_stderr: (var_e2 / n).sqrt(),
    }
}

/// Variance `4πβ/W` of the phase-noise increments.
pub fn phase_increment_variance(phn: PhnSpec, sample_rate: f64) -> f64 {
    4.0 * PI * phn.beta3db / sample_rate
}

fn leakage_integral(f: f64, fc: f64, delta: f64) -> f64 {
    let lo = fc - f;
    let hi = fc + f;
    let cot = |x: f64| 1.0 / (PI * x).tan();
    lo * (delta * (PI * lo).tan()).atan() + hi * (delta * (-PI * hi).tan()).atan()
        - (hi * cot(hi) - lo * cot(lo)) / delta
        + ((PI * hi).sin().abs().ln() + (PI * lo).sin().abs().ln()) / (PI * delta)
}

/// Fraction of the power of channel `from_k` that phase noise leaks into the
/// frequency-adjacent channel `to_k`.
pub fn phn_leakage_coefficient(cfg: &SpectrumConfig, phn: PhnSpec, from_k: i32, to_k: i32) -> Result<f64> {
    cfg.check_channel(from_k)?;
    cfg.check_channel(to_k)?;
    let (lower, upper) = cfg.neighbors(to_k);
    if lower != Some(from_k) && upper != Some(from_k) {
        return Err(Error::Domain(format!("channels {from_k} and {to_k} are not adjacent")));
    }
    if !(phn.beta3db > 0.0) {
        return Err(Error::DegenerateLeakage);
    }
    let x = (-2.0 * PI * phn.beta3db / cfg.sample_rate).exp();
    let delta = (x + 1.0) / (x - 1.0);
    let fc = cfg.cutoff();
    let offset = cfg.center_freq(from_k) - cfg.center_freq(to_k);
    let diff = leakage_integral(offset + fc, fc, delta) - leakage_integral(offset - fc, fc, delta);
    Ok(diff.abs() / (2.0 * PI * fc))
}

/// Derived per-channel constants of the impaired signal model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEndCoefficients {
    pub k1: Complex64,
    pub k2: Complex64,
    pub alpha: Complex64,
    pub sigma_e2: f64,
    /// Adjacent-channel phase-noise leakage, averaged over the available
    /// neighbors (the two sides agree to about 1e-7 relative).
    pub a_neighbor: f64,
    pub xi: Complex64,
    /// Sensed-channel signal term `|ξ|² σ_s²/2`.
    pub a1: f64,
    /// Neighbor leakage `|K1|² A σ_s²/2`.
    pub a2: f64,
    /// Mirror-neighbor leakage `|K2|² A σ_s²/2`.
    pub a3: f64,
    /// Mirror image `|γ₀|² |K2|² |α|² σ_s²/2`.
    pub a4: f64,
    /// Noise floor `σ_w²/2 + |γ₀|²(|K1|² + |K2|²) σ_e²/2`.
    pub a5: f64,
    /// Fading power `σ_h²`; scales the exponential gain of every signal term.
    pub sigma_h2: f64,
}

impl FrontEndCoefficients {
    /// Mean contributions `[a1, a2, a3, a4]` of one unit-mean fading gain.
    pub fn component_means(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4].map(|a| a * self.sigma_h2)
    }
}

pub fn front_end_coefficients(
    cfg: &SpectrumConfig,
    prof: &ImpairmentProfile,
    k: i32,
) -> Result<FrontEndCoefficients> {
    cfg.check_channel(k)?;
    prof.validate()?;
    let (k1, k2) = iqi_coefficients(prof.iqi);
    let (alpha, sigma_e2) = pa_coefficients(&prof.pa, prof.sigma_s2)?;
    let cpe = prof.phn.gamma0_mag2;
    let a_neighbor = if prof.phn.beta3db > 0.0 {
        let (lower, upper) = cfg.neighbors(k);
        let leaks = [lower, upper]
            .into_iter()
            .flatten()
            .map(|j| phn_leakage_coefficient(cfg, prof.phn, j, k))
            .collect::<Result<Vec<_>>>()?;
        leaks.iter().sum::<f64>() / leaks.len() as f64
    } else {
        0.0
    };
    let xi = cpe.sqrt() * k1 * alpha;
    let half_s = prof.sigma_s2 / 2.0;
    let (k1p, k2p) = (k1.norm_sqr(), k2.norm_sqr());
    Ok(FrontEndCoefficients {
        k1,
        k2,
        alpha,
        sigma_e2,
        a_neighbor,
        xi,
        a1: xi.norm_sqr() * half_s,
        a2: k1p * a_neighbor * half_s,
        a3: k2p * a_neighbor * half_s,
        a4: cpe * k2p * alpha.norm_sqr() * half_s,
        a5: prof.sigma_w2 / 2.0 + cpe / 2.0 * (k1p + k2p) * sigma_e2,
        sigma_h2: prof.sigma_h2,
    })
}
