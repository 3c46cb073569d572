//! k-out-of-n decision fusion at a fusion center, with optional bit errors on
//! the reporting links.

use crate::error::{Error, Result};

/// Largest network handled by exact decision-set enumeration.
pub const MAX_ENUMERATED_SUS: usize = 20;

/// Local operating point of one secondary user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuOperatingPoint {
    pub p_fa: f64,
    pub p_d: f64,
    /// Reporting-link SNR (linear); `f64::INFINITY` for an error-free link.
    pub report_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub sus: Vec<SuOperatingPoint>,
    pub k_su: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusedQuantity {
    FalseAlarm,
    Detection,
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

fn check_rule(n_su: usize, k_su: usize) -> Result<()> {
    if n_su == 0 || k_su == 0 || k_su > n_su {
        return Err(Error::Domain(format!("rule {k_su}-out-of-{n_su} needs 1 ≤ k ≤ n")));
    }
    Ok(())
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        check_rule(self.sus.len(), self.k_su)?;
        for su in &self.sus {
            check_prob(su.p_fa)?;
            check_prob(su.p_d)?;
            if !(su.report_snr >= 0.0) {
                return Err(Error::Domain(format!("reporting SNR {} must be ≥ 0", su.report_snr)));
            }
        }
        Ok(())
    }
}

/// Bit error rate of BPSK over a Rayleigh-faded link with mean SNR `gamma_r`.
pub fn bpsk_rayleigh_ber(gamma_r: f64) -> f64 {
    if gamma_r.is_infinite() {
        return 0.0;
    }
    0.5 * (1.0 - (gamma_r / (1.0 + gamma_r)).sqrt())
}

/// Probability that the fusion center receives a "busy" bit when the SU
/// sends one with probability `p` over a link flipping bits with probability `pe`.
pub fn apply_reporting_error(p: f64, pe: f64) -> f64 {
    p * (1.0 - pe) + (1.0 - p) * pe
}

/// Neumaier-compensated sum; keeps the fused sums within a few ulps.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

/// `p^i (1-p)^{n-i}` by repeated multiplication.
fn pattern_weight(p: f64, ones: usize, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * if j < ones { p } else { 1.0 - p })
}

/// Binomial tail `Σ_{i≥k} C(n,i) p^i (1-p)^{n-i}`.
pub fn fused_prob_homogeneous(p: f64, n_su: usize, k_su: usize) -> Result<f64> {
    check_rule(n_su, k_su)?;
    check_prob(p)?;
    // exact while C(n, i)·(n - i) < 2^53
    let mut binom = vec![1.0f64; n_su + 1];
    for i in 1..=n_su {
        binom[i] = binom[i - 1] * (n_su - i + 1) as f64 / i as f64;
    }
    let total = compensated_sum((k_su..=n_su).map(|i| binom[i] * pattern_weight(p, i, n_su)));
    Ok(total.clamp(0.0, 1.0))
}

/// Probability that at least `k_su` of the independent reports are "busy",
/// by enumeration of every decision set.
pub fn fused_prob_heterogeneous(probs: &[f64], k_su: usize) -> Result<f64> {
    check_rule(probs.len(), k_su)?;
    if probs.len() > MAX_ENUMERATED_SUS {
        return Err(Error::TooManyUsers(probs.len()));
    }
    for &p in probs {
        check_prob(p)?;
    }
    let n = probs.len();
    let total = compensated_sum((0u32..1 << n).filter(|set| set.count_ones() as usize >= k_su).map(|set| {
        probs
            .iter()
            .enumerate()
            .map(|(j, &p)| if set >> j & 1 == 1 { p } else { 1.0 - p })
            .product::<f64>()
    }));
    Ok(total.clamp(0.0, 1.0))
}

/// Fused false-alarm or detection probability seen through each SU's
/// reporting link.
pub fn fused_with_errors(cfg: &FusionConfig, which: FusedQuantity) -> Result<f64> {
    cfg.validate()?;
    let effective: Vec<f64> = cfg
        .sus
        .iter()
        .map(|su| {
            let p = match which {
                FusedQuantity::FalseAlarm => su.p_fa,
                FusedQuantity::Detection => su.p_d,
            };
            apply_reporting_error(p, bpsk_rayleigh_ber(su.report_snr))
        })
        .collect();
    fused_prob_heterogeneous(&effective, cfg.k_su)
}
