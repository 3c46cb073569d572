//! Model-level Monte Carlo oracle for the detection closed forms.
//!
//! Trials are grouped into fixed blocks of `batch` draws. Block `i` owns the
//! ChaCha stream `i` under the run seed, so every draw is a function of
//! `(seed, batch, trial index)` alone and the totals are integer sums that do
//! not depend on how blocks are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::detection::{sigma_squared, DetectorConfig, Hypothesis, OccupancyVector};
use crate::error::{Error, Result};
use crate::impairments::{FrontEndCoefficients, ImpairmentProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub batch: usize,
}

impl McConfig {
    pub const DEFAULT_BATCH: usize = 1 << 14;

    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig { trials, seed, batch: Self::DEFAULT_BATCH }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1000 {
            return Err(Error::Config(format!("{} trials is below the minimum of 1000", self.trials)));
        }
        if self.batch == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Binomial proportion estimate with its plug-in standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_count(hits: u64, trials: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        McEstimate { p_hat, stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(), trials }
    }

    /// `|p - p_hat| ≤ k · stderr`.
    pub fn agrees(&self, p: f64, k: f64) -> bool {
        (p - self.p_hat).abs() <= k * self.stderr
    }
}

/// Independent generator for one block of trials.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Half-width of the two-sided DKW band at confidence `1 - alpha`.
pub fn dkw_epsilon(trials: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

/// One draw of the normalized energy `(1/N_s) Σ|r|²` when each complex
/// sample has per-component variance `sigma2`.
pub fn sample_scaled_chi2<R: Rng + ?Sized>(sigma2: f64, n_s: u32, rng: &mut R) -> f64 {
    let sum: f64 = (0..2 * n_s)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z * z
        })
        .sum();
    sigma2 * sum / n_s as f64
}

fn sample_gain<R: Rng + ?Sized>(sigma_h2: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    sigma_h2 * e
}

/// Test statistic of an unimpaired receiver with the sensed channel busy or idle.
pub fn sample_energy_ideal<R: Rng + ?Sized>(theta_k: bool, prof: &ImpairmentProfile, n_s: u32, rng: &mut R) -> f64 {
    let signal = if theta_k { sample_gain(prof.sigma_h2, rng) * prof.sigma_s2 / 2.0 } else { 0.0 };
    sample_scaled_chi2(signal + prof.sigma_w2 / 2.0, n_s, rng)
}

/// Test statistic of the impaired receiver for a fixed occupancy pattern.
pub fn sample_energy_nonideal<R: Rng + ?Sized>(
    occ: OccupancyVector,
    fec: &FrontEndCoefficients,
    n_s: u32,
    rng: &mut R,
) -> f64 {
    let gains: [f64; 6] = std::array::from_fn(|_| sample_gain(fec.sigma_h2, rng));
    sample_scaled_chi2(sigma_squared(occ, &gains, fec), n_s, rng)
}

/// Draws the five non-sensed occupancy bits as independent Bernoulli(q);
/// the outer neighbors of a band-edge channel stay idle.
pub fn sample_occupancy<R: Rng + ?Sized>(hyp: Hypothesis, q: f64, edge: bool, rng: &mut R) -> OccupancyVector {
    let mut bits = [false; 6];
    bits[0] = hyp == Hypothesis::Busy;
    for (i, bit) in bits.iter_mut().enumerate().skip(1) {
        let draw = rng.random::<f64>() < q;
        *bit = draw && !(edge && OccupancyVector::is_outer_slot(i));
    }
    OccupancyVector::new(bits)
}

/// Counts, per threshold, the draws of `sampler` strictly above it.
///
/// `thresholds` must be sorted ascending; the returned counts are then
/// non-increasing because every threshold sees the same draws.
pub fn exceedance_counts<F>(mc: &McConfig, thresholds: &[f64], sampler: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mc.validate()?;
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Config("thresholds must be sorted ascending".into()));
    }
    let batch = mc.batch as u64;
    let blocks = mc.trials.div_ceil(batch);
    let per_block: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(mc.seed, b);
            let n = batch.min(mc.trials - b * batch);
            let mut draws: Vec<f64> = (0..n).map(|_| sampler(&mut rng)).collect();
            draws.sort_by(f64::total_cmp);
            thresholds
                .iter()
                .map(|&t| (draws.len() - draws.partition_point(|&v| v <= t)) as u64)
                .collect()
        })
        .collect();
    let mut totals = vec![0u64; thresholds.len()];
    for counts in per_block {
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(totals)
}

/// Statistical model behind a simulated curve.
#[derive(Debug, Clone, Copy)]
pub enum Model<'a> {
    Ideal(&'a ImpairmentProfile),
    Nonideal { fec: &'a FrontEndCoefficients, edge: bool },
}

/// Exceedance probability `Pr(T > γ)` for every threshold, from one shared
/// sample set. `Hypothesis::Idle` gives P_FA, `Hypothesis::Busy` gives P_D.
pub fn estimate(
    model: Model<'_>,
    hyp: Hypothesis,
    det: &DetectorConfig,
    mc: &McConfig,
    thresholds: &[f64],
) -> Result<Vec<McEstimate>> {
    det.validate()?;
    let n_s = det.n_s;
    let counts = match model {
        Model::Ideal(prof) => {
            let busy = hyp == Hypothesis::Busy;
            exceedance_counts(mc, thresholds, |rng| sample_energy_ideal(busy, prof, n_s, rng))?
        }
        Model::Nonideal { fec, edge } => exceedance_counts(mc, thresholds, |rng| {
            let occ = sample_occupancy(hyp, det.q, edge, rng);
            sample_energy_nonideal(occ, fec, n_s, rng)
        })?,
    };
    Ok(counts.into_iter().map(|c| McEstimate::from_count(c, mc.trials)).collect())
}

/// Empirical CDF of the impaired statistic for a fixed occupancy pattern.
pub fn empirical_cdf_given_occupancy(
    occ: OccupancyVector,
    fec: &FrontEndCoefficients,
    n_s: u32,
    mc: &McConfig,
    points: &[f64],
) -> Result<Vec<f64>> {
    let counts = exceedance_counts(mc, points, |rng| sample_energy_nonideal(occ, fec, n_s, rng))?;
    Ok(counts.into_iter().map(|c| 1.0 - c as f64 / mc.trials as f64).collect())
}

/// Empirical CDF of the unimpaired statistic.
pub fn empirical_cdf_ideal(
    theta_k: bool,
    prof: &ImpairmentProfile,
    n_s: u32,
    mc: &McConfig,
    points: &[f64],
) -> Result<Vec<f64>> {
    let counts = exceedance_counts(mc, points, |rng| sample_energy_ideal(theta_k, prof, n_s, rng))?;
    Ok(counts.into_iter().map(|c| 1.0 - c as f64 / mc.trials as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_mean_energy_is_noise_power() {
        let prof = ImpairmentProfile::ideal(1.0, 1.5, 1.0);
        let mut rng = block_rng(7, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| sample_energy_ideal(false, &prof, 5, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn busy_mean_energy_adds_signal_power() {
        let prof = ImpairmentProfile::ideal(1.0, 1.0, 1.0);
        let mut rng = block_rng(8, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| sample_energy_ideal(true, &prof, 5, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn counts_do_not_depend_on_thread_count() {
        let prof = ImpairmentProfile::ideal(1.0, 1.0, 1.0);
        let mc = McConfig { trials: 50_000, seed: 3, batch: 1000 };
        let th = [0.5, 1.0, 2.0];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| exceedance_counts(&mc, &th, |r| sample_energy_ideal(true, &prof, 5, r)).unwrap())
        };
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn unsorted_thresholds_are_rejected() {
        let mc = McConfig::new(1000, 1);
        assert!(exceedance_counts(&mc, &[2.0, 1.0], |_| 0.0).is_err());
    }
}
