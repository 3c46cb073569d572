//! Distribution of the energy statistic `T = (1/N_s) Σ|r(n)|²` and the
//! resulting false-alarm and detection probabilities.
//!
//! Given the per-component variance `σ²` of the received samples,
//! `N_s T/σ²` is chi-square with `2N_s` degrees of freedom, so
//! `Pr(T ≤ x | σ²) = P(N_s, N_s x/(2σ²))`. The closed forms below average that
//! conditional CDF over the fading-induced law of `σ²`:
//!
//! * unimpaired and busy: `σ² = σ_w²/2 + Exp(σ_h²σ_s²/2)`;
//! * impaired: `σ² = 𝒜₅ + Σᵢ 𝒜ᵢ Gᵢ`, each `Gᵢ` Gamma(mᵢ, σ_h²) and `mᵢ` the
//!   number of busy channels feeding term `i`.
//!
//! Both averages reduce to finite sums of `e^c Γ(a, c, b, 1)` with
//! `c = floor/mean` and `b = N_s x/(2·mean)`.

use crate::error::{Error, Result};
use crate::impairments::{FrontEndCoefficients, ImpairmentProfile};
use crate::quad::{integrate, integrate_to_inf, QuadOptions};
use crate::special::{ln_ext_inc_gamma_scaled, ln_gamma, reg_lower_gamma, reg_upper_gamma};

/// Relative gap below which two active component means are merged.
pub const DEGENERATE_GAP: f64 = 1e-6;

/// Rounding estimate above which the partial-fraction sum is abandoned for
/// mixture quadrature.
const CLOSED_FORM_ROUNDING: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    Idle,
    Busy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub n_s: u32,
    pub threshold: f64,
    /// Busy probability of every non-sensed channel.
    pub q: f64,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 {
            return Err(Error::Config("at least one sample per decision is required".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config(format!("threshold {} must be positive", self.threshold)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Config(format!("busy probability {} outside [0, 1]", self.q)));
        }
        Ok(())
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        DetectorConfig { threshold, ..self }
    }
}

/// Busy/idle bits of the six channels that reach the sensed channel, in the
/// order `[k, k-1, k+1, -k+1, -k-1, -k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OccupancyVector {
    bits: [bool; 6],
}

impl OccupancyVector {
    pub const ALL_IDLE: OccupancyVector = OccupancyVector { bits: [false; 6] };

    pub fn new(bits: [bool; 6]) -> Self {
        OccupancyVector { bits }
    }

    /// Bit `i` of `mask` becomes slot `i`.
    pub fn from_mask(mask: u8) -> Self {
        OccupancyVector { bits: std::array::from_fn(|i| mask >> i & 1 == 1) }
    }

    /// All 64 patterns in mask order.
    pub fn all() -> impl Iterator<Item = OccupancyVector> {
        (0u8..64).map(Self::from_mask)
    }

    /// Slots of `k+1` and `-k-1`, absent for a band-edge channel.
    pub fn is_outer_slot(slot: usize) -> bool {
        slot == 2 || slot == 4
    }

    pub fn bits(&self) -> [bool; 6] {
        self.bits
    }

    pub fn sensed_busy(&self) -> bool {
        self.bits[0]
    }

    pub fn is_all_idle(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    /// Busy count among the five non-sensed slots.
    pub fn busy_neighbors(&self) -> u32 {
        self.bits[1..].iter().filter(|&&b| b).count() as u32
    }

    /// `[θ_k, θ_{k-1}+θ_{k+1}, θ_{-k+1}+θ_{-k-1}, θ_{-k}]`.
    pub fn multiplicity(&self) -> [u32; 4] {
        let b = self.bits.map(u32::from);
        [b[0], b[1] + b[2], b[3] + b[4], b[5]]
    }
}

/// `Pr(T ≤ x | σ²)` for `N_s` samples.
pub fn ideal_conditional_cdf(x: f64, sigma2: f64, n_s: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    reg_lower_gamma(n_s as f64, n_s as f64 * x / (2.0 * sigma2))
}

/// `Σ_{k<N_s} (b^k/k!) e^c Γ(a-k, c, b, 1)`, the survival kernel shared by
/// all closed forms. Every term is positive.
fn survival_kernel(a: f64, c: f64, b: f64, n_s: u32) -> Result<f64> {
    if b == 0.0 {
        return Ok(ln_ext_inc_gamma_scaled(a, c, 0.0)?.exp());
    }
    let lb = b.ln();
    let mut sum = 0.0;
    for k in 0..n_s {
        let kf = k as f64;
        let ln_t = kf * lb - ln_gamma(kf + 1.0) + ln_ext_inc_gamma_scaled(a - kf, c, b)?;
        sum += ln_t.exp();
    }
    Ok(sum)
}

/// `Pr(T > x)` for an unimpaired receiver and busy sensed channel.
pub fn ideal_busy_survival(x: f64, prof: &ImpairmentProfile, n_s: u32) -> Result<f64> {
    prof.validate()?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    let mean = prof.sigma_h2 * prof.sigma_s2;
    let c = prof.sigma_w2 / mean;
    let b = n_s as f64 * x / mean;
    Ok(survival_kernel(1.0, c, b, n_s)?.clamp(0.0, 1.0))
}

/// `Pr(T ≤ x)` for an unimpaired receiver and busy sensed channel.
pub fn ideal_busy_cdf(x: f64, prof: &ImpairmentProfile, n_s: u32) -> Result<f64> {
    Ok(1.0 - ideal_busy_survival(x, prof, n_s)?)
}

/// `Γ(N_s, N_s γ/σ_w²)/Γ(N_s)`.
pub fn ideal_pfa(gamma: f64, n_s: u32, sigma_w2: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    reg_upper_gamma(n_s as f64, n_s as f64 * gamma / sigma_w2)
}

pub fn ideal_pd(gamma: f64, prof: &ImpairmentProfile, n_s: u32) -> Result<f64> {
    ideal_busy_survival(gamma, prof, n_s)
}

/// Per-component variance of the received samples for given gains `|h_j|²`.
pub fn sigma_squared(occ: OccupancyVector, gains2: &[f64; 6], fec: &FrontEndCoefficients) -> f64 {
    let weights = [fec.a1, fec.a2, fec.a2, fec.a3, fec.a3, fec.a4];
    occ.bits
        .iter()
        .zip(weights)
        .zip(gains2)
        .filter(|((&busy, _), _)| busy)
        .map(|((_, w), g)| w * g)
        .sum::<f64>()
        + fec.a5
}

/// Active mixture components `(mean, multiplicity)`; zero-mean components are
/// point masses at zero and drop out.
fn active_components(occ: OccupancyVector, fec: &FrontEndCoefficients) -> Vec<(f64, u32)> {
    occ.multiplicity()
        .into_iter()
        .zip(fec.component_means())
        .filter(|&(m, mean)| m > 0 && mean > 0.0)
        .map(|(m, mean)| (mean, m))
        .collect()
}

fn has_degenerate_pair(comps: &[(f64, u32)]) -> bool {
    comps.iter().enumerate().any(|(i, &(a, _))| {
        comps[i + 1..].iter().any(|&(b, _)| (a - b).abs() <= DEGENERATE_GAP * a.max(b))
    })
}

/// Survival kernels of one threshold, shared by every occupancy pattern
/// because they depend on a component's mean but not on its partners.
struct KernelMemo {
    x: f64,
    floor: f64,
    n_s: u32,
    entries: Vec<(f64, u8, f64)>,
}

impl KernelMemo {
    fn new(x: f64, floor: f64, n_s: u32) -> Self {
        KernelMemo { x, floor, n_s, entries: Vec::new() }
    }

    /// `Σ_k (b^k/k!) e^c Γ(order-k, c, b, 1)` at `c = floor/mean`, `b = N_s x/(2 mean)`.
    fn get(&mut self, mean: f64, order: u8) -> Result<f64> {
        if let Some(&(_, _, v)) = self.entries.iter().find(|e| e.0 == mean && e.1 == order) {
            return Ok(v);
        }
        let b = self.n_s as f64 * self.x / (2.0 * mean);
        let v = survival_kernel(order as f64, self.floor / mean, b, self.n_s)?;
        self.entries.push((mean, order, v));
        Ok(v)
    }
}

/// `Pr(T > x | Θ)` from the partial-fraction expansion of the law of `σ²`.
///
/// Returns the value and a rounding estimate. Requires pairwise distinct
/// means and multiplicities of at most two.
fn closed_form_survival(comps: &[(f64, u32)], memo: &mut KernelMemo) -> Result<(f64, f64)> {
    let floor = memo.floor;
    let ln_norm: f64 = comps.iter().map(|&(a, m)| m as f64 * a.ln()).sum();
    let mut total = 0.0;
    let mut magnitude = 0.0;
    for (i, &(ai, mi)) in comps.iter().enumerate() {
        let others = comps.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c);
        // w̃ᵢ = 1/(Γ(mᵢ) Π Aⱼ^{mⱼ}) Π_{j≠i} (1/Aⱼ - 1/Aᵢ)^{-mⱼ}
        let mut ln_w = -ln_gamma(mi as f64) - ln_norm;
        let mut sign = 1.0;
        let mut shift = 0.0;
        for &(aj, mj) in others {
            let gap = 1.0 / aj - 1.0 / ai;
            ln_w -= mj as f64 * gap.abs().ln();
            if gap < 0.0 && mj % 2 == 1 {
                sign = -sign;
            }
            shift += mj as f64 / gap;
        }
        let w = sign * ln_w.exp();
        let c = floor / ai;
        let order1 = memo.get(ai, 1)?;
        let (part, mag) = match mi {
            1 => (ai * order1, ai * order1),
            2 => {
                let order2 = memo.get(ai, 2)?;
                let lead = ai * ai * order2;
                let centre = ai * ai * c * order1;
                let offset = shift * ai * order1;
                (lead - centre - offset, lead + centre + offset.abs())
            }
            _ => return Err(Error::Domain(format!("multiplicity {mi} exceeds two"))),
        };
        total += w * part;
        magnitude += w.abs() * mag;
    }
    Ok((total, 64.0 * f64::EPSILON * magnitude))
}

/// Density of `Σᵢ Gamma(mᵢ, Aᵢ)` as `Σ_r Σ_d coef[r][d] y^d e^{-y/A_r}`, built
/// by convolving one exponential at a time. Means closer than
/// [`DEGENERATE_GAP`] are merged into their average, which keeps the first
/// two moments to within `O(gap²)`.
#[derive(Debug, Clone)]
pub struct ExpPolyDensity {
    terms: Vec<(f64, Vec<f64>)>,
}

impl ExpPolyDensity {
    pub fn new(comps: &[(f64, u32)]) -> Result<Self> {
        let mut means: Vec<f64> = Vec::new();
        let mut draws: Vec<(usize, u32)> = Vec::new();
        for &(a, m) in comps {
            if !(a > 0.0) {
                return Err(Error::Domain(format!("component mean {a} must be positive")));
            }
            match means.iter().position(|&b| (a - b).abs() <= DEGENERATE_GAP * a.max(b)) {
                Some(r) => {
                    let n = draws[r].1 as f64;
                    means[r] = (means[r] * n + a * m as f64) / (n + m as f64);
                    draws[r].1 += m;
                }
                None => {
                    draws.push((means.len(), m));
                    means.push(a);
                }
            }
        }
        let mut density: Option<Vec<(f64, Vec<f64>)>> = None;
        for (r, count) in draws {
            for _ in 0..count {
                density = Some(match density {
                    None => vec![(means[r], vec![1.0 / means[r]])],
                    Some(d) => convolve_exponential(&d, means[r]),
                });
            }
        }
        let terms = density.ok_or_else(|| Error::Domain("empty mixture".into()))?;
        Ok(ExpPolyDensity { terms })
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|(a, coef)| coef.iter().rev().fold(0.0, |acc, &c| acc * y + c) * (-y / a).exp())
            .sum()
    }

    pub fn means(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.0)
    }
}

fn convolve_exponential(density: &[(f64, Vec<f64>)], b: f64) -> Vec<(f64, Vec<f64>)> {
    // ∫_0^y t^d e^{-t/A} (1/B) e^{-(y-t)/B} dt
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut at_b: Vec<f64> = Vec::new();
    let add = |v: &mut Vec<f64>, d: usize, c: f64| {
        if v.len() <= d {
            v.resize(d + 1, 0.0);
        }
        v[d] += c;
    };
    for (a, coef) in density {
        if *a == b {
            for (d, &c) in coef.iter().enumerate() {
                add(&mut at_b, d + 1, c / (b * (d as f64 + 1.0)));
            }
            continue;
        }
        let lambda = 1.0 / a - 1.0 / b;
        let mut own = Vec::new();
        for (d, &c) in coef.iter().enumerate() {
            // d!/λ^{d+1} [1 - e^{-λy} Σ_{j≤d} (λy)^j/j!]
            let scale = c / b * (ln_gamma(d as f64 + 1.0) - (d as f64 + 1.0) * lambda.abs().ln()).exp()
                * if lambda < 0.0 && d % 2 == 0 { -1.0 } else { 1.0 };
            add(&mut at_b, 0, scale);
            let mut pow = 1.0;
            for j in 0..=d {
                add(&mut own, j, -scale * pow);
                pow *= lambda / (j as f64 + 1.0);
            }
        }
        out.push((*a, own));
    }
    out.push((b, at_b));
    out
}

/// `Pr(T ≤ x)` by integrating the conditional chi-square CDF against an
/// explicit mixture density of `σ² - floor`.
pub fn mixture_quadrature_cdf(x: f64, floor: f64, density: &ExpPolyDensity, n_s: u32) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 4000 };
    let f = |y: f64| ideal_conditional_cdf(x, floor + y, n_s) * density.eval(y);
    let mut cuts: Vec<f64> = density
        .means()
        .flat_map(|a| [0.125, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0].map(|m| m * a))
        .chain(std::iter::once(2.0 * n_s as f64 * x))
        .filter(|&c| c > 0.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    let largest = density.means().fold(0.0, f64::max);
    let mut left = 0.0;
    let mut total = 0.0;
    for c in cuts {
        if c > left {
            total += integrate(f, left, c, opts)?.value;
            left = c;
        }
    }
    total += integrate_to_inf(f, left, 0.0, largest, opts)?.value;
    Ok(total.clamp(0.0, 1.0))
}

/// `Pr(T ≤ x | Θ)` for the impaired receiver.
pub fn nonideal_cdf_given_occupancy(x: f64, occ: OccupancyVector, fec: &FrontEndCoefficients, n_s: u32) -> Result<f64> {
    Ok(1.0 - nonideal_survival_given_occupancy(x, occ, fec, n_s)?)
}

/// `Pr(T > x | Θ)` for the impaired receiver.
///
/// Uses the partial-fraction closed form when the active means are distinct
/// and its rounding estimate is small; otherwise integrates against the
/// convolved density.
pub fn nonideal_survival_given_occupancy(
    x: f64,
    occ: OccupancyVector,
    fec: &FrontEndCoefficients,
    n_s: u32,
) -> Result<f64> {
    survival_with_memo(occ, fec, &mut KernelMemo::new(x, fec.a5, n_s))
}

fn survival_with_memo(occ: OccupancyVector, fec: &FrontEndCoefficients, memo: &mut KernelMemo) -> Result<f64> {
    let (x, n_s) = (memo.x, memo.n_s);
    if x <= 0.0 {
        return Ok(1.0);
    }
    let comps = active_components(occ, fec);
    if comps.is_empty() {
        return Ok(reg_upper_gamma(n_s as f64, n_s as f64 * x / (2.0 * fec.a5)));
    }
    if !has_degenerate_pair(&comps) {
        let (value, rounding) = closed_form_survival(&comps, memo)?;
        if rounding <= CLOSED_FORM_ROUNDING {
            return Ok(value.clamp(0.0, 1.0));
        }
    }
    let density = ExpPolyDensity::new(&comps)?;
    Ok(1.0 - mixture_quadrature_cdf(x, fec.a5, &density, n_s)?)
}

/// Exact enumeration over the free occupancy bits with the sensed bit fixed.
fn averaged_survival(hyp: Hypothesis, det: &DetectorConfig, fec: &FrontEndCoefficients, edge: bool) -> Result<f64> {
    det.validate()?;
    let sensed = hyp == Hypothesis::Busy;
    let free = if edge { 3 } else { 5 };
    let q = det.q;
    let patterns: Vec<(OccupancyVector, f64)> = OccupancyVector::all()
        .filter(|occ| occ.sensed_busy() == sensed)
        .filter(|occ| !(edge && (0..6).any(|i| OccupancyVector::is_outer_slot(i) && occ.bits[i])))
        .map(|occ| {
            let busy = occ.busy_neighbors() as i32;
            (occ, q.powi(busy) * (1.0 - q).powi(free - busy))
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let mut memo = KernelMemo::new(det.threshold, fec.a5, det.n_s);
    let mut total = 0.0;
    for (occ, w) in patterns {
        total += w * survival_with_memo(occ, fec, &mut memo)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Detection probability of the impaired receiver.
pub fn nonideal_pd(det: &DetectorConfig, fec: &FrontEndCoefficients, edge: bool) -> Result<f64> {
    averaged_survival(Hypothesis::Busy, det, fec, edge)
}

/// False-alarm probability of the impaired receiver.
pub fn nonideal_pfa(det: &DetectorConfig, fec: &FrontEndCoefficients, edge: bool) -> Result<f64> {
    averaged_survival(Hypothesis::Idle, det, fec, edge)
}
