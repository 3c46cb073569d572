//! Experiment runner: turns an [`ExperimentSpec`] into a CSV [`Table`].

use std::collections::HashMap;

use crate::config::{ExperimentKind, ExperimentSpec, ProfileSection};
use crate::cooperative::{fused_with_errors, FusedQuantity, FusionConfig, SuOperatingPoint};
use crate::detection::{ideal_pd, ideal_pfa, nonideal_pd, nonideal_pfa, DetectorConfig, Hypothesis};
use crate::error::{Error, Result};
use crate::impairments::{front_end_coefficients, FrontEndCoefficients, ImpairmentProfile};
use crate::montecarlo::{estimate, McConfig, Model};
use crate::report::{Cell, Table};

/// Share of validation points allowed outside the agreement band.
pub const VALIDATION_FAILURE_SHARE: f64 = 0.05;
/// Agreement band in standard errors.
pub const VALIDATION_SIGMAS: f64 = 3.0;

/// Command-line overrides of the `[mc]` section.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Set when a validation found too many disagreeing points.
    pub validation_failed: bool,
}

/// Everything needed to evaluate one front end on the sensed channel.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub det: DetectorConfig,
    pub profile: ImpairmentProfile,
    pub fec: FrontEndCoefficients,
    pub edge: bool,
}

impl Scenario {
    pub fn new(spec: &ExperimentSpec, section: &ProfileSection) -> Result<Self> {
        let cfg = spec.spectrum()?;
        let k = spec.spectrum.sensed_channel;
        let profile = section.to_profile()?;
        let fec = front_end_coefficients(&cfg, &profile, k)?;
        Ok(Scenario { det: spec.detector()?, profile, fec, edge: cfg.is_edge(k) })
    }

    pub fn ideal_pfa(&self, t: f64) -> f64 {
        ideal_pfa(t, self.det.n_s, self.profile.sigma_w2)
    }

    pub fn ideal_pd(&self, t: f64) -> Result<f64> {
        ideal_pd(t, &self.profile, self.det.n_s)
    }

    pub fn nonideal_pfa(&self, t: f64) -> Result<f64> {
        nonideal_pfa(&self.det.with_threshold(t), &self.fec, self.edge)
    }

    pub fn nonideal_pd(&self, t: f64) -> Result<f64> {
        nonideal_pd(&self.det.with_threshold(t), &self.fec, self.edge)
    }

    fn model(&self, ideal: bool) -> Model<'_> {
        if ideal {
            Model::Ideal(&self.profile)
        } else {
            Model::Nonideal { fec: &self.fec, edge: self.edge }
        }
    }
}

/// Threshold at which the non-increasing `f` equals `target`, by
/// Illinois false position in log-threshold.
pub fn invert_decreasing<F: FnMut(f64) -> Result<f64>>(mut f: F, target: f64) -> Result<f64> {
    let unreachable = || Error::Domain(format!("no threshold reaches probability {target}"));
    let mut g = |u: f64| -> Result<f64> { Ok(f(u.exp())? - target) };
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    let mut g_hi = g(hi)?;
    while g_hi > 0.0 {
        lo = hi;
        hi += 2.0;
        if hi > 25.0 {
            return Err(unreachable());
        }
        g_hi = g(hi)?;
    }
    let mut g_lo = g(lo)?;
    while g_lo < 0.0 {
        hi = lo;
        g_hi = g_lo;
        lo -= 2.0;
        if lo < -25.0 {
            return Err(unreachable());
        }
        g_lo = g(lo)?;
    }
    // g(lo) ≥ 0 ≥ g(hi)
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo < 1e-13 || g_lo == 0.0 || g_hi == 0.0 {
            break;
        }
        let mut u = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(u > lo && u < hi) {
            u = 0.5 * (lo + hi);
        }
        let gu = g(u)?;
        if gu > 0.0 {
            lo = u;
            g_lo = gu;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = u;
            g_hi = gu;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if gu.abs() < 1e-15 {
            break;
        }
    }
    let u = if g_lo.abs() < g_hi.abs() { lo } else { hi };
    Ok(u.exp())
}

fn metadata(spec: &ExperimentSpec, mc: Option<&McConfig>) -> Vec<String> {
    let s = &spec.spectrum;
    let mut lines = vec![
        format!("sense-rf {}", env!("CARGO_PKG_VERSION")),
        format!("kind={:?}", spec.kind),
        format!(
            "spectrum channels={} sample_rate_hz={} signal_band_hz={} guard_band_hz={} sensed_channel={}",
            s.channels, s.sample_rate_hz, s.signal_band_hz, s.guard_band_hz, s.sensed_channel
        ),
        format!("detector samples={} busy_probability={}", spec.detector.samples, spec.detector.busy_probability),
    ];
    if let Some(p) = &spec.profile {
        lines.push(format!("profile {}", p.describe()));
    }
    for su in &spec.su {
        let link = su.report_snr_db.map_or("error-free".to_string(), |v| format!("{v} dB"));
        lines.push(format!("su count={} report_link={link} {}", su.count, su.profile.describe()));
    }
    if let Some(mc) = mc {
        lines.push(format!("mc trials={} seed={} batch={}", mc.trials, mc.seed, mc.batch));
    }
    lines
}

fn mc_config(spec: &ExperimentSpec, ov: Overrides) -> Option<McConfig> {
    let mut mc = spec.mc();
    if mc.is_none() && ov.trials.is_some() {
        mc = Some(McConfig::new(0, 0));
    }
    mc.map(|mut m| {
        if let Some(seed) = ov.seed {
            m.seed = seed;
        }
        if let Some(trials) = ov.trials {
            m.trials = trials;
        }
        m
    })
}

pub fn run(spec: &ExperimentSpec, ov: Overrides) -> Result<Outcome> {
    let mc = mc_config(spec, ov);
    if let Some(m) = &mc {
        m.validate()?;
    }
    let mut outcome = match spec.kind {
        ExperimentKind::FaVsThreshold => fa_vs_threshold(spec, mc.as_ref())?,
        ExperimentKind::Roc => roc(spec, mc.as_ref())?,
        ExperimentKind::CoopRoc => coop_roc(spec)?,
        ExperimentKind::Validate => {
            let mc = mc.ok_or_else(|| Error::Config("validation needs an [mc] section or --trials".into()))?;
            validate(spec, &mc)?
        }
    };
    let mut meta = metadata(spec, mc.as_ref());
    meta.append(&mut outcome.table.metadata);
    outcome.table.metadata = meta;
    Ok(outcome)
}

fn fa_vs_threshold(spec: &ExperimentSpec, mc: Option<&McConfig>) -> Result<Outcome> {
    let sc = Scenario::new(spec, spec.profile_section()?)?;
    let thresholds = spec.thresholds()?;
    let mut header = vec!["threshold", "pfa_ideal", "pfa_nonideal"];
    let sims = match mc {
        Some(mc) => {
            header.extend(["pfa_mc", "mc_stderr"]);
            Some(estimate(sc.model(false), Hypothesis::Idle, &sc.det, mc, &thresholds)?)
        }
        None => None,
    };
    let mut table = Table::new(header);
    for (i, &t) in thresholds.iter().enumerate() {
        let mut row = vec![Cell::Num(t), Cell::Num(sc.ideal_pfa(t)), Cell::Num(sc.nonideal_pfa(t)?)];
        if let Some(s) = &sims {
            row.extend([Cell::Num(s[i].p_hat), Cell::Num(s[i].stderr)]);
        }
        table.push(row);
    }
    Ok(Outcome { table, validation_failed: false })
}

fn roc(spec: &ExperimentSpec, mc: Option<&McConfig>) -> Result<Outcome> {
    let sc = Scenario::new(spec, spec.profile_section()?)?;
    let mut targets = spec.pfa_targets()?;
    targets.sort_by(f64::total_cmp);
    let mut header = vec!["pfa", "pd_ideal", "pd_nonideal"];
    let mut rows = Vec::with_capacity(targets.len());
    let mut nonideal_thresholds = Vec::with_capacity(targets.len());
    for &p in &targets {
        let ti = invert_decreasing(|t| Ok(sc.ideal_pfa(t)), p)?;
        let tn = invert_decreasing(|t| sc.nonideal_pfa(t), p)?;
        nonideal_thresholds.push(tn);
        rows.push(vec![Cell::Num(p), Cell::Num(sc.ideal_pd(ti)?), Cell::Num(sc.nonideal_pd(tn)?)]);
    }
    if let Some(mc) = mc {
        header.extend(["threshold_nonideal", "pfa_mc", "pd_mc", "pd_mc_stderr"]);
        // thresholds descend as pfa ascends
        let ascending: Vec<f64> = nonideal_thresholds.iter().rev().copied().collect();
        let fa = estimate(sc.model(false), Hypothesis::Idle, &sc.det, mc, &ascending)?;
        let d = estimate(sc.model(false), Hypothesis::Busy, &sc.det, mc, &ascending)?;
        let n = targets.len();
        for (i, row) in rows.iter_mut().enumerate() {
            let j = n - 1 - i;
            row.extend([
                Cell::Num(nonideal_thresholds[i]),
                Cell::Num(fa[j].p_hat),
                Cell::Num(d[j].p_hat),
                Cell::Num(d[j].stderr),
            ]);
        }
    }
    let mut table = Table::new(header);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Outcome { table, validation_failed: false })
}

struct CoopUnit {
    scenario: Scenario,
    count: usize,
    report_snr: f64,
}

fn coop_roc(spec: &ExperimentSpec) -> Result<Outcome> {
    if spec.su.is_empty() {
        return Err(Error::Config("coop_roc needs at least one [[su]] entry".into()));
    }
    let fusion = spec.fusion.as_ref().ok_or_else(|| Error::Config("coop_roc needs a [fusion] section".into()))?;
    let units = spec
        .su
        .iter()
        .map(|su| {
            Ok(CoopUnit {
                scenario: Scenario::new(spec, &su.profile)?,
                count: su.count,
                report_snr: su.report_snr_db.map_or(f64::INFINITY, crate::config::db_to_linear),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n_su: usize = units.iter().map(|u| u.count).sum();
    for &k in &fusion.rules {
        if k == 0 || k > n_su {
            return Err(Error::Config(format!("rule k={k} outside 1..={n_su}")));
        }
    }
    let points = |t: f64, ideal: bool| -> Result<Vec<SuOperatingPoint>> {
        let mut sus = Vec::with_capacity(n_su);
        for u in &units {
            let sc = &u.scenario;
            let (p_fa, p_d) =
                if ideal { (sc.ideal_pfa(t), sc.ideal_pd(t)?) } else { (sc.nonideal_pfa(t)?, sc.nonideal_pd(t)?) };
            sus.extend(std::iter::repeat_n(SuOperatingPoint { p_fa, p_d, report_snr: u.report_snr }, u.count));
        }
        Ok(sus)
    };
    let mut targets = spec.pfa_targets()?;
    targets.sort_by(f64::total_cmp);
    let mut header = vec!["pfa_fc".to_string()];
    for k in &fusion.rules {
        header.push(format!("pd_fc_ideal_k{k}"));
        header.push(format!("pd_fc_nonideal_k{k}"));
    }
    let mut table = Table::new(header);
    for &p in &targets {
        let mut row = vec![Cell::Num(p)];
        for &k_su in &fusion.rules {
            for ideal in [true, false] {
                let mut cache: HashMap<u64, Vec<SuOperatingPoint>> = HashMap::new();
                let mut at = |t: f64| -> Result<Vec<SuOperatingPoint>> {
                    if let Some(v) = cache.get(&t.to_bits()) {
                        return Ok(v.clone());
                    }
                    let v = points(t, ideal)?;
                    cache.insert(t.to_bits(), v.clone());
                    Ok(v)
                };
                let t = invert_decreasing(
                    |t| fused_with_errors(&FusionConfig { sus: at(t)?, k_su }, FusedQuantity::FalseAlarm),
                    p,
                )?;
                let pd = fused_with_errors(&FusionConfig { sus: at(t)?, k_su }, FusedQuantity::Detection)?;
                row.push(Cell::Num(pd));
            }
        }
        table.push(row);
    }
    Ok(Outcome { table, validation_failed: false })
}

/// Compares the four closed-form curves with simulation on the threshold grid.
pub fn validate(spec: &ExperimentSpec, mc: &McConfig) -> Result<Outcome> {
    let sc = Scenario::new(spec, spec.profile_section()?)?;
    let thresholds = spec.thresholds()?;
    let mut table = Table::new(["curve", "threshold", "analytic", "mc", "stderr", "pass"]);
    let mut failures = 0usize;
    let curves: [(&str, bool, Hypothesis); 4] = [
        ("pfa_ideal", true, Hypothesis::Idle),
        ("pd_ideal", true, Hypothesis::Busy),
        ("pfa_nonideal", false, Hypothesis::Idle),
        ("pd_nonideal", false, Hypothesis::Busy),
    ];
    for (name, ideal, hyp) in curves {
        let sims = estimate(sc.model(ideal), hyp, &sc.det, mc, &thresholds)?;
        for (&t, sim) in thresholds.iter().zip(&sims) {
            let analytic = match (ideal, hyp) {
                (true, Hypothesis::Idle) => sc.ideal_pfa(t),
                (true, Hypothesis::Busy) => sc.ideal_pd(t)?,
                (false, Hypothesis::Idle) => sc.nonideal_pfa(t)?,
                (false, Hypothesis::Busy) => sc.nonideal_pd(t)?,
            };
            // a zero plug-in error at p_hat ∈ {0, 1} is floored at one count
            let band = VALIDATION_SIGMAS * sim.stderr.max(1.0 / mc.trials as f64);
            let pass = (analytic - sim.p_hat).abs() <= band;
            failures += usize::from(!pass);
            table.push(vec![
                name.into(),
                Cell::Num(t),
                Cell::Num(analytic),
                Cell::Num(sim.p_hat),
                Cell::Num(sim.stderr),
                Cell::Bool(pass),
            ]);
        }
    }
    let total = table.rows.len();
    let share = failures as f64 / total as f64;
    table.metadata.push(format!("validation failures={failures} of {total} points"));
    Ok(Outcome { table, validation_failed: share > VALIDATION_FAILURE_SHARE })
}
