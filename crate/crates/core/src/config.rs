//! TOML experiment files. Decibel quantities are converted to linear scale
//! here and nowhere else.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::detection::DetectorConfig;
use crate::error::{Error, Result};
use crate::impairments::{
    epsilon_from_irr, ClippingReading, ImpairmentProfile, IqiSpec, PaModel, PhnSpec, PolynomialReading,
    SpectrumConfig,
};
use crate::montecarlo::McConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FaVsThreshold,
    Roc,
    CoopRoc,
    Validate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "defaults::channels")]
    pub channels: u32,
    #[serde(default = "defaults::sample_rate")]
    pub sample_rate_hz: f64,
    #[serde(default = "defaults::signal_band")]
    pub signal_band_hz: f64,
    #[serde(default = "defaults::guard_band")]
    pub guard_band_hz: f64,
    #[serde(default = "defaults::sensed")]
    pub sensed_channel: i32,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            channels: defaults::channels(),
            sample_rate_hz: defaults::sample_rate(),
            signal_band_hz: defaults::signal_band(),
            guard_band_hz: defaults::guard_band(),
            sensed_channel: defaults::sensed(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 2 || !(self.start < self.stop) || (self.log && !(self.start > 0.0)) {
            return Err(Error::Config(format!(
                "range needs count ≥ 2, start < stop (and start > 0 when log): {self:?}"
            )));
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default = "defaults::samples")]
    pub samples: u32,
    #[serde(default = "defaults::busy_probability")]
    pub busy_probability: f64,
    pub thresholds: Option<Vec<f64>>,
    pub threshold_range: Option<Range>,
    /// Target false-alarm probabilities of an ROC sweep.
    pub pfa_range: Option<Range>,
}

impl Default for DetectorSection {
    fn default() -> Self {
        DetectorSection {
            samples: defaults::samples(),
            busy_probability: defaults::busy_probability(),
            thresholds: None,
            threshold_range: None,
            pfa_range: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClippingReadingName {
    Literal,
    GroupedRoot,
    #[default]
    Bussgang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolynomialReadingName {
    Literal,
    #[default]
    Moments,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub label: Option<String>,
    #[serde(default)]
    pub snr_db: f64,
    /// Clipping amplifier back-off; absent means a linear amplifier.
    pub ibo_db: Option<f64>,
    #[serde(default)]
    pub clipping_reading: ClippingReadingName,
    /// Polynomial amplifier coefficients as `[re, im]` pairs.
    pub polynomial: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub polynomial_reading: PolynomialReadingName,
    /// Image rejection ratio; absent means a matched mixer.
    pub irr_db: Option<f64>,
    #[serde(default = "defaults::phase_mismatch")]
    pub phase_mismatch_deg: f64,
    #[serde(default)]
    pub phn_bandwidth_hz: f64,
    #[serde(default = "defaults::unit")]
    pub cpe_power: f64,
    #[serde(default = "defaults::unit")]
    pub noise_power: f64,
    #[serde(default = "defaults::unit")]
    pub channel_power: f64,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection {
            label: None,
            snr_db: 0.0,
            ibo_db: None,
            clipping_reading: ClippingReadingName::default(),
            polynomial: None,
            polynomial_reading: PolynomialReadingName::default(),
            irr_db: None,
            phase_mismatch_deg: defaults::phase_mismatch(),
            phn_bandwidth_hz: 0.0,
            cpe_power: 1.0,
            noise_power: 1.0,
            channel_power: 1.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ProfileSection {
    pub fn to_profile(&self) -> Result<ImpairmentProfile> {
        let pa = match (self.ibo_db, &self.polynomial) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("profile sets both ibo_db and polynomial".into()));
            }
            (Some(ibo), None) => PaModel::Clipping {
                ibo: db_to_linear(ibo),
                reading: match self.clipping_reading {
                    ClippingReadingName::Literal => ClippingReading::Literal,
                    ClippingReadingName::GroupedRoot => ClippingReading::GroupedRoot,
                    ClippingReadingName::Bussgang => ClippingReading::Bussgang,
                },
            },
            (None, Some(coeffs)) => PaModel::Polynomial {
                coeffs: coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                reading: match self.polynomial_reading {
                    PolynomialReadingName::Literal => PolynomialReading::Literal,
                    PolynomialReadingName::Moments => PolynomialReading::Moments,
                },
            },
            (None, None) => PaModel::Ideal,
        };
        let theta = self.phase_mismatch_deg.to_radians();
        let iqi = match self.irr_db {
            Some(irr) => IqiSpec { epsilon: epsilon_from_irr(irr, theta)?, theta },
            None => IqiSpec::MATCHED,
        };
        let phn = PhnSpec { beta3db: self.phn_bandwidth_hz, gamma0_mag2: self.cpe_power };
        let sigma_s2 = db_to_linear(self.snr_db) * self.noise_power / self.channel_power;
        let prof = ImpairmentProfile {
            pa,
            iqi,
            phn,
            sigma_s2,
            sigma_w2: self.noise_power,
            sigma_h2: self.channel_power,
        };
        prof.validate()?;
        Ok(prof)
    }

    /// One-line `key=value` summary for CSV metadata.
    pub fn describe(&self) -> String {
        let mut parts = vec![format!("snr_db={}", self.snr_db)];
        if let Some(l) = &self.label {
            parts.insert(0, format!("label={l}"));
        }
        match (self.ibo_db, &self.polynomial) {
            (Some(ibo), _) => parts.push(format!("ibo_db={ibo} clipping_reading={:?}", self.clipping_reading)),
            (None, Some(c)) => parts.push(format!("polynomial={c:?} polynomial_reading={:?}", self.polynomial_reading)),
            (None, None) => parts.push("pa=linear".into()),
        }
        match self.irr_db {
            Some(irr) => parts.push(format!("irr_db={irr} phase_mismatch_deg={}", self.phase_mismatch_deg)),
            None => parts.push("iq=matched".into()),
        }
        parts.push(format!("phn_bandwidth_hz={} cpe_power={}", self.phn_bandwidth_hz, self.cpe_power));
        parts.push(format!("noise_power={} channel_power={}", self.noise_power, self.channel_power));
        parts.join(" ")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuSection {
    pub profile: ProfileSection,
    #[serde(default = "defaults::one")]
    pub count: usize,
    /// Reporting-link SNR; absent means an error-free link.
    pub report_snr_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSection {
    /// `k` of each k-out-of-n rule to evaluate.
    pub rules: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::batch")]
    pub batch: usize,
}

impl McSection {
    pub fn to_config(self) -> McConfig {
        McConfig { trials: self.trials, seed: self.seed, batch: self.batch }
    }
}

/// One experiment, as read from a file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub detector: DetectorSection,
    pub profile: Option<ProfileSection>,
    #[serde(default)]
    pub su: Vec<SuSection>,
    pub fusion: Option<FusionSection>,
    pub mc: Option<McSection>,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn spectrum(&self) -> Result<SpectrumConfig> {
        let s = &self.spectrum;
        let cfg = SpectrumConfig::new(s.channels, s.sample_rate_hz, s.signal_band_hz, s.guard_band_hz)?;
        cfg.check_channel(s.sensed_channel)?;
        Ok(cfg)
    }

    /// Detector settings; the threshold field holds the first grid point.
    pub fn detector(&self) -> Result<DetectorConfig> {
        let det = DetectorConfig {
            n_s: self.detector.samples,
            threshold: 1.0,
            q: self.detector.busy_probability,
        };
        det.validate()?;
        Ok(det)
    }

    pub fn thresholds(&self) -> Result<Vec<f64>> {
        let grid = match (&self.detector.thresholds, &self.detector.threshold_range) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set either detector.thresholds or detector.threshold_range".into()));
            }
            (Some(list), None) => list.clone(),
            (None, Some(r)) => r.points()?,
            (None, None) => return Err(Error::Config("detector needs thresholds or threshold_range".into())),
        };
        if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Config("thresholds must be positive".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("threshold grid must be strictly increasing".into()));
        }
        Ok(grid)
    }

    pub fn pfa_targets(&self) -> Result<Vec<f64>> {
        let r = self
            .detector
            .pfa_range
            .ok_or_else(|| Error::Config("detector.pfa_range is required for ROC sweeps".into()))?;
        let pts = r.points()?;
        if pts.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::Config("pfa_range must lie inside (0, 1)".into()));
        }
        Ok(pts)
    }

    pub fn profile_section(&self) -> Result<&ProfileSection> {
        self.profile
            .as_ref()
            .or_else(|| self.su.first().map(|s| &s.profile))
            .ok_or_else(|| Error::Config("a [profile] section is required".into()))
    }

    pub fn mc(&self) -> Option<McConfig> {
        self.mc.map(McSection::to_config)
    }
}

mod defaults {
    pub fn channels() -> u32 {
        8
    }
    pub fn sample_rate() -> f64 {
        9e6
    }
    pub fn signal_band() -> f64 {
        1e6
    }
    pub fn guard_band() -> f64 {
        125e3
    }
    pub fn sensed() -> i32 {
        2
    }
    pub fn samples() -> u32 {
        5
    }
    pub fn busy_probability() -> f64 {
        0.5
    }
    pub fn phase_mismatch() -> f64 {
        3.0
    }
    pub fn unit() -> f64 {
        1.0
    }
    pub fn one() -> usize {
        1
    }
    pub fn batch() -> usize {
        crate::montecarlo::McConfig::DEFAULT_BATCH
    }
}
