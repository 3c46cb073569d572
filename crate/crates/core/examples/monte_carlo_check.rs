//! Simulated false-alarm and detection probabilities of the impaired
//! receiver against the closed forms.

use sense_rf::detection::{nonideal_pd, nonideal_pfa, DetectorConfig, Hypothesis};
use sense_rf::impairments::{front_end_coefficients, ImpairmentProfile, PaModel, SpectrumConfig};
use sense_rf::montecarlo::{estimate, McConfig, Model};

fn main() -> sense_rf::Result<()> {
    let cfg = SpectrumConfig::reference();
    let prof = ImpairmentProfile { pa: PaModel::clipping(2.0), ..ImpairmentProfile::ideal(1.0, 1.0, 1.0) };
    let fec = front_end_coefficients(&cfg, &prof, 2)?;
    let det = DetectorConfig { n_s: 5, threshold: 1.0, q: 0.5 };
    let mc = McConfig::new(200_000, 3);
    let thresholds = [0.5, 1.0, 2.0];
    let model = Model::Nonideal { fec: &fec, edge: false };
    let fa = estimate(model, Hypothesis::Idle, &det, &mc, &thresholds)?;
    let d = estimate(model, Hypothesis::Busy, &det, &mc, &thresholds)?;
    for ((&t, fa), d) in thresholds.iter().zip(&fa).zip(&d) {
        let at = det.with_threshold(t);
        println!(
            "t={t}: pfa {:.5} vs {:.5} ± {:.5}, pd {:.5} vs {:.5} ± {:.5}",
            nonideal_pfa(&at, &fec, false)?,
            fa.p_hat,
            fa.stderr,
            nonideal_pd(&at, &fec, false)?,
            d.p_hat,
            d.stderr
        );
    }
    Ok(())
}
