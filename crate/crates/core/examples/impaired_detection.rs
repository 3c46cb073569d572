//! False-alarm and detection probability of an impaired receiver compared
//! with the unimpaired one at the same threshold.

use sense_rf::detection::{ideal_pd, ideal_pfa, nonideal_pd, nonideal_pfa, DetectorConfig};
use sense_rf::impairments::{
    epsilon_from_irr, front_end_coefficients, IqiSpec, ImpairmentProfile, PaModel, PhnSpec, SpectrumConfig,
};

fn main() -> sense_rf::Result<()> {
    let cfg = SpectrumConfig::reference();
    let theta = 3f64.to_radians();
    let ideal = ImpairmentProfile::ideal(1.0, 1.0, 1.0);
    let prof = ImpairmentProfile {
        pa: PaModel::clipping(10f64.powf(0.3)),
        iqi: IqiSpec { epsilon: epsilon_from_irr(20.0, theta)?, theta },
        phn: PhnSpec { beta3db: 100.0, gamma0_mag2: 1.0 },
        ..ideal.clone()
    };
    let k = 2;
    let fec = front_end_coefficients(&cfg, &prof, k)?;
    println!("{:>9} {:>10} {:>10} {:>10} {:>10}", "threshold", "pfa", "pfa_imp", "pd", "pd_imp");
    for t in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let det = DetectorConfig { n_s: 5, threshold: t, q: 0.5 };
        println!(
            "{t:>9} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            ideal_pfa(t, det.n_s, ideal.sigma_w2),
            nonideal_pfa(&det, &fec, cfg.is_edge(k))?,
            ideal_pd(t, &ideal, det.n_s)?,
            nonideal_pd(&det, &fec, cfg.is_edge(k))?
        );
    }
    Ok(())
}
