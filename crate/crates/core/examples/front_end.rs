//! Per-channel coefficients of an impaired receiver: clipping amplifier,
//! IQ imbalance and oscillator phase noise on an eight-channel band.

use sense_rf::impairments::{
    epsilon_from_irr, front_end_coefficients, irr_db, phase_increment_variance, IqiSpec, ImpairmentProfile,
    PaModel, PhnSpec, SpectrumConfig,
};

fn main() -> sense_rf::Result<()> {
    let cfg = SpectrumConfig::reference();
    let theta = 3f64.to_radians();
    let iqi = IqiSpec { epsilon: epsilon_from_irr(25.0, theta)?, theta };
    let phn = PhnSpec { beta3db: 100.0, gamma0_mag2: 1.0 };
    println!("amplitude mismatch {:.6} gives IRR {:.3} dB", iqi.epsilon, irr_db(iqi));
    println!("phase increment variance {:.6e}", phase_increment_variance(phn, cfg.sample_rate));

    let prof = ImpairmentProfile {
        pa: PaModel::clipping(10f64.powf(0.6)),
        iqi,
        phn,
        ..ImpairmentProfile::ideal(1.0, 1.0, 1.0)
    };
    for k in [1, 2, 3, 4] {
        let f = front_end_coefficients(&cfg, &prof, k)?;
        println!(
            "k={k:>2} edge={:<5} a1={:.6e} a2={:.6e} a3={:.6e} a4={:.6e} a5={:.6e}",
            cfg.is_edge(k),
            f.a1,
            f.a2,
            f.a3,
            f.a4,
            f.a5
        );
    }
    Ok(())
}
