//! Receiver operating characteristic of the unimpaired energy detector
//! over Rayleigh fading.

use sense_rf::detection::{ideal_pd, ideal_pfa};
use sense_rf::experiment::invert_decreasing;
use sense_rf::impairments::ImpairmentProfile;

fn main() -> sense_rf::Result<()> {
    let n_s = 5;
    for snr_db in [0.0, 5.0, 10.0] {
        let prof = ImpairmentProfile::ideal(10f64.powf(snr_db / 10.0), 1.0, 1.0);
        println!("SNR {snr_db} dB");
        for target in [0.01, 0.05, 0.1, 0.3] {
            let t = invert_decreasing(|t| Ok(ideal_pfa(t, n_s, prof.sigma_w2)), target)?;
            println!("    pfa {target:<5} threshold {t:.6} pd {:.6}", ideal_pd(t, &prof, n_s)?);
        }
    }
    Ok(())
}
