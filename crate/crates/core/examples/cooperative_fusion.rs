//! k-out-of-n fusion of local decisions, with and without errors on the
//! reporting links.

use sense_rf::cooperative::{fused_prob_homogeneous, fused_with_errors, FusedQuantity, FusionConfig, SuOperatingPoint};

fn main() -> sense_rf::Result<()> {
    let (p_fa, p_d) = (0.05, 0.6);
    for k in 1..=5 {
        println!(
            "{k}-out-of-5: fused pfa {:.6} pd {:.6}",
            fused_prob_homogeneous(p_fa, 5, k)?,
            fused_prob_homogeneous(p_d, 5, k)?
        );
    }
    for report_db in [0.0, 10.0, 20.0] {
        let su = SuOperatingPoint { p_fa, p_d, report_snr: 10f64.powf(report_db / 10.0) };
        let cfg = FusionConfig { sus: vec![su; 5], k_su: 3 };
        println!(
            "majority, reporting SNR {report_db} dB: pfa {:.6} pd {:.6}",
            fused_with_errors(&cfg, FusedQuantity::FalseAlarm)?,
            fused_with_errors(&cfg, FusedQuantity::Detection)?
        );
    }
    Ok(())
}
