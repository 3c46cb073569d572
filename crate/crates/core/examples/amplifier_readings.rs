//! Gain and distortion power of the clipping amplifier under each
//! closed-form reading, next to a simulated Bussgang decomposition.

use sense_rf::impairments::{bussgang_oracle, clipping_pa, ClippingReading, PaModel};

fn main() {
    let readings = [ClippingReading::Bussgang, ClippingReading::Literal, ClippingReading::GroupedRoot];
    for ibo_db in [0.0, 3.0, 6.0, 9.0] {
        let ibo = 10f64.powf(ibo_db / 10.0);
        let oracle = bussgang_oracle(&PaModel::clipping(ibo), 1.0, 200_000, 7);
        println!(
            "IBO {ibo_db} dB  simulated alpha {:.5} ± {:.5}  sigma_e2 {:.5}",
            oracle.alpha.re, oracle.alpha_stderr, oracle.sigma_e2
        );
        for reading in readings {
            match clipping_pa(ibo, 1.0, reading) {
                Ok((alpha, se2)) => println!("    {reading:?}: alpha {alpha:.5} sigma_e2 {se2:.5}"),
                Err(e) => println!("    {reading:?}: {e}"),
            }
        }
    }
}
