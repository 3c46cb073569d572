//! Extended incomplete gamma function: truncated series with its certified
//! error bound, compared against direct quadrature.

use sense_rf::special::{ext_inc_gamma_quadrature, ext_inc_gamma_series, gaussian_q, reg_lower_gamma};

fn main() -> sense_rf::Result<()> {
    println!("Q(1) = {:.12}", gaussian_q(1.0));
    println!("P(5, 5) = {:.12}", reg_lower_gamma(5.0, 5.0));

    println!("{:>6} {:>6} {:>6} {:>20} {:>20} {:>10} {:>6}", "a", "x", "b", "series", "quadrature", "bound", "terms");
    for &(a, x, b) in &[(1.0, 1.0, 0.5), (-2.5, 2.0, 1.0), (0.0, 4.0, 3.0), (-4.0, 0.8, 2.0)] {
        let quad = ext_inc_gamma_quadrature(a, x, b)?;
        match ext_inc_gamma_series(a, x, b, 1e-10) {
            Ok(s) => println!(
                "{a:>6} {x:>6} {b:>6} {:>20.14e} {quad:>20.14e} {:>10.2e} {:>6}",
                s.value, s.error_bound, s.terms_used
            ),
            Err(e) => println!("{a:>6} {x:>6} {b:>6} {:>20} {quad:>20.14e}  ({e})", "-"),
        }
    }
    Ok(())
}
