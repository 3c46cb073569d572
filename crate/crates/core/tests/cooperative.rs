use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sense_rf::cooperative::{
    apply_reporting_error, bpsk_rayleigh_ber, fused_prob_heterogeneous, fused_prob_homogeneous, fused_with_errors,
    FusedQuantity, FusionConfig, SuOperatingPoint,
};
use sense_rf::Error;

fn su(p_fa: f64, p_d: f64, report_snr: f64) -> SuOperatingPoint {
    SuOperatingPoint { p_fa, p_d, report_snr }
}

#[test]
fn ber_at_ten_matches_simulated_bpsk() {
    let expect = 0.5 * (1.0 - (10.0f64 / 11.0).sqrt());
    assert!((bpsk_rayleigh_ber(10.0) - expect).abs() < 1e-16);
    assert!((expect - 0.023269).abs() < 1e-6);

    // coherent BPSK, unit-power Rayleigh gain, noise variance 1/γ_r per dimension pair
    let n = 10_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let noise_sd = (1.0f64 / (2.0 * 10.0)).sqrt();
    let errors = (0..n)
        .filter(|_| {
            let hr: f64 = rng.sample(StandardNormal);
            let hi: f64 = rng.sample(StandardNormal);
            let amp = ((hr * hr + hi * hi) / 2.0).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            amp + noise_sd * z < 0.0
        })
        .count() as f64;
    let p = errors / n as f64;
    let se = (expect * (1.0 - expect) / n as f64).sqrt();
    assert!((p - expect).abs() <= 4.0 * se, "simulated {p} vs {expect}");
}

#[test]
fn ber_is_decreasing() {
    let mut last = 0.5;
    for g in [0.1, 1.0, 10.0, 100.0, 1e4] {
        let p = bpsk_rayleigh_ber(g);
        assert!(p < last);
        last = p;
    }
}

#[test]
fn rule_shortcuts() {
    let p: f64 = 0.37;
    assert!((fused_prob_homogeneous(p, 6, 1).unwrap() - (1.0 - (1.0 - p).powi(6))).abs() < 1e-15);
    assert!((fused_prob_homogeneous(p, 6, 6).unwrap() - p.powi(6)).abs() < 1e-15);
    assert!((fused_prob_homogeneous(0.1, 5, 1).unwrap() - 0.40951).abs() < 1e-15);
    assert!((fused_prob_heterogeneous(&[0.1, 0.2], 1).unwrap() - 0.28).abs() < 1e-15);
    assert!((fused_prob_heterogeneous(&[0.3, 1.0, 0.2], 1).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn invalid_rules_are_rejected() {
    assert!(matches!(fused_prob_homogeneous(0.5, 3, 0), Err(Error::Domain(_))));
    assert!(matches!(fused_prob_homogeneous(0.5, 3, 4), Err(Error::Domain(_))));
    assert!(matches!(fused_prob_heterogeneous(&[0.5, 1.5], 1), Err(Error::Domain(_))));
    assert!(matches!(fused_prob_heterogeneous(&[0.5; 21], 2), Err(Error::TooManyUsers(21))));
}

#[test]
fn error_free_links_change_nothing() {
    let sus = vec![su(0.1, 0.7, f64::INFINITY), su(0.05, 0.6, f64::INFINITY), su(0.2, 0.9, f64::INFINITY)];
    let cfg = FusionConfig { sus: sus.clone(), k_su: 2 };
    let fa: Vec<f64> = sus.iter().map(|s| s.p_fa).collect();
    assert_eq!(fused_with_errors(&cfg, FusedQuantity::FalseAlarm).unwrap(), fused_prob_heterogeneous(&fa, 2).unwrap());
}

#[test]
fn erased_links_give_a_fair_coin() {
    let sus = vec![su(0.01, 0.99, 0.0), su(0.3, 0.4, 0.0), su(0.0, 1.0, 0.0), su(0.5, 0.5, 0.0)];
    for k_su in 1..=4 {
        let cfg = FusionConfig { sus: sus.clone(), k_su };
        let got = fused_with_errors(&cfg, FusedQuantity::Detection).unwrap();
        assert!((got - fused_prob_homogeneous(0.5, 4, k_su).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn noisy_majority_by_hand() {
    let pe = bpsk_rayleigh_ber(10.0);
    let cfg = FusionConfig { sus: vec![su(0.1, 0.8, 10.0); 5], k_su: 3 };
    let effective = 0.1 * (1.0 - pe) + 0.9 * pe;
    let want = fused_prob_homogeneous(effective, 5, 3).unwrap();
    assert!((fused_with_errors(&cfg, FusedQuantity::FalseAlarm).unwrap() - want).abs() < 1e-15);
}

proptest! {
    #[test]
    fn heterogeneous_enumeration_matches_binomial_tail(p in 0.0f64..=1.0, n in 1usize..=10, k_frac in 0.0f64..1.0) {
        let k = 1 + ((n as f64 * k_frac) as usize).min(n - 1);
        let enumerated = fused_prob_heterogeneous(&vec![p; n], k).unwrap();
        prop_assert!((enumerated - fused_prob_homogeneous(p, n, k).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn fusion_duality(probs in prop::collection::vec(0.0f64..=1.0, 1..8), k_frac in 0.0f64..1.0) {
        let n = probs.len();
        let k = 1 + ((n as f64 * k_frac) as usize).min(n - 1);
        let flipped: Vec<f64> = probs.iter().map(|p| 1.0 - p).collect();
        let total = fused_prob_heterogeneous(&probs, k).unwrap() + fused_prob_heterogeneous(&flipped, n - k + 1).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn fusion_is_coordinatewise_monotone(
        probs in prop::collection::vec(0.0f64..=1.0, 1..8),
        which in any::<prop::sample::Index>(),
        bump in 0.0f64..0.5,
        k_frac in 0.0f64..1.0,
    ) {
        let n = probs.len();
        let k = 1 + ((n as f64 * k_frac) as usize).min(n - 1);
        let mut raised = probs.clone();
        let j = which.index(n);
        raised[j] = (raised[j] + bump).min(1.0);
        let base = fused_prob_heterogeneous(&probs, k).unwrap();
        prop_assert!(fused_prob_heterogeneous(&raised, k).unwrap() >= base - 1e-15);
    }

    #[test]
    fn reporting_error_stays_between_pe_and_its_complement(p in 0.0f64..=1.0, pe in 0.0f64..=1.0) {
        let v = apply_reporting_error(p, pe);
        prop_assert!(v >= pe.min(1.0 - pe) - 1e-16 && v <= pe.max(1.0 - pe) + 1e-16);
    }
}
