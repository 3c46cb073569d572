mod common;

use proptest::prelude::*;
use sense_rf::detection::{
    ideal_busy_cdf, ideal_conditional_cdf, ideal_pd, ideal_pfa, nonideal_cdf_given_occupancy, nonideal_pd,
    nonideal_pfa, nonideal_survival_given_occupancy, sigma_squared, DetectorConfig, Hypothesis, OccupancyVector,
};
use sense_rf::impairments::{front_end_coefficients, FrontEndCoefficients, ImpairmentProfile, SpectrumConfig};
use sense_rf::montecarlo::{empirical_cdf_given_occupancy, estimate, McConfig, Model};

fn det(threshold: f64) -> DetectorConfig {
    DetectorConfig { n_s: 5, threshold, q: 0.5 }
}

#[test]
fn conditional_cdf_poisson_identity() {
    let v = ideal_conditional_cdf(1.0, 0.5, 5);
    assert!((v - common::poisson_lower(5, 5.0)).abs() < 1e-15);
    assert!((v - 0.55951).abs() < 1e-5);
    assert_eq!(ideal_conditional_cdf(0.0, 0.5, 5), 0.0);
    assert!((ideal_conditional_cdf(1e4, 0.5, 5) - 1.0).abs() < 1e-15);
}

#[test]
fn ideal_false_alarm_examples() {
    let v = ideal_pfa(1.0, 5, 1.0);
    assert!((v - common::poisson_upper(5, 5.0)).abs() < 1e-15);
    assert!((v - 0.44049).abs() < 1e-5);
    assert!((ideal_pfa(1e-12, 5, 1.0) - 1.0).abs() < 1e-12);
}

#[test]
fn ideal_busy_cdf_matches_quadrature() {
    let prof = ImpairmentProfile::ideal(1.0, 1.0, 1.0);
    assert_eq!(ideal_busy_cdf(0.0, &prof, 5).unwrap(), 0.0);
    for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let got = ideal_busy_cdf(x, &prof, 5).unwrap();
        let want = common::ideal_busy_cdf_oracle(x, 1.0, 1.0, 1.0, 5);
        assert!((got - want).abs() < 1e-8, "x={x}: {got} vs {want}");
    }
}

#[test]
fn ideal_detection_dominates_false_alarm() {
    let prof = ImpairmentProfile::ideal(0.3, 1.0, 1.0);
    for t in [0.2, 0.8, 1.5, 3.0, 6.0] {
        assert!(ideal_pd(t, &prof, 5).unwrap() >= ideal_pfa(t, 5, 1.0));
    }
}

#[test]
fn sigma_squared_examples() {
    let f = common::reference_coefficients();
    assert_eq!(sigma_squared(OccupancyVector::ALL_IDLE, &[3.0; 6], &f), f.a5);
    let sensed = OccupancyVector::new([true, false, false, false, false, false]);
    assert_eq!(sigma_squared(sensed, &[1.0; 6], &f), f.a1 + f.a5);
    let occ = OccupancyVector::new([true, true, false, false, true, true]);
    let v = sigma_squared(occ, &[1.0; 6], &f);
    assert!((v - (f.a1 + f.a2 + f.a3 + f.a4 + f.a5)).abs() < 1e-15);
    assert!((v - 1.0448011766092185).abs() < 1e-14);
}

#[test]
fn occupancy_multiplicities() {
    let occ = OccupancyVector::new([true, true, true, false, true, false]);
    assert_eq!(occ.multiplicity(), [1, 2, 1, 0]);
    assert_eq!(occ.busy_neighbors(), 3);
    assert_eq!(OccupancyVector::all().count(), 64);
    assert_eq!(OccupancyVector::all().filter(|o| o.sensed_busy()).count(), 32);
}

#[test]
fn all_idle_branch_is_plain_chi_square() {
    let f = common::reference_coefficients();
    for x in [0.3, 1.0, 2.5] {
        let got = nonideal_cdf_given_occupancy(x, OccupancyVector::ALL_IDLE, &f, 5).unwrap();
        assert!((got - common::poisson_lower(5, 5.0 * x / (2.0 * f.a5))).abs() < 1e-14);
    }
}

#[test]
fn every_occupancy_cdf_starts_at_zero() {
    let f = common::reference_coefficients();
    for occ in OccupancyVector::all() {
        assert_eq!(nonideal_cdf_given_occupancy(0.0, occ, &f, 5).unwrap(), 0.0);
    }
}

#[test]
fn sensed_only_matches_single_exponential_quadrature_and_simulation() {
    let f = common::reference_coefficients();
    let occ = OccupancyVector::new([true, false, false, false, false, false]);
    let xs = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0];
    let mc = McConfig::new(1_000_000, 5);
    let sim = empirical_cdf_given_occupancy(occ, &f, 5, &mc, &xs).unwrap();
    for (&x, p_hat) in xs.iter().zip(sim) {
        let got = nonideal_cdf_given_occupancy(x, occ, &f, 5).unwrap();
        let quad = 1.0 - common::single_exponential_survival(x, f.a5, f.a1 * f.sigma_h2, 5);
        assert!((got - quad).abs() < 1e-9, "x={x}: {got} vs {quad}");
        let se = (got * (1.0 - got) / 1e6).sqrt();
        assert!((got - p_hat).abs() <= 4.0 * se, "x={x}: {got} vs simulated {p_hat}");
    }
}

#[test]
fn closed_form_matches_mixture_oracle_on_all_patterns() {
    let f = common::reference_coefficients();
    let mut worst = 0.0f64;
    for occ in OccupancyVector::all() {
        for x in [0.2, 0.7, 1.0, 1.6, 3.0, 8.0] {
            let got = nonideal_cdf_given_occupancy(x, occ, &f, 5).unwrap();
            worst = worst.max((got - common::mixture_oracle_cdf(x, occ, &f, 5)).abs());
        }
    }
    assert!(worst <= 1e-7, "max deviation {worst}");
}

#[test]
fn inactive_terms_contribute_nothing() {
    let f = common::reference_coefficients();
    let stripped = FrontEndCoefficients { a2: 0.0, a3: 0.0, ..f };
    let occ = OccupancyVector::new([true, false, false, false, false, true]);
    for x in [0.4, 1.0, 2.2] {
        assert_eq!(
            nonideal_cdf_given_occupancy(x, occ, &f, 5).unwrap(),
            nonideal_cdf_given_occupancy(x, occ, &stripped, 5).unwrap()
        );
    }
}

#[test]
fn impairment_free_receiver_matches_ideal_formulas() {
    let prof = ImpairmentProfile::ideal(2.0, 1.0, 1.0);
    let f = front_end_coefficients(&SpectrumConfig::reference(), &prof, 2).unwrap();
    for t in [0.1, 0.5, 1.0, 2.0, 4.0, 9.0] {
        assert!((nonideal_pfa(&det(t), &f, false).unwrap() - ideal_pfa(t, 5, 1.0)).abs() < 1e-12);
        assert!((nonideal_pd(&det(t), &f, false).unwrap() - ideal_pd(t, &prof, 5).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn idle_neighbors_leave_only_the_all_idle_term() {
    let f = common::reference_coefficients();
    for t in [0.5, 1.0, 2.0] {
        let d = DetectorConfig { q: 0.0, ..det(t) };
        let want = common::poisson_upper(5, 5.0 * t / (2.0 * f.a5));
        assert!((nonideal_pfa(&d, &f, false).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn band_edge_drops_the_outer_neighbors() {
    let f = common::reference_coefficients();
    let q: f64 = 0.3;
    let d = DetectorConfig { q, ..det(1.2) };
    for (hyp, sensed) in [(Hypothesis::Idle, false), (Hypothesis::Busy, true)] {
        let mut want = 0.0;
        for mask in 0u8..8 {
            // free slots of an edge channel: k-1, -k+1, -k
            let bits = [sensed, mask & 1 == 1, false, mask & 2 == 2, false, mask & 4 == 4];
            let busy = mask.count_ones() as i32;
            let surv = nonideal_survival_given_occupancy(1.2, OccupancyVector::new(bits), &f, 5).unwrap();
            want += q.powi(busy) * (1.0 - q).powi(3 - busy) * surv;
        }
        let got = match hyp {
            Hypothesis::Idle => nonideal_pfa(&d, &f, true).unwrap(),
            Hypothesis::Busy => nonideal_pd(&d, &f, true).unwrap(),
        };
        assert!((got - want).abs() < 1e-14, "{hyp:?}: {got} vs {want}");
    }
}

#[test]
fn roc_points_match_simulation() {
    let cfg = SpectrumConfig::reference();
    let thresholds = [0.6, 1.0, 1.4, 2.0, 3.0];
    for snr_db in [0.0, 5.0] {
        let f = front_end_coefficients(&cfg, &common::impaired_profile(snr_db, 6.0, 25.0), 2).unwrap();
        let mc = McConfig::new(1_000_000, 17);
        let model = Model::Nonideal { fec: &f, edge: false };
        let fa = estimate(model, Hypothesis::Idle, &det(1.0), &mc, &thresholds).unwrap();
        let pd = estimate(model, Hypothesis::Busy, &det(1.0), &mc, &thresholds).unwrap();
        for (i, &t) in thresholds.iter().enumerate() {
            let a_fa = nonideal_pfa(&det(t), &f, false).unwrap();
            let a_pd = nonideal_pd(&det(t), &f, false).unwrap();
            assert!(fa[i].agrees(a_fa, 3.0), "snr {snr_db} t {t}: pfa {a_fa} vs {:?}", fa[i]);
            assert!(pd[i].agrees(a_pd, 3.0), "snr {snr_db} t {t}: pd {a_pd} vs {:?}", pd[i]);
        }
    }
}

#[test]
fn impaired_cdfs_are_proper_on_a_fine_grid() {
    let f = common::reference_coefficients();
    for mask in [1u8, 3, 0b100001, 0b111111, 0b011110, 0b010100] {
        let occ = OccupancyVector::from_mask(mask);
        let [m1, m2, m3, m4] = occ.multiplicity().map(f64::from);
        let mean_t = 2.0 * (f.a5 + m1 * f.a1 + m2 * f.a2 + m3 * f.a3 + m4 * f.a4);
        let mut last = 0.0;
        for i in 0..1000 {
            let x = 4.0 * mean_t * i as f64 / 999.0;
            let v = nonideal_cdf_given_occupancy(x, occ, &f, 5).unwrap();
            assert!(v >= last - 1e-15, "mask {mask:#b} x {x}");
            last = v;
        }
        let far = nonideal_cdf_given_occupancy(1000.0 * mean_t, occ, &f, 5).unwrap();
        assert!((far - 1.0).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_dominates_false_alarm(t in 0.05f64..8.0, q in 0.0f64..1.0) {
        let f = common::reference_coefficients();
        let d = DetectorConfig { q, ..det(t) };
        prop_assert!(nonideal_pd(&d, &f, false).unwrap() >= nonideal_pfa(&d, &f, false).unwrap());
    }

    #[test]
    fn roc_is_monotone_in_threshold(t in 0.05f64..6.0, step in 0.001f64..1.0) {
        let f = common::reference_coefficients();
        let (lo, hi) = (det(t), det(t + step));
        prop_assert!(nonideal_pfa(&hi, &f, false).unwrap() <= nonideal_pfa(&lo, &f, false).unwrap());
        prop_assert!(nonideal_pd(&hi, &f, false).unwrap() <= nonideal_pd(&lo, &f, false).unwrap());
    }

    #[test]
    fn conditional_cdf_is_nondecreasing(mask in 0u8..64, x in 0.0f64..10.0, dx in 0.0f64..2.0) {
        let f = common::reference_coefficients();
        let occ = OccupancyVector::from_mask(mask);
        let a = nonideal_cdf_given_occupancy(x, occ, &f, 5).unwrap();
        let b = nonideal_cdf_given_occupancy(x + dx, occ, &f, 5).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && b >= a - 1e-15);
    }
}
