mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, FRAC_PI_3};

use proptest::prelude::*;
use serrin_core::spectrum::{
    admissible_interval, asymptotics_report, bifurcation_record, bifurcation_sequence, default_curve_grid, eigen_curve,
    find_lambda_n, sigma, sigma_prime_closed_form, sigma_prime_formula,
};
use serrin_core::{Axis, Error, ModeIndex, Settings};

use common::frozen;

#[test]
fn sigma_matches_hypergeometric_oracle() {
    for axis in [Axis::Xi, Axis::Eta] {
        for n in 0..=8 {
            for &lam in &[0.1, 0.4, 0.8, 1.2] {
                let got = sigma(ModeIndex::new(axis, n), lam).unwrap();
                let want = common::sigma(axis, n, lam);
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{axis}:{n} at {lam}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn zero_mode_is_minus_half_secant_squared() {
    for axis in [Axis::Xi, Axis::Eta] {
        for &lam in &[0.2, 0.9, 1.5] {
            let s = sigma(ModeIndex::new(axis, 0), lam).unwrap();
            assert!((s + 0.5 / lam.cos().powi(2)).abs() < 1e-14);
        }
    }
}

#[test]
fn frozen_special_values() {
    assert!((sigma(ModeIndex::xi(1), 1e-3).unwrap() - frozen::SIGMA1_XI_AT_1E_3).abs() < 1e-9);
    assert!((sigma(ModeIndex::xi(1), FRAC_PI_4).unwrap() - frozen::SIGMA1_XI_AT_QUARTER_PI).abs() < 1e-10);
    assert!((sigma(ModeIndex::xi(3), FRAC_PI_4).unwrap() - frozen::SIGMA3_XI_AT_QUARTER_PI).abs() < 1e-10);
    let lam = FRAC_PI_2 - 1e-3;
    for (i, want) in frozen::SIGMA_ETA_NEAR_HALF_PI.iter().enumerate() {
        let got = sigma(ModeIndex::eta(i as u32 + 1), lam).unwrap();
        assert!((got - want).abs() < 1e-6 * want.abs(), "eta {}: {got}", i + 1);
    }
}

#[test]
fn key_inequality_examples() {
    assert!(sigma(ModeIndex::xi(2), FRAC_PI_6).unwrap() < 0.0);
    assert!(sigma(ModeIndex::eta(2), FRAC_PI_3).unwrap() > 0.0);
}

#[test]
fn bifurcation_points_match_frozen_values() {
    for (axis, table) in [(Axis::Xi, frozen::LAMBDA_XI), (Axis::Eta, frozen::LAMBDA_ETA)] {
        let pts = bifurcation_sequence(axis, 8, 1e-13, &Settings::default()).unwrap();
        assert_eq!(pts.len(), 7);
        for (p, want) in pts.iter().zip(table) {
            assert!((p.lambda - want).abs() < 1e-10, "{axis}:{}: {} vs {want}", p.mode.n, p.lambda);
            assert!(p.sigma_at_root.abs() < 1e-10);
        }
    }
}

#[test]
fn lambda_two_by_bisection_on_the_oracle() {
    let want = common::bisect_sigma(Axis::Xi, 2, 0.1, 1.0);
    let got = find_lambda_n(ModeIndex::xi(2), 1e-13).unwrap().lambda;
    assert!((got - want).abs() < 1e-10);
    assert!((want - FRAC_PI_4).abs() < 1e-12);
    let want = common::bisect_sigma(Axis::Eta, 3, 1.3, 1.55);
    let got = find_lambda_n(ModeIndex::eta(3), 1e-13).unwrap().lambda;
    assert!((got - want).abs() < 1e-10);
}

#[test]
fn sequences_are_monotone_and_inside_their_intervals() {
    let xi = bifurcation_sequence(Axis::Xi, 8, 1e-12, &Settings::default()).unwrap();
    assert!(xi.windows(2).all(|w| w[1].lambda < w[0].lambda));
    assert!(xi[6].lambda < (1.0f64 / 8.0).sqrt().asin());
    let eta = bifurcation_sequence(Axis::Eta, 8, 1e-12, &Settings::default()).unwrap();
    assert!(eta.windows(2).all(|w| w[1].lambda > w[0].lambda));
    for p in xi.iter().chain(&eta).skip(1) {
        let (lo, hi) = admissible_interval(p.mode);
        assert!(p.lambda > lo && p.lambda < hi);
    }
}

#[test]
fn closed_form_derivative_against_oracle_differences() {
    for axis in [Axis::Xi, Axis::Eta] {
        for n in 2..=8 {
            let p = find_lambda_n(ModeIndex::new(axis, n), 1e-13).unwrap();
            let cf = sigma_prime_closed_form(&p).unwrap();
            // Richardson-extrapolated central difference of the oracle.
            let d = |h: f64| (common::sigma(axis, n, p.lambda + h) - common::sigma(axis, n, p.lambda - h)) / (2.0 * h);
            let fd = (4.0 * d(5e-4) - d(1e-3)) / 3.0;
            assert!((cf - fd).abs() < 1e-5 * fd.abs(), "{axis}:{n}: {cf} vs {fd}");
            let sign = if axis == Axis::Xi { 1.0 } else { -1.0 };
            assert!(cf * sign > 0.0);
            assert!((sigma_prime_formula(p.mode, p.lambda) - cf).abs() < 1e-12 * cf.abs());
        }
    }
}

#[test]
fn closed_form_requires_a_root() {
    let mut p = find_lambda_n(ModeIndex::xi(3), 1e-12).unwrap();
    p.lambda += 0.05;
    p.sigma_at_root = sigma(p.mode, p.lambda).unwrap();
    assert!(matches!(sigma_prime_closed_form(&p), Err(Error::Precondition(_))));
}

#[test]
fn mode_one_has_no_bifurcation_point() {
    for axis in [Axis::Xi, Axis::Eta] {
        assert!(matches!(find_lambda_n(ModeIndex::new(axis, 1), 1e-12), Err(Error::Precondition(_))));
    }
}

#[test]
fn asymptotic_rates() {
    let lam = FRAC_PI_2 - 1e-3;
    for (i, want) in frozen::XI_BLOWUP_RATIO.iter().enumerate() {
        let n = i as u32 + 2;
        let r = sigma(ModeIndex::xi(n), lam).unwrap() * 2.0 * lam.cos().powi(2) / (n - 1) as f64;
        assert!((r - want).abs() < 1e-8, "n={n}: {r}");
        let rep = asymptotics_report(ModeIndex::xi(n)).unwrap();
        assert!((rep.blowup_ratio.unwrap() - want).abs() < 1e-8);
    }
    let r4 = sigma(ModeIndex::xi(4), 1.5).unwrap() * 2.0 * 1.5f64.cos().powi(2) / 3.0;
    assert!((0.95..=1.05).contains(&r4), "{r4}");
    for n in 1..=2 {
        assert!(sigma(ModeIndex::eta(n), lam).unwrap() < -1e3);
    }
}

#[test]
fn xi_growth_bound_at_0_8() {
    let lam: f64 = 0.8;
    for n in 1..=8 {
        let s = sigma(ModeIndex::xi(n), lam).unwrap();
        assert!(s / n as f64 <= 1.5 * lam.tan() / lam.cos());
    }
}

#[test]
fn eta_two_curve_crosses_once_in_its_interval() {
    let c = eigen_curve(ModeIndex::eta(2), &default_curve_grid(), &Settings::default()).unwrap();
    let ch = c.sign_changes();
    assert_eq!(ch.len(), 1);
    assert!(c.lambdas[ch[0]] > 0.5f64.acos() - 1e-2);
}

#[test]
fn record_carries_both_derivatives() {
    let p = find_lambda_n(ModeIndex::eta(2), 1e-12).unwrap();
    let r = bifurcation_record(&p).unwrap();
    assert!(r.sigma_prime_relative_diff < 1e-5);
    assert_eq!(r.interval, admissible_interval(p.mode));
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"axis\":\"eta\""));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sigma_is_strictly_increasing_in_n(lam in 0.01f64..1.56, n in 0u32..8, eta in any::<bool>()) {
        let axis = if eta { Axis::Eta } else { Axis::Xi };
        prop_assert!(sigma(ModeIndex::new(axis, n + 1), lam).unwrap() > sigma(ModeIndex::new(axis, n), lam).unwrap());
    }

    #[test]
    fn key_inequalities(n in 2u32..=8, frac in 0.01f64..1.0) {
        let nf = n as f64;
        let xi_lam = frac * (1.0 / nf).asin();
        prop_assert!(sigma(ModeIndex::xi(n), xi_lam).unwrap() < 0.0);
        let eta_lam = frac * (1.0 / nf).acos();
        prop_assert!(sigma(ModeIndex::eta(n), eta_lam).unwrap() > 0.0);
    }
}
