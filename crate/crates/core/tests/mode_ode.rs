mod common;

use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use serrin_core::mode_ode::{
    chebyshev_grid, frobenius_launch, indicial_roots, riccati_bounds, riccati_on_grid, riccati_sweep, riccati_value, solve_l,
    Endpoint, FrobeniusSeries,
};
use serrin_core::{Axis, Error, ModeIndex, Settings};

use common::frozen;

#[test]
fn riccati_matches_hypergeometric_oracle() {
    let s = Settings::default();
    for axis in [Axis::Xi, Axis::Eta] {
        for n in 1..=8 {
            for &lam in &[0.05, 0.2, 0.5, 0.7, 0.9, 1.1, 1.25] {
                let got = riccati_value(ModeIndex::new(axis, n), lam, &s).unwrap();
                let want = common::riccati(axis, n, lam);
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{axis}:{n} at {lam}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn frozen_mpmath_values() {
    let s = Settings::default();
    for (n, f, k) in frozen::RICCATI_AT_0_7 {
        let gf = riccati_value(ModeIndex::xi(n), 0.7, &s).unwrap();
        let gk = riccati_value(ModeIndex::eta(n), 0.7, &s).unwrap();
        assert!((gf - f).abs() < 1e-10 * f, "f_{n}: {gf} vs {f}");
        assert!((gk - k).abs() < 1e-10 * k, "k_{n}: {gk} vs {k}");
    }
    let f1 = riccati_value(ModeIndex::xi(1), 0.2, &s).unwrap();
    assert!((f1 - frozen::F1_AT_0_2).abs() < 1e-12);
}

#[test]
fn xi_mode_one_sits_below_tangent() {
    // The lower bound n tanλ is not available for n = 1; the monitor skips it.
    let f1 = riccati_value(ModeIndex::xi(1), 0.2, &Settings::default()).unwrap();
    assert!(f1 < 0.2f64.tan());
    assert_eq!(riccati_bounds(ModeIndex::xi(1), 0.2).0, None);
}

#[test]
fn xi_mode_two_is_twice_tangent() {
    let s = Settings::default();
    for &lam in &[0.1, 0.5, 1.0, 1.4, 1.55] {
        let f = riccati_value(ModeIndex::xi(2), lam, &s).unwrap();
        assert!((f - 2.0 * lam.tan()).abs() < 1e-9 * lam.tan(), "lambda={lam}: {f}");
    }
}

#[test]
fn xi_blow_up_rate_near_half_pi() {
    let lam = FRAC_PI_2 - 1e-3;
    for n in 1..=4 {
        let f = riccati_value(ModeIndex::xi(n), lam, &Settings::default()).unwrap();
        let r = f * (FRAC_PI_2 - lam) / n as f64;
        assert!((r - 1.0).abs() < 0.02, "n={n}: ratio {r}");
    }
}

#[test]
fn mode_zero_is_identically_zero() {
    let st = riccati_sweep(ModeIndex::xi(0), 1.5, 1e-10).unwrap();
    assert!(st.values.iter().all(|v| *v == 0.0));
    let m = solve_l(0, 0, 0.9, &[0.25, 0.5, 1.0]).unwrap();
    assert!(m.l.iter().all(|v| (v - 1.0).abs() < 1e-15));
    assert_eq!(m.l_prime_at_1, 0.0);
}

#[test]
fn linear_and_riccati_routes_agree() {
    let s = Settings::default();
    for n in 1..=6 {
        for &lam in &[0.3, 0.8, 1.3] {
            let xi = solve_l(0, n, lam, &[1.0]).unwrap().l_prime_at_1 / lam;
            let eta = solve_l(n, 0, lam, &[1.0]).unwrap().l_prime_at_1;
            let f = riccati_value(ModeIndex::xi(n), lam, &s).unwrap();
            let k = riccati_value(ModeIndex::eta(n), lam, &s).unwrap();
            assert!((xi - f).abs() < 1e-8 * f.abs(), "xi n={n} lambda={lam}");
            assert!((eta - k).abs() < 1e-8 * k.abs(), "eta n={n} lambda={lam}");
        }
    }
}

#[test]
fn indicial_roots_examples() {
    assert_eq!(indicial_roots(ModeIndex::xi(3), Endpoint::Zero).unwrap(), (0.0, 0.0));
    assert_eq!(indicial_roots(ModeIndex::xi(3), Endpoint::PiHalf).unwrap(), (3.0, -3.0));
    assert_eq!(indicial_roots(ModeIndex::eta(2), Endpoint::Zero).unwrap(), (2.0, -2.0));
}

#[test]
fn frobenius_series_matches_hypergeometric_log_derivative() {
    for (e, d) in [(0, 1), (0, 4), (1, 0), (3, 0)] {
        let s = FrobeniusSeries::new(e, d, 12);
        let th = 1e-2;
        assert!((s.log_derivative(th) - common::log_derivative(e, d, th)).abs() < 1e-12, "({e},{d})");
    }
}

#[test]
fn xi_one_launch_derivative_matches_centred_difference() {
    let (h, r) = (1e-5, 1e-3);
    let (_, d) = frobenius_launch(ModeIndex::xi(1), 12, r).unwrap();
    let (vp, _) = frobenius_launch(ModeIndex::xi(1), 12, r + h).unwrap();
    let (vm, _) = frobenius_launch(ModeIndex::xi(1), 12, r - h).unwrap();
    assert!((d - (vp - vm) / (2.0 * h)).abs() < 1e-10);
}

#[test]
fn eta_one_launch_is_linear_at_the_core() {
    for r in [1e-3, 1e-4] {
        let (v, _) = frobenius_launch(ModeIndex::eta(1), 12, r).unwrap();
        assert!((v / r - 1.0).abs() < 2.0 * r * r);
    }
}

#[test]
fn bounds_hold_on_the_sweep_grid() {
    let grid = chebyshev_grid(1e-3, FRAC_PI_2 - 1e-3, 400);
    for axis in [Axis::Xi, Axis::Eta] {
        for n in 0..=8 {
            riccati_on_grid(ModeIndex::new(axis, n), &grid, &Settings::default()).unwrap();
        }
    }
}

#[test]
fn riccati_state_csv_columns() {
    let st = riccati_sweep(ModeIndex::eta(2), 1.0, 1e-10).unwrap();
    let csv = st.to_csv();
    assert!(csv.starts_with("axis,n,lambda,value\n"));
    assert_eq!(csv.lines().count(), st.lambdas.len() + 1);
}

#[test]
fn sweep_past_the_guard_is_rejected() {
    let e = riccati_sweep(ModeIndex::xi(2), FRAC_PI_2, 1e-10).unwrap_err();
    assert!(matches!(e, Error::Domain(_) | Error::Config(_)), "{e:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riccati_is_strictly_increasing_in_n(lam in 0.01f64..1.55, n in 1u32..8, eta in any::<bool>()) {
        let axis = if eta { Axis::Eta } else { Axis::Xi };
        let s = Settings::default();
        let a = riccati_value(ModeIndex::new(axis, n), lam, &s).unwrap();
        let b = riccati_value(ModeIndex::new(axis, n + 1), lam, &s).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn riccati_respects_bounds(lam in 0.01f64..1.55, n in 1u32..=8, eta in any::<bool>()) {
        let mode = ModeIndex::new(if eta { Axis::Eta } else { Axis::Xi }, n);
        let v = riccati_value(mode, lam, &Settings::default()).unwrap();
        let (lo, hi) = riccati_bounds(mode, lam);
        if let Some(lo) = lo { prop_assert!(v >= lo - 1e-9 * lo.abs()); }
        if let Some(hi) = hi { prop_assert!(v < hi); }
    }

    #[test]
    fn radial_factor_is_positive_and_increasing(lam in 0.05f64..1.5, n in 1u32..=6, eta in any::<bool>()) {
        let (e, d) = if eta { (n, 0) } else { (0, n) };
        let grid: Vec<f64> = (1..=16).map(|i| i as f64 / 16.0).collect();
        let m = solve_l(e, d, lam, &grid).unwrap();
        prop_assert!(m.l.iter().all(|v| *v > 0.0));
        prop_assert!(m.l.windows(2).all(|w| w[1] > w[0]));
    }
}
