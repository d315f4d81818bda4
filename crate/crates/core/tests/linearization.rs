mod common;

use serrin_core::collocation::{Resolution, SolverOptions};
use serrin_core::linearization::{
    apply_L, fd_derivative_H, harmonic_extend, resolvent_apply, LinearizedOperator, SpectralDecomposition,
};
use serrin_core::mode_ode::solve_l;
use serrin_core::spectrum::find_lambda_n;
use serrin_core::{Axis, CosineSeries, Error, ModeIndex};

const RES: Resolution = Resolution { radial: 48, angular: 48 };

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn constant_data_extends_to_a_constant() {
    let e = harmonic_extend(Axis::Xi, 0.7, &CosineSeries::constant(1.0), RES).unwrap();
    assert!(max_abs(e.values.iter().map(|v| v - 1.0)) < 1e-12);
}

#[test]
fn extension_has_product_structure() {
    for (axis, lam) in [(Axis::Xi, 0.6), (Axis::Eta, 1.0)] {
        let e = harmonic_extend(axis, lam, &CosineSeries::mode(2), RES).unwrap();
        let (eps, delta) = axis.frequencies(2);
        let ascending: Vec<f64> = e.t.iter().rev().copied().collect();
        let mut l = solve_l(eps, delta, lam, &ascending).unwrap().l;
        l.reverse();
        let norm = common::mode_function(eps, delta, lam);
        let na = e.angles.len();
        for (i, t) in e.t.iter().enumerate() {
            let oracle = common::mode_function(eps, delta, t * lam) / norm;
            assert!((l[i] - oracle).abs() < 1e-10);
            for (k, a) in e.angles.iter().enumerate() {
                assert!((e.values[i * na + k] - l[i] * (2.0 * a).cos()).abs() < 1e-8, "{axis} t={t}");
            }
        }
    }
}

#[test]
fn extension_is_linear() {
    let (lam, axis) = (0.8, Axis::Xi);
    let sum = harmonic_extend(axis, lam, &CosineSeries::new(vec![0.0, 1.0, 0.0, 1.0]), RES).unwrap();
    let one = harmonic_extend(axis, lam, &CosineSeries::mode(1), RES).unwrap();
    let three = harmonic_extend(axis, lam, &CosineSeries::mode(3), RES).unwrap();
    let dev = max_abs(sum.values.iter().zip(&one.values).zip(&three.values).map(|((s, a), b)| s - a - b));
    assert!(dev < 1e-9);
}

#[test]
fn cosines_are_eigenfunctions() {
    for axis in [Axis::Xi, Axis::Eta] {
        for &lam in &[0.3, 0.75, 1.2] {
            let op = LinearizedOperator::new(axis, lam, RES, SolverOptions::default()).unwrap();
            for m in 0..=8 {
                let r = op.mode_response(m).unwrap();
                let want = common::sigma(axis, m as u32, lam);
                assert!((r.eigenvalue - want).abs() < 1e-7 * want.abs().max(1.0), "{axis}:{m} at {lam}");
                assert!(r.leakage < 1e-8 * want.abs().max(1.0), "{axis}:{m} leakage {:e}", r.leakage);
            }
        }
    }
}

#[test]
fn zero_mode_eigenvalue() {
    let lam: f64 = 0.9;
    let v = apply_L(Axis::Eta, lam, &CosineSeries::constant(1.0), RES).unwrap();
    assert!(max_abs(v.iter().map(|x| x + 0.5 / lam.cos().powi(2))) < 1e-10);
}

#[test]
fn kernel_direction_at_the_bifurcation_point() {
    for axis in [Axis::Xi, Axis::Eta] {
        let lj = find_lambda_n(ModeIndex::new(axis, 2), 1e-13).unwrap().lambda;
        let v = apply_L(axis, lj, &CosineSeries::mode(2), RES).unwrap();
        assert!(max_abs(v) < 1e-6, "{axis}");
    }
}

#[test]
fn finite_differences_match_the_linearization() {
    let steps = [1e-2, 1e-3, 1e-4];
    let fd = fd_derivative_H(Axis::Xi, 0.5, &CosineSeries::mode(2), &steps, RES).unwrap();
    assert!(fd.extrapolated_deviation < 1e-4);
    assert!((fd.observed_order - 2.0).abs() < 0.1);
    // Constant direction: derivative of −½ tan λ.
    let lam: f64 = 0.7;
    let fd = fd_derivative_H(Axis::Xi, lam, &CosineSeries::constant(1.0), &steps, RES).unwrap();
    assert!(max_abs(fd.values.iter().map(|v| v + 0.5 / lam.cos().powi(2))) < 1e-7);
    let fd = fd_derivative_H(Axis::Eta, 1.1, &CosineSeries::mode(2), &steps, RES).unwrap();
    let s2 = common::sigma(Axis::Eta, 2, 1.1);
    for (a, v) in fd.angles.iter().zip(&fd.values) {
        assert!((v - s2 * (2.0 * a).cos()).abs() < 1e-4 * s2.abs());
    }
    assert_eq!(fd.table_csv().lines().count(), 4);
}

#[test]
fn invalid_steps_are_rejected() {
    let e = fd_derivative_H(Axis::Xi, 0.5, &CosineSeries::mode(2), &[1e-3, 1e-2], RES).unwrap_err();
    assert!(matches!(e, Error::Config(_)));
}

#[test]
fn resolvent_on_single_modes() {
    let (axis, lam, j) = (Axis::Xi, 0.6, 2);
    for m in [0usize, 1, 3, 5] {
        let out = resolvent_apply(axis, lam, j, &CosineSeries::mode(m), 8).unwrap();
        let want = 1.0 / (common::sigma(axis, m as u32, lam) - common::sigma(axis, j as u32, lam));
        assert!((out.result.coeff(m) - want).abs() < 1e-9 * want.abs());
        assert!((0..=8).filter(|k| *k != m).all(|k| out.result.coeff(k) == 0.0));
    }
    let zero = resolvent_apply(axis, lam, j, &CosineSeries::new(vec![0.0; 9]), 8).unwrap();
    assert!(zero.result.coeffs.iter().all(|c| *c == 0.0));
    let bad = resolvent_apply(axis, lam, j, &CosineSeries::mode(2), 8).unwrap_err();
    assert!(matches!(bad, Error::Precondition(_)));
}

#[test]
fn resolvent_inverts_the_shifted_operator() {
    for (axis, lam) in [(Axis::Xi, 0.6), (Axis::Eta, 1.25)] {
        let j = 2;
        let v = CosineSeries::new(vec![0.4, -0.2, 0.0, 0.7, 0.1, 0.0, -0.3]);
        let r = resolvent_apply(axis, lam, j, &v, 8).unwrap();
        let op = LinearizedOperator::new(axis, lam, RES, SolverOptions::default()).unwrap();
        let sj = common::sigma(axis, j as u32, lam);
        let lr = op.apply(&r.result).unwrap();
        let dev = max_abs(op.angles().iter().zip(&lr).map(|(a, l)| l - sj * r.result.eval(*a) - v.eval(*a)));
        assert!(dev < 1e-8, "{axis}: {dev:e}");
        assert!(r.gap > 0.0);
    }
}

#[test]
fn spectral_decomposition_round_trip() {
    let w = CosineSeries::new(vec![0.1, 0.2, -0.3, 0.0, 0.05]);
    let d = SpectralDecomposition::from_samples(Axis::Xi, 0.5, &w.sample(32), 6).unwrap();
    let back = d.reconstruct();
    for m in 0..=6 {
        assert!((back.coeff(m) - w.coeff(m)).abs() < 1e-14);
    }
    let lw = apply_L(Axis::Xi, 0.5, &w, RES).unwrap();
    let spec = d.apply();
    let op_angles: Vec<f64> = (0..48).map(|k| 2.0 * std::f64::consts::PI * k as f64 / 48.0).collect();
    assert!(max_abs(op_angles.iter().zip(&lw).map(|(a, l)| l - spec.eval(*a))) < 1e-9);
}
