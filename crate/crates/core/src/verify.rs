//! Battery of checks against the structural properties of the mode ODEs,
//! the eigenvalue curves and the PDE discretisation, emitted as a pass/fail
//! matrix. Each check can run under a deliberate [`Fault`] to confirm that it
//! is able to fail.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::branch::check_cr_hypotheses_with;
use crate::collocation::{AngularSymmetry, Resolution, SolverOptions};
use crate::error::{Error, Result};
use crate::geometry::{Axis, BoundaryProfile, CosineSeries, ModeIndex};
use crate::linearization::{fd_derivative_h_with, resolvent_apply, LinearizedOperator};
use crate::mode_ode::{chebyshev_grid, frobenius_launch, riccati_on_grid, riccati_value, solve_l_with, FrobeniusSeries};
use crate::radial::radial_torsion;
use crate::settings::{Fault, Settings};
use crate::spectrum::{
    admissible_interval, asymptotics_report_with, bifurcation_sequence, default_curve_grid, eigen_curve, sigma_prime_closed_form,
    sigma_with,
};
use crate::torsion::solve_torsion_with;

const N_MAX: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub axes: Vec<Axis>,
    pub resolution: Resolution,
    pub fault: Fault,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { axes: vec![Axis::Xi, Axis::Eta], resolution: Resolution::new(32, 32), fault: Fault::None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub id: String,
    pub axis: Axis,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyMatrix {
    pub fault: Fault,
    pub rows: Vec<VerifyRow>,
}

impl VerifyMatrix {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    /// CSV `id,axis,status,detail`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,axis,status,detail\n");
        for r in &self.rows {
            let detail = r.detail.replace('"', "'");
            s.push_str(&format!("{},{},{},\"{}\"\n", r.id, r.axis, if r.passed { "pass" } else { "fail" }, detail));
        }
        s
    }
}

type Check = fn(Axis, &Ctx) -> Result<String>;

struct Ctx {
    settings: Settings,
    options: SolverOptions,
    resolution: Resolution,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Analysis(msg()))
    }
}

const CHECKS: &[(&str, Check)] = &[
    ("frobenius-launch", check_frobenius),
    ("radial-factor-shape", check_radial_factor),
    ("riccati-initial-taylor", check_taylor),
    ("riccati-bounds", check_riccati_bounds),
    ("riccati-monotone-in-n", check_riccati_monotone),
    ("riccati-vs-linear-ode", check_riccati_vs_linear),
    ("key-inequality", check_key_inequality),
    ("sigma-monotone-in-n", check_sigma_monotone),
    ("asymptotics", check_asymptotics),
    ("bifurcation-points", check_bifurcation_points),
    ("radial-torsion-pde", check_radial_pde),
    ("eigenfunction-identity", check_eigenfunctions),
    ("linearization-fd", check_linearization_fd),
    ("resolvent-round-trip", check_resolvent),
    ("cr-certificate", check_certificate),
];

/// Runs every check for the configured axes.
pub fn run_battery(config: &VerifyConfig) -> VerifyMatrix {
    let ctx = Ctx {
        settings: Settings::with_fault(config.fault),
        options: SolverOptions { symmetry: AngularSymmetry::Even, fault: config.fault },
        resolution: config.resolution,
    };
    let mut rows = Vec::new();
    for &axis in &config.axes {
        for (name, check) in CHECKS {
            let (passed, detail) = match check(axis, &ctx) {
                Ok(d) => (true, d),
                Err(e) => (false, e.to_string()),
            };
            rows.push(VerifyRow { id: format!("{axis}.{name}"), axis, passed, detail });
        }
    }
    VerifyMatrix { fault: config.fault, rows }
}

fn check_frobenius(axis: Axis, ctx: &Ctx) -> Result<String> {
    let r0 = ctx.settings.launch_radius;
    for n in 1..=N_MAX {
        let mode = ModeIndex::new(axis, n);
        let (v, _) = frobenius_launch(mode, ctx.settings.series_order, r0)?;
        let (eps, delta) = mode.frequencies();
        let s = FrobeniusSeries::new(eps, delta, ctx.settings.series_order);
        match axis {
            Axis::Xi => {
                ensure(s.coeffs[1] == 0.0, || format!("n={n}: L*'(0) != 0"))?;
                let d2 = 2.0 * s.coeffs[2];
                ensure((d2 - 0.5 * (n * n) as f64).abs() < 1e-12, || format!("n={n}: L*''(0) = {d2}"))?;
            }
            Axis::Eta => {
                let lead = v / r0.powi(n as i32);
                ensure((lead - 1.0).abs() < 1e-5, || format!("n={n}: L*(r)/r^n = {lead}"))?;
            }
        }
    }
    Ok(format!("n=1..{N_MAX}, radius {r0:e}"))
}

fn check_radial_factor(axis: Axis, ctx: &Ctx) -> Result<String> {
    let grid: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
    for n in 1..=N_MAX {
        let (eps, delta) = axis.frequencies(n);
        for &lam in &[0.3, 0.9, 1.4] {
            let m = solve_l_with(eps, delta, lam, &grid, &ctx.settings)?;
            ensure(m.l.iter().all(|v| *v > 0.0), || format!("n={n} lambda={lam}: l not positive"))?;
            ensure(m.l.windows(2).all(|w| w[1] > w[0]), || format!("n={n} lambda={lam}: l not increasing"))?;
            ensure((m.l[m.l.len() - 1] - 1.0).abs() < 1e-15, || format!("n={n}: l(1) != 1"))?;
        }
    }
    Ok("positive, increasing, l(1)=1 for n=1..8 at three lambdas".into())
}

fn check_taylor(axis: Axis, ctx: &Ctx) -> Result<String> {
    let lam = 0.01;
    let mut worst = 0.0f64;
    for n in 1..=3u32 {
        let v = riccati_value(ModeIndex::new(axis, n), lam, &ctx.settings)?;
        let (expect, tol) = match axis {
            Axis::Xi => ((n * n) as f64 * lam / 2.0, 1e-4),
            Axis::Eta => (n as f64, 1e-3),
        };
        worst = worst.max((v - expect).abs());
        ensure((v - expect).abs() < tol, || format!("n={n}: value {v} at lambda=0.01, expected {expect}"))?;
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn check_riccati_bounds(axis: Axis, ctx: &Ctx) -> Result<String> {
    let grid = default_curve_grid();
    for n in 0..=N_MAX {
        riccati_on_grid(ModeIndex::new(axis, n), &grid, &ctx.settings)?;
    }
    Ok("two-sided bounds hold on 400 nodes for n=0..8".into())
}

fn check_riccati_monotone(axis: Axis, ctx: &Ctx) -> Result<String> {
    let grid = chebyshev_grid(1e-2, FRAC_PI_2 - 1e-2, 50);
    let mut prev: Option<Vec<f64>> = None;
    for n in 1..=N_MAX {
        let cur = riccati_on_grid(ModeIndex::new(axis, n), &grid, &ctx.settings)?.values;
        if let Some(p) = &prev {
            ensure(p.iter().zip(&cur).all(|(a, b)| b > a), || format!("values for n={n} not above n={}", n - 1))?;
        }
        prev = Some(cur);
    }
    Ok("strictly increasing in n=1..8 on 50 nodes".into())
}

fn check_riccati_vs_linear(axis: Axis, ctx: &Ctx) -> Result<String> {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        let (eps, delta) = axis.frequencies(n);
        for &lam in &[0.3, 0.7, 1.1] {
            let r = riccati_value(ModeIndex::new(axis, n), lam, &ctx.settings)?;
            let lp = solve_l_with(eps, delta, lam, &[1.0], &ctx.settings)?.l_prime_at_1;
            let other = match axis {
                Axis::Xi => lp / lam,
                Axis::Eta => lp,
            };
            let rel = (r - other).abs() / other.abs();
            worst = worst.max(rel);
            ensure(rel < 1e-8, || format!("n={n} lambda={lam}: Riccati {r} vs linear {other}"))?;
        }
    }
    Ok(format!("max relative difference {worst:.2e}"))
}

fn check_key_inequality(axis: Axis, ctx: &Ctx) -> Result<String> {
    let grid = default_curve_grid();
    let n_min = if axis == Axis::Xi { 1 } else { 2 };
    for n in n_min..=N_MAX {
        let nf = n as f64;
        let curve = eigen_curve(ModeIndex::new(axis, n), &grid, &ctx.settings)?;
        for (l, s) in curve.lambdas.iter().zip(&curve.sigmas) {
            match axis {
                Axis::Xi if *l <= (1.0 / nf).asin() => {
                    ensure(*s < 0.0, || format!("sigma_{n}({l}) = {s} is not negative"))?
                }
                Axis::Eta if *l <= (1.0 / nf).acos() => {
                    ensure(*s > 0.0, || format!("sigma_{n}({l}) = {s} is not positive"))?
                }
                _ => {}
            }
        }
    }
    Ok("sign condition holds on the curve grid".into())
}

fn check_sigma_monotone(axis: Axis, ctx: &Ctx) -> Result<String> {
    let grid = default_curve_grid();
    let curves: Vec<Vec<f64>> = (0..=N_MAX)
        .map(|n| eigen_curve(ModeIndex::new(axis, n), &grid, &ctx.settings).map(|c| c.sigmas))
        .collect::<Result<_>>()?;
    for n in 1..curves.len() {
        ensure(curves[n - 1].iter().zip(&curves[n]).all(|(a, b)| b > a), || format!("sigma_{n} not above sigma_{}", n - 1))?;
    }
    Ok("sigma_0 < ... < sigma_8 on the curve grid".into())
}

fn check_asymptotics(axis: Axis, ctx: &Ctx) -> Result<String> {
    let mut detail = Vec::new();
    for n in 1..=N_MAX {
        let r = asymptotics_report_with(ModeIndex::new(axis, n), &ctx.settings)?;
        if n <= 2 {
            detail.push(format!("n={n}: sigma(1e-3)={:.6}, sigma(pi/2-1e-3)={:.4e}", r.sigma_near_zero, r.sigma_near_pi_half));
        }
    }
    Ok(detail.join("; "))
}

fn check_bifurcation_points(axis: Axis, ctx: &Ctx) -> Result<String> {
    let pts = bifurcation_sequence(axis, N_MAX, 1e-12, &ctx.settings)?;
    for p in &pts {
        let (lo, hi) = admissible_interval(p.mode);
        ensure(p.lambda > lo - 1e-10 && p.lambda < hi + 1e-10, || format!("lambda_{} = {} outside interval", p.mode.n, p.lambda))?;
        sigma_prime_closed_form(p)?;
    }
    for w in pts.windows(2) {
        let ok = match axis {
            Axis::Xi => w[1].lambda < w[0].lambda,
            Axis::Eta => w[1].lambda > w[0].lambda,
        };
        ensure(ok, || format!("lambda_{} and lambda_{} out of order", w[0].mode.n, w[1].mode.n))?;
    }
    Ok(pts.iter().map(|p| format!("{:.10}", p.lambda)).collect::<Vec<_>>().join(" "))
}

fn check_radial_pde(axis: Axis, ctx: &Ctx) -> Result<String> {
    let mut worst = 0.0f64;
    for &lam in &[0.3, 0.9, 1.4] {
        let f = solve_torsion_with(&BoundaryProfile::constant(axis, lam)?, ctx.resolution, ctx.options)?;
        for (i, t) in f.t.iter().enumerate() {
            let exact = radial_torsion(lam, (t * lam).min(lam))?;
            for k in 0..f.angles.len() {
                worst = worst.max((f.value(i, k) - exact).abs());
            }
        }
        let flux = -0.5 * lam.tan();
        worst = f.neumann_trace.iter().fold(worst, |m, h| m.max((h - flux).abs()));
    }
    ensure(worst < 1e-8, || format!("max error {worst:e} against the explicit radial solution"))?;
    Ok(format!("max error {worst:.2e}"))
}

fn check_eigenfunctions(axis: Axis, ctx: &Ctx) -> Result<String> {
    let mut worst = 0.0f64;
    for &lam in &[0.5, 1.1] {
        let op = LinearizedOperator::new(axis, lam, ctx.resolution, ctx.options)?;
        for m in 0..=6u32 {
            let r = op.mode_response(m as usize)?;
            let s = sigma_with(ModeIndex::new(axis, m), lam, &ctx.settings)?;
            let scale = s.abs().max(1.0);
            let dev = ((r.eigenvalue - s).abs()).max(r.leakage) / scale;
            worst = worst.max(dev);
            ensure(dev < 1e-7, || format!("m={m} lambda={lam}: PDE {} vs sigma {s}, leakage {:e}", r.eigenvalue, r.leakage))?;
        }
    }
    Ok(format!("max scaled deviation {worst:.2e}"))
}

fn check_linearization_fd(axis: Axis, ctx: &Ctx) -> Result<String> {
    let lam = match axis {
        Axis::Xi => 0.5,
        Axis::Eta => 0.9,
    };
    let fd = fd_derivative_h_with(axis, lam, &CosineSeries::mode(2), &[1e-2, 1e-3, 1e-4], ctx.resolution, ctx.options)?;
    ensure(fd.extrapolated_deviation < 1e-4, || format!("extrapolated deviation {:e}", fd.extrapolated_deviation))?;
    let s = sigma_with(ModeIndex::new(axis, 2), lam, &ctx.settings)?;
    let mid = fd.values[0];
    ensure((mid - s).abs() < 1e-4 * s.abs().max(1.0), || format!("D H[cos 2a](0) = {mid} vs sigma_2 = {s}"))?;
    Ok(format!("deviation {:.2e}, observed order {:.2}", fd.extrapolated_deviation, fd.observed_order))
}

fn check_resolvent(axis: Axis, ctx: &Ctx) -> Result<String> {
    let lam = match axis {
        Axis::Xi => 0.6,
        Axis::Eta => 1.0,
    };
    let j = 2;
    let v = CosineSeries::new(vec![0.3, 1.0, 0.0, -0.5, 0.25]);
    let out = resolvent_apply(axis, lam, j, &v, 8)?;
    let op = LinearizedOperator::new(axis, lam, ctx.resolution, ctx.options)?;
    let lr = op.apply(&out.result)?;
    let sj = sigma_with(ModeIndex::new(axis, j as u32), lam, &ctx.settings)?;
    let mut worst = 0.0f64;
    for (a, l) in op.angles().iter().zip(&lr) {
        let back = l - sj * out.result.eval(*a);
        worst = worst.max((back - v.eval(*a)).abs());
    }
    ensure(worst < 1e-8, || format!("(L - sigma_j) R v differs from v by {worst:e}"))?;
    Ok(format!("round-trip error {worst:.2e}, gap {:.3}", out.gap))
}

fn check_certificate(axis: Axis, ctx: &Ctx) -> Result<String> {
    let c = check_cr_hypotheses_with(ModeIndex::new(axis, 2), 8, ctx.resolution, &ctx.settings)?;
    Ok(format!("lambda_2 = {:.10}, gap {:.3}, transversality {:.4}", c.lambda, c.gap, c.transversality))
}
