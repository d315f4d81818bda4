//! Eigenvalue curves `σ_n(λ)` of the linearised Neumann operator and their
//! zeros `λ_n`, where the constant tubes bifurcate.
//!
//! `σ_n(λ) = ½ tan λ · F_n(λ) − 1/(2cos²λ)` with `F_n = (L*)'/L*` at `λ`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{Axis, ModeIndex};
use crate::io::fmt_f64;
use crate::mode_ode::{chebyshev_grid, log_derivative, riccati_on_grid};
use crate::roots::brent;
use crate::settings::{Fault, Settings};

/// Number of points in the uniqueness scan over `(0, π/2)`.
pub const SCAN_POINTS: usize = 200;
/// Default curve grid size.
pub const CURVE_POINTS: usize = 400;
/// Default curve grid endpoints.
pub const CURVE_MARGIN: f64 = 1e-3;

fn sigma_from_log_derivative(lambda: f64, big_f: f64, fault: Fault) -> f64 {
    let c = lambda.cos();
    let s = 0.5 * lambda.tan() * big_f - 0.5 / (c * c);
    if fault == Fault::FlipSigmaSign {
        -s
    } else {
        s
    }
}

/// Eigenvalue of the linearised operator on the pure mode.
pub fn sigma(mode: ModeIndex, lambda: f64) -> Result<f64> {
    sigma_with(mode, lambda, &Settings::default())
}

pub fn sigma_with(mode: ModeIndex, lambda: f64, settings: &Settings) -> Result<f64> {
    if !(lambda > 0.0 && lambda < FRAC_PI_2) {
        return domain(format!("lambda = {lambda} outside (0, pi/2)"));
    }
    let big_f = log_derivative(mode, lambda, settings)?;
    Ok(sigma_from_log_derivative(lambda, big_f, settings.fault))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCurve {
    pub mode: ModeIndex,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl EigenCurve {
    /// CSV with columns `axis,n,lambda,sigma`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis,n,lambda,sigma\n");
        for (l, v) in self.lambdas.iter().zip(&self.sigmas) {
            s.push_str(&format!("{},{},{},{}\n", self.mode.axis, self.mode.n, fmt_f64(*l), fmt_f64(*v)));
        }
        s
    }

    pub fn sign_changes(&self) -> Vec<usize> {
        self.sigmas
            .windows(2)
            .enumerate()
            .filter(|(_, w)| (w[0] < 0.0) != (w[1] < 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Default curve grid: 400 Chebyshev nodes on `(10⁻³, π/2 − 10⁻³)`.
pub fn default_curve_grid() -> Vec<f64> {
    chebyshev_grid(CURVE_MARGIN, FRAC_PI_2 - CURVE_MARGIN, CURVE_POINTS)
}

/// `σ_n` on an ascending grid; the Riccati bounds are monitored on the way.
pub fn eigen_curve(mode: ModeIndex, grid: &[f64], settings: &Settings) -> Result<EigenCurve> {
    let state = riccati_on_grid(mode, grid, settings)?;
    let sigmas = state
        .log_derivatives()
        .iter()
        .zip(grid)
        .map(|(f, l)| sigma_from_log_derivative(*l, *f, settings.fault))
        .collect();
    Ok(EigenCurve { mode, lambdas: grid.to_vec(), sigmas })
}

/// A zero `λ_n` of `σ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub mode: ModeIndex,
    pub lambda: f64,
    pub sigma_at_root: f64,
    /// Richardson-extrapolated central difference of `σ_n` at `λ_n`.
    pub sigma_prime: f64,
    pub bracket: (f64, f64),
    pub tol: f64,
    pub scan_points: usize,
}

fn scan_grid() -> Vec<f64> {
    (0..SCAN_POINTS).map(|i| (i as f64 + 0.5) * FRAC_PI_2 / SCAN_POINTS as f64).collect()
}

/// The interval in which `λ_n` must lie: `(0, arcsin(1/√n)]` for `Xi`,
/// `[arccos(1/n), π/2)` for `Eta`.
pub fn admissible_interval(mode: ModeIndex) -> (f64, f64) {
    let n = mode.n as f64;
    match mode.axis {
        Axis::Xi => (0.0, (1.0 / n.sqrt()).asin()),
        Axis::Eta => ((1.0 / n).acos(), FRAC_PI_2),
    }
}

pub fn find_lambda_n(mode: ModeIndex, tol: f64) -> Result<BifurcationPoint> {
    find_lambda_n_with(mode, tol, &Settings::default())
}

/// Locates the unique zero of `σ_n` after a sign scan certifies that there is
/// exactly one sign change on a 200-point grid of `(0, π/2)`.
pub fn find_lambda_n_with(mode: ModeIndex, tol: f64, settings: &Settings) -> Result<BifurcationPoint> {
    mode.require_bifurcation_index()?;
    if !(tol > 0.0) {
        return Err(Error::Config("root tolerance must be positive".into()));
    }
    let grid = scan_grid();
    let curve = eigen_curve(mode, &grid, settings)?;
    let changes = curve.sign_changes();
    let i = match changes.as_slice() {
        [] => {
            return Err(Error::Analysis(format!("sigma_{} ({}) has no sign change on (0, pi/2)", mode.n, mode.axis)))
        }
        [i] => *i,
        many => {
            return Err(Error::Uniqueness(format!(
                "sigma_{} ({}) changes sign {} times on the scan grid",
                mode.n,
                mode.axis,
                many.len()
            )))
        }
    };
    let bracket = (grid[i], grid[i + 1]);
    let lambda = brent(|l| sigma_with(mode, l, settings), bracket.0, bracket.1, tol)?;
    let sigma_at_root = sigma_with(mode, lambda, settings)?;
    let sigma_prime = richardson_derivative(|l| sigma_with(mode, l, settings), lambda, 1e-3)?;

    let (lo, hi) = admissible_interval(mode);
    let slack = 10.0 * tol;
    if lambda < lo - slack || lambda > hi + slack {
        return Err(Error::Analysis(format!(
            "lambda_{} = {lambda} ({}) outside its interval [{lo}, {hi}]",
            mode.n, mode.axis
        )));
    }
    let sign_ok = match mode.axis {
        Axis::Xi => sigma_prime > 0.0,
        Axis::Eta => sigma_prime < 0.0,
    };
    if !sign_ok {
        return Err(Error::Analysis(format!(
            "sigma_{}' at lambda_{} has the wrong sign ({sigma_prime}) for the {} family",
            mode.n, mode.n, mode.axis
        )));
    }
    Ok(BifurcationPoint { mode, lambda, sigma_at_root, sigma_prime, bracket, tol, scan_points: SCAN_POINTS })
}

/// `(4D(h/2) − D(h))/3` with `D` the central difference.
pub fn richardson_derivative<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let d = |f: &mut F, h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let d1 = d(&mut f, h)?;
    let d2 = d(&mut f, 0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Closed-form `σ_n'(λ_n)` obtained by eliminating `F_n` through `σ_n(λ_n) = 0`.
pub fn sigma_prime_formula(mode: ModeIndex, lambda: f64) -> f64 {
    let n2 = (mode.n as f64).powi(2);
    let (s, c) = lambda.sin_cos();
    match mode.axis {
        Axis::Xi => (n2 * s * s - 1.0) / (2.0 * c.powi(3) * s),
        Axis::Eta => (n2 - 1.0 / (c * c)) / (2.0 * s * c),
    }
}

/// Closed-form derivative, cross-checked against the numerical one stored in
/// the point.
pub fn sigma_prime_closed_form(point: &BifurcationPoint) -> Result<f64> {
    if !(point.sigma_at_root.abs() < 1e-9) {
        return Err(Error::Precondition(format!(
            "sigma({}) = {:e} is not a root",
            point.lambda, point.sigma_at_root
        )));
    }
    let closed = sigma_prime_formula(point.mode, point.lambda);
    let rel = (closed - point.sigma_prime).abs() / closed.abs();
    if rel > 1e-3 {
        return Err(Error::InternalConsistency(format!(
            "closed-form sigma' = {closed} disagrees with finite difference {} (relative {rel:e})",
            point.sigma_prime
        )));
    }
    Ok(closed)
}

/// JSON-ready record of a bifurcation point with its derivative cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRecord {
    pub axis: Axis,
    pub n: u32,
    pub lambda: f64,
    pub sigma_at_root: f64,
    pub bracket: (f64, f64),
    pub root_tol: f64,
    pub scan_points: usize,
    pub interval: (f64, f64),
    pub sigma_prime_numeric: f64,
    pub sigma_prime_closed_form: f64,
    pub sigma_prime_relative_diff: f64,
}

pub fn bifurcation_record(point: &BifurcationPoint) -> Result<BifurcationRecord> {
    let closed = sigma_prime_closed_form(point)?;
    Ok(BifurcationRecord {
        axis: point.mode.axis,
        n: point.mode.n,
        lambda: point.lambda,
        sigma_at_root: point.sigma_at_root,
        bracket: point.bracket,
        root_tol: point.tol,
        scan_points: point.scan_points,
        interval: admissible_interval(point.mode),
        sigma_prime_numeric: point.sigma_prime,
        sigma_prime_closed_form: closed,
        sigma_prime_relative_diff: (closed - point.sigma_prime).abs() / closed.abs(),
    })
}

/// Endpoint behaviour and growth bounds of one eigenvalue curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub mode: ModeIndex,
    /// `σ_n(10⁻³)`, the observed small-tube limit.
    pub sigma_near_zero: f64,
    /// `σ_n(π/2 − 10⁻³)`.
    pub sigma_near_pi_half: f64,
    /// `σ_n · 2cos²λ/(n − 1)` at `π/2 − 10⁻³` (`Xi`, `n ≥ 2`).
    pub blowup_ratio: Option<f64>,
    /// Smallest `σ_n/n − lower` over the grid, when a lower bound applies.
    pub lower_margin: Option<f64>,
    /// Smallest `upper − σ_n/n` over the grid (`Xi` only).
    pub upper_margin: Option<f64>,
}

pub fn asymptotics_report(mode: ModeIndex) -> Result<AsymptoticsReport> {
    asymptotics_report_with(mode, &Settings::default())
}

pub fn asymptotics_report_with(mode: ModeIndex, settings: &Settings) -> Result<AsymptoticsReport> {
    let grid = default_curve_grid();
    let curve = eigen_curve(mode, &grid, settings)?;
    let n = mode.n as f64;
    let near_zero = curve.sigmas[0];
    let lam_end = FRAC_PI_2 - CURVE_MARGIN;
    let near_end = sigma_with(mode, lam_end, settings)?;
    let fail = |what: String| Err(Error::Analysis(format!("{}:{} {what}", mode.axis, mode.n)));
    let mut lower_margin: Option<f64> = None;
    let mut upper_margin: Option<f64> = None;
    let mut blowup_ratio = None;
    if mode.n >= 1 {
        for (&l, &s) in grid.iter().zip(&curve.sigmas) {
            let c2 = l.cos().powi(2);
            let lower = match mode.axis {
                Axis::Xi if mode.n >= 2 => Some(0.5 * l.tan().powi(2) - 0.5 / (n * c2)),
                Axis::Xi => None,
                Axis::Eta => Some(0.5 - 0.5 / (n * c2)),
            };
            if let Some(lo) = lower {
                let m = (s / n - lo) / lo.abs().max(1.0);
                lower_margin = Some(lower_margin.map_or(m, |x: f64| x.min(m)));
            }
            if mode.axis == Axis::Xi {
                let hi = 1.5 * l.tan() / l.cos();
                let m = (hi - s / n) / hi.abs().max(1.0);
                upper_margin = Some(upper_margin.map_or(m, |x: f64| x.min(m)));
            }
        }
        if let Some(m) = lower_margin {
            if m < -settings.bound_slack {
                return fail(format!("violates the lower growth bound (margin {m:e})"));
            }
        }
        if let Some(m) = upper_margin {
            if m < -settings.bound_slack {
                return fail(format!("violates the upper growth bound (margin {m:e})"));
            }
        }
    }
    match mode.axis {
        Axis::Xi if mode.n >= 2 => {
            let r = near_end * 2.0 * lam_end.cos().powi(2) / (n - 1.0);
            if !(0.95..=1.05).contains(&r) {
                return fail(format!("blow-up ratio {r} outside [0.95, 1.05]"));
            }
            blowup_ratio = Some(r);
        }
        Axis::Eta if mode.n >= 1 => {
            if !(near_end < 0.0) {
                return fail(format!("sigma near pi/2 is {near_end}, expected large negative"));
            }
        }
        _ => {}
    }
    if mode.n >= 1 && !(near_zero < 0.0) && mode.axis == Axis::Xi {
        return fail(format!("small-tube limit {near_zero} is not negative"));
    }
    Ok(AsymptoticsReport {
        mode,
        sigma_near_zero: near_zero,
        sigma_near_pi_half: near_end,
        blowup_ratio,
        lower_margin,
        upper_margin,
    })
}

/// `λ_2, …, λ_{n_max}` for one axis, each certified individually.
pub fn bifurcation_sequence(axis: Axis, n_max: u32, tol: f64, settings: &Settings) -> Result<Vec<BifurcationPoint>> {
    (2..=n_max).map(|n| find_lambda_n_with(ModeIndex::new(axis, n), tol, settings)).collect()
}
