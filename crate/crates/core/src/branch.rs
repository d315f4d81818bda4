//! Crandall–Rabinowitz certificate and continuation of bifurcating Serrin
//! branches `φ_s = λ_s + s(cos(j a) + w_s)`.
//!
//! For fixed amplitude `s` the unknowns are `λ` and the complement
//! coefficients `c_m` of `w_s` (`c_0 = c_j = 0`); the equations are
//! `P_m H(φ_s) = 0` for the same modes and for `m = j`. Prescribing the mean
//! of `φ` through `λ` removes the constant mode, so the flux constant is the
//! mean of `H`. Residuals are divided by `s`, which keeps the Jacobian
//! nonsingular as `s → 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::collocation::{AngularSymmetry, Resolution, SolverOptions};
use crate::error::{domain, Error, Result};
use crate::geometry::{boundary_area, volume, Axis, BoundaryProfile, CosineSeries, ModeIndex};
use crate::io::fmt_f64;
use crate::linearization::LinearizedOperator;
use crate::radial::radial_torsion;
use crate::settings::Settings;
use crate::spectrum::{find_lambda_n_with, sigma_prime_formula};
use crate::torsion::{mean_flux, serrin_defect, solve_torsion_with, TorsionField};

/// Discrete eigenvalues below this magnitude count as kernel.
pub const KERNEL_TOL: f64 = 1e-8;
/// Tolerance on `H(λ) + ½ tan λ` along the trivial family.
pub const TRIVIAL_TOL: f64 = 1e-10;
/// Quadrature order for reported volumes and areas.
const QUAD_ORDER: usize = 24;

/// Numerical evidence for the four bifurcation hypotheses at `(λ_j, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrCertificate {
    pub mode: ModeIndex,
    pub lambda: f64,
    pub truncation: usize,
    pub resolution: Resolution,
    /// Max of `|H(λ') + ½ tan λ'| / max(1, ½ tan λ')` over the sampled `λ'`.
    pub trivial_residual: f64,
    pub trivial_samples: Vec<f64>,
    /// Discrete eigenvalues of `L_λ` on `cos(m a)`, `m = 0..=J`.
    pub eigenvalues: Vec<f64>,
    pub max_leakage: f64,
    pub kernel_modes: Vec<usize>,
    /// `min_{m ≠ j} |μ_m|`.
    pub gap: f64,
    /// Central difference of `μ_j` in `λ`.
    pub transversality: f64,
    pub sigma_prime_closed_form: f64,
    pub transversality_sign: i8,
    pub passed: bool,
}

fn expected_sign(axis: Axis) -> i8 {
    match axis {
        Axis::Xi => 1,
        Axis::Eta => -1,
    }
}

fn options_for(settings: &Settings) -> SolverOptions {
    SolverOptions { symmetry: AngularSymmetry::Even, fault: settings.fault }
}

pub fn check_cr_hypotheses(mode: ModeIndex, truncation: usize, resolution: Resolution) -> Result<CrCertificate> {
    check_cr_hypotheses_with(mode, truncation, resolution, &Settings::default())
}

pub fn check_cr_hypotheses_with(
    mode: ModeIndex,
    truncation: usize,
    resolution: Resolution,
    settings: &Settings,
) -> Result<CrCertificate> {
    mode.require_bifurcation_index()?;
    let point = find_lambda_n_with(mode, 1e-12, settings)?;
    check_cr_hypotheses_at_with(mode, point.lambda, truncation, resolution, settings)
}

/// Certificate at an arbitrary `λ`; fails unless `λ` is a simple bifurcation
/// value for `mode`.
pub fn check_cr_hypotheses_at(mode: ModeIndex, lambda: f64, truncation: usize, resolution: Resolution) -> Result<CrCertificate> {
    check_cr_hypotheses_at_with(mode, lambda, truncation, resolution, &Settings::default())
}

pub fn check_cr_hypotheses_at_with(
    mode: ModeIndex,
    lambda: f64,
    truncation: usize,
    resolution: Resolution,
    settings: &Settings,
) -> Result<CrCertificate> {
    mode.require_bifurcation_index()?;
    let j = mode.n as usize;
    if truncation < j {
        return Err(Error::Config(format!("truncation {truncation} must be at least j = {j}")));
    }
    let options = options_for(settings);
    let op = LinearizedOperator::new(mode.axis, lambda, resolution, options)?;

    // (i) H(λ') is constant −½ tan λ' along the trivial family.
    let samples = [lambda, 0.5 * lambda, 0.5 * (lambda + FRAC_PI_2)];
    let mut trivial_residual = 0.0f64;
    for (idx, &l) in samples.iter().enumerate() {
        let field = if idx == 0 {
            op.torsion()?
        } else {
            solve_torsion_with(&BoundaryProfile::constant(mode.axis, l)?, resolution, options)?
        };
        let exact = -0.5 * l.tan();
        // Scaled by |H| once it exceeds 1: near pi/2 rounding alone exceeds 1e-10 absolute.
        let scale = exact.abs().max(1.0);
        trivial_residual =
            trivial_residual.max(field.neumann_trace.iter().map(|h| (h - exact).abs() / scale).fold(0.0, f64::max));
    }
    if !(trivial_residual < TRIVIAL_TOL) {
        return Err(Error::Analysis(format!(
            "trivial family: |H(lambda) + tan(lambda)/2| = {trivial_residual:e} exceeds {TRIVIAL_TOL:e}"
        )));
    }

    // (ii)/(iii) discrete spectrum on cos(m a), m ≤ J.
    let mut eigenvalues = Vec::with_capacity(truncation + 1);
    let mut max_leakage = 0.0f64;
    for m in 0..=truncation {
        let r = op.mode_response(m)?;
        max_leakage = max_leakage.max(r.leakage / r.eigenvalue.abs().max(1.0));
        eigenvalues.push(r.eigenvalue);
    }
    let kernel_modes: Vec<usize> = (0..=truncation).filter(|m| eigenvalues[*m].abs() < KERNEL_TOL).collect();
    if kernel_modes != vec![j] {
        return Err(Error::Analysis(format!(
            "kernel: expected exactly mode {j} below {KERNEL_TOL:e}, found {kernel_modes:?} (mu_{j} = {:e})",
            eigenvalues[j]
        )));
    }
    let gap = (0..=truncation).filter(|m| *m != j).map(|m| eigenvalues[m].abs()).fold(f64::INFINITY, f64::min);
    if !(gap > 100.0 * KERNEL_TOL) {
        return Err(Error::Analysis(format!("range: spectral gap {gap:e} does not separate the kernel")));
    }

    // (iv) transversality: d μ_j/dλ.
    let h = 1e-4;
    let mu = |l: f64| -> Result<f64> { Ok(LinearizedOperator::new(mode.axis, l, resolution, options)?.mode_response(j)?.eigenvalue) };
    let transversality = (mu(lambda + h)? - mu(lambda - h)?) / (2.0 * h);
    let sign: i8 = if transversality > 0.0 { 1 } else if transversality < 0.0 { -1 } else { 0 };
    if sign != expected_sign(mode.axis) {
        return Err(Error::Analysis(format!(
            "transversality: d mu_{j}/d lambda = {transversality} has the wrong sign for the {} family",
            mode.axis
        )));
    }
    Ok(CrCertificate {
        mode,
        lambda,
        truncation,
        resolution,
        trivial_residual,
        trivial_samples: samples.to_vec(),
        eigenvalues,
        max_leakage,
        kernel_modes,
        gap,
        transversality,
        sigma_prime_closed_form: sigma_prime_formula(mode, lambda),
        transversality_sign: sign,
        passed: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSettings {
    pub s_max: f64,
    pub n_steps: usize,
    pub resolution: Resolution,
    pub truncation: usize,
    /// Convergence threshold on `max_m |P_m H|`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Restrict unknowns to multiples of `j`.
    pub symmetric: bool,
    pub max_halvings: usize,
}

impl Default for BranchSettings {
    fn default() -> Self {
        BranchSettings {
            s_max: 0.02,
            n_steps: 10,
            resolution: Resolution::new(64, 64),
            truncation: 16,
            newton_tol: 1e-11,
            max_newton: 12,
            symmetric: true,
            max_halvings: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub mode: ModeIndex,
    pub s: f64,
    pub lambda: f64,
    /// Complement part `w_s`; its `cos(j a)` and constant coefficients are zero.
    pub w: CosineSeries,
    pub profile: BoundaryProfile,
    pub defect: f64,
    pub newton_iters: usize,
    /// `max_m |P_m H|` over the enforced modes.
    pub residual: f64,
    /// `|P_j w_s|`.
    pub orthogonality: f64,
    /// `|P_j(φ_s − λ_s) − s|`.
    pub amplitude_error: f64,
    pub volume: f64,
    pub area: f64,
    pub mean_flux: f64,
    /// `|mean_flux · area + volume|`.
    pub divergence_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    NewtonFailure { s: f64, message: String },
    Inadmissible { s: f64, message: String },
    DefectTooLarge { s: f64, defect: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRun {
    pub mode: ModeIndex,
    pub settings: BranchSettings,
    pub certificate: CrCertificate,
    /// Max error of the constant-tube solve against the exact solution.
    pub radial_error: f64,
    pub defect_tol: f64,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

impl BranchRun {
    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Unknown complement modes for mode `j`.
fn complement_modes(axis: Axis, j: usize, truncation: usize, symmetric: bool) -> Vec<usize> {
    (1..=truncation)
        .filter(|m| *m != j)
        .filter(|m| if symmetric { m % j == 0 } else { axis == Axis::Xi || m % 2 == 0 })
        .collect()
}

struct System {
    axis: Axis,
    j: usize,
    modes: Vec<usize>,
    resolution: Resolution,
    options: SolverOptions,
}

impl System {
    fn profile(&self, s: f64, x: &[f64]) -> Result<BoundaryProfile> {
        let top = self.modes.iter().copied().chain([self.j]).max().unwrap_or(self.j);
        let mut c = vec![0.0; top + 1];
        c[0] = x[0];
        c[self.j] = s;
        for (m, v) in self.modes.iter().zip(&x[1..]) {
            c[*m] = s * v;
        }
        BoundaryProfile::new(self.axis, c)
    }

    fn equations(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.j).chain(self.modes.iter().copied())
    }

    /// Residual `P_m H / s` and the solved field.
    fn residual(&self, s: f64, x: &[f64]) -> Result<(Vec<f64>, TorsionField)> {
        let p = self.profile(s, x)?;
        let field = solve_torsion_with(&p, self.resolution, self.options)?;
        let proj = CosineSeries::from_samples(&field.neumann_trace, self.modes.iter().copied().chain([self.j]).max().unwrap_or(0));
        Ok((self.equations().map(|m| proj.coeff(m) / s).collect(), field))
    }

    fn jacobian(&self, s: f64, x: &[f64], r0: &[f64]) -> Result<Mat<f64>> {
        let n = x.len();
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            let h = if k == 0 { 1e-7 } else { 1e-7 / s.abs() };
            let mut xp = x.to_vec();
            xp[k] += h;
            let (rp, _) = self.residual(s, &xp)?;
            cols.push(rp.iter().zip(r0).map(|(a, b)| (a - b) / h).collect::<Vec<f64>>());
        }
        Ok(Mat::from_fn(n, n, |r, c| cols[c][r]))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

enum NewtonOutcome {
    Converged { x: Vec<f64>, iters: usize, residual: f64, field: Box<TorsionField> },
    Failed(String),
    Inadmissible(String),
}

fn newton(sys: &System, s: f64, guess: &[f64], settings: &BranchSettings) -> NewtonOutcome {
    let mut x = guess.to_vec();
    let eval = |x: &[f64]| sys.residual(s, x);
    let (mut r, mut field) = match eval(&x) {
        Ok(v) => v,
        Err(Error::Domain(m)) => return NewtonOutcome::Inadmissible(m),
        Err(e) => return NewtonOutcome::Failed(e.to_string()),
    };
    let mut jac: Option<Mat<f64>> = None;
    let mut prev = f64::INFINITY;
    for it in 0..=settings.max_newton {
        let res = max_abs(&r) * s.abs();
        if res < settings.newton_tol {
            return NewtonOutcome::Converged { x, iters: it, residual: res, field: Box::new(field) };
        }
        if it == settings.max_newton {
            break;
        }
        if jac.is_none() || res > 0.5 * prev {
            match sys.jacobian(s, &x, &r) {
                Ok(j) => jac = Some(j),
                Err(Error::Domain(m)) => return NewtonOutcome::Inadmissible(m),
                Err(e) => return NewtonOutcome::Failed(e.to_string()),
            }
        }
        prev = res;
        let jm = jac.as_ref().expect("jacobian assembled above");
        let rhs = Mat::from_fn(r.len(), 1, |i, _| r[i]);
        let dx = jm.partial_piv_lu().solve(&rhs);
        let step: Vec<f64> = (0..x.len()).map(|i| dx[(i, 0)]).collect();
        if step.iter().any(|v| !v.is_finite()) {
            return NewtonOutcome::Failed("singular Newton Jacobian".into());
        }
        for (xi, d) in x.iter_mut().zip(&step) {
            *xi -= d;
        }
        match eval(&x) {
            Ok((rn, f)) => {
                r = rn;
                field = f;
            }
            Err(Error::Domain(m)) => return NewtonOutcome::Inadmissible(m),
            Err(e) => return NewtonOutcome::Failed(e.to_string()),
        }
    }
    NewtonOutcome::Failed(format!("no convergence in {} iterations (residual {:e})", settings.max_newton, max_abs(&r) * s.abs()))
}

/// Max error of the constant-tube torsion solve at `λ` and `resolution`.
pub fn radial_discretization_error(axis: Axis, lambda: f64, resolution: Resolution, options: SolverOptions) -> Result<f64> {
    let field = solve_torsion_with(&BoundaryProfile::constant(axis, lambda)?, resolution, options)?;
    let mut err = 0.0f64;
    for (i, t) in field.t.iter().enumerate() {
        let exact = radial_torsion(lambda, (t * lambda).min(lambda))?;
        for k in 0..field.angles.len() {
            err = err.max((field.value(i, k) - exact).abs());
        }
    }
    let flux = -0.5 * lambda.tan();
    Ok(field.neumann_trace.iter().fold(err, |m, h| m.max((h - flux).abs())))
}

pub fn trace_branch(mode: ModeIndex, s_max: f64, n_steps: usize, resolution: Resolution) -> Result<BranchRun> {
    let settings = BranchSettings { s_max, n_steps, resolution, ..BranchSettings::default() };
    trace_branch_with(mode, &settings, &Settings::default())
}

pub fn trace_branch_with(mode: ModeIndex, settings: &BranchSettings, numerics: &Settings) -> Result<BranchRun> {
    mode.require_bifurcation_index()?;
    let j = mode.n as usize;
    if mode.axis == Axis::Eta && j % 2 == 1 {
        return domain(format!("Eta-case branches need pi-periodic profiles; j = {j} is odd"));
    }
    if settings.n_steps == 0 || !(settings.s_max != 0.0 && settings.s_max.is_finite()) {
        return Err(Error::Config("branch needs n_steps >= 1 and a nonzero finite s_max".into()));
    }
    if !(settings.newton_tol > 0.0) {
        return Err(Error::Config("newton_tol must be positive".into()));
    }
    let options = options_for(numerics);
    let certificate = check_cr_hypotheses_with(mode, settings.truncation, settings.resolution, numerics)?;
    let lambda_j = certificate.lambda;
    let radial_error = radial_discretization_error(mode.axis, lambda_j, settings.resolution, options)?;
    let defect_tol = (10.0 * radial_error).max(100.0 * settings.newton_tol);

    let sys = System {
        axis: mode.axis,
        j,
        modes: complement_modes(mode.axis, j, settings.truncation, settings.symmetric),
        resolution: settings.resolution,
        options,
    };
    let n_x = 1 + sys.modes.len();
    let mut points = vec![make_point(&sys, mode, 0.0, &{
        let mut x = vec![0.0; n_x];
        x[0] = lambda_j;
        x
    }, 0, 0.0, None)?];
    let mut history: Vec<(f64, Vec<f64>)> = vec![(0.0, {
        let mut x = vec![0.0; n_x];
        x[0] = lambda_j;
        x
    })];
    let mut termination = Termination::Completed;

    'steps: for k in 1..=settings.n_steps {
        let target = settings.s_max * k as f64 / settings.n_steps as f64;
        // Sub-steps towards `target`, halving on Newton failure.
        let mut pending = vec![target];
        let mut halvings = 0;
        while let Some(s) = pending.last().copied() {
            let guess = predict(&history, s);
            match newton(&sys, s, &guess, settings) {
                NewtonOutcome::Converged { x, iters, residual, field } => {
                    pending.pop();
                    history.push((s, x.clone()));
                    if pending.is_empty() {
                        let p = make_point(&sys, mode, s, &x, iters, residual, Some(*field))?;
                        if !(p.defect < defect_tol) {
                            termination = Termination::DefectTooLarge { s, defect: p.defect };
                            points.push(p);
                            break 'steps;
                        }
                        points.push(p);
                    }
                }
                NewtonOutcome::Failed(message) => {
                    if halvings >= settings.max_halvings {
                        termination = Termination::NewtonFailure { s, message };
                        break 'steps;
                    }
                    halvings += 1;
                    let last = history.last().map(|h| h.0).unwrap_or(0.0);
                    pending.push(0.5 * (last + s));
                }
                NewtonOutcome::Inadmissible(message) => {
                    termination = Termination::Inadmissible { s, message };
                    break 'steps;
                }
            }
        }
    }
    Ok(BranchRun { mode, settings: *settings, certificate, radial_error, defect_tol, points, termination })
}

/// Previous point, or the secant through the last two.
fn predict(history: &[(f64, Vec<f64>)], s: f64) -> Vec<f64> {
    match history {
        [] => unreachable!("history starts with the trivial point"),
        [only] => only.1.clone(),
        [.., (s0, x0), (s1, x1)] => {
            let t = (s - s1) / (s1 - s0);
            x1.iter().zip(x0).map(|(a, b)| a + t * (a - b)).collect()
        }
    }
}

fn make_point(
    sys: &System,
    mode: ModeIndex,
    s: f64,
    x: &[f64],
    newton_iters: usize,
    residual: f64,
    field: Option<TorsionField>,
) -> Result<BranchPoint> {
    let profile = sys.profile(s, x)?;
    let field = match field {
        Some(f) => f,
        None => solve_torsion_with(&profile, sys.resolution, sys.options)?,
    };
    let top = sys.modes.iter().copied().max().unwrap_or(0).max(sys.j);
    let mut w = vec![0.0; top + 1];
    for (m, v) in sys.modes.iter().zip(&x[1..]) {
        w[*m] = *v;
    }
    let w = CosineSeries::new(w);
    let vol = volume(&profile, QUAD_ORDER)?;
    let area = boundary_area(&profile, QUAD_ORDER)?;
    let mf = mean_flux(&field);
    Ok(BranchPoint {
        mode,
        s,
        lambda: x[0],
        orthogonality: w.coeff(sys.j).abs(),
        amplitude_error: (profile.series().coeff(sys.j) - s).abs(),
        w,
        defect: serrin_defect(&field),
        newton_iters,
        residual,
        volume: vol,
        area,
        mean_flux: mf,
        divergence_residual: (mf * area + vol).abs(),
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReportRow {
    pub s: f64,
    pub lambda: f64,
    pub defect: f64,
    pub volume: f64,
    pub area: f64,
    pub volume_fraction: f64,
    pub mean_flux: f64,
    pub divergence_residual: f64,
    /// Profile coefficients `c_0, c_j, c_{2j}, c_{3j}`.
    pub leading: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub mode: ModeIndex,
    pub lambda_j: f64,
    /// `sin²λ_j`, the volume fraction of the bifurcating tube.
    pub base_volume_fraction: f64,
    pub rows: Vec<BranchReportRow>,
    pub termination: Termination,
}

impl BranchReport {
    /// CSV `s,lambda,defect,volume,area,volume_fraction,mean_flux,divergence_residual,c0,cj,c2j,c3j`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,lambda,defect,volume,area,volume_fraction,mean_flux,divergence_residual,c0,cj,c2j,c3j\n");
        for r in &self.rows {
            let mut cells: Vec<String> = [r.s, r.lambda, r.defect, r.volume, r.area, r.volume_fraction, r.mean_flux, r.divergence_residual]
                .iter()
                .map(|v| fmt_f64(*v))
                .collect();
            cells.extend(r.leading.iter().map(|v| fmt_f64(*v)));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn branch_report(run: &BranchRun) -> BranchReport {
    let j = run.mode.n as usize;
    let sphere = 2.0 * PI * PI;
    let rows = run
        .points
        .iter()
        .map(|p| BranchReportRow {
            s: p.s,
            lambda: p.lambda,
            defect: p.defect,
            volume: p.volume,
            area: p.area,
            volume_fraction: p.volume / sphere,
            mean_flux: p.mean_flux,
            divergence_residual: p.divergence_residual,
            leading: [0, j, 2 * j, 3 * j].iter().map(|m| p.profile.series().coeff(*m)).collect(),
        })
        .collect();
    BranchReport {
        mode: run.mode,
        lambda_j: run.certificate.lambda,
        base_volume_fraction: run.certificate.lambda.sin().powi(2),
        rows,
        termination: run.termination.clone(),
    }
}
