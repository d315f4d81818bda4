//! Radial factors of harmonic extensions and their logarithmic derivatives.
//!
//! A harmonic function `l(t)·w(η, ξ)` with `w` of frequencies `(ε, δ)` in
//! `(η, ξ)` has, in `θ = tλ`, radial factor `L(θ)` solving
//!
//! `L'' + (cot θ − tan θ) L' − (ε²/sin²θ + δ²/cos²θ) L = 0`,
//!
//! regular at `θ = 0`. The pure families are `(0, n)` (active angle `ξ`) and
//! `(n, 0)` (active angle `η`). Near `θ = 0` the regular solution is a power
//! series with leading exponent `ε`; it is launched from a small radius and
//! continued by an adaptive integrator.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{Axis, ModeIndex};
use crate::ode::{integrate, Tolerance};
use crate::series;
use crate::settings::{Fault, Settings};

/// Beyond this `λ` the `Xi` Riccati equation is integrated for `1/f`.
const RECIPROCAL_SWITCH: f64 = 1.2;
/// Sweeps must stop this far short of `π/2`.
pub const SWEEP_GUARD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Zero,
    PiHalf,
}

/// Exponents of the two local Frobenius solutions at a singular endpoint.
pub fn indicial_roots(mode: ModeIndex, endpoint: Endpoint) -> Result<(f64, f64)> {
    if mode.n == 0 {
        return Err(Error::Precondition("indicial roots are defined for n >= 1; n = 0 is the constant solution".into()));
    }
    let n = mode.n as f64;
    let (eps, delta) = mode.frequencies();
    let k = match endpoint {
        Endpoint::Zero => eps,
        Endpoint::PiHalf => delta,
    };
    if k == 0 {
        Ok((0.0, 0.0))
    } else {
        Ok((n, -n))
    }
}

/// Regular Frobenius solution `θ^ε Σ a_m θ^m` with `a_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusSeries {
    pub exponent: f64,
    pub coeffs: Vec<f64>,
}

impl FrobeniusSeries {
    pub fn new(eps: u32, delta: u32, order: usize) -> Self {
        let e2 = (eps as f64).powi(2);
        let d2 = (delta as f64).powi(2);
        // θ·(cot θ − tan θ)
        let theta_cot = series::div(&series::cos(order + 1), &series::sinc(order + 1), order);
        let theta_tan = series::shift(&series::div(&series::sin(order), &series::cos(order), order), 1, order);
        let b = series::add(&theta_cot, &series::scale(&theta_tan, -1.0));
        // −θ²(ε²/sin²θ + δ²/cos²θ)
        let sinc = series::sinc(order);
        let inv_sinc2 = series::div(&[1.0], &series::mul(&sinc, &sinc, order), order);
        let cos = series::cos(order);
        let inv_cos2 = series::div(&[1.0], &series::mul(&cos, &cos, order), order);
        let c = series::add(&series::scale(&inv_sinc2, -e2), &series::scale(&series::shift(&inv_cos2, 2, order), -d2));

        let r = eps as f64;
        let mut a = vec![0.0; order + 1];
        a[0] = 1.0;
        for m in 1..=order {
            let mut s = 0.0;
            for i in 1..=m {
                s += (b[i] * (r + (m - i) as f64) + c[i]) * a[m - i];
            }
            let rho = r + m as f64;
            a[m] = -s / (rho * rho - e2);
        }
        FrobeniusSeries { exponent: r, coeffs: a }
    }

    /// `(L(θ), L'(θ))`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let r = self.exponent;
        let v = series::eval(&self.coeffs, theta) * theta.powf(r);
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, a)| {
                let p = r + m as f64;
                if p == 0.0 { 0.0 } else { a * p * theta.powf(p - 1.0) }
            })
            .sum();
        (v, d)
    }

    /// `L'/L` at `θ`, computed without forming `θ^ε`.
    pub fn log_derivative(&self, theta: f64) -> f64 {
        let r = self.exponent;
        let p = series::eval(&self.coeffs, theta);
        let dp: f64 = self.coeffs.iter().enumerate().skip(1).map(|(m, a)| m as f64 * a * theta.powi(m as i32 - 1)).sum();
        r / theta + dp / p
    }

    /// Relative size of the last two retained terms at `θ`.
    pub fn tail_estimate(&self, theta: f64) -> f64 {
        let n = self.coeffs.len();
        let total = series::eval(&self.coeffs, theta).abs();
        let tail: f64 = (n.saturating_sub(2)..n).map(|m| (self.coeffs[m] * theta.powi(m as i32)).abs()).sum();
        tail / total
    }

    fn check(&self, theta: f64) -> Result<()> {
        let tail = self.tail_estimate(theta);
        if !(tail < 1e-14) {
            return Err(Error::Precision(format!(
                "Frobenius series of order {} not converged at radius {theta}: tail ratio {tail:e}",
                self.coeffs.len() - 1
            )));
        }
        Ok(())
    }
}

/// `(L*(θ₀), L*'(θ₀))` of the regular solution normalised by `a_0 = 1`.
pub fn frobenius_launch(mode: ModeIndex, series_order: usize, launch_radius: f64) -> Result<(f64, f64)> {
    if !(launch_radius > 0.0 && launch_radius < FRAC_PI_2) {
        return domain(format!("launch radius {launch_radius} outside (0, pi/2)"));
    }
    let (eps, delta) = mode.frequencies();
    let s = FrobeniusSeries::new(eps, delta, series_order);
    s.check(launch_radius)?;
    Ok(s.eval(launch_radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusInfo {
    pub indicial_roots: (f64, f64),
    pub launch_radius: f64,
    pub series_order: usize,
}

/// Radial factor `l(t) = L(tλ)/L(λ)` sampled on a `t`-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub eps: u32,
    pub delta: u32,
    pub lambda: f64,
    pub t: Vec<f64>,
    pub l: Vec<f64>,
    /// `dl/dt` at the grid nodes.
    pub dl: Vec<f64>,
    pub l_prime_at_1: f64,
    pub frobenius: FrobeniusInfo,
}

impl ModeSolution {
    /// The pure family this solution belongs to, if any.
    pub fn mode(&self) -> Option<ModeIndex> {
        match (self.eps, self.delta) {
            (0, n) => Some(ModeIndex::xi(n)),
            (n, 0) => Some(ModeIndex::eta(n)),
            _ => None,
        }
    }
}

/// Solves for the regular radial factor with `l(1) = 1` on `grid ⊂ [0, 1]`
/// (ascending).
pub fn solve_l(eps: u32, delta: u32, lambda: f64, grid: &[f64]) -> Result<ModeSolution> {
    solve_l_with(eps, delta, lambda, grid, &Settings::default())
}

pub fn solve_l_with(eps: u32, delta: u32, lambda: f64, grid: &[f64], settings: &Settings) -> Result<ModeSolution> {
    check_lambda(lambda)?;
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("t-grid must be strictly ascending inside [0, 1]");
    }
    let info = FrobeniusInfo {
        indicial_roots: (eps as f64, -(eps as f64)),
        launch_radius: settings.launch_radius,
        series_order: settings.series_order,
    };
    if eps == 0 && delta == 0 {
        return Ok(ModeSolution {
            eps,
            delta,
            lambda,
            t: grid.to_vec(),
            l: vec![1.0; grid.len()],
            dl: vec![0.0; grid.len()],
            l_prime_at_1: 0.0,
            frobenius: FrobeniusInfo { indicial_roots: (0.0, 0.0), ..info },
        });
    }
    let fs = FrobeniusSeries::new(eps, delta, settings.series_order);
    let theta0 = settings.launch_radius.min(lambda);
    fs.check(theta0)?;
    let (l0, d0) = fs.eval(theta0);

    // θ-nodes past the launch point, always ending at λ.
    let mut thetas: Vec<f64> = grid.iter().map(|t| t * lambda).filter(|th| *th > theta0).collect();
    if thetas.last().map_or(true, |th| *th < lambda) {
        thetas.push(lambda);
    }
    let e2 = (eps as f64).powi(2);
    let d2 = (delta as f64).powi(2);
    let rhs = |th: f64, y: &[f64; 2]| {
        let (s, c) = th.sin_cos();
        [y[1], -(c / s - s / c) * y[1] + (e2 / (s * s) + d2 / (c * c)) * y[0]]
    };
    let ys = integrate(rhs, theta0, [l0, d0], &thetas, Tolerance::relative(settings.rtol))?;
    let (big_l, big_d) = {
        let y = ys.last().expect("λ is always an output node");
        (y[0], y[1])
    };
    let mut l = Vec::with_capacity(grid.len());
    let mut dl = Vec::with_capacity(grid.len());
    let mut j = 0;
    for &t in grid {
        let th = t * lambda;
        let (v, d) = if th <= theta0 {
            fs.eval(th)
        } else {
            let y = ys[j];
            j += 1;
            (y[0], y[1])
        };
        l.push(v / big_l);
        dl.push(lambda * d / big_l);
    }
    Ok(ModeSolution {
        eps,
        delta,
        lambda,
        t: grid.to_vec(),
        l,
        dl,
        l_prime_at_1: lambda * big_d / big_l,
        frobenius: FrobeniusInfo { indicial_roots: (eps as f64, -(eps as f64)), ..info },
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < FRAC_PI_2) {
        return domain(format!("lambda = {lambda} outside (0, pi/2)"));
    }
    Ok(())
}

/// Logarithmic derivatives `f_n` (`Xi`) or `k_n` (`Eta`) on a `λ`-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiState {
    pub mode: ModeIndex,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub tol: f64,
}

impl RiccatiState {
    /// CSV with columns `axis,n,lambda,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis,n,lambda,value\n");
        for (l, v) in self.lambdas.iter().zip(&self.values) {
            s.push_str(&format!("{},{},{},{}\n", self.mode.axis, self.mode.n, crate::io::fmt_f64(*l), crate::io::fmt_f64(*v)));
        }
        s
    }

    /// `L*'/L*` at each node, i.e. `f_n` or `k_n/λ`.
    pub fn log_derivatives(&self) -> Vec<f64> {
        match self.mode.axis {
            Axis::Xi => self.values.clone(),
            Axis::Eta => self.values.iter().zip(&self.lambdas).map(|(k, l)| k / l).collect(),
        }
    }
}

/// `n` Chebyshev–Gauss nodes on the open interval `(a, b)`, ascending.
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n).map(|k| mid - half * ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

/// Integrates the Riccati equation up to `λ_max` and samples it on the
/// default 400-node Chebyshev grid of `(λ₀, λ_max)`.
pub fn riccati_sweep(mode: ModeIndex, lambda_max: f64, tol: f64) -> Result<RiccatiState> {
    let settings = Settings { rtol: tol, ..Settings::default() };
    let grid = chebyshev_grid(settings.launch_radius, lambda_max, 400);
    riccati_on_grid(mode, &grid, &settings)
}

/// Riccati values on an ascending grid in `(0, π/2 − guard)`, with the
/// two-sided bounds enforced at every node.
pub fn riccati_on_grid(mode: ModeIndex, grid: &[f64], settings: &Settings) -> Result<RiccatiState> {
    if grid.is_empty() {
        return Ok(RiccatiState { mode, lambdas: vec![], values: vec![], tol: settings.rtol });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] <= 0.0 {
        return domain("lambda grid must be strictly ascending and positive");
    }
    let last = grid[grid.len() - 1];
    if last >= FRAC_PI_2 - SWEEP_GUARD {
        return domain(format!("lambda_max = {last} must stay below pi/2 - {SWEEP_GUARD}"));
    }
    if !(settings.rtol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let values = riccati_values(mode, grid, settings)?;
    let state = RiccatiState { mode, lambdas: grid.to_vec(), values, tol: settings.rtol };
    check_bounds(&state, settings.bound_slack)?;
    Ok(state)
}

/// Lower and upper Riccati bounds at `λ`; `None` where the bound is not
/// asserted (the `Xi` lower bound fails for `n = 1`).
pub fn riccati_bounds(mode: ModeIndex, lambda: f64) -> (Option<f64>, Option<f64>) {
    let n = mode.n as f64;
    let upper = if mode.n >= 1 { Some(3.0 * n / lambda.cos()) } else { None };
    let lower = match mode.axis {
        Axis::Xi if mode.n != 1 => Some(n * lambda.tan()),
        Axis::Xi => None,
        Axis::Eta if mode.n >= 1 => Some(n * lambda / lambda.tan()),
        Axis::Eta => None,
    };
    (lower, upper)
}

fn check_bounds(state: &RiccatiState, slack: f64) -> Result<()> {
    for (&lam, &v) in state.lambdas.iter().zip(&state.values) {
        let (lo, hi) = riccati_bounds(state.mode, lam);
        if let Some(lo) = lo {
            if v < lo - slack * lo.abs().max(1.0) {
                return Err(Error::InternalConsistency(format!(
                    "{}:{} Riccati value {v} below lower bound {lo} at lambda = {lam}",
                    state.mode.axis, state.mode.n
                )));
            }
        }
        if let Some(hi) = hi {
            if v >= hi + slack * hi.abs().max(1.0) {
                return Err(Error::InternalConsistency(format!(
                    "{}:{} Riccati value {v} above upper bound {hi} at lambda = {lam}",
                    state.mode.axis, state.mode.n
                )));
            }
        }
    }
    Ok(())
}

/// `f_n(λ)` (`Xi`) or `k_n(λ)` (`Eta`) at a single point.
pub fn riccati_value(mode: ModeIndex, lambda: f64, settings: &Settings) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(riccati_values(mode, &[lambda], settings)?[0])
}

/// `(L*)'(λ)/L*(λ)` for either axis.
pub fn log_derivative(mode: ModeIndex, lambda: f64, settings: &Settings) -> Result<f64> {
    let v = riccati_value(mode, lambda, settings)?;
    Ok(match mode.axis {
        Axis::Xi => v,
        Axis::Eta => v / lambda,
    })
}

fn riccati_values(mode: ModeIndex, grid: &[f64], settings: &Settings) -> Result<Vec<f64>> {
    if mode.n == 0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let n2 = (mode.n as f64).powi(2);
    let (eps, delta) = mode.frequencies();
    let fs = FrobeniusSeries::new(eps, delta, settings.series_order);
    let lam0 = settings.launch_radius.min(grid[0]);
    fs.check(lam0)?;
    let to_value = |lam: f64, big_f: f64| match mode.axis {
        Axis::Xi => big_f,
        Axis::Eta => lam * big_f,
    };
    let mut start = to_value(lam0, fs.log_derivative(lam0));
    if settings.fault == Fault::RiccatiInitial {
        start = match mode.axis {
            Axis::Xi => mode.n as f64,
            Axis::Eta => 0.0,
        };
    }
    let tol = Tolerance::relative(settings.rtol);
    let mut out = Vec::with_capacity(grid.len());
    let (series_part, rest): (Vec<f64>, Vec<f64>) = grid.iter().partition(|l| **l <= lam0);
    for lam in series_part {
        out.push(if lam == lam0 { start } else { to_value(lam, fs.log_derivative(lam)) });
    }
    match mode.axis {
        Axis::Xi => {
            let f_rhs = |x: f64, y: &[f64; 1]| {
                let (s, c) = x.sin_cos();
                [(s / c - c / s) * y[0] - y[0] * y[0] + n2 / (c * c)]
            };
            let (direct, recip): (Vec<f64>, Vec<f64>) = rest.iter().partition(|l| **l <= RECIPROCAL_SWITCH);
            let mut nodes = direct.clone();
            let need_switch = !recip.is_empty();
            if need_switch {
                nodes.push(RECIPROCAL_SWITCH);
            }
            let ys = integrate(f_rhs, lam0, [start], &nodes, tol)?;
            out.extend(ys.iter().take(direct.len()).map(|y| y[0]));
            if need_switch {
                let f_switch = ys[ys.len() - 1][0];
                let q_rhs = |x: f64, y: &[f64; 1]| {
                    let (s, c) = x.sin_cos();
                    [-(s / c - c / s) * y[0] + 1.0 - n2 * y[0] * y[0] / (c * c)]
                };
                let qs = integrate(q_rhs, RECIPROCAL_SWITCH, [1.0 / f_switch], &recip, tol)?;
                out.extend(qs.iter().map(|q| 1.0 / q[0]));
            }
        }
        Axis::Eta => {
            let k_rhs = |x: f64, y: &[f64; 1]| {
                let (s, c) = x.sin_cos();
                [(s / c - c / s + 1.0 / x) * y[0] - y[0] * y[0] / x + n2 * x / (s * s)]
            };
            let ys = integrate(k_rhs, lam0, [start], &rest, tol)?;
            out.extend(ys.iter().map(|y| y[0]));
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precision(format!("non-finite Riccati value for {}:{}", mode.axis, mode.n)));
    }
    Ok(out)
}
