//! Linearisation of the Neumann operator at a constant tube.
//!
//! `L_λ[w] = (tan λ/(2λ)) ∂_t φ^λ(1, ·) − w/(2cos²λ)` where `φ^λ` is the
//! harmonic extension of `w`. Cosine modes diagonalise `L_λ`; the
//! projections and the resolvent below act on cosine coefficients.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::collocation::{EllipticSolver, Resolution, SolverOptions};
use crate::error::{domain, Error, Result};
use crate::geometry::{Axis, BoundaryProfile, CosineSeries, ModeIndex};
use crate::io::fmt_f64;
use crate::settings::Settings;
use crate::spectrum::sigma_with;
use crate::torsion::{solve_torsion_with, torsion_from_solver, TorsionField};

/// Harmonic extension of cosine boundary data into a constant tube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicExtension {
    pub axis: Axis,
    pub lambda: f64,
    pub data: CosineSeries,
    pub t: Vec<f64>,
    pub angles: Vec<f64>,
    /// Row-major `t.len() × angles.len()`.
    pub values: Vec<f64>,
    /// `∂_t φ^λ(1, angle)` at the angle nodes.
    pub dt_trace: Vec<f64>,
    pub relative_residual: f64,
}

impl HarmonicExtension {
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.angles.len() + k]
    }
}

/// `L_λ` discretised on a constant tube, factored once for many data.
pub struct LinearizedOperator {
    axis: Axis,
    lambda: f64,
    solver: EllipticSolver,
}

impl LinearizedOperator {
    pub fn new(axis: Axis, lambda: f64, resolution: Resolution, options: SolverOptions) -> Result<Self> {
        let profile = BoundaryProfile::constant(axis, lambda)?;
        Ok(LinearizedOperator { axis, lambda, solver: EllipticSolver::new(&profile, resolution, options)? })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn angles(&self) -> &[f64] {
        &self.solver.grid().angles
    }

    fn check_data(&self, w: &CosineSeries) -> Result<()> {
        if 2 * w.max_mode() >= self.solver.grid().n_a() {
            return domain(format!(
                "boundary data up to mode {} is not resolved by {} angle nodes",
                w.max_mode(),
                self.solver.grid().n_a()
            ));
        }
        Ok(())
    }

    pub fn extend(&self, w: &CosineSeries) -> Result<HarmonicExtension> {
        self.check_data(w)?;
        let g = self.solver.boundary_from(|a| w.eval(a));
        let sol = self.solver.solve(0.0, &g)?;
        let grid = self.solver.grid();
        Ok(HarmonicExtension {
            axis: self.axis,
            lambda: self.lambda,
            data: w.clone(),
            t: grid.t.clone(),
            angles: grid.angles.clone(),
            values: grid.expand(&sol.values),
            dt_trace: self.solver.boundary_dt(&sol.values),
            relative_residual: sol.relative_residual,
        })
    }

    /// `L_λ[w]` at the angle nodes.
    pub fn apply(&self, w: &CosineSeries) -> Result<Vec<f64>> {
        let ext = self.extend(w)?;
        let l = self.lambda;
        let c2 = l.cos().powi(2);
        Ok(ext
            .angles
            .iter()
            .zip(&ext.dt_trace)
            .map(|(a, d)| l.tan() / (2.0 * l) * d - w.eval(*a) / (2.0 * c2))
            .collect())
    }

    /// Response to `cos(m a)`: the diagonal entry and the max-norm of
    /// everything that is not a multiple of `cos(m a)`.
    pub fn mode_response(&self, m: usize) -> Result<ModeResponse> {
        let values = self.apply(&CosineSeries::mode(m))?;
        let n = values.len();
        let proj = CosineSeries::from_samples(&values, n / 2);
        let eigenvalue = proj.coeff(m);
        let leakage = self
            .angles()
            .iter()
            .zip(&values)
            .map(|(a, v)| (v - eigenvalue * (m as f64 * a).cos()).abs())
            .fold(0.0, f64::max);
        Ok(ModeResponse { m, eigenvalue, leakage })
    }

    /// Torsion function of the constant tube, reusing the factorisation.
    pub fn torsion(&self) -> Result<TorsionField> {
        torsion_from_solver(&self.solver, Instant::now())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeResponse {
    pub m: usize,
    pub eigenvalue: f64,
    pub leakage: f64,
}

pub fn harmonic_extend(axis: Axis, lambda: f64, w: &CosineSeries, resolution: Resolution) -> Result<HarmonicExtension> {
    LinearizedOperator::new(axis, lambda, resolution, SolverOptions::default())?.extend(w)
}

#[allow(non_snake_case)]
pub fn apply_L(axis: Axis, lambda: f64, w: &CosineSeries, resolution: Resolution) -> Result<Vec<f64>> {
    LinearizedOperator::new(axis, lambda, resolution, SolverOptions::default())?.apply(w)
}

/// One row of the finite-difference convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdRow {
    pub h: f64,
    /// Relative max-norm deviation of the central difference from `L_λ[w]`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdDerivative {
    pub axis: Axis,
    pub lambda: f64,
    pub data: CosineSeries,
    pub angles: Vec<f64>,
    /// Richardson-extrapolated `D_φH[w]`.
    pub values: Vec<f64>,
    /// `L_λ[w]` on the same grid.
    pub reference: Vec<f64>,
    pub table: Vec<FdRow>,
    /// Relative max-norm deviation of `values` from `reference`.
    pub extrapolated_deviation: f64,
    /// Observed convergence order of the raw central differences.
    pub observed_order: f64,
}

impl FdDerivative {
    /// CSV `h,deviation`.
    pub fn table_csv(&self) -> String {
        let mut s = String::from("h,deviation\n");
        for r in &self.table {
            s.push_str(&format!("{},{}\n", fmt_f64(r.h), fmt_f64(r.deviation)));
        }
        s
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    max_norm(&d) / max_norm(b).max(f64::MIN_POSITIVE)
}

/// Central differences of `h ↦ H(λ + h w)` for decreasing steps, Richardson
/// extrapolated assuming second order, compared with `L_λ[w]`.
#[allow(non_snake_case)]
pub fn fd_derivative_H(axis: Axis, lambda: f64, w: &CosineSeries, steps: &[f64], resolution: Resolution) -> Result<FdDerivative> {
    fd_derivative_h_with(axis, lambda, w, steps, resolution, SolverOptions::default())
}

pub fn fd_derivative_h_with(
    axis: Axis,
    lambda: f64,
    w: &CosineSeries,
    steps: &[f64],
    resolution: Resolution,
    options: SolverOptions,
) -> Result<FdDerivative> {
    if steps.len() < 2 || steps.windows(2).any(|p| !(p[1] < p[0] && p[1] > 0.0)) {
        return Err(Error::Config("steps must be a decreasing positive sequence of length >= 2".into()));
    }
    let op = LinearizedOperator::new(axis, lambda, resolution, options)?;
    let reference = op.apply(w)?;
    let base = CosineSeries::constant(lambda);
    let trace = |h: f64| -> Result<Vec<f64>> {
        let p = BoundaryProfile::from_series(axis, base.add_scaled(w, h))?;
        Ok(solve_torsion_with(&p, resolution, options)?.neumann_trace)
    };
    let mut diffs = Vec::with_capacity(steps.len());
    for &h in steps {
        let plus = trace(h)?;
        let minus = trace(-h)?;
        diffs.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let table: Vec<FdRow> = steps.iter().zip(&diffs).map(|(h, d)| FdRow { h: *h, deviation: rel_dev(d, &reference) }).collect();
    let observed_order = {
        let (a, b) = (&table[0], &table[1]);
        (a.deviation / b.deviation).ln() / (a.h / b.h).ln()
    };
    // Extrapolate every consecutive pair; keep the pair that agrees best with
    // its successor.
    let extrap: Vec<Vec<f64>> = steps
        .windows(2)
        .zip(diffs.windows(2))
        .map(|(h, d)| {
            let r2 = (h[0] / h[1]).powi(2);
            d[1].iter().zip(&d[0]).map(|(fine, coarse)| (r2 * fine - coarse) / (r2 - 1.0)).collect()
        })
        .collect();
    let best = if extrap.len() == 1 {
        0
    } else {
        (0..extrap.len() - 1)
            .min_by(|&i, &j| rel_dev(&extrap[i], &extrap[i + 1]).total_cmp(&rel_dev(&extrap[j], &extrap[j + 1])))
            .unwrap_or(0)
    };
    let values = extrap[best].clone();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("finite-difference extrapolation produced non-finite values".into()));
    }
    Ok(FdDerivative {
        axis,
        lambda,
        data: w.clone(),
        angles: op.angles().to_vec(),
        extrapolated_deviation: rel_dev(&values, &reference),
        values,
        reference,
        table,
        observed_order,
    })
}

/// Cosine coefficients `P_m w` of boundary data together with the
/// eigenvalues `σ_m(λ)` for `m ≤ J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub axis: Axis,
    pub lambda: f64,
    pub truncation: usize,
    pub projections: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn new(axis: Axis, lambda: f64, w: &CosineSeries, truncation: usize) -> Result<Self> {
        let sigmas = mode_sigmas(axis, lambda, truncation)?;
        Ok(SpectralDecomposition {
            axis,
            lambda,
            truncation,
            projections: (0..=truncation).map(|m| w.coeff(m)).collect(),
            sigmas,
        })
    }

    /// Decomposes samples at the equispaced nodes `2πk/N`.
    pub fn from_samples(axis: Axis, lambda: f64, values: &[f64], truncation: usize) -> Result<Self> {
        Self::new(axis, lambda, &CosineSeries::from_samples(values, truncation), truncation)
    }

    pub fn reconstruct(&self) -> CosineSeries {
        CosineSeries::new(self.projections.clone())
    }

    /// `Σ σ_m P_m w`.
    pub fn apply(&self) -> CosineSeries {
        CosineSeries::new(self.projections.iter().zip(&self.sigmas).map(|(p, s)| p * s).collect())
    }
}

/// `σ_0(λ), …, σ_J(λ)` from the ODE pipeline.
pub fn mode_sigmas(axis: Axis, lambda: f64, truncation: usize) -> Result<Vec<f64>> {
    let settings = Settings::default();
    (0..=truncation).map(|m| sigma_with(ModeIndex::new(axis, m as u32), lambda, &settings)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventOutput {
    pub result: CosineSeries,
    /// `min_{m ≠ j, m ≤ J} |σ_m − σ_j|`.
    pub gap: f64,
}

/// Truncated resolvent `Σ_{m≠j, m≤J} P_m v/(σ_m − σ_j)` on the complement of
/// `cos(j a)`.
pub fn resolvent_apply(axis: Axis, lambda: f64, j: usize, v: &CosineSeries, truncation: usize) -> Result<ResolventOutput> {
    if j > truncation {
        return Err(Error::Config(format!("mode {j} exceeds truncation {truncation}")));
    }
    if v.coeff(j).abs() >= 1e-12 {
        return Err(Error::Precondition(format!("data has a component {:e} along cos({j} a)", v.coeff(j))));
    }
    let sigmas = mode_sigmas(axis, lambda, truncation)?;
    let sj = sigmas[j];
    let mut gap = f64::INFINITY;
    let mut out = vec![0.0; truncation + 1];
    for m in (0..=truncation).filter(|m| *m != j) {
        let d = sigmas[m] - sj;
        gap = gap.min(d.abs());
        if d == 0.0 {
            return Err(Error::Numerical(format!("sigma_{m} coincides with sigma_{j}")));
        }
        out[m] = v.coeff(m) / d;
    }
    Ok(ResolventOutput { result: CosineSeries::new(out), gap })
}
