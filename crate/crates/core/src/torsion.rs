//! Torsion function `−Δu = 1`, `u = 0` on `∂Ω_φ`, and its Neumann trace.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::collocation::{EllipticSolver, Resolution, SolverOptions};
use crate::error::{domain, Result};
use crate::geometry::{area_element, neumann_weight, BoundaryProfile};
use crate::io::fmt_f64;

/// Smallest resolution accepted by [`solve_torsion`].
pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub unknowns: usize,
    pub relative_residual: f64,
    pub options: SolverOptions,
    pub seconds: f64,
}

/// Discrete torsion function on the full `(t, angle)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionField {
    pub profile: BoundaryProfile,
    pub resolution: Resolution,
    /// Radial nodes, `t[0] = 1`.
    pub t: Vec<f64>,
    pub angles: Vec<f64>,
    /// Row-major `t.len() × angles.len()`.
    pub u: Vec<f64>,
    pub neumann_trace: Vec<f64>,
    pub metadata: SolverMetadata,
}

impl TorsionField {
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.u[i * self.angles.len() + k]
    }

    /// Minimum of `u` over interior nodes.
    pub fn interior_min(&self) -> f64 {
        self.u[self.angles.len()..].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// JSON header: profile, grid spec and solver residual.
    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "profile": self.profile,
            "resolution": self.resolution.to_string(),
            "radial_nodes": self.t.len(),
            "angular_nodes": self.angles.len(),
            "unknowns": self.metadata.unknowns,
            "relative_residual": self.metadata.relative_residual,
            "serrin_defect": serrin_defect(self),
        })
    }

    /// CSV block `t,angle,u`.
    pub fn field_csv(&self) -> String {
        let mut s = String::from("t,angle,u\n");
        for (i, t) in self.t.iter().enumerate() {
            for (k, a) in self.angles.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", fmt_f64(*t), fmt_f64(*a), fmt_f64(self.value(i, k))));
            }
        }
        s
    }

    /// CSV block `angle,H`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("angle,H\n");
        for (a, h) in self.angles.iter().zip(&self.neumann_trace) {
            s.push_str(&format!("{},{}\n", fmt_f64(*a), fmt_f64(*h)));
        }
        s
    }
}

pub fn solve_torsion(profile: &BoundaryProfile, resolution: Resolution) -> Result<TorsionField> {
    solve_torsion_with(profile, resolution, SolverOptions::default())
}

pub fn solve_torsion_with(profile: &BoundaryProfile, resolution: Resolution, options: SolverOptions) -> Result<TorsionField> {
    if resolution.radial < MIN_RESOLUTION || resolution.angular < MIN_RESOLUTION {
        return domain(format!("resolution {resolution} below {MIN_RESOLUTION}x{MIN_RESOLUTION}"));
    }
    let start = Instant::now();
    let solver = EllipticSolver::new(profile, resolution, options)?;
    torsion_from_solver(&solver, start)
}

/// Torsion solve with an already factored operator.
pub fn torsion_from_solver(solver: &EllipticSolver, start: Instant) -> Result<TorsionField> {
    let grid = solver.grid();
    let zero = vec![0.0; grid.n_slots()];
    let sol = solver.solve(-1.0, &zero)?;
    let dt = solver.boundary_dt(&sol.values);
    let profile = solver.profile().clone();
    let neumann_trace = grid.angles.iter().zip(&dt).map(|(a, d)| neumann_weight(&profile, *a) * d).collect();
    Ok(TorsionField {
        resolution: grid.resolution,
        t: grid.t.clone(),
        angles: grid.angles.clone(),
        u: grid.expand(&sol.values),
        neumann_trace,
        metadata: SolverMetadata {
            unknowns: solver.unknowns(),
            relative_residual: sol.relative_residual,
            options: SolverOptions { symmetry: grid.symmetry, ..SolverOptions::default() },
            seconds: start.elapsed().as_secs_f64(),
        },
        profile,
    })
}

/// `H(φ)` at the boundary angle nodes.
pub fn neumann_trace(field: &TorsionField) -> Vec<f64> {
    field.neumann_trace.clone()
}

/// `max |H − mean H|` with the arithmetic mean over the equispaced nodes.
pub fn serrin_defect(field: &TorsionField) -> f64 {
    let h = &field.neumann_trace;
    let mean = h.iter().sum::<f64>() / h.len() as f64;
    h.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

/// `∮ H dA` by the trapezoid rule on the boundary nodes.
pub fn total_flux(field: &TorsionField) -> f64 {
    let n = field.angles.len();
    let s: f64 = field
        .angles
        .iter()
        .zip(&field.neumann_trace)
        .map(|(a, h)| h * area_element(&field.profile, *a))
        .sum();
    4.0 * PI * PI * s / n as f64
}

/// Area-weighted mean of `H`, so that `mean · area = ∮ H dA`.
pub fn mean_flux(field: &TorsionField) -> f64 {
    let n = field.angles.len();
    let area: f64 = field.angles.iter().map(|a| area_element(&field.profile, *a)).sum::<f64>() * 4.0 * PI * PI / n as f64;
    total_flux(field) / area
}
