//! Chebyshev × Fourier collocation for `Δ^{g^φ}` on the pulled-back tube.
//!
//! The radial variable is doubled to `t ∈ [−1, 1]` through the core: in the
//! `Xi` case `U(−t, a) = U(t, a)`, in the `Eta` case `U(−t, a) = U(t, a + π)`
//! (the active angle is the polar angle of the collapsing disc). With an odd
//! number of Chebyshev intervals no node sits on the core, so regularity is
//! built into the parity and no axis boundary condition is needed.
//!
//! Expanded in `(t, a)`, with `ψ = φ'/φ`, `θ = tφ` and `w` the inverse
//! squared length of the active circle (`1/cos²θ` for `Xi`, `1/sin²θ` for
//! `Eta`):
//!
//! `Δu = (1/φ² + w t²ψ²) u_tt − 2wtψ u_ta + w u_aa
//!       + [(cot θ − tan θ)/φ + w t(2ψ² − φ''/φ)] u_t`.

use std::f64::consts::PI;
use std::str::FromStr;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{angle_node, Axis, BoundaryProfile};
use crate::settings::Fault;

/// `radial × angular` node counts. `radial` counts the positive Chebyshev
/// nodes including the boundary `t = 1`; `angular` is the full-period count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub radial: usize,
    pub angular: usize,
}

impl Resolution {
    pub const fn new(radial: usize, angular: usize) -> Self {
        Resolution { radial, angular }
    }

    pub fn doubled(self) -> Self {
        Resolution::new(2 * self.radial, 2 * self.angular)
    }

    pub fn validate(self) -> Result<()> {
        if self.radial < 4 || self.angular < 4 {
            return domain(format!("resolution {self} is too coarse"));
        }
        if self.angular % 2 != 0 {
            return domain(format!("angular resolution must be even, got {}", self.angular));
        }
        Ok(())
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution::new(64, 64)
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.radial, self.angular)
    }
}

impl FromStr for Resolution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("resolution must look like 64x64, got '{s}'"));
        let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let r = Resolution::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        r.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(r)
    }
}

/// Whether unknowns are stored for the full angle period or only for the
/// even half `0 ≤ a ≤ π` (valid for cosine data and profiles).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngularSymmetry {
    #[default]
    Even,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolverOptions {
    pub symmetry: AngularSymmetry,
    pub fault: Fault,
}

/// Chebyshev points `cos(jπ/K)`, `j = 0..=K`, and the differentiation matrix.
pub fn chebyshev(k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = k + 1;
    let x: Vec<f64> = (0..n).map(|j| (j as f64 * PI / k as f64).cos()).collect();
    let c = |j: usize| {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == k {
            2.0 * s
        } else {
            s
        }
    };
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[i * n + j] = v;
                row += v;
            }
        }
        d[i * n + i] = -row;
    }
    (x, d)
}

/// First and second Fourier differentiation matrices on `2πk/N`, `N` even.
pub fn fourier(n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * PI / n as f64;
    let mut d1 = vec![0.0; n * n];
    let mut d2 = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let m = (j as isize - k as isize).rem_euclid(n as isize) as usize;
            if m == 0 {
                d2[j * n + k] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
            } else {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let half = m as f64 * h / 2.0;
                d1[j * n + k] = 0.5 * sign / half.tan();
                d2[j * n + k] = -0.5 * sign / half.sin().powi(2);
            }
        }
    }
    (d1, d2)
}

/// Collocation grid and folded differentiation operators.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axis: Axis,
    pub resolution: Resolution,
    pub symmetry: AngularSymmetry,
    /// Positive radial nodes, `t[0] = 1` descending towards the core.
    pub t: Vec<f64>,
    /// Full-period angle nodes `2πk/N`.
    pub angles: Vec<f64>,
    n_slots: usize,
    parity: f64,
    d1p: Vec<f64>,
    d1n: Vec<f64>,
    d2p: Vec<f64>,
    d2n: Vec<f64>,
    da: Vec<f64>,
    daa: Vec<f64>,
}

impl Grid {
    pub fn new(axis: Axis, resolution: Resolution, options: SolverOptions) -> Result<Self> {
        resolution.validate()?;
        let nt = resolution.radial;
        let na = resolution.angular;
        let k = 2 * nt - 1;
        let (x, d) = chebyshev(k);
        let n = k + 1;
        let mut d2 = vec![0.0; n * n];
        for i in 0..nt {
            for l in 0..n {
                let dil = d[i * n + l];
                if dil != 0.0 {
                    for j in 0..n {
                        d2[i * n + j] += dil * d[l * n + j];
                    }
                }
            }
        }
        let fold = |m: &[f64]| {
            let mut p = vec![0.0; nt * nt];
            let mut q = vec![0.0; nt * nt];
            for i in 0..nt {
                for j in 0..nt {
                    p[i * nt + j] = m[i * n + j];
                    q[i * nt + j] = m[i * n + (k - j)];
                }
            }
            (p, q)
        };
        let (d1p, d1n) = fold(&d);
        let (d2p, d2n) = fold(&d2);
        let (da, daa) = fourier(na);
        let n_slots = match options.symmetry {
            AngularSymmetry::Even => na / 2 + 1,
            AngularSymmetry::Full => na,
        };
        let parity = if options.fault == Fault::AxisCondition { -1.0 } else { 1.0 };
        Ok(Grid {
            axis,
            resolution,
            symmetry: options.symmetry,
            t: x[..nt].to_vec(),
            angles: (0..na).map(|j| angle_node(j, na)).collect(),
            n_slots,
            parity,
            d1p,
            d1n,
            d2p,
            d2n,
            da,
            daa,
        })
    }

    pub fn n_t(&self) -> usize {
        self.resolution.radial
    }

    pub fn n_a(&self) -> usize {
        self.resolution.angular
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Storage slot of full angle index `k`.
    pub fn slot(&self, k: usize) -> usize {
        match self.symmetry {
            AngularSymmetry::Even => {
                let k = k % self.n_a();
                k.min(self.n_a() - k)
            }
            AngularSymmetry::Full => k % self.n_a(),
        }
    }

    /// Angle index reached by continuing through the core.
    fn mirror(&self, k: usize) -> usize {
        match self.axis {
            Axis::Xi => k,
            Axis::Eta => (k + self.n_a() / 2) % self.n_a(),
        }
    }

    /// `∂_t` of a slot-stored field (`n_t × n_slots`) at every radial node.
    pub fn dt(&self, field: &[f64]) -> Vec<f64> {
        let nt = self.n_t();
        let ns = self.n_slots;
        let mut out = vec![0.0; nt * ns];
        for s in 0..ns {
            let ms = self.slot(self.mirror(s));
            for i in 0..nt {
                let mut acc = 0.0;
                for j in 0..nt {
                    acc += self.d1p[i * nt + j] * field[j * ns + s] + self.parity * self.d1n[i * nt + j] * field[j * ns + ms];
                }
                out[i * ns + s] = acc;
            }
        }
        out
    }

    /// Expands a slot-stored field to the full `n_t × n_a` angle grid.
    pub fn expand(&self, field: &[f64]) -> Vec<f64> {
        let nt = field.len() / self.n_slots;
        let na = self.n_a();
        let mut out = vec![0.0; nt * na];
        for i in 0..nt {
            for k in 0..na {
                out[i * na + k] = field[i * self.n_slots + self.slot(k)];
            }
        }
        out
    }
}

/// Factored collocation Laplacian for one profile.
pub struct EllipticSolver {
    grid: Grid,
    profile: BoundaryProfile,
    /// Interior block of `Δ`, `n × n`.
    a: Mat<f64>,
    /// Coupling of interior rows to boundary values, row-major `n × n_slots`.
    b: Vec<f64>,
    a_norm: f64,
    lu: PartialPivLu<f64>,
}

/// Slot-stored solution including the boundary row `i = 0`.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub values: Vec<f64>,
    pub relative_residual: f64,
}

impl EllipticSolver {
    pub fn new(profile: &BoundaryProfile, resolution: Resolution, options: SolverOptions) -> Result<Self> {
        profile.check_admissible()?;
        let axis = profile.axis();
        if axis == Axis::Eta && !profile.series().is_pi_periodic() {
            return domain("Eta-case profiles must be pi-periodic (odd cosine coefficients zero)");
        }
        if options.symmetry == AngularSymmetry::Even && resolution.angular / 2 <= profile.n_modes() {
            return domain(format!("resolution {resolution} does not resolve {} profile modes", profile.n_modes()));
        }
        let grid = Grid::new(axis, resolution, options)?;
        let nt = grid.n_t();
        let na = grid.n_a();
        let ns = grid.n_slots;
        let n = (nt - 1) * ns;
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * ns];
        let par = grid.parity;
        {
            let mut add = |row: usize, i: usize, s: usize, v: f64| {
                if i == 0 {
                    b[row * ns + s] += v;
                } else {
                    a[row * n + (i - 1) * ns + s] += v;
                }
            };
            for s in 0..ns {
                let k = s;
                let ang = grid.angles[k];
                let phi = profile.phi(ang);
                let dphi = profile.phi_prime(ang);
                let ddphi = profile.phi_second(ang);
                let psi = dphi / phi;
                let mk = grid.mirror(k);
                for i in 1..nt {
                    let row = (i - 1) * ns + s;
                    let t = grid.t[i];
                    let th = t * phi;
                    let (sn, cs) = th.sin_cos();
                    let w = 1.0 / axis.active_factor(th);
                    let ctt = 1.0 / (phi * phi) + w * t * t * psi * psi;
                    let cta = -2.0 * w * t * psi;
                    let caa = w;
                    let ct = (cs / sn - sn / cs) / phi + w * t * (2.0 * psi * psi - ddphi / phi);
                    for j in 0..nt {
                        let p = ctt * grid.d2p[i * nt + j] + ct * grid.d1p[i * nt + j];
                        let q = ctt * grid.d2n[i * nt + j] + ct * grid.d1n[i * nt + j];
                        add(row, j, s, p);
                        add(row, j, grid.slot(mk), par * q);
                    }
                    for kp in 0..na {
                        let v = caa * grid.daa[k * na + kp];
                        if v != 0.0 {
                            add(row, i, grid.slot(kp), v);
                        }
                    }
                    if cta != 0.0 {
                        for kp in 0..na {
                            let dak = cta * grid.da[k * na + kp];
                            if dak == 0.0 {
                                continue;
                            }
                            let sp = grid.slot(kp);
                            let sm = grid.slot(grid.mirror(kp));
                            for j in 0..nt {
                                add(row, j, sp, dak * grid.d1p[i * nt + j]);
                                add(row, j, sm, par * dak * grid.d1n[i * nt + j]);
                            }
                        }
                    }
                }
            }
        }
        let a = Mat::from_fn(n, n, |r, c| a[r * n + c]);
        let a_norm = (0..n).map(|r| (0..n).map(|c| a[(r, c)].abs()).sum::<f64>()).fold(0.0, f64::max);
        let lu = a.partial_piv_lu();
        Ok(EllipticSolver { grid, profile: profile.clone(), a, b, a_norm, lu })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn profile(&self) -> &BoundaryProfile {
        &self.profile
    }

    pub fn unknowns(&self) -> usize {
        self.a.nrows()
    }

    /// Solves `Δu = q` (constant `q`) with `u = g` on `t = 1`, `g` given per slot.
    pub fn solve(&self, q: f64, boundary: &[f64]) -> Result<GridSolution> {
        let ns = self.grid.n_slots;
        if boundary.len() != ns {
            return Err(Error::Domain(format!("expected {ns} boundary values, got {}", boundary.len())));
        }
        let n = self.unknowns();
        let rhs = Mat::from_fn(n, 1, |r, _| q - (0..ns).map(|s| self.b[r * ns + s] * boundary[s]).sum::<f64>());
        let x = self.lu.solve(&rhs);
        let ax = &self.a * &x;
        let mut res = 0.0f64;
        let mut xn = 0.0f64;
        let mut bn = 0.0f64;
        for r in 0..n {
            res = res.max((ax[(r, 0)] - rhs[(r, 0)]).abs());
            xn = xn.max(x[(r, 0)].abs());
            bn = bn.max(rhs[(r, 0)].abs());
        }
        let relative_residual = res / (self.a_norm * xn + bn).max(f64::MIN_POSITIVE);
        if !relative_residual.is_finite() || relative_residual > 1e-10 {
            return Err(Error::Numerical(format!("linear solve residual {relative_residual:e} exceeds 1e-10")));
        }
        let mut values = Vec::with_capacity(n + ns);
        values.extend_from_slice(boundary);
        values.extend((0..n).map(|r| x[(r, 0)]));
        Ok(GridSolution { values, relative_residual })
    }

    /// Boundary values per slot of a function of the active angle.
    pub fn boundary_from(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.grid.n_slots).map(|s| f(self.grid.angles[s])).collect()
    }

    /// `∂_t u` on `t = 1` at every full-period angle node.
    pub fn boundary_dt(&self, values: &[f64]) -> Vec<f64> {
        let dt = self.grid.dt(values);
        (0..self.grid.n_a()).map(|k| dt[self.grid.slot(k)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_differentiates_polynomials_exactly() {
        let (x, d) = chebyshev(9);
        let n = 10;
        for i in 0..n {
            let v: f64 = (0..n).map(|j| d[i * n + j] * x[j].powi(5)).sum();
            assert!((v - 5.0 * x[i].powi(4)).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_differentiates_trig_polynomials() {
        let n = 16;
        let (d1, d2) = fourier(n);
        for j in 0..n {
            let a = angle_node(j, n);
            let f = |a: f64| (3.0 * a).cos() + 0.5 * (2.0 * a).sin();
            let v1: f64 = (0..n).map(|k| d1[j * n + k] * f(angle_node(k, n))).sum();
            let v2: f64 = (0..n).map(|k| d2[j * n + k] * f(angle_node(k, n))).sum();
            assert!((v1 - (-3.0 * (3.0 * a).sin() + (2.0 * a).cos())).abs() < 1e-12);
            assert!((v2 - (-9.0 * (3.0 * a).cos() - 2.0 * (2.0 * a).sin())).abs() < 1e-11);
        }
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!("64x32".parse::<Resolution>().unwrap(), Resolution::new(64, 32));
        assert!("64x31".parse::<Resolution>().is_err());
        assert!("64".parse::<Resolution>().is_err());
    }

    #[test]
    fn even_slots_fold_the_circle() {
        let g = Grid::new(Axis::Xi, Resolution::new(8, 8), SolverOptions::default()).unwrap();
        let slots: Vec<usize> = (0..8).map(|k| g.slot(k)).collect();
        assert_eq!(slots, vec![0, 1, 2, 3, 4, 3, 2, 1]);
        assert!(g.t[0] == 1.0 && g.t.iter().all(|t| *t > 0.0));
    }
}
