//! Coordinates, pullback metrics, boundary profiles and their integrals.
//!
//! The tube `Ω_φ = {θ < φ(a)}` is pulled back to `[0,1] × S¹ × S¹` by
//! `θ = t φ(a)`. The active angle `a` is the one the profile depends on; the
//! passive angle `b` enters only through the metric factor `g_bb`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::gauss_legendre;

/// Which Clifford angle the profile depends on.
///
/// `Xi`: `φ = φ(ξ)`, the circle of `ξ` stays of length `2π cos θ` and the
/// `η`-circle collapses on the core `θ = 0`. `Eta` swaps the roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Xi,
    Eta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Xi => "xi",
            Axis::Eta => "eta",
        }
    }

    /// `(ε, δ)` frequencies of the radial ODE for active-angle frequency `n`.
    pub fn frequencies(self, n: u32) -> (u32, u32) {
        match self {
            Axis::Xi => (0, n),
            Axis::Eta => (n, 0),
        }
    }

    /// Squared length factor of the active-angle circle at `θ`.
    pub(crate) fn active_factor(self, theta: f64) -> f64 {
        match self {
            Axis::Xi => theta.cos().powi(2),
            Axis::Eta => theta.sin().powi(2),
        }
    }

    /// Squared length factor of the passive-angle circle at `θ`.
    pub(crate) fn passive_factor(self, theta: f64) -> f64 {
        match self {
            Axis::Xi => theta.sin().powi(2),
            Axis::Eta => theta.cos().powi(2),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xi" | "xicase" | "ξ" => Ok(Axis::Xi),
            "eta" | "etacase" | "η" => Ok(Axis::Eta),
            other => Err(Error::Config(format!("unknown axis '{other}' (expected xi or eta)"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An eigenvalue family: axis plus angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub axis: Axis,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(axis: Axis, n: u32) -> Self {
        ModeIndex { axis, n }
    }

    pub fn xi(n: u32) -> Self {
        ModeIndex::new(Axis::Xi, n)
    }

    pub fn eta(n: u32) -> Self {
        ModeIndex::new(Axis::Eta, n)
    }

    /// `(ε, δ)` for the radial ODE.
    pub fn frequencies(self) -> (u32, u32) {
        self.axis.frequencies(self.n)
    }

    /// Bifurcation from the trivial family only happens for `n ≥ 2`.
    pub fn require_bifurcation_index(self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Precondition(format!(
                "bifurcation analysis needs n >= 2, got {}:{}",
                self.axis, self.n
            )));
        }
        Ok(())
    }
}

/// Even `2π`-periodic function `Σ c_m cos(m a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CosineSeries {
    pub coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        CosineSeries { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        CosineSeries { coeffs: vec![c] }
    }

    /// `cos(m a)`.
    pub fn mode(m: usize) -> Self {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[m] = 1.0;
        CosineSeries { coeffs }
    }

    pub fn coeff(&self, m: usize) -> f64 {
        self.coeffs.get(m).copied().unwrap_or(0.0)
    }

    pub fn max_mode(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, a: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(m, c)| c * (m as f64 * a).cos()).sum()
    }

    pub fn deriv(&self, a: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| -(m as f64) * c * (m as f64 * a).sin())
            .sum()
    }

    pub fn deriv2(&self, a: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| -((m * m) as f64) * c * (m as f64 * a).cos())
            .sum()
    }

    /// Values at the equispaced nodes `2πk/N`, `k = 0..N`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.eval(angle_node(k, n))).collect()
    }

    /// Discrete cosine projection of samples at `2πk/N` onto modes `0..=max_mode`.
    ///
    /// Exact for series with `max_mode < N/2`; the Nyquist mode is halved.
    pub fn from_samples(values: &[f64], max_mode: usize) -> Self {
        let n = values.len();
        let coeffs = (0..=max_mode)
            .map(|m| {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (m as f64 * angle_node(k, n)).cos())
                    .sum();
                if m == 0 || 2 * m == n {
                    s / n as f64
                } else {
                    2.0 * s / n as f64
                }
            })
            .collect();
        CosineSeries { coeffs }
    }

    pub fn add_scaled(&self, other: &CosineSeries, scale: f64) -> CosineSeries {
        let len = self.coeffs.len().max(other.coeffs.len());
        CosineSeries {
            coeffs: (0..len).map(|m| self.coeff(m) + scale * other.coeff(m)).collect(),
        }
    }

    pub fn scaled(&self, scale: f64) -> CosineSeries {
        CosineSeries { coeffs: self.coeffs.iter().map(|c| c * scale).collect() }
    }

    /// True when every odd coefficient vanishes, i.e. the function is `π`-periodic.
    pub fn is_pi_periodic(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0)
    }
}

/// Equispaced angle node `2πk/N`.
pub fn angle_node(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// Boundary profile `φ(a)` of a tube, stored as cosine coefficients with a
/// synchronised collocation copy. The coefficients are authoritative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct BoundaryProfile {
    axis: Axis,
    series: CosineSeries,
    collocation: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    axis: Axis,
    coeffs: Vec<f64>,
    n_modes: usize,
}

impl TryFrom<ProfileJson> for BoundaryProfile {
    type Error = Error;
    fn try_from(raw: ProfileJson) -> Result<Self> {
        if raw.coeffs.len() != raw.n_modes + 1 {
            return domain(format!(
                "profile has {} coefficients but n_modes = {}",
                raw.coeffs.len(),
                raw.n_modes
            ));
        }
        BoundaryProfile::new(raw.axis, raw.coeffs)
    }
}

impl From<BoundaryProfile> for ProfileJson {
    fn from(p: BoundaryProfile) -> Self {
        ProfileJson { axis: p.axis, n_modes: p.n_modes(), coeffs: p.series.coeffs }
    }
}

impl BoundaryProfile {
    /// Builds an admissible profile from cosine coefficients `c_0, c_1, …`.
    pub fn new(axis: Axis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("profile needs at least the mean coefficient");
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return domain("profile coefficients must be finite");
        }
        let series = CosineSeries::new(coeffs);
        let nc = collocation_size(series.max_mode());
        let collocation = series.sample(nc);
        let p = BoundaryProfile { axis, series, collocation };
        p.check_admissible()?;
        Ok(p)
    }

    pub fn constant(axis: Axis, lambda: f64) -> Result<Self> {
        BoundaryProfile::new(axis, vec![lambda])
    }

    pub fn from_series(axis: Axis, series: CosineSeries) -> Result<Self> {
        BoundaryProfile::new(axis, series.coeffs)
    }

    /// Inverse of [`BoundaryProfile::collocation`]: recovers coefficients by DCT.
    pub fn from_collocation(axis: Axis, values: &[f64]) -> Result<Self> {
        if values.len() < 2 || values.len() % 2 != 0 {
            return domain("collocation needs an even number (>= 2) of samples");
        }
        let max_mode = values.len() / 2 - 1;
        BoundaryProfile::new(axis, CosineSeries::from_samples(values, max_mode).coeffs)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.series.coeffs
    }

    pub fn series(&self) -> &CosineSeries {
        &self.series
    }

    pub fn n_modes(&self) -> usize {
        self.series.max_mode()
    }

    /// Samples at `2πk/N` with `N = 2·n_modes + 2` (at least 4).
    pub fn collocation(&self) -> &[f64] {
        &self.collocation
    }

    pub fn mean(&self) -> f64 {
        self.series.coeff(0)
    }

    pub fn is_constant(&self) -> bool {
        self.series.coeffs.iter().skip(1).all(|c| *c == 0.0)
    }

    pub fn phi(&self, a: f64) -> f64 {
        self.series.eval(a)
    }

    pub fn phi_prime(&self, a: f64) -> f64 {
        self.series.deriv(a)
    }

    pub fn phi_second(&self, a: f64) -> f64 {
        self.series.deriv2(a)
    }

    /// Checks `0 < φ < π/2` on a grid fine enough to resolve every mode.
    pub fn check_admissible(&self) -> Result<()> {
        let n = (16 * (self.n_modes() + 1)).max(256);
        for k in 0..n {
            let a = angle_node(k, n);
            let v = self.phi(a);
            if !(v > 0.0 && v < FRAC_PI_2) {
                return domain(format!("profile value {v} at angle {a} is outside (0, pi/2)"));
            }
        }
        Ok(())
    }
}

fn collocation_size(max_mode: usize) -> usize {
    (2 * max_mode + 2).max(4)
}

/// Metric components in coordinates `(t, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricAtPoint {
    pub g_tt: f64,
    pub g_ta: f64,
    pub g_aa: f64,
    pub g_bb: f64,
    pub sqrt_det: f64,
}

impl MetricAtPoint {
    /// Leading-minor test on the `(t, a)` block.
    pub fn is_positive_definite(&self) -> bool {
        self.g_tt > 0.0 && self.g_tt * self.g_aa - self.g_ta * self.g_ta > 0.0 && self.g_bb > 0.0
    }
}

/// Pullback metric of a constant tube `φ ≡ λ`.
pub fn metric_lambda(lambda: f64, t: f64) -> Result<MetricAtPoint> {
    if !(lambda > 0.0 && lambda < FRAC_PI_2) {
        return domain(format!("lambda = {lambda} outside (0, pi/2)"));
    }
    if !(0.0..=1.0).contains(&t) {
        return domain(format!("t = {t} outside [0, 1]"));
    }
    let th = t * lambda;
    let (s, c) = th.sin_cos();
    Ok(MetricAtPoint {
        g_tt: lambda * lambda,
        g_ta: 0.0,
        g_aa: s * s,
        g_bb: c * c,
        sqrt_det: lambda * s * c,
    })
}

/// Pullback metric through `θ = tφ(a)`; `a` is the profile's active angle.
///
/// For the constant profile in the `Xi` case the active angle is `ξ`, so
/// `g_aa = cos²` whereas [`metric_lambda`] lists the `η` factor first; both
/// describe the same metric.
pub fn metric_phi(profile: &BoundaryProfile, t: f64, angle: f64) -> MetricAtPoint {
    let phi = profile.phi(angle);
    let dphi = profile.phi_prime(angle);
    let th = t * phi;
    let axis = profile.axis();
    let (s, c) = th.sin_cos();
    MetricAtPoint {
        g_tt: phi * phi,
        g_ta: t * phi * dphi,
        g_aa: t * t * dphi * dphi + axis.active_factor(th),
        g_bb: axis.passive_factor(th),
        sqrt_det: phi * s * c,
    }
}

fn check_quad_order(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::Config(format!("quad_order must be >= 2, got {q}")));
    }
    Ok(())
}

/// Number of trapezoid nodes in angle for a profile at a given order.
fn angle_points(profile: &BoundaryProfile, quad_order: usize) -> usize {
    (4 * quad_order).max(8 * (profile.n_modes() + 1))
}

/// Volume of `Ω_φ`: Gauss–Legendre in `t`, trapezoid in the angles.
pub fn volume(profile: &BoundaryProfile, quad_order: usize) -> Result<f64> {
    check_quad_order(quad_order)?;
    let (nodes, weights) = gauss_legendre(quad_order, 0.0, 1.0);
    let na = if profile.is_constant() { 1 } else { angle_points(profile, quad_order) };
    let mut total = 0.0;
    for k in 0..na {
        let a = angle_node(k, na);
        let phi = profile.phi(a);
        let radial: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| {
                let (s, c) = (t * phi).sin_cos();
                w * phi * s * c
            })
            .sum();
        total += radial;
    }
    Ok(4.0 * PI * PI * total / na as f64)
}

/// Induced area density of `{t = 1}` per `da db`.
pub fn area_element(profile: &BoundaryProfile, a: f64) -> f64 {
    let phi = profile.phi(a);
    let dphi = profile.phi_prime(a);
    let axis = profile.axis();
    axis.passive_factor(phi).sqrt() * (dphi * dphi + axis.active_factor(phi)).sqrt()
}

/// Area of `∂Ω_φ` by the trapezoid rule in the active angle.
pub fn boundary_area(profile: &BoundaryProfile, quad_order: usize) -> Result<f64> {
    check_quad_order(quad_order)?;
    let na = angle_points(profile, quad_order);
    let s: f64 = (0..na).map(|k| area_element(profile, angle_node(k, na))).sum();
    Ok(4.0 * PI * PI * s / na as f64)
}

/// Factor `w` with `∂u/∂ν = w · ∂_t u` on `{t = 1}` when `u` vanishes there.
pub fn neumann_weight(profile: &BoundaryProfile, angle: f64) -> f64 {
    let phi = profile.phi(angle);
    let dphi = profile.phi_prime(angle);
    let f = profile.axis().active_factor(phi);
    (dphi * dphi + f).sqrt() / (phi * f.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_metric_matches_closed_form() {
        let m = metric_lambda(PI / 4.0, 1.0).unwrap();
        assert!((m.g_tt - PI * PI / 16.0).abs() < 1e-15);
        assert!((m.g_aa - 0.5).abs() < 1e-15);
        assert!((m.g_bb - 0.5).abs() < 1e-15);
        assert_eq!(metric_lambda(PI / 4.0, 0.0).unwrap().sqrt_det, 0.0);
        let m = metric_lambda(0.3, 0.5).unwrap();
        assert_eq!(m.sqrt_det, 0.3 * 0.15f64.sin() * 0.15f64.cos());
        assert!(metric_lambda(1.6, 0.5).is_err());
        assert!(metric_lambda(0.5, 1.1).is_err());
    }

    #[test]
    fn constant_profile_collapses_to_metric_lambda() {
        for &lam in &[0.2, 0.7, 1.3] {
            let p = BoundaryProfile::constant(Axis::Eta, lam).unwrap();
            for &t in &[0.0, 0.3, 1.0] {
                let a = metric_phi(&p, t, 0.4);
                let b = metric_lambda(lam, t).unwrap();
                assert!((a.g_tt - b.g_tt).abs() < 1e-14);
                assert_eq!(a.g_ta, 0.0);
                assert!((a.g_aa - b.g_aa).abs() < 1e-14);
                assert!((a.g_bb - b.g_bb).abs() < 1e-14);
                assert!((a.sqrt_det - b.sqrt_det).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sqrt_det_at_quarter_pi() {
        let p = BoundaryProfile::new(Axis::Xi, vec![PI / 4.0, 0.1]).unwrap();
        let a = PI / 2.0;
        let phi = p.phi(a);
        assert!((phi - PI / 4.0).abs() < 1e-15);
        assert!((metric_phi(&p, 1.0, a).sqrt_det - phi * 0.5).abs() < 1e-15);
    }

    #[test]
    fn quad_order_below_two_is_rejected() {
        let p = BoundaryProfile::constant(Axis::Xi, 0.5).unwrap();
        assert!(matches!(volume(&p, 1), Err(Error::Config(_))));
        assert!(matches!(boundary_area(&p, 0), Err(Error::Config(_))));
    }

    #[test]
    fn volume_limits() {
        let full = volume(&BoundaryProfile::constant(Axis::Xi, FRAC_PI_2 - 1e-9).unwrap(), 12).unwrap();
        assert!((full - 2.0 * PI * PI).abs() < 1e-7);
        let tiny = volume(&BoundaryProfile::constant(Axis::Xi, 1e-9).unwrap(), 12).unwrap();
        assert!(tiny.abs() < 1e-15);
        let quarter = boundary_area(&BoundaryProfile::constant(Axis::Xi, PI / 4.0).unwrap(), 4).unwrap();
        assert!((quarter - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn weight_of_constant_profile_is_inverse_lambda() {
        for axis in [Axis::Xi, Axis::Eta] {
            let p = BoundaryProfile::constant(axis, 0.9).unwrap();
            assert!((neumann_weight(&p, 1.0) - 1.0 / 0.9).abs() < 1e-15);
        }
        let p = BoundaryProfile::new(Axis::Xi, vec![0.8, 0.1]).unwrap();
        assert!((neumann_weight(&p, 0.0) - 1.0 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn inadmissible_profiles_are_rejected() {
        assert!(BoundaryProfile::new(Axis::Xi, vec![0.1, 0.2]).is_err());
        assert!(BoundaryProfile::new(Axis::Xi, vec![1.5, 0.1]).is_err());
        assert!(BoundaryProfile::new(Axis::Xi, vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = BoundaryProfile::new(Axis::Eta, vec![0.9, 0.0, 0.05]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"axis\":\"eta\""));
        assert!(s.contains("\"n_modes\":2"));
        let q: BoundaryProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<BoundaryProfile>(r#"{"axis":"xi","coeffs":[0.5,0.1],"n_modes":3}"#).is_err());
        assert!(serde_json::from_str::<BoundaryProfile>(r#"{"axis":"xi","coeffs":[2.0],"n_modes":0}"#).is_err());
    }

    #[test]
    fn collocation_round_trip() {
        let p = BoundaryProfile::new(Axis::Xi, vec![0.7, 0.01, -0.02, 0.003]).unwrap();
        let q = BoundaryProfile::from_collocation(Axis::Xi, p.collocation()).unwrap();
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
