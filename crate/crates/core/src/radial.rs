//! Exact torsion function of a constant tube.
//!
//! For `φ ≡ λ` the torsion function depends on `θ` only and solves
//! `v'' + (cot θ − tan θ) v' = −1`, `v(λ) = 0`, regular at `θ = 0`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub lambda: f64,
    pub flux: f64,
}

impl RadialSolution {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(RadialSolution { lambda, flux: radial_flux(lambda)? })
    }

    /// `v(θ)`, valid on `[0, λ]`.
    pub fn value(&self, theta: f64) -> Result<f64> {
        radial_torsion(self.lambda, theta)
    }

    /// `v'(θ) = −½ tan θ`.
    pub fn derivative(&self, theta: f64) -> f64 {
        -0.5 * theta.tan()
    }

    /// Pulled-back solution `u(t) = v(tλ)`.
    pub fn at_t(&self, t: f64) -> Result<f64> {
        self.value(t * self.lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < FRAC_PI_2) {
        return domain(format!("lambda = {lambda} outside (0, pi/2)"));
    }
    Ok(())
}

/// `v(θ) = ½ (ln cos θ − ln cos λ)`.
pub fn radial_torsion(lambda: f64, theta: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(0.0..=lambda).contains(&theta) {
        return domain(format!("theta = {theta} outside [0, {lambda}]"));
    }
    Ok(0.5 * (theta.cos().ln() - lambda.cos().ln()))
}

/// Normal derivative of the constant-tube torsion function, `−½ tan λ`.
pub fn radial_flux(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(-0.5 * lambda.tan())
}
