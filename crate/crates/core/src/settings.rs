use serde::{Deserialize, Serialize};

/// Deliberate defects used to check that the verification battery is not
/// vacuous. Production code paths always run with [`Fault::None`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Negates every eigenvalue returned by the spectrum module.
    FlipSigmaSign,
    /// Swaps the Riccati starting values of the two axis families.
    RiccatiInitial,
    /// Uses odd instead of even continuation across the tube core.
    AxisCondition,
}

/// Numerical knobs shared by the ODE and spectrum layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Radius of the Frobenius launch in `θ`.
    pub launch_radius: f64,
    /// Number of Frobenius coefficients beyond the leading one.
    pub series_order: usize,
    /// Relative tolerance for pointwise Riccati integrations.
    pub rtol: f64,
    /// Absolute slack allowed when monitoring the Riccati bounds.
    pub bound_slack: f64,
    pub fault: Fault,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            launch_radius: 1e-3,
            series_order: 12,
            rtol: 1e-12,
            bound_slack: 1e-7,
            fault: Fault::None,
        }
    }
}

impl Settings {
    pub fn with_fault(fault: Fault) -> Self {
        Settings { fault, ..Settings::default() }
    }
}

impl std::str::FromStr for Fault {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.trim() {
            "none" => Ok(Fault::None),
            "flip-sigma-sign" => Ok(Fault::FlipSigmaSign),
            "riccati-initial" => Ok(Fault::RiccatiInitial),
            "axis-condition" => Ok(Fault::AxisCondition),
            other => Err(crate::error::Error::Config(format!(
                "unknown fault '{other}' (none, flip-sigma-sign, riccati-initial, axis-condition)"
            ))),
        }
    }
}
