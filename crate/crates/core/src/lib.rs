//! Numerical toolkit for Serrin-type overdetermined torsion problems on
//! tubes around a Clifford torus in the round three-sphere.
//!
//! A domain is described by a boundary profile `φ` of one angle: in the
//! coordinates `θ ∈ [0, π/2]`, `η, ξ ∈ S¹` with metric
//! `dθ² + sin²θ dη² + cos²θ dξ²` it is `{θ < φ(a)}` where `a` is either
//! `ξ` ([`Axis::Xi`]) or `η` ([`Axis::Eta`]). Constant profiles give the
//! isoparametric tubes; the crate computes their torsion functions, the
//! spectrum of the linearised Dirichlet-to-Neumann operator, its bifurcation
//! points, and continues the bifurcating branches of nonconstant Serrin
//! domains.

pub mod branch;
pub mod collocation;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linearization;
pub mod mode_ode;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod roots;
pub mod series;
pub mod settings;
pub mod spectrum;
pub mod torsion;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Axis, BoundaryProfile, CosineSeries, MetricAtPoint, ModeIndex};
pub use settings::{Fault, Settings};
