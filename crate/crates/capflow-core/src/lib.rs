//! Simulator and verification suite for the volume- and area-preserving
//! power mean curvature flow of convex capillary hypersurfaces in the
//! Euclidean half-space.
//!
//! A capillary hypersurface meets the floor hyperplane at a constant
//! contact angle `theta` and evolves by `d/dt X = (phi(t) - H^alpha) nu~`,
//! where `nu~ = nu - cos(theta) E` is the capillary outward normal and
//! `phi(t)` is a curvature average chosen so that either the enclosed
//! volume or the capillary area is conserved. Convex initial data converge
//! to a spherical cap; the [`diagnostics`] module checks the conserved
//! quantities, monotonicity laws and curvature bounds along each run.
//!
//! The evolving surface is represented as a radial graph `rho(phi)` over a
//! 1-D polar grid, in two instantiations: planar curves (`n = 1`) and
//! axially symmetric surfaces (`n = 2`).

pub mod caps;
pub mod config;
pub mod diagnostics;
pub mod flow;
pub mod geometry;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too small: need at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("node count must be odd for Simpson quadrature, got {0}")]
    EvenGrid(usize),
    #[error("non-positive rho at node {node}: {value}")]
    NonPositiveRho { node: usize, value: f64 },
    #[error("non-positive mean curvature at node {node}: {value}")]
    NonPositiveH { node: usize, value: f64 },
    #[error("zero or negative enclosed volume")]
    ZeroVolume,
    #[error("degenerate capillary weight (1 - cos(theta) <nu,E>) at node {0}")]
    DegenerateWeight(usize),
    #[error("target must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("no containing cap found within {0} times the body diameter")]
    SearchBracketFailure(f64),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("convexity lost at node {node}, t = {t}")]
    ConvexityLost { node: usize, t: f64 },
    #[error("mean curvature hit the floor {floor} at node {node}, t = {t}")]
    CurvatureFloorHit { node: usize, t: f64, floor: f64 },
    #[error("rho became non-positive at node {node}, t = {t}")]
    RhoLost { node: usize, t: f64 },
    #[error("run did not converge (verdict {0})")]
    NotConverged(String),
    #[error("config parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("config validation error: {0}")]
    ValidationError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
