//! Ptolemy constants of planar simple closed curves.
//!
//! For four points `a, b, c, d` met in counterclockwise order along a closed
//! curve, the Ptolemy ratio is `(|ab||cd| + |ad||bc|) / (|ac||bd|)`. It is at
//! least 1 for any four points and equals 1 exactly when they are concyclic.
//! The Ptolemy constant of the curve is the supremum of the ratio over all
//! ordered quadruples on it.
//!
//! The crate is split into:
//!
//! - [`curves`]: boundary parameterizations of ellipses, rectangles, regular
//!   polygons, the Reuleaux triangle and arbitrary convex polygons.
//! - [`ratio`]: the ratio itself, its restriction to a curve, and
//!   finite-difference gradient/Hessian checks.
//! - [`analytic`]: closed-form constants, bounds and the rectangle corner
//!   limit family.
//! - [`optimizer`]: grid search plus constrained Nelder–Mead refinement,
//!   including detection of suprema that are only reached in a limit.
//! - [`experiments`]: the record types and report builders behind the CLI.

pub mod analytic;
pub mod curves;
pub mod experiments;
mod linalg;
mod nelder_mead;
pub mod optimizer;
pub mod ratio;

pub use curves::{BoundaryParam, Curve, CurveError, CurveSpec, Eccentricity, Point2};
pub use optimizer::{EstimateResult, OptimizeOptions, Status};
pub use ratio::{Matrix4, QuadParams};
