//! Closed-form Ptolemy constants, the ellipse bound sandwich, and the
//! rectangle corner-collapse family.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::Serialize;
use thiserror::Error;

use crate::curves::{Eccentricity, Point2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("eccentricity must lie in [0, 1), got {0}")]
    InvalidEccentricity(f64),
    #[error("corner-collapse family needs eccentricity in [0, √3/2], got {0}")]
    EccentricityAboveThreshold(f64),
    #[error("delta must lie in (0, {max}], got {delta}")]
    InvalidDelta { delta: f64, max: f64 },
}

/// Eccentricity of the 2×1 rectangle, where the rectangle constant switches
/// branches.
pub fn rectangle_threshold() -> f64 {
    3f64.sqrt() / 2.0
}

fn minor(eps: f64) -> Result<f64, AnalyticError> {
    Eccentricity::new(eps)
        .map(Eccentricity::minor)
        .map_err(|_| AnalyticError::InvalidEccentricity(eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

/// `(2−ε²)/(2√(1−ε²))`, the value of the ratio at the ellipse critical point.
pub fn ellipse_constant(eps: f64) -> Result<f64, AnalyticError> {
    let b = minor(eps)?;
    Ok((2.0 - eps * eps) / (2.0 * b))
}

/// Lower `(1/b + b)/2` and upper `csc(πb/2)` bounds, `b = √(1−ε²)`.
pub fn ellipse_bounds(eps: f64) -> Result<BoundPair, AnalyticError> {
    let b = minor(eps)?;
    Ok(BoundPair {
        lower: 0.5 * (1.0 / b + b),
        upper: 1.0 / (FRAC_PI_2 * b).sin(),
    })
}

/// `√2` up to the 2×1 rectangle, `√(1+4b²)/(2b)` beyond it.
pub fn rectangle_constant(eps: f64) -> Result<f64, AnalyticError> {
    let b = minor(eps)?;
    if eps <= rectangle_threshold() {
        Ok(SQRT_2)
    } else {
        Ok(rectangle_wide_branch(b))
    }
}

/// The second branch of [`rectangle_constant`] as a function of the
/// half-height `b`; equals `√2` at `b = ½`.
pub fn rectangle_wide_branch(b: f64) -> f64 {
    (1.0 + 4.0 * b * b).sqrt() / (2.0 * b)
}

fn check_family(eps: f64, delta: f64) -> Result<f64, AnalyticError> {
    let b = minor(eps)?;
    if eps > rectangle_threshold() {
        return Err(AnalyticError::EccentricityAboveThreshold(eps));
    }
    let max = 2.0f64.min(2.0 * b);
    if !(delta > 0.0 && delta <= max) {
        return Err(AnalyticError::InvalidDelta { delta, max });
    }
    Ok(b)
}

/// Corner-collapse configuration: `(1, b)`, `(−1, δ−b)`, `(−1, −b)`,
/// `(δ−1, −b)`. Three vertices converge on the lower-left corner as δ → 0.
pub fn rectangle_limit_vertices(eps: f64, delta: f64) -> Result<[Point2; 4], AnalyticError> {
    let b = check_family(eps, delta)?;
    Ok([
        Point2::new(1.0, b),
        Point2::new(-1.0, delta - b),
        Point2::new(-1.0, -b),
        Point2::new(delta - 1.0, -b),
    ])
}

/// Ptolemy ratio of [`rectangle_limit_vertices`], evaluated with the common
/// factor δ cancelled so it stays accurate for tiny δ. Tends to `√2` as
/// δ → 0⁺.
pub fn rectangle_limit_family(eps: f64, delta: f64) -> Result<f64, AnalyticError> {
    let b = check_family(eps, delta)?;
    let num = (4.0 + (delta - 2.0 * b).powi(2)).sqrt() + ((delta - 2.0).powi(2) + 4.0 * b * b).sqrt();
    Ok(num / ((4.0 + 4.0 * b * b).sqrt() * SQRT_2))
}

/// Non-degenerate configuration `(0, b)`, `(−1, −b)`, `(0, −b)`, `(1, −b)`
/// whose ratio is the wide-rectangle branch.
pub fn rectangle_wide_vertices(eps: f64) -> Result<[Point2; 4], AnalyticError> {
    let b = minor(eps)?;
    Ok([
        Point2::new(0.0, b),
        Point2::new(-1.0, -b),
        Point2::new(0.0, -b),
        Point2::new(1.0, -b),
    ])
}
