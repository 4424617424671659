//! The Ptolemy ratio, its restriction to a curve, and finite-difference
//! derivative checks.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{is_strict_cyclic_order, wrap_unit, Curve, Eccentricity, Point2};
use crate::linalg::symmetric_eigenvalues;

/// Which diagonal of the quadrilateral `abcd` vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Diagonal {
    AC,
    BD,
}

impl fmt::Display for Diagonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagonal::AC => write!(f, "ac"),
            Diagonal::BD => write!(f, "bd"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatioError {
    #[error("degenerate quadrilateral: diagonal {0} has zero length")]
    DegenerateQuadrilateral(Diagonal),
    #[error("parameters {0:?} are not in strict counterclockwise cyclic order")]
    NotCyclicOrder([f64; 4]),
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("step {step} is too large for the smallest cyclic gap {min_gap}")]
    StepTooLarge { step: f64, min_gap: f64 },
}

/// `(|ab||cd| + |ad||bc|) / (|ac||bd|)`.
pub fn ptolemy_ratio(a: Point2, b: Point2, c: Point2, d: Point2) -> Result<f64, RatioError> {
    let ac = a.distance(c);
    if ac == 0.0 {
        return Err(RatioError::DegenerateQuadrilateral(Diagonal::AC));
    }
    let bd = b.distance(d);
    if bd == 0.0 {
        return Err(RatioError::DegenerateQuadrilateral(Diagonal::BD));
    }
    let sides = a.distance(b) * c.distance(d) + a.distance(d) * b.distance(c);
    Ok(sides / (ac * bd))
}

/// Four boundary parameters in strict counterclockwise cyclic order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadParams([f64; 4]);

impl QuadParams {
    pub fn new(t1: f64, t2: f64, t3: f64, t4: f64) -> Result<Self, RatioError> {
        Self::from_array([t1, t2, t3, t4])
    }

    pub fn from_array(t: [f64; 4]) -> Result<Self, RatioError> {
        if is_strict_cyclic_order(t[0], t[1], t[2], t[3]) {
            Ok(Self(t.map(wrap_unit)))
        } else {
            Err(RatioError::NotCyclicOrder(t))
        }
    }

    /// The ellipse critical point `(0, π/2, π, 3π/2)`.
    pub fn quarter_turns() -> Self {
        Self([0.0, 0.25, 0.5, 0.75])
    }

    pub fn params(&self) -> [f64; 4] {
        self.0
    }

    /// The four counterclockwise gaps `t2−t1, t3−t2, t4−t3, t1−t4` (mod 1).
    pub fn gaps(&self) -> [f64; 4] {
        let t = self.0;
        [0, 1, 2, 3].map(|i| wrap_unit(t[(i + 1) % 4] - t[i]))
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Cyclic relabelling that puts the smallest parameter first. The ratio
    /// is unchanged.
    pub fn canonical(&self) -> Self {
        let first = (0..4)
            .min_by(|&i, &j| self.0[i].total_cmp(&self.0[j]))
            .expect("four entries");
        Self([0, 1, 2, 3].map(|k| self.0[(first + k) % 4]))
    }
}

/// Ptolemy ratio of the boundary points at parameters `t` (raw, unchecked
/// order; used by the optimizer's inner loop).
pub(crate) fn ratio_at(curve: &Curve, t: &[f64; 4]) -> Result<f64, RatioError> {
    let [a, b, c, d] = t.map(|ti| curve.point_at(ti));
    ptolemy_ratio(a, b, c, d)
}

pub fn ratio_on_curve(curve: &Curve, q: &QuadParams) -> Result<f64, RatioError> {
    ratio_at(curve, &q.0)
}

/// A 4×4 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix4(pub [[f64; 4]; 4]);

impl Matrix4 {
    pub fn zeros() -> Self {
        Self([[0.0; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|row| row.map(|v| v * factor)))
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[j][i] = self.0[i][j];
            }
        }
        m
    }

    pub fn symmetrized(&self) -> Self {
        let t = self.transpose();
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = 0.5 * (self.0[i][j] + t.0[i][j]);
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix4) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    /// Eigenvalues (ascending) by cyclic Jacobi; the matrix is assumed symmetric.
    pub fn eigenvalues(&self) -> [f64; 4] {
        symmetric_eigenvalues(self.0, 1e-13)
    }
}

/// Multiplier turning a derivative in `t` into one in the curve's derivative
/// coordinate: θ = 2πt (radians) on the ellipse, `t` itself elsewhere.
pub fn derivative_scale(curve: &Curve) -> f64 {
    if curve.is_ellipse() {
        TAU
    } else {
        1.0
    }
}

/// Converts a step in derivative coordinates to t-units, checking that all
/// perturbed tuples keep their cyclic order.
fn step_in_t(curve: &Curve, q: &QuadParams, h: f64) -> Result<f64, RatioError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(RatioError::InvalidStep(h));
    }
    let ht = h / derivative_scale(curve);
    let min_gap = q.min_gap();
    if min_gap <= 2.0 * ht {
        return Err(RatioError::StepTooLarge { step: ht, min_gap });
    }
    Ok(ht)
}

/// Central finite-difference gradient of [`ratio_on_curve`].
///
/// `h` and the result are in radians of θ on the ellipse and in t-units on
/// every other curve.
pub fn gradient_fd(curve: &Curve, q: &QuadParams, h: f64) -> Result<[f64; 4], RatioError> {
    let ht = step_in_t(curve, q, h)?;
    let base = q.params();
    let eval = |i: usize, dir: f64| {
        let mut t = base;
        t[i] += dir * ht;
        ratio_at(curve, &t)
    };
    let mut grad = [0.0; 4];
    for (i, g) in grad.iter_mut().enumerate() {
        *g = (eval(i, 1.0)? - eval(i, -1.0)?) / (2.0 * h);
    }
    Ok(grad)
}

/// Second-order central finite-difference Hessian of [`ratio_on_curve`],
/// symmetrized. Units as in [`gradient_fd`].
pub fn hessian_fd(curve: &Curve, q: &QuadParams, h: f64) -> Result<Matrix4, RatioError> {
    let ht = step_in_t(curve, q, h)?;
    let base = q.params();
    let eval = |steps: &[(usize, f64)]| {
        let mut t = base;
        for &(i, dir) in steps {
            t[i] += dir * ht;
        }
        ratio_at(curve, &t)
    };
    let center = eval(&[])?;
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        m.0[i][i] = (eval(&[(i, 1.0)])? - 2.0 * center + eval(&[(i, -1.0)])?) / (h * h);
        for j in 0..i {
            let pp = eval(&[(i, 1.0), (j, 1.0)])?;
            let pm = eval(&[(i, 1.0), (j, -1.0)])?;
            let mp = eval(&[(i, -1.0), (j, 1.0)])?;
            let mm = eval(&[(i, -1.0), (j, -1.0)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            m.0[i][j] = v;
            m.0[j][i] = v;
        }
    }
    Ok(m.symmetrized())
}

/// Rough bound on rounding noise in a second difference of values of size
/// `value` taken with step `h`.
pub fn finite_difference_noise(value: f64, h: f64) -> f64 {
    1e3 * f64::EPSILON * value.abs().max(1.0) / (h * h)
}

/// Hessian of the ratio on the ellipse at `(0, π/2, π, 3π/2)`, in θ-units:
/// `−ε⁴/(8√(1−ε²))` times a fixed two-block pattern.
pub fn ellipse_hessian_closed_form(eps: Eccentricity) -> Matrix4 {
    let e2 = eps.value() * eps.value();
    let b = eps.minor();
    let one_m = b * b;
    let prefactor = -(e2 * e2) / (8.0 * b);
    let odd_diag = (3.0 - e2) / (2.0 - e2);
    let even_diag = (3.0 - 2.0 * e2) / ((2.0 - e2) * one_m);
    let odd_off = one_m / (2.0 - e2);
    let even_off = 1.0 / ((2.0 - e2) * one_m);
    Matrix4([
        [odd_diag, 0.0, odd_off, 0.0],
        [0.0, even_diag, 0.0, even_off],
        [odd_off, 0.0, odd_diag, 0.0],
        [0.0, even_off, 0.0, even_diag],
    ])
    .scaled(prefactor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalPointKind {
    Maximum,
    Minimum,
    Saddle,
    Inconclusive,
}

impl fmt::Display for CriticalPointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Classifies a critical point from the eigenvalue signs of its Hessian,
/// treating eigenvalues within `τ = max(1e−10·max|entry|, 1e−14)` of zero
/// as zero.
pub fn second_derivative_test(h: &Matrix4) -> CriticalPointKind {
    classify_with_floor(h, 0.0)
}

/// As [`second_derivative_test`], with the zero band widened to at least
/// `floor` (e.g. the rounding noise of a finite-difference Hessian).
pub fn classify_with_floor(h: &Matrix4, floor: f64) -> CriticalPointKind {
    let tau = (1e-10 * h.max_abs()).max(1e-14).max(floor);
    let eig = h.eigenvalues();
    let negative = eig.iter().filter(|&&e| e < -tau).count();
    let positive = eig.iter().filter(|&&e| e > tau).count();
    match (negative, positive) {
        (4, _) => CriticalPointKind::Maximum,
        (_, 4) => CriticalPointKind::Minimum,
        (n, p) if n > 0 && p > 0 => CriticalPointKind::Saddle,
        _ => CriticalPointKind::Inconclusive,
    }
}
