//! Planar simple closed curves and their normalized boundary parameterization.
//!
//! Every curve is traversed counterclockwise by a parameter `t` in `[0, 1)`,
//! taken modulo 1. The ellipse uses the angular parameter `θ = 2πt`; every
//! other curve uses the arc-length fraction measured from a fixed start point.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("eccentricity must lie in [0, 1), got {0}")]
    InvalidEccentricity(f64),
    #[error("a regular polygon needs at least 3 sides, got {0}")]
    TooFewSides(usize),
    #[error("a convex polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("vertex {0} repeats an earlier vertex")]
    RepeatedVertex(usize),
    #[error("polygon is not strictly convex and counterclockwise at vertex {0}")]
    NotStrictlyConvex(usize),
    #[error("polygon winds around more than once")]
    NotSimple,
    #[error("cannot parse curve `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotation by `angle` radians about the origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// An eccentricity in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Eccentricity(f64);

impl Eccentricity {
    pub fn new(eps: f64) -> Result<Self, CurveError> {
        if (0.0..1.0).contains(&eps) {
            Ok(Self(eps))
        } else {
            Err(CurveError::InvalidEccentricity(eps))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `√(1−ε²)`: semi-minor axis of the ellipse, half-height of the rectangle.
    pub fn minor(self) -> f64 {
        // (1-ε)(1+ε) keeps precision as ε approaches 1
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// A boundary parameter, reduced modulo 1 into `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BoundaryParam(f64);

impl BoundaryParam {
    pub fn new(t: f64) -> Self {
        Self(wrap_unit(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Counterclockwise distance from `self` to `other`, in `[0, 1)`.
    pub fn gap_to(self, other: BoundaryParam) -> f64 {
        wrap_unit(other.0 - self.0)
    }
}

/// Reduces `t` into `[0, 1)`.
pub fn wrap_unit(t: f64) -> f64 {
    let r = t.rem_euclid(1.0);
    // rem_euclid rounds tiny negative inputs up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Cyclic distance between two parameters, in `[0, 0.5]`.
pub fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// True iff the four parameters are pairwise distinct modulo 1 and occur in
/// counterclockwise cyclic order `t1 → t2 → t3 → t4`.
pub fn is_strict_cyclic_order(t1: f64, t2: f64, t3: f64, t4: f64) -> bool {
    if ![t1, t2, t3, t4].iter().all(|t| t.is_finite()) {
        return false;
    }
    let d2 = wrap_unit(t2 - t1);
    let d3 = wrap_unit(t3 - t1);
    let d4 = wrap_unit(t4 - t1);
    0.0 < d2 && d2 < d3 && d3 < d4
}

/// Description of a curve, with the canonical text form
/// `ellipse:EPS`, `rectangle:EPS`, `polygon:N`, `reuleaux` or
/// `convex:x1,y1;x2,y2;...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Ellipse { eccentricity: f64 },
    Rectangle { eccentricity: f64 },
    RegularPolygon { sides: usize },
    ReuleauxTriangle,
    ConvexPolygon { vertices: Vec<Point2> },
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Ellipse { eccentricity } => write!(f, "ellipse:{eccentricity}"),
            CurveSpec::Rectangle { eccentricity } => write!(f, "rectangle:{eccentricity}"),
            CurveSpec::RegularPolygon { sides } => write!(f, "polygon:{sides}"),
            CurveSpec::ReuleauxTriangle => write!(f, "reuleaux"),
            CurveSpec::ConvexPolygon { vertices } => {
                write!(f, "convex:")?;
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{},{}", v.x, v.y)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for CurveSpec {
    type Err = CurveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| CurveError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let real = |text: &str| -> Result<f64, CurveError> {
            text.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(&format!("`{}` is not a finite number", text.trim())))
        };
        let (kind, arg) = match s.trim().split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        match (kind, arg) {
            ("ellipse", Some(a)) => Ok(CurveSpec::Ellipse { eccentricity: real(a)? }),
            ("rectangle", Some(a)) => Ok(CurveSpec::Rectangle { eccentricity: real(a)? }),
            ("polygon", Some(a)) => a
                .trim()
                .parse::<usize>()
                .map(|sides| CurveSpec::RegularPolygon { sides })
                .map_err(|_| fail("side count must be a non-negative integer")),
            ("reuleaux", None) => Ok(CurveSpec::ReuleauxTriangle),
            ("convex", Some(a)) => {
                let vertices = a
                    .split(';')
                    .map(|pair| {
                        let (x, y) = pair
                            .split_once(',')
                            .ok_or_else(|| fail("vertices are written as x,y"))?;
                        Ok(Point2::new(real(x)?, real(y)?))
                    })
                    .collect::<Result<Vec<_>, CurveError>>()?;
                Ok(CurveSpec::ConvexPolygon { vertices })
            }
            ("ellipse" | "rectangle" | "polygon" | "convex", None) => {
                Err(fail("missing `:` argument"))
            }
            ("reuleaux", Some(_)) => Err(fail("reuleaux takes no argument")),
            _ => Err(fail("unknown curve kind")),
        }
    }
}

/// One piece of a piecewise boundary.
#[derive(Debug, Clone, Copy)]
enum Segment {
    Line { from: Point2, to: Point2 },
    Arc { center: Point2, radius: f64, start: f64, sweep: f64 },
}

impl Segment {
    fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => from.distance(to),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at fraction `u ∈ [0, 1]` along the segment.
    fn at(&self, u: f64) -> Point2 {
        match *self {
            Segment::Line { from, to } => from + u * (to - from),
            Segment::Arc { center, radius, start, sweep } => {
                let (s, c) = (start + u * sweep).sin_cos();
                Point2::new(center.x + radius * c, center.y + radius * s)
            }
        }
    }
}

/// Arc-length parameterized closed path.
#[derive(Debug, Clone)]
struct BoundaryPath {
    segments: Vec<Segment>,
    /// `ends[i]` is the arc length at the end of segment `i`.
    ends: Vec<f64>,
    perimeter: f64,
}

impl BoundaryPath {
    fn new(segments: Vec<Segment>) -> Self {
        let ends: Vec<f64> = segments
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.length();
                Some(*acc)
            })
            .collect();
        let perimeter = *ends.last().expect("path has segments");
        Self { segments, ends, perimeter }
    }

    fn closed_polyline(points: &[Point2]) -> Self {
        let n = points.len();
        Self::new(
            (0..n)
                .map(|i| Segment::Line { from: points[i], to: points[(i + 1) % n] })
                .collect(),
        )
    }

    fn point_at(&self, t: f64) -> Point2 {
        let s = wrap_unit(t) * self.perimeter;
        let i = self.ends.partition_point(|&e| e <= s).min(self.segments.len() - 1);
        let start = if i == 0 { 0.0 } else { self.ends[i - 1] };
        let len = self.ends[i] - start;
        let u = ((s - start) / len).clamp(0.0, 1.0);
        self.segments[i].at(u)
    }

    /// Parameter value at the start of segment `i`.
    fn param_of_segment_start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.ends[i - 1] / self.perimeter
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Ellipse { minor: f64 },
    Path(BoundaryPath),
}

/// A validated curve, ready for evaluation.
#[derive(Debug, Clone)]
pub struct Curve {
    spec: CurveSpec,
    shape: Shape,
    corners: Vec<f64>,
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self, CurveError> {
        let (shape, corners) = match &spec {
            CurveSpec::Ellipse { eccentricity } => {
                let eps = Eccentricity::new(*eccentricity)?;
                (Shape::Ellipse { minor: eps.minor() }, Vec::new())
            }
            CurveSpec::Rectangle { eccentricity } => {
                let b = Eccentricity::new(*eccentricity)?.minor();
                // start at the midpoint of the right edge; that point is not a corner
                let path = BoundaryPath::closed_polyline(&[
                    Point2::new(1.0, 0.0),
                    Point2::new(1.0, b),
                    Point2::new(-1.0, b),
                    Point2::new(-1.0, -b),
                    Point2::new(1.0, -b),
                ]);
                let corners = (1..5).map(|i| path.param_of_segment_start(i)).collect();
                (Shape::Path(path), corners)
            }
            CurveSpec::RegularPolygon { sides } => {
                let n = *sides;
                if n < 3 {
                    return Err(CurveError::TooFewSides(n));
                }
                let vertices: Vec<Point2> = (0..n)
                    .map(|k| {
                        let a = TAU * k as f64 / n as f64;
                        Point2::new(a.cos(), a.sin())
                    })
                    .collect();
                let corners = (0..n).map(|k| k as f64 / n as f64).collect();
                (Shape::Path(BoundaryPath::closed_polyline(&vertices)), corners)
            }
            CurveSpec::ReuleauxTriangle => {
                let (path, corners) = reuleaux_path();
                (Shape::Path(path), corners)
            }
            CurveSpec::ConvexPolygon { vertices } => {
                validate_convex(vertices)?;
                let path = BoundaryPath::closed_polyline(vertices);
                let corners = (0..vertices.len()).map(|i| path.param_of_segment_start(i)).collect();
                (Shape::Path(path), corners)
            }
        };
        Ok(Self { spec, shape, corners })
    }

    pub fn ellipse(eps: f64) -> Result<Self, CurveError> {
        Self::new(CurveSpec::Ellipse { eccentricity: eps })
    }

    pub fn rectangle(eps: f64) -> Result<Self, CurveError> {
        Self::new(CurveSpec::Rectangle { eccentricity: eps })
    }

    pub fn regular_polygon(sides: usize) -> Result<Self, CurveError> {
        Self::new(CurveSpec::RegularPolygon { sides })
    }

    pub fn reuleaux() -> Self {
        Self::new(CurveSpec::ReuleauxTriangle).expect("reuleaux triangle is always valid")
    }

    pub fn convex_polygon(vertices: Vec<Point2>) -> Result<Self, CurveError> {
        Self::new(CurveSpec::ConvexPolygon { vertices })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn is_ellipse(&self) -> bool {
        matches!(self.shape, Shape::Ellipse { .. })
    }

    /// Boundary point at parameter `t` (any real; reduced modulo 1).
    pub fn point_at(&self, t: f64) -> Point2 {
        match &self.shape {
            Shape::Ellipse { minor } => {
                let (s, c) = (TAU * wrap_unit(t)).sin_cos();
                Point2::new(c, minor * s)
            }
            Shape::Path(path) => path.point_at(t),
        }
    }

    /// Parameters of the points where the boundary is not differentiable.
    pub fn corners(&self) -> &[f64] {
        &self.corners
    }

    /// Length of the boundary.
    pub fn perimeter(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ellipse { .. } => None,
            Shape::Path(path) => Some(path.perimeter),
        }
    }
}

impl FromStr for Curve {
    type Err = CurveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Curve::new(s.parse()?)
    }
}

/// Width-2 Reuleaux triangle centred at the centroid, first vertex on the
/// positive x-axis. Arc `k` runs from vertex `k` to vertex `k+1` around
/// vertex `k+2`.
fn reuleaux_path() -> (BoundaryPath, Vec<f64>) {
    let circumradius = 2.0 / 3f64.sqrt();
    let vertex = |k: usize| {
        let a = TAU * (k % 3) as f64 / 3.0;
        Point2::new(circumradius * a.cos(), circumradius * a.sin())
    };
    let segments = (0..3)
        .map(|k| Segment::Arc {
            center: vertex(k + 2),
            radius: 2.0,
            start: PI / 6.0 + k as f64 * TAU / 3.0,
            sweep: PI / 3.0,
        })
        .collect();
    (BoundaryPath::new(segments), vec![0.0, 1.0 / 3.0, 2.0 / 3.0])
}

fn validate_convex(vertices: &[Point2]) -> Result<(), CurveError> {
    let n = vertices.len();
    if n < 3 {
        return Err(CurveError::TooFewVertices(n));
    }
    if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
        return Err(CurveError::NonFiniteVertex(i));
    }
    for j in 1..n {
        if vertices[..j].contains(&vertices[j]) {
            return Err(CurveError::RepeatedVertex(j));
        }
    }
    let mut turning = 0.0;
    for i in 0..n {
        let prev = vertices[(i + n - 1) % n];
        let here = vertices[i];
        let next = vertices[(i + 1) % n];
        let (e0, e1) = (here - prev, next - here);
        let cross = e0.cross(e1);
        if cross <= 0.0 {
            return Err(CurveError::NotStrictlyConvex(i));
        }
        turning += cross.atan2(e0.x * e1.x + e0.y * e1.y);
    }
    if (turning - TAU).abs() > 1e-6 {
        return Err(CurveError::NotSimple);
    }
    Ok(())
}

/// Signed area of a closed polygon (positive when counterclockwise).
pub fn signed_area(points: &[Point2]) -> f64 {
    let n = points.len();
    0.5 * (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point2, b: Point2, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn ellipse_quarter_turn() {
        let c = Curve::ellipse(0.6).unwrap();
        assert!(close(c.point_at(0.25), Point2::new(0.0, 0.8), 1e-15));
    }

    #[test]
    fn rectangle_start_and_quarter() {
        let eps = 3f64.sqrt() / 2.0;
        let c = Curve::rectangle(eps).unwrap();
        assert!(close(c.point_at(0.0), Point2::new(1.0, 0.0), 1e-15));
        assert!(close(c.point_at(0.25), Point2::new(0.0, 0.5), 1e-12));
        assert!((c.perimeter().unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_corners() {
        let c = Curve::rectangle(3f64.sqrt() / 2.0).unwrap();
        let expected = [
            Point2::new(1.0, 0.5),
            Point2::new(-1.0, 0.5),
            Point2::new(-1.0, -0.5),
            Point2::new(1.0, -0.5),
        ];
        assert_eq!(c.corners().len(), 4);
        for (&t, &p) in c.corners().iter().zip(&expected) {
            assert!(close(c.point_at(t), p, 1e-12), "{t}");
        }
    }

    #[test]
    fn hexagon_start() {
        let c = Curve::regular_polygon(6).unwrap();
        assert!(close(c.point_at(0.0), Point2::new(1.0, 0.0), 1e-15));
        let v2 = Point2::new(-0.5, 3f64.sqrt() / 2.0);
        assert!(close(c.point_at(2.0 / 6.0), v2, 1e-12));
    }

    #[test]
    fn reuleaux_vertices_and_width() {
        let c = Curve::reuleaux();
        let r = 2.0 / 3f64.sqrt();
        assert!(close(c.point_at(0.0), Point2::new(r, 0.0), 1e-12));
        let v1 = Point2::new(r * (TAU / 3.0).cos(), r * (TAU / 3.0).sin());
        assert!(close(c.point_at(1.0 / 3.0), v1, 1e-12));
        assert!(close(c.point_at(1.0 - 1e-15), Point2::new(r, 0.0), 1e-12));
        assert!((c.perimeter().unwrap() - TAU).abs() < 1e-12);
        // constant width 2: every boundary point is at distance 2 from the opposite vertex
        let v2 = Point2::new(r * (2.0 * TAU / 3.0).cos(), r * (2.0 * TAU / 3.0).sin());
        for k in 0..=20 {
            let p = c.point_at(k as f64 / 60.0);
            assert!((p.distance(v2) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn convex_starts_at_first_vertex() {
        let vs = vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 1.0)];
        let c = Curve::convex_polygon(vs).unwrap();
        assert_eq!(c.point_at(0.0), Point2::new(0.0, 0.0));
        assert_eq!(c.corners().len(), 3);
    }

    #[test]
    fn rejects_invalid_curves() {
        assert_eq!(Curve::ellipse(1.0).unwrap_err(), CurveError::InvalidEccentricity(1.0));
        assert!(Curve::rectangle(-0.1).is_err());
        assert!(Curve::ellipse(f64::NAN).is_err());
        assert_eq!(Curve::regular_polygon(2).unwrap_err(), CurveError::TooFewSides(2));
        let cw = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)];
        assert_eq!(Curve::convex_polygon(cw).unwrap_err(), CurveError::NotStrictlyConvex(0));
        let collinear = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 1.0),
        ];
        assert!(matches!(
            Curve::convex_polygon(collinear),
            Err(CurveError::NotStrictlyConvex(_))
        ));
        let repeated = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.0),
        ];
        assert_eq!(Curve::convex_polygon(repeated).unwrap_err(), CurveError::RepeatedVertex(2));
        let star: Vec<Point2> = (0..5)
            .map(|k| {
                let a = TAU * (2 * k) as f64 / 5.0;
                Point2::new(a.cos(), a.sin())
            })
            .collect();
        assert_eq!(Curve::convex_polygon(star).unwrap_err(), CurveError::NotSimple);
        assert!(Curve::convex_polygon(vec![Point2::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn cyclic_order_examples() {
        assert!(is_strict_cyclic_order(0.0, 0.25, 0.5, 0.75));
        assert!(!is_strict_cyclic_order(0.0, 0.5, 0.25, 0.75));
        assert!(is_strict_cyclic_order(0.9, 0.1, 0.3, 0.6));
        assert!(!is_strict_cyclic_order(0.1, 0.1, 0.3, 0.6));
        assert!(!is_strict_cyclic_order(0.1, 1.1, 0.3, 0.6));
    }

    #[test]
    fn curve_text_round_trip() {
        for text in ["ellipse:0.8", "rectangle:0", "polygon:6", "reuleaux", "convex:0,0;1,0;0,1"] {
            let spec: CurveSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        let spec: CurveSpec = "convex:0,0;2.5,0;0,-1e-3".parse().unwrap();
        assert_eq!(spec.to_string(), "convex:0,0;2.5,0;0,-0.001");
    }

    #[test]
    fn curve_text_rejects_garbage() {
        for bad in ["", "circle", "ellipse", "ellipse:", "ellipse:x", "polygon:-3", "polygon:2.5",
                    "reuleaux:1", "convex:1", "convex:1,2;3", "ellipse:nan", "ellipse:inf"] {
            assert!(bad.parse::<CurveSpec>().is_err(), "{bad}");
        }
        assert!("ellipse:1.5".parse::<Curve>().is_err());
    }

    #[test]
    fn wrap_unit_stays_half_open() {
        assert_eq!(wrap_unit(-1e-20), 0.0);
        assert_eq!(wrap_unit(1.0), 0.0);
        assert!((wrap_unit(-0.25) - 0.75).abs() < 1e-16);
        assert!((BoundaryParam::new(0.9).gap_to(BoundaryParam::new(0.1)) - 0.2).abs() < 1e-15);
    }
}
