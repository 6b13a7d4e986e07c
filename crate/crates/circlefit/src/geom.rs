//! Circle parameterizations, conversions between them, and geometric
//! residuals shared by all fitters.
//!
//! Circles are represented either by their natural parameters `(a, b, R)`
//! or by the algebraic form `A(x^2 + y^2) + Bx + Cy + D = 0`. The algebraic
//! form is projective (defined up to a scalar) and also covers lines, which
//! arise as the `A = 0` limit.

use nalgebra::Vector4;
use serde::Serialize;

use crate::error::{Error, Result};

/// A planar observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// An ordered collection of observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    /// Builds a point set, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "point {i} has non-finite coordinates ({}, {})",
                    p.x, p.y
                )));
            }
        }
        Ok(PointSet { points })
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(xy.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        (sx / n, sy / n)
    }

    /// Fits need at least three points; callers that require this should
    /// check up front to produce a uniform error.
    pub fn require_min_points(&self, min: usize) -> Result<()> {
        if self.points.len() < min {
            Err(Error::InvalidInput(format!(
                "need at least {min} points, got {}",
                self.points.len()
            )))
        } else {
            Ok(())
        }
    }
}

/// Natural circle parameters: center `(a, b)` and radius `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleGeom {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

impl CircleGeom {
    pub fn new(a: f64, b: f64, r: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && r.is_finite() && r > 0.0) {
            return Err(Error::InvalidCircle);
        }
        Ok(CircleGeom { a, b, r })
    }

    /// Converts to algebraic parameters in Pratt-unit normalization:
    /// `A = 1/(2R)`, `B = -2aA`, `C = -2bA`, `D = (a^2 + b^2 - R^2) A`,
    /// which satisfies `B^2 + C^2 - 4AD = 1`.
    pub fn to_alg(&self) -> AlgParams {
        let a_coef = 1.0 / (2.0 * self.r);
        AlgParams {
            a: a_coef,
            b: -2.0 * self.a * a_coef,
            c: -2.0 * self.b * a_coef,
            d: (self.a * self.a + self.b * self.b - self.r * self.r) * a_coef,
            normalization: Normalization::PrattUnit,
        }
    }
}

/// How an [`AlgParams`] vector is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// `A^2 + B^2 + C^2 + D^2 = 1`.
    UnitNorm,
    /// `B^2 + C^2 - 4AD = 1` (the Pratt constraint).
    PrattUnit,
}

/// Algebraic circle parameters `(A, B, C, D)` of
/// `A(x^2 + y^2) + Bx + Cy + D = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub normalization: Normalization,
}

impl AlgParams {
    /// Scales `(a, b, c, d)` to unit Euclidean norm.
    pub fn unit_norm(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let norm = (a * a + b * b + c * c + d * d).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidInput(
                "algebraic parameter vector must be nonzero and finite".into(),
            ));
        }
        Ok(AlgParams {
            a: a / norm,
            b: b / norm,
            c: c / norm,
            d: d / norm,
            normalization: Normalization::UnitNorm,
        })
    }

    /// Scales `(a, b, c, d)` so that `B^2 + C^2 - 4AD = 1`. Fails when the
    /// discriminant is not positive (no real circle or line in this gauge).
    pub fn pratt_unit(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let disc = b * b + c * c - 4.0 * a * d;
        if !(disc.is_finite() && disc > 0.0) {
            return Err(Error::DegenerateConic);
        }
        let s = disc.sqrt();
        Ok(AlgParams {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            normalization: Normalization::PrattUnit,
        })
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.a, self.b, self.c, self.d)
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b + self.c * self.c - 4.0 * self.a * self.d
    }

    /// Converts to natural parameters.
    ///
    /// After scaling to unit norm, a leading coefficient `|A|` above
    /// `line_threshold` yields a circle with `a = -B/(2A)`, `b = -C/(2A)`,
    /// `R = sqrt(B^2 + C^2 - 4AD) / (2|A|)`; otherwise the parameters
    /// describe a line `Bx + Cy + D = 0`.
    pub fn to_circle_or_line(&self, line_threshold: f64) -> Result<CircleOrLine> {
        let v = self.as_vector();
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput(
                "algebraic parameter vector must be nonzero and finite".into(),
            ));
        }
        let u = v / norm;
        if u.x.abs() > line_threshold {
            let disc = u.y * u.y + u.z * u.z - 4.0 * u.x * u.w;
            if disc <= 0.0 {
                return Err(Error::DegenerateConic);
            }
            Ok(CircleOrLine::Circle(CircleGeom {
                a: -u.y / (2.0 * u.x),
                b: -u.z / (2.0 * u.x),
                r: disc.sqrt() / (2.0 * u.x.abs()),
            }))
        } else {
            let s = (u.y * u.y + u.z * u.z).sqrt();
            if s == 0.0 {
                return Err(Error::DegenerateConic);
            }
            Ok(CircleOrLine::Line(Line {
                b: u.y / s,
                c: u.z / s,
                d: u.w / s,
            }))
        }
    }
}

/// Default `|A|` threshold (after unit-norm scaling) below which algebraic
/// parameters are interpreted as a line.
pub const DEFAULT_LINE_THRESHOLD: f64 = 1e-10;

/// A line `Bx + Cy + D = 0` with `B^2 + C^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line {
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// The `A(x^2+y^2) + Bx + Cy + D = 0` family covers both circles and lines;
/// fitters return whichever the data selects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CircleOrLine {
    Circle(CircleGeom),
    Line(Line),
}

impl CircleOrLine {
    pub fn as_circle(&self) -> Option<&CircleGeom> {
        match self {
            CircleOrLine::Circle(c) => Some(c),
            CircleOrLine::Line(_) => None,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, CircleOrLine::Circle(_))
    }
}

/// Signed distance from a point to a circle: `r_i - R`, positive outside.
pub fn signed_distance(pt: Point, c: &CircleGeom) -> f64 {
    let dx = pt.x - c.a;
    let dy = pt.y - c.b;
    (dx * dx + dy * dy).sqrt() - c.r
}

/// Sum of squared orthogonal distances, the objective of the geometric fit.
pub fn objective_geometric(ps: &PointSet, c: &CircleGeom) -> f64 {
    ps.iter()
        .map(|&p| {
            let d = signed_distance(p, c);
            d * d
        })
        .sum()
}
