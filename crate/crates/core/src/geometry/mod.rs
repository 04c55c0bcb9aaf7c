//! Points, segments, skew and line intersection; line detection lives in
//! [`hough`], fragment merging in [`consolidate`](mod@consolidate).

pub mod consolidate;
pub mod hough;
mod rotate;

pub use consolidate::consolidate;
pub use hough::{detect_segments, HoughParams};
pub use rotate::{rotate_binary, rotate_gray};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("segment is not oriented as declared")]
    WrongOrientation,
    #[error("lines are parallel")]
    Parallel,
    #[error("edge has y1 == y2 and gives no skew reference")]
    NotVertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation by `angle` about `center` using `x' = x cos - y sin`,
    /// `y' = x sin + y cos` in image coordinates (clockwise on screen).
    pub fn rotated(self, angle: f64, center: Point) -> Point {
        let (s, c) = angle.sin_cos();
        let d = self.sub(center);
        Point::new(center.x + d.x * c - d.y * s, center.y + d.x * s + d.y * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
    Free,
}

impl Orientation {
    /// `(major, minor)` coordinates of `p` along this orientation.
    pub fn axes(self, p: Point) -> (f64, f64) {
        match self {
            Orientation::Vertical => (p.y, p.x),
            _ => (p.x, p.y),
        }
    }

    pub fn point(self, major: f64, minor: f64) -> Point {
        match self {
            Orientation::Vertical => Point::new(minor, major),
            _ => Point::new(major, minor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub p1: Point,
    pub p2: Point,
    pub orientation: Orientation,
}

impl LineSegment {
    pub fn new(p1: Point, p2: Point, orientation: Orientation) -> Result<Self, GeometryError> {
        if ![p1.x, p1.y, p2.x, p2.y].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if p1 == p2 {
            return Err(GeometryError::DegenerateSegment);
        }
        let (dx, dy) = ((p1.x - p2.x).abs(), (p1.y - p2.y).abs());
        let ok = match orientation {
            Orientation::Horizontal => dy <= dx,
            Orientation::Vertical => dx <= dy,
            Orientation::Free => true,
        };
        if !ok {
            return Err(GeometryError::WrongOrientation);
        }
        Ok(LineSegment { p1, p2, orientation })
    }

    pub fn free(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        Self::new(Point::new(x1, y1), Point::new(x2, y2), Orientation::Free)
    }

    pub fn horizontal(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        Self::new(Point::new(x1, y1), Point::new(x2, y2), Orientation::Horizontal)
    }

    pub fn vertical(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        Self::new(Point::new(x1, y1), Point::new(x2, y2), Orientation::Vertical)
    }

    pub fn length(&self) -> f64 {
        self.p2.sub(self.p1).norm()
    }

    pub fn midpoint(&self) -> Point {
        Point::new((self.p1.x + self.p2.x) / 2.0, (self.p1.y + self.p2.y) / 2.0)
    }

    pub fn reversed(&self) -> Self {
        LineSegment {
            p1: self.p2,
            p2: self.p1,
            orientation: self.orientation,
        }
    }

    /// Both endpoints rotated about the midpoint; orientation becomes `Free`.
    pub fn rotated(&self, angle: f64) -> Self {
        let c = self.midpoint();
        LineSegment {
            p1: self.p1.rotated(angle, c),
            p2: self.p2.rotated(angle, c),
            orientation: Orientation::Free,
        }
    }
}

/// Angle of an edge against the y axis, in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SkewAngle(pub f64);

impl SkewAngle {
    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

/// `atan((x1 - x2) / (y1 - y2))` for the edge's endpoints.
pub fn skew_angle(edge: &LineSegment) -> Result<SkewAngle, GeometryError> {
    let dy = edge.p1.y - edge.p2.y;
    if dy == 0.0 {
        return Err(GeometryError::NotVertical);
    }
    Ok(SkewAngle(((edge.p1.x - edge.p2.x) / dy).atan()))
}

/// Intersection of the infinite lines through `a` and `b`.
///
/// With `n_a = a2 - a1`, its normal `u_a = (-n_a.y, n_a.x)`, `n_b = b2 - b1`
/// and `n_p = a1 - b1`, the point is `(u_a . n_p) / (u_a . n_b) * n_b + b1`.
/// The result may lie outside either segment, which bridges broken rules.
///
/// The expression is evaluated exactly over the (finite, binary) inputs and
/// rounded once, so the result is the correctly rounded intersection and does
/// not depend on argument or endpoint order. Lines count as parallel when
/// `|u_a . n_b| <= 1e-9 |n_a| |n_b|`.
pub fn intersect(a: &LineSegment, b: &LineSegment) -> Result<Point, GeometryError> {
    let q = |v: f64| BigRational::from_float(v).ok_or(GeometryError::NonFinite);
    let (a1x, a1y, a2x, a2y) = (q(a.p1.x)?, q(a.p1.y)?, q(a.p2.x)?, q(a.p2.y)?);
    let (b1x, b1y, b2x, b2y) = (q(b.p1.x)?, q(b.p1.y)?, q(b.p2.x)?, q(b.p2.y)?);
    let n_a = (&a2x - &a1x, &a2y - &a1y);
    let u_a = (-&n_a.1, n_a.0.clone());
    let n_b = (&b2x - &b1x, &b2y - &b1y);
    let n_p = (&a1x - &b1x, &a1y - &b1y);
    let denom = &u_a.0 * &n_b.0 + &u_a.1 * &n_b.1;
    let eps = 1e-9 * a.length() * b.length();
    if denom.is_zero() || denom.to_f64().is_none_or(|d| d.abs() <= eps) {
        return Err(GeometryError::Parallel);
    }
    let t = (&u_a.0 * &n_p.0 + &u_a.1 * &n_p.1) / denom;
    let x = &t * &n_b.0 + b1x;
    let y = &t * &n_b.1 + b1y;
    match (x.to_f64(), y.to_f64()) {
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok(Point::new(x, y)),
        _ => Err(GeometryError::NonFinite),
    }
}
