//! Planar geometry shared by the planners and the metrics: headings,
//! distances, segment densification and point-to-segment projection.
//!
//! All lengths are millimetres and all angles are degrees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for length comparisons, in millimetres.
pub const LENGTH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate segment")]
    DegenerateSegment,
    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),
}

/// A point in the print plane. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Linear interpolation; `t = 0` gives `self`, `t = 1` gives `other`.
    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2 { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.b, self.a)
    }

    pub fn midpoint(&self) -> Point2 {
        self.a.midpoint(&self.b)
    }
}

/// An angle in degrees, normalized to (-180, 180].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    /// Wraps an arbitrary angle in degrees into (-180, 180].
    pub fn from_degrees(deg: f64) -> Angle {
        let mut a = deg.rem_euclid(360.0);
        if a > 180.0 {
            a -= 360.0;
        }
        Angle(a)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }
}

/// Direction of `s.b - s.a`, counterclockwise from +x.
pub fn heading(s: &Segment) -> Result<Angle, GeometryError> {
    let dx = s.b.x - s.a.x;
    let dy = s.b.y - s.a.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::DegenerateSegment);
    }
    Ok(Angle::from_degrees(dy.atan2(dx).to_degrees()))
}

/// Signed change of heading from `prev` to `next`.
pub fn turn_angle(prev: Angle, next: Angle) -> Angle {
    Angle::from_degrees(next.degrees() - prev.degrees())
}

/// Distance from `p` to the closest point of the closed segment `s`.
pub fn point_segment_distance(p: &Point2, s: &Segment) -> f64 {
    let dx = s.b.x - s.a.x;
    let dy = s.b.y - s.a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&s.a);
    }
    let t = (((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&s.a.lerp(&s.b, t))
}

/// Evenly spaced samples along `s`, both endpoints included, with
/// `ceil(len / resolution)` equal gaps. The endpoint is reproduced exactly.
pub fn densify(s: &Segment, resolution: f64) -> Result<Vec<Point2>, GeometryError> {
    if !(resolution > 0.0) {
        return Err(GeometryError::NonPositiveResolution(resolution));
    }
    let len = s.length();
    if len == 0.0 {
        return Ok(vec![s.a]);
    }
    let k = ((len / resolution).ceil() as usize).max(1);
    let mut pts = Vec::with_capacity(k + 1);
    for i in 0..k {
        pts.push(s.a.lerp(&s.b, i as f64 / k as f64));
    }
    pts.push(s.b);
    Ok(pts)
}

/// Total length of a polyline.
pub fn polyline_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}
