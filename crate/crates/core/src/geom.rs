//! Planar points, polylines and the elementary measurements on them.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or vector) in the x1y1-plane.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Affine map `p -> m * p + b` of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub m: [[f64; 2]; 2],
    pub b: Point,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { m: [[1.0, 0.0], [0.0, 1.0]], b: Point::new(0.0, 0.0) };

    pub fn translation(dx: f64, dy: f64) -> Self {
        Affine { b: Point::new(dx, dy), ..Self::IDENTITY }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Affine { m: [[c, -s], [s, c]], b: Point::default() }
    }

    pub fn shear_x(k: f64) -> Self {
        Affine { m: [[1.0, k], [0.0, 1.0]], b: Point::default() }
    }

    pub fn shear_y(k: f64) -> Self {
        Affine { m: [[1.0, 0.0], [k, 1.0]], b: Point::default() }
    }

    /// Area-preserving squeeze `(x, y) -> (k x, y / k)`.
    pub fn squeeze(k: f64) -> Self {
        Affine { m: [[k, 0.0], [0.0, 1.0 / k]], b: Point::default() }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.b.x,
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.b.y,
        )
    }

    /// `self ∘ other`.
    pub fn then(&self, next: &Affine) -> Affine {
        let a = &next.m;
        let m = &self.m;
        Affine {
            m: [
                [a[0][0] * m[0][0] + a[0][1] * m[1][0], a[0][0] * m[0][1] + a[0][1] * m[1][1]],
                [a[1][0] * m[0][0] + a[1][1] * m[1][0], a[1][0] * m[0][1] + a[1][1] * m[1][1]],
            ],
            b: next.apply(self.b),
        }
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: impl IntoIterator<Item = Point>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = BBox { min: first, max: first };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }
}

/// An ordered list of planar vertices, optionally closed and optionally
/// carrying an x2-lift value per vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPolyline {
    pub vertices: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<Vec<f64>>,
    pub closed: bool,
}

impl PlanarPolyline {
    pub fn new(vertices: Vec<Point>, closed: bool, lift: Option<Vec<f64>>) -> Result<Self> {
        let line = PlanarPolyline { vertices, lift, closed };
        line.validate()?;
        Ok(line)
    }

    pub fn closed(vertices: Vec<Point>) -> Result<Self> {
        Self::new(vertices, true, None)
    }

    pub fn with_lift(mut self, lift: Vec<f64>) -> Result<Self> {
        self.lift = Some(lift);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.closed && n < 3 {
            return Err(Error::InvalidPolyline(format!("closed polyline needs at least 3 vertices, got {n}")));
        }
        if self.vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidPolyline("non-finite vertex".into()));
        }
        let pairs = if self.closed { n } else { n.saturating_sub(1) };
        for i in 0..pairs {
            if self.vertices[i] == self.vertices[(i + 1) % n] {
                return Err(Error::InvalidPolyline(format!("repeated consecutive vertex at index {i}")));
            }
        }
        if let Some(lift) = &self.lift {
            if lift.len() != n {
                return Err(Error::InvalidPolyline(format!(
                    "lift has {} entries for {n} vertices",
                    lift.len()
                )));
            }
            if lift.iter().any(|z| !z.is_finite()) {
                return Err(Error::InvalidPolyline("non-finite lift value".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Number of segments (a closed polyline wraps around).
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len().saturating_sub(1)
        }
    }

    pub fn segment(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn direction(&self, i: usize) -> Point {
        let (a, b) = self.segment(i);
        b - a
    }

    /// Point at arc parameter `segment + t`.
    pub fn point_at(&self, segment: usize, t: f64) -> Point {
        let (a, b) = self.segment(segment);
        a.lerp(b, t)
    }

    /// Interpolated lift at arc parameter `segment + t`.
    pub fn lift_at(&self, segment: usize, t: f64) -> Option<f64> {
        let lift = self.lift.as_ref()?;
        let n = lift.len();
        let (a, b) = (lift[segment % n], lift[(segment + 1) % n]);
        Some(a + (b - a) * t)
    }

    pub fn bbox(&self) -> Option<BBox> {
        BBox::of(self.vertices.iter().copied())
    }

    pub fn transformed(&self, map: &Affine) -> PlanarPolyline {
        PlanarPolyline {
            vertices: self.vertices.iter().map(|&p| map.apply(p)).collect(),
            lift: self.lift.clone(),
            closed: self.closed,
        }
    }

    pub fn reversed(&self) -> PlanarPolyline {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let lift = self.lift.clone().map(|mut l| {
            l.reverse();
            l
        });
        PlanarPolyline { vertices, lift, closed: self.closed }
    }

    /// Total tangent rotation of a closed polyline (a multiple of 2π).
    pub fn total_turning(&self) -> f64 {
        let n = self.segment_count();
        (0..n).map(|i| turn_angle(self.direction(i), self.direction((i + 1) % n))).sum()
    }
}

/// Shoelace signed area of a closed polyline; counterclockwise is positive.
pub fn signed_area(line: &PlanarPolyline) -> Result<f64> {
    if !line.closed {
        return Err(Error::InvalidPolyline("signed area is defined for closed polylines only".into()));
    }
    Ok(ring_area(&line.vertices))
}

/// Shoelace area of an implicitly closed vertex ring.
pub fn ring_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * acc
}

/// Winding number of a closed vertex ring around `p`.
pub fn winding_number(ring: &[Point], p: Point) -> i32 {
    let n = ring.len();
    let mut w = 0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && (b - a).cross(p - a) > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && (b - a).cross(p - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Signed turn from direction `a` to direction `b`, in (-π, π].
pub fn turn_angle(a: Point, b: Point) -> f64 {
    let t = a.cross(b).atan2(a.dot(b));
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Transversal intersection parameters of segments `p0→p1` and `q0→q1`.
pub(crate) enum SegmentHit {
    None,
    Proper { t: f64, u: f64 },
    Overlap,
}

pub(crate) fn intersect_segments(p0: Point, p1: Point, q0: Point, q1: Point) -> SegmentHit {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let denom = d1.cross(d2);
    let w = q0 - p0;
    let scale = d1.norm() * d2.norm();
    if denom.abs() <= 1e-14 * scale {
        // Parallel: only collinear overlap matters.
        if w.cross(d1).abs() > 1e-12 * d1.norm() * (w.norm() + d1.norm()) {
            return SegmentHit::None;
        }
        let len2 = d1.dot(d1);
        let s0 = w.dot(d1) / len2;
        let s1 = (q1 - p0).dot(d1) / len2;
        let (lo, hi) = if s0 < s1 { (s0, s1) } else { (s1, s0) };
        if hi > 1e-12 && lo < 1.0 - 1e-12 {
            return SegmentHit::Overlap;
        }
        return SegmentHit::None;
    }
    let t = w.cross(d2) / denom;
    let u = w.cross(d1) / denom;
    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
        SegmentHit::Proper { t, u }
    } else {
        SegmentHit::None
    }
}
