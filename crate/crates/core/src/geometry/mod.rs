//! Planar primitives: points, segments, simple polygons and rigid motions.
//!
//! Everything is expressed in meters in a right-handed frame with the y axis
//! pointing up. Polygons are always stored counter-clockwise.

mod clip;
mod hull;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use clip::polygon_overlap_area;
pub use hull::{convex_hull, hull_diameter, hull_longest_distance};

/// Tolerance for treating two points as identical (m).
pub const POINT_EPS: f64 = 1e-9;
/// Areas below this are degenerate (m²).
pub const AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point2) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new((self.x + o.x) * 0.5, (self.y + o.y) * 0.5)
    }

    /// Lexicographic (x, then y) ordering.
    pub fn lex_cmp(&self, o: &Point2) -> std::cmp::Ordering {
        self.x.total_cmp(&o.x).then(self.y.total_cmp(&o.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A segment with distinct endpoints. Direction (a -> b) is kept but most
/// consumers treat it as undirected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGeometry("non-finite segment endpoint".into()));
        }
        if a.dist(b) <= POINT_EPS {
            return Err(Error::InvalidGeometry("segment endpoints coincide".into()));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        self.a.midpoint(self.b)
    }

    /// Direction angle of a -> b in (−π, π].
    pub fn angle(&self) -> f64 {
        let d = self.b - self.a;
        normalize_angle(d.y.atan2(d.x))
    }
}

/// Simple polygon, implicitly closed, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
}

impl Polygon2 {
    /// Builds a polygon, reorienting it counter-clockwise when needed.
    ///
    /// Simplicity is not checked here (it is quadratic); see [`Polygon2::is_simple`].
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite polygon vertex".into()));
        }
        let mut poly = Self { vertices };
        if poly.signed_area() < 0.0 {
            poly.vertices.reverse();
        }
        Ok(poly)
    }

    /// Wraps vertices already known to be CCW.
    pub(crate) fn from_ccw(vertices: Vec<Point2>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area, positive for CCW.
    pub fn signed_area(&self) -> f64 {
        let twice: f64 = self.edges().map(|(a, b)| a.cross(b)).sum();
        twice * 0.5
    }

    /// Axis-aligned bounds as (min, max).
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Area-weighted centroid. Falls back to the vertex mean for degenerate input.
    pub fn centroid(&self) -> Point2 {
        let a = self.signed_area();
        if a.abs() < AREA_EPS {
            let n = self.vertices.len() as f64;
            let s = self.vertices.iter().fold(Point2::default(), |acc, &p| acc + p);
            return s * (1.0 / n);
        }
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    /// Non-zero winding containment. Boundary points may go either way.
    pub fn contains(&self, p: Point2) -> bool {
        winding_number(&self.vertices, p) != 0
    }

    /// Distance from `p` to the nearest boundary point.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when no two non-adjacent edges touch and adjacent edges only share
    /// their common vertex.
    pub fn is_simple(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let (a0, a1) = (v[i], v[(i + 1) % n]);
            if a0.dist(a1) <= POINT_EPS {
                return false;
            }
            for j in (i + 1)..n {
                let (b0, b1) = (v[j], v[(j + 1) % n]);
                let adjacent_next = j == i + 1;
                let adjacent_prev = i == 0 && j == n - 1;
                if adjacent_next || adjacent_prev {
                    // Only reject folding back onto the neighbour.
                    let (shared, other_a, other_b) = if adjacent_next { (a1, a0, b1) } else { (a0, a1, b0) };
                    let da = other_a - shared;
                    let db = other_b - shared;
                    if da.cross(db).abs() <= POINT_EPS * da.norm() * db.norm() && da.dot(db) > 0.0 {
                        return false;
                    }
                    continue;
                }
                if segments_touch(a0, a1, b0, b1) {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn winding_number(vertices: &[Point2], p: Point2) -> i32 {
    let n = vertices.len();
    let mut wn = 0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let side = (b - a).cross(p - a);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    point_segment_distance(p, a, b) <= POINT_EPS
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_touch(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(b0, b1, a0) || on_segment(b0, b1, a1) || on_segment(a0, a1, b0) || on_segment(a0, a1, b1)
}

/// Positive shoelace area of a polygon.
pub fn polygon_area(p: &Polygon2) -> Result<f64> {
    let a = p.signed_area().abs();
    if a < AREA_EPS {
        return Err(Error::DegeneratePolygon(format!("area {a:e} m² below tolerance")));
    }
    Ok(a)
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Unsigned angular distance on the circle, in [0, π].
pub fn angle_distance(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

/// Rotation by `theta` followed by translation `t`: x ↦ R(θ)·x + t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform2D {
    pub theta: f64,
    pub t: Point2,
}

impl Default for RigidTransform2D {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform2D {
    pub fn new(theta: f64, t: Point2) -> Self {
        Self {
            theta: normalize_angle(theta),
            t,
        }
    }

    pub const fn identity() -> Self {
        Self {
            theta: 0.0,
            t: Point2::new(0.0, 0.0),
        }
    }

    pub fn rotate(&self, p: Point2) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        self.rotate(p) + self.t
    }

    pub fn inverse(&self) -> Self {
        let inv = Self {
            theta: normalize_angle(-self.theta),
            t: Point2::default(),
        };
        let t = -inv.rotate(self.t);
        Self { theta: inv.theta, t }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform2D) -> Self {
        Self::new(self.theta + other.theta, self.rotate(other.t) + self.t)
    }
}

/// Geometry that can be moved by a rigid transform.
pub trait RigidMotion {
    fn transformed(&self, t: &RigidTransform2D) -> Self;
}

impl RigidMotion for Point2 {
    fn transformed(&self, t: &RigidTransform2D) -> Self {
        t.apply(*self)
    }
}

impl RigidMotion for Segment2 {
    fn transformed(&self, t: &RigidTransform2D) -> Self {
        Segment2 {
            a: t.apply(self.a),
            b: t.apply(self.b),
        }
    }
}

impl RigidMotion for Polygon2 {
    fn transformed(&self, t: &RigidTransform2D) -> Self {
        // Rotations preserve orientation, so CCW order survives.
        Polygon2::from_ccw(self.vertices.iter().map(|&p| t.apply(p)).collect())
    }
}

pub fn apply_rigid<G: RigidMotion>(t: &RigidTransform2D, g: &G) -> G {
    g.transformed(t)
}

/// The two rotations aligning undirected segment A with segment B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentRotation {
    /// Rotation taking A's a->b direction onto B's a->b direction.
    pub theta: f64,
    /// `theta` + π, wrapped.
    pub flipped: f64,
}

impl SegmentRotation {
    pub fn candidates(&self) -> [f64; 2] {
        [self.theta, self.flipped]
    }
}

pub fn rotation_between_segments(sa: &Segment2, sb: &Segment2) -> SegmentRotation {
    let theta = normalize_angle(sb.angle() - sa.angle());
    SegmentRotation {
        theta,
        flipped: normalize_angle(theta + PI),
    }
}

/// Rigid transform rotating by `theta` about `pa` and then moving `pa` onto `pb`.
pub fn transform_from_match(theta: f64, pa: Point2, pb: Point2) -> RigidTransform2D {
    let rot = RigidTransform2D::new(theta, Point2::default());
    let t = pb - rot.rotate(pa);
    RigidTransform2D { theta: rot.theta, t }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> Polygon2 {
        Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn area_of_unit_square_and_triangle() {
        assert_eq!(polygon_area(&sq()).unwrap(), 1.0);
        let tri = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        assert_eq!(polygon_area(&tri).unwrap(), 6.0);
    }

    #[test]
    fn collinear_polygon_is_degenerate() {
        let p = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 2.0),
        ])
        .unwrap();
        assert!(matches!(polygon_area(&p), Err(Error::DegeneratePolygon(_))));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.signed_area() > 0.0);
    }

    #[test]
    fn too_few_vertices_rejected() {
        assert!(Polygon2::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn simplicity() {
        assert!(sq().is_simple());
        let bowtie = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(!bowtie.is_simple());
    }

    #[test]
    fn identity_and_quarter_turn() {
        let p = Point2::new(1.0, 0.0);
        assert_eq!(apply_rigid(&RigidTransform2D::identity(), &p), p);
        let q = apply_rigid(&RigidTransform2D::new(PI / 2.0, Point2::default()), &p);
        assert!(q.dist(Point2::new(0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn inverse_round_trip() {
        let t = RigidTransform2D::new(1.2, Point2::new(-3.0, 7.5));
        let p = Point2::new(2.5, -1.25);
        let back = t.inverse().apply(t.apply(p));
        assert!(back.dist(p) < 1e-12);
        let c = t.compose(&t.inverse());
        assert!(c.theta.abs() < 1e-15 && c.t.norm() < 1e-12);
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5 - 4.0 * PI) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rotation_between_axis_segments() {
        let sx = Segment2::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)).unwrap();
        let sy = Segment2::new(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0)).unwrap();
        assert_eq!(rotation_between_segments(&sx, &sx).theta, 0.0);
        let r = rotation_between_segments(&sx, &sy);
        assert!((r.theta - PI / 2.0).abs() < 1e-15);
        assert!((r.flipped + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn transform_from_match_cases() {
        let p = Point2::new(1.5, -2.0);
        let t = transform_from_match(0.0, p, p);
        assert_eq!(t, RigidTransform2D::identity());
        let t = transform_from_match(0.0, Point2::default(), Point2::new(2.0, 3.0));
        assert_eq!(t.t, Point2::new(2.0, 3.0));
        assert_eq!(t.theta, 0.0);
    }

    #[test]
    fn identity_transform_is_bit_exact() {
        let p = Point2::new(0.1, 0.7);
        let t = transform_from_match(0.0, Point2::new(0.3, 0.9), Point2::new(0.3, 0.9));
        assert_eq!(t.apply(p), p);
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(Segment2::new(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn centroid_of_square() {
        assert!(sq().centroid().dist(Point2::new(0.5, 0.5)) < 1e-15);
    }
}
