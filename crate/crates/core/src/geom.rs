//! 2D geometric primitives shared by every planner stage.
//!
//! All coordinates are meters in a world frame with x east and y north.
//! Angles are radians, measured counterclockwise from the +x axis.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance used to merge coincident vertices and classify degeneracies.
pub const MERGE_EPS: f64 = 1e-9;

/// A 2D vector / point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing along `angle`.
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counterclockwise of `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector; returns zero for a (near-)zero input.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n < MERGE_EPS {
            Vec2::ZERO
        } else {
            self / n
        }
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Perpendicular vector, rotated +90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wrap an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r -= std::f64::consts::TAU;
    }
    r
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Corners in CCW order starting at the minimum corner.
    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }
}

/// A line segment between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Vec2 {
        self.a.lerp(self.b, 0.5)
    }

    pub fn point_at(&self, t: f64) -> Vec2 {
        self.a.lerp(self.b, t)
    }

    pub fn direction(&self) -> Vec2 {
        (self.b - self.a).normalized()
    }

    /// Parameter of the point on the segment closest to `p`, clamped to [0, 1].
    pub fn closest_param(&self, p: Vec2) -> f64 {
        let d = self.b - self.a;
        let len_sq = d.norm_sq();
        if len_sq < MERGE_EPS * MERGE_EPS {
            return 0.0;
        }
        ((p - self.a).dot(d) / len_sq).clamp(0.0, 1.0)
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        p.dist(self.point_at(self.closest_param(p)))
    }

    /// Positive when `p` lies left of the directed segment a->b.
    pub fn side_of(&self, p: Vec2) -> f64 {
        (self.b - self.a).cross(p - self.a)
    }

    /// True when the closed segments share at least one point.
    pub fn intersects(&self, other: &Segment) -> bool {
        segments_intersect(self.a, self.b, other.a, other.b)
    }

    pub fn distance_to_segment(&self, other: &Segment) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        let d1 = self.distance_to_point(other.a);
        let d2 = self.distance_to_point(other.b);
        let d3 = other.distance_to_point(self.a);
        let d4 = other.distance_to_point(self.b);
        d1.min(d2).min(d3).min(d4)
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.b, self.a)
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - MERGE_EPS
        && p.x <= a.x.max(b.x) + MERGE_EPS
        && p.y >= a.y.min(b.y) - MERGE_EPS
        && p.y <= a.y.max(b.y) + MERGE_EPS
}

/// Closed-segment intersection test, including touching endpoints and
/// collinear overlap.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1.abs() <= MERGE_EPS && on_segment(q1, q2, p1))
        || (d2.abs() <= MERGE_EPS && on_segment(q1, q2, p2))
        || (d3.abs() <= MERGE_EPS && on_segment(p1, p2, q1))
        || (d4.abs() <= MERGE_EPS && on_segment(p1, p2, q2))
}

/// Proper (interior-crossing) intersection of two open segments. Touching at
/// endpoints does not count.
pub fn segments_cross_properly(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > MERGE_EPS && d2 < -MERGE_EPS) || (d1 < -MERGE_EPS && d2 > MERGE_EPS))
        && ((d3 > MERGE_EPS && d4 < -MERGE_EPS) || (d3 < -MERGE_EPS && d4 > MERGE_EPS))
}

/// A simple polygon. The public constructors keep vertices in CCW order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    verts: Vec<Vec2>,
}

impl Polygon {
    /// Build a polygon, reorienting to CCW if needed. Does not validate
    /// simplicity; call [`Polygon::is_simple`] for that.
    pub fn new(mut verts: Vec<Vec2>) -> Self {
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        Polygon { verts }
    }

    pub fn rectangle(min: Vec2, max: Vec2) -> Self {
        Polygon::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.verts.len();
        (0..n).map(move |i| Segment::new(self.verts[i], self.verts[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.verts).abs()
    }

    /// Area-weighted centroid.
    pub fn centroid(&self) -> Vec2 {
        let n = self.verts.len();
        let a = signed_area(&self.verts);
        if a.abs() < MERGE_EPS {
            // Degenerate: fall back to the vertex mean.
            let sum = self.verts.iter().fold(Vec2::ZERO, |acc, &v| acc + v);
            return sum / n.max(1) as f64;
        }
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = self.verts[i];
            let q = self.verts[(i + 1) % n];
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Vec2::new(cx, cy) / (6.0 * a)
    }

    /// Simplicity check: no two non-adjacent edges intersect, and adjacent
    /// edges meet only at their shared vertex.
    pub fn is_simple(&self) -> bool {
        let n = self.verts.len();
        if n < 3 {
            return false;
        }
        // Reject repeated vertices.
        for i in 0..n {
            for j in (i + 1)..n {
                if self.verts[i].dist(self.verts[j]) < MERGE_EPS {
                    return false;
                }
            }
        }
        for i in 0..n {
            let e1 = Segment::new(self.verts[i], self.verts[(i + 1) % n]);
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let e2 = Segment::new(self.verts[j], self.verts[(j + 1) % n]);
                if adjacent {
                    if segments_cross_properly(e1.a, e1.b, e2.a, e2.b) {
                        return false;
                    }
                } else if e1.intersects(&e2) {
                    return false;
                }
            }
        }
        true
    }

    /// True when `p` lies strictly inside the polygon (boundary excluded).
    pub fn contains_strict(&self, p: Vec2) -> bool {
        if self.on_boundary(p, MERGE_EPS) {
            return false;
        }
        self.winding_contains(p)
    }

    /// True when `p` lies inside or on the boundary.
    pub fn contains_inclusive(&self, p: Vec2) -> bool {
        self.on_boundary(p, MERGE_EPS) || self.winding_contains(p)
    }

    pub fn on_boundary(&self, p: Vec2, tol: f64) -> bool {
        self.edges().any(|e| e.distance_to_point(p) <= tol)
    }

    fn winding_contains(&self, p: Vec2) -> bool {
        // Even-odd ray cast toward +x with vertex-crossing handling.
        let n = self.verts.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                let x = a.x + t * (b.x - a.x);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|e| e.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed distance: negative inside, positive outside, zero on boundary.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let d = self.boundary_distance(p);
        if self.winding_contains(p) {
            -d
        } else {
            d
        }
    }

    /// Minimum boundary distance from a segment, zero if the segment touches
    /// or enters the polygon.
    pub fn distance_to_segment(&self, s: &Segment) -> f64 {
        if self.contains_inclusive(s.a) || self.contains_inclusive(s.b) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for e in self.edges() {
            if e.intersects(s) {
                return 0.0;
            }
            best = best.min(e.distance_to_segment(s));
        }
        best
    }
}

/// Shoelace signed area; positive for CCW order.
pub fn signed_area(verts: &[Vec2]) -> f64 {
    let n = verts.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += verts[i].cross(verts[(i + 1) % n]);
    }
    acc * 0.5
}

/// Area of a triangle given by three points.
pub fn triangle_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * orient(a, b, c).abs()
}

/// Boundary-inclusive point-in-triangle test.
pub fn point_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    let has_neg = d1 < -MERGE_EPS || d2 < -MERGE_EPS || d3 < -MERGE_EPS;
    let has_pos = d1 > MERGE_EPS || d2 > MERGE_EPS || d3 > MERGE_EPS;
    !(has_neg && has_pos)
}

/// Inradius of a triangle: area / semiperimeter.
pub fn triangle_inradius(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let s = 0.5 * (a.dist(b) + b.dist(c) + c.dist(a));
    if s < MERGE_EPS {
        0.0
    } else {
        triangle_area(a, b, c) / s
    }
}

/// Total length of a polyline.
pub fn polyline_length(pts: &[Vec2]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point at arc length `s` along a polyline, clamped to its ends. Also
/// returns the unit tangent of the containing segment (the outgoing segment
/// when `s` falls exactly on an interior vertex).
pub fn point_at_arclength(pts: &[Vec2], s: f64) -> (Vec2, Vec2) {
    assert!(pts.len() >= 2, "polyline needs at least two points");
    let mut remaining = s.max(0.0);
    for w in pts.windows(2) {
        let len = w[0].dist(w[1]);
        if remaining < len || len <= 0.0 {
            if len <= 0.0 {
                continue;
            }
            let dir = (w[1] - w[0]) / len;
            return (w[0] + dir * remaining, dir);
        }
        remaining -= len;
    }
    let n = pts.len();
    let dir = (pts[n - 1] - pts[n - 2]).normalized();
    (pts[n - 1], dir)
}
