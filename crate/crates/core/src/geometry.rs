//! Planar geometry primitives shared across the crate: oriented rectangles,
//! axis-aligned rectangles, segment intersection, and angle helpers.
//!
//! All tests here are closed-boundary: touching counts as intersecting.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    // rem_euclid can land exactly on -pi via the subtraction above
    if w <= -std::f64::consts::PI {
        w += two_pi;
    }
    w
}

/// Rotate `v` by angle `theta`.
pub fn rotate(v: Vector2<f64>, theta: f64) -> Vector2<f64> {
    let (s, c) = theta.sin_cos();
    Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// A rectangle with arbitrary heading, used for vehicle footprints and goal
/// regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRectangle {
    pub center: [f64; 2],
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedRectangle {
    pub fn new(center: Vector2<f64>, heading: f64, length: f64, width: f64) -> Self {
        Self {
            center: [center.x, center.y],
            heading,
            length,
            width,
        }
    }

    pub fn center_vec(&self) -> Vector2<f64> {
        Vector2::new(self.center[0], self.center[1])
    }

    /// Corners in counter-clockwise order starting from the front-left.
    pub fn corners(&self) -> [Vector2<f64>; 4] {
        let c = self.center_vec();
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        [
            c + rotate(Vector2::new(hl, hw), self.heading),
            c + rotate(Vector2::new(-hl, hw), self.heading),
            c + rotate(Vector2::new(-hl, -hw), self.heading),
            c + rotate(Vector2::new(hl, -hw), self.heading),
        ]
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    /// Radius of the circumscribed circle, for cheap distance culling.
    pub fn bounding_radius(&self) -> f64 {
        0.5 * (self.length * self.length + self.width * self.width).sqrt()
    }

    /// Closed containment test (boundary points are inside).
    pub fn contains(&self, p: Vector2<f64>) -> bool {
        let local = rotate(p - self.center_vec(), -self.heading);
        local.x.abs() <= 0.5 * self.length && local.y.abs() <= 0.5 * self.width
    }

    /// The four edges as segments.
    pub fn edges(&self) -> [(Vector2<f64>, Vector2<f64>); 4] {
        let c = self.corners();
        [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]
    }

    /// Separating-axis overlap test against another oriented rectangle.
    /// Closed: rectangles sharing only an edge or corner still overlap.
    pub fn overlaps(&self, other: &OrientedRectangle) -> bool {
        // Cheap reject on bounding circles first.
        let d = (other.center_vec() - self.center_vec()).norm();
        if d > self.bounding_radius() + other.bounding_radius() {
            return false;
        }
        let ca = self.corners();
        let cb = other.corners();
        let axes = [
            rotate(Vector2::new(1.0, 0.0), self.heading),
            rotate(Vector2::new(0.0, 1.0), self.heading),
            rotate(Vector2::new(1.0, 0.0), other.heading),
            rotate(Vector2::new(0.0, 1.0), other.heading),
        ];
        for axis in axes {
            let (min_a, max_a) = project_onto(&ca, axis);
            let (min_b, max_b) = project_onto(&cb, axis);
            if min_a > max_b || min_b > max_a {
                return false;
            }
        }
        true
    }

    /// Whether the segment `(a, b)` touches this rectangle (closed).
    pub fn intersects_segment(&self, a: Vector2<f64>, b: Vector2<f64>) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        self.edges()
            .iter()
            .any(|&(p, q)| segments_intersect(a, b, p, q))
    }
}

fn project_onto(points: &[Vector2<f64>; 4], axis: Vector2<f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for p in points {
        let v = p.dot(&axis);
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Axis-aligned rectangle given by its corner intervals. Integration domains
/// for the bivariate-normal rectangle probability are expressed this way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedRect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl AlignedRect {
    pub fn from_center(center: Vector2<f64>, half_x: f64, half_y: f64) -> Self {
        Self {
            x0: center.x - half_x,
            x1: center.x + half_x,
            y0: center.y - half_y,
            y1: center.y + half_y,
        }
    }

    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, p: Vector2<f64>) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

fn orient(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Vector2<f64>, b: Vector2<f64>, p: Vector2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment-segment intersection, including collinear overlap.
pub fn segments_intersect(
    a: Vector2<f64>,
    b: Vector2<f64>,
    c: Vector2<f64>,
    d: Vector2<f64>,
) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, b, c))
        || (d2 == 0.0 && on_segment(a, b, d))
        || (d3 == 0.0 && on_segment(c, d, a))
        || (d4 == 0.0 && on_segment(c, d, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert_relative_eq!(wrap_angle(3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(0.5), 0.5);
        assert_relative_eq!(wrap_angle(-2.0 * PI), 0.0);
        for k in -5..=5 {
            let a = 0.7 + (k as f64) * 2.0 * PI;
            assert_relative_eq!(wrap_angle(a), 0.7, epsilon = 1e-9);
        }
    }

    #[test]
    fn corners_axis_aligned() {
        let r = OrientedRectangle::new(Vector2::new(0.0, 0.0), 0.0, 4.0, 2.0);
        let cs = r.corners();
        for c in cs {
            assert_relative_eq!(c.x.abs(), 2.0, epsilon = 1e-12);
            assert_relative_eq!(c.y.abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_and_separation() {
        let a = OrientedRectangle::new(Vector2::new(0.0, 0.0), 0.0, 4.0, 2.0);
        let b = OrientedRectangle::new(Vector2::new(3.0, 0.0), 0.0, 4.0, 2.0);
        assert!(a.overlaps(&b));
        let c = OrientedRectangle::new(Vector2::new(10.0, 0.0), 0.0, 4.0, 2.0);
        assert!(!a.overlaps(&c));
        // Rotated near-miss that a bounding-circle test would flag.
        let d = OrientedRectangle::new(Vector2::new(3.5, 2.0), PI / 4.0, 4.0, 0.5);
        assert!(!a.overlaps(&d));
    }

    #[test]
    fn overlap_touching_edge_counts() {
        let a = OrientedRectangle::new(Vector2::new(0.0, 0.0), 0.0, 4.0, 2.0);
        let b = OrientedRectangle::new(Vector2::new(4.0, 0.0), 0.0, 4.0, 2.0);
        assert!(a.overlaps(&b));
    }

    #[test]
    fn segment_rect_intersection() {
        let r = OrientedRectangle::new(Vector2::new(0.0, 0.0), 0.0, 2.0, 2.0);
        assert!(r.intersects_segment(Vector2::new(-5.0, 0.0), Vector2::new(5.0, 0.0)));
        assert!(r.intersects_segment(Vector2::new(0.0, 0.0), Vector2::new(5.0, 5.0)));
        assert!(!r.intersects_segment(Vector2::new(-5.0, 3.0), Vector2::new(5.0, 3.0)));
        // Tangent along the top edge: closed convention.
        assert!(r.intersects_segment(Vector2::new(-5.0, 1.0), Vector2::new(5.0, 1.0)));
    }

    #[test]
    fn segment_segment_cases() {
        let o = Vector2::new(0.0, 0.0);
        assert!(segments_intersect(
            o,
            Vector2::new(2.0, 2.0),
            Vector2::new(0.0, 2.0),
            Vector2::new(2.0, 0.0)
        ));
        assert!(!segments_intersect(
            o,
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(1.0, 1.0)
        ));
        // Collinear overlap.
        assert!(segments_intersect(
            o,
            Vector2::new(2.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(3.0, 0.0)
        ));
        // Shared endpoint.
        assert!(segments_intersect(
            o,
            Vector2::new(1.0, 1.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(2.0, 0.0)
        ));
    }

    #[test]
    fn rotation_preserves_area_and_radius() {
        for heading in [0.0, 0.3, 1.2, PI / 2.0, -2.5] {
            let r = OrientedRectangle::new(Vector2::new(1.0, -2.0), heading, 4.2, 1.7);
            assert_relative_eq!(r.area(), 4.2 * 1.7, epsilon = 1e-9);
            let cs = r.corners();
            for c in cs {
                assert_relative_eq!(
                    (c - r.center_vec()).norm(),
                    r.bounding_radius(),
                    epsilon = 1e-9
                );
            }
        }
    }
}
