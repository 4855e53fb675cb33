//! Planar primitives shared by the domain, raster and distance modules.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scaled(self, t: f64) -> Self {
        Self::new(self.x * t, self.y * t)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self::new(x, y)
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Closed straight segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn dist_to(&self, p: Point) -> f64 {
        self.dist2_to(p).sqrt()
    }

    pub fn dist2_to(&self, p: Point) -> f64 {
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let len2 = dx * dx + dy * dy;
        let (px, py) = (p.x - self.a.x, p.y - self.a.y);
        let s = if len2 > 0.0 {
            ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let ex = px - s * dx;
        let ey = py - s * dy;
        ex * ex + ey * ey
    }

    pub fn min_x(&self) -> f64 {
        self.a.x.min(self.b.x)
    }
    pub fn max_x(&self) -> f64 {
        self.a.x.max(self.b.x)
    }
    pub fn min_y(&self) -> f64 {
        self.a.y.min(self.b.y)
    }
    pub fn max_y(&self) -> f64 {
        self.a.y.max(self.b.y)
    }

    /// Distance between two segments (zero when they intersect).
    pub fn dist_to_segment(&self, other: &Segment) -> f64 {
        if segments_intersect(self, other) {
            return 0.0;
        }
        self.dist_to(other.a)
            .min(self.dist_to(other.b))
            .min(other.dist_to(self.a))
            .min(other.dist_to(self.b))
    }
}

/// Twice the signed area of the triangle (a, b, c).
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection, including touching and collinear overlap.
pub fn segments_intersect(s: &Segment, t: &Segment) -> bool {
    let d1 = orient(t.a, t.b, s.a);
    let d2 = orient(t.a, t.b, s.b);
    let d3 = orient(s.a, s.b, t.a);
    let d4 = orient(s.a, s.b, t.b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(t.a, t.b, s.a))
        || (d2 == 0.0 && on_segment(t.a, t.b, s.b))
        || (d3 == 0.0 && on_segment(s.a, s.b, t.a))
        || (d4 == 0.0 && on_segment(s.a, s.b, t.b))
}

/// Signed shoelace area of a closed loop (positive when counterclockwise).
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

pub fn loop_length(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].dist(ring[(i + 1) % n])).sum()
}

pub fn polyline_length(line: &[Point]) -> f64 {
    line.windows(2).map(|w| w[0].dist(w[1])).sum()
}

pub fn loop_segments(ring: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    let n = ring.len();
    (0..n).map(move |i| Segment::new(ring[i], ring[(i + 1) % n]))
}

pub fn polyline_segments(line: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    line.windows(2).map(|w| Segment::new(w[0], w[1]))
}

/// Even-odd crossing count of a horizontal ray from `p` towards +x.
pub fn crossings(ring: &[Point], p: Point) -> usize {
    let n = ring.len();
    let mut count = 0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_and_intersection() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(s.dist_to(Point::new(0.5, 2.0)), 2.0);
        assert_eq!(s.dist_to(Point::new(-3.0, 4.0)), 5.0);
        let t = Segment::new(Point::new(0.5, -1.0), Point::new(0.5, 1.0));
        assert!(segments_intersect(&s, &t));
        let touching = Segment::new(Point::new(1.0, 0.0), Point::new(2.0, 3.0));
        assert!(segments_intersect(&s, &touching));
        let apart = Segment::new(Point::new(0.0, 1.0), Point::new(1.0, 1.0));
        assert!(!segments_intersect(&s, &apart));
        assert_eq!(s.dist_to_segment(&apart), 1.0);
    }

    #[test]
    fn shoelace_orientation() {
        let ccw = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(signed_area(&ccw), 2.0);
        let cw: Vec<_> = ccw.iter().rev().copied().collect();
        assert_eq!(signed_area(&cw), -2.0);
        assert_eq!(loop_length(&ccw), 6.0);
        assert_eq!(crossings(&ccw, Point::new(1.0, 0.5)), 1);
        assert_eq!(crossings(&ccw, Point::new(3.0, 0.5)), 0);
    }
}
