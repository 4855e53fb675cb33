//! Exact polygonal domains with holes and zero-width slits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, LoopKind, Result};
use crate::geometry::{
    crossings, loop_length, loop_segments, polyline_length, polyline_segments, segments_intersect, signed_area, Point,
    Segment,
};

/// A bounded open planar set described by polygonal loops.
///
/// The set is the even-odd interior of `outer_loops` and `hole_loops`,
/// minus the zero-width `slits`. Construction validates the geometry and
/// normalizes orientation (outer loops counterclockwise, holes clockwise).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDomain {
    outer_loops: Vec<Vec<Point>>,
    hole_loops: Vec<Vec<Point>>,
    slits: Vec<Vec<Point>>,
}

/// On-disk representation, `{ "outer": [...], "holes": [...], "slits": [...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub outer: Vec<Vec<Point>>,
    #[serde(default)]
    pub holes: Vec<Vec<Point>>,
    #[serde(default)]
    pub slits: Vec<Vec<Point>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub area: f64,
    pub perimeter: f64,
    pub boundary_h1: f64,
    pub slit_length: f64,
    pub pk_lower: f64,
    pub pk_upper: f64,
}

impl MeasureReport {
    /// `P + 2·slit_length`, the limit perimeter of interior parallel sets.
    pub fn relaxed_perimeter(&self) -> f64 {
        self.perimeter + 2.0 * self.slit_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }
    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }
    pub fn inflated(&self, by: f64) -> BoundingBox {
        BoundingBox {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }
}

fn bbox_of(points: impl IntoIterator<Item = Point>) -> BoundingBox {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    BoundingBox { min, max }
}

fn invalid(kind: LoopKind, index: usize, reason: impl Into<String>) -> Error {
    Error::InvalidGeometry {
        kind,
        index,
        reason: reason.into(),
    }
}

fn strip_closing_vertex(mut ring: Vec<Point>) -> Vec<Point> {
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

fn boxes_overlap(s: &Segment, t: &Segment) -> bool {
    s.min_x() <= t.max_x() && t.min_x() <= s.max_x() && s.min_y() <= t.max_y() && t.min_y() <= s.max_y()
}

/// Checks that a closed loop has no self-intersections.
fn check_simple_loop(ring: &[Point]) -> std::result::Result<(), String> {
    let n = ring.len();
    let segs: Vec<Segment> = loop_segments(ring).collect();
    for (i, s) in segs.iter().enumerate() {
        if s.length() == 0.0 {
            return Err(format!("repeated vertex at position {i}"));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (s, t) = (&segs[i], &segs[j]);
            if !boxes_overlap(s, t) {
                continue;
            }
            if adjacent {
                // Adjacent edges share one vertex; they must not fold back onto each other.
                let (shared, far_s, far_t) = if j == i + 1 { (s.b, s.a, t.b) } else { (s.a, s.b, t.a) };
                if crate::geometry::orient(far_s, shared, far_t) == 0.0
                    && ((far_t.x - shared.x) * (far_s.x - shared.x) + (far_t.y - shared.y) * (far_s.y - shared.y)) > 0.0
                {
                    return Err(format!("edges {i} and {j} overlap"));
                }
            } else if segments_intersect(s, t) {
                return Err(format!("edges {i} and {j} intersect"));
            }
        }
    }
    Ok(())
}

impl PlanarDomain {
    /// Builds and validates a domain. Loops may be given in either orientation
    /// and with or without a repeated closing vertex.
    pub fn new(outer_loops: Vec<Vec<Point>>, hole_loops: Vec<Vec<Point>>, slits: Vec<Vec<Point>>) -> Result<Self> {
        if outer_loops.is_empty() {
            return Err(Error::InvalidParameter("domain needs at least one outer loop".into()));
        }
        let mut outer: Vec<Vec<Point>> = outer_loops.into_iter().map(strip_closing_vertex).collect();
        let mut holes: Vec<Vec<Point>> = hole_loops.into_iter().map(strip_closing_vertex).collect();

        for (kind, loops) in [(LoopKind::Outer, &mut outer), (LoopKind::Hole, &mut holes)] {
            for (i, ring) in loops.iter_mut().enumerate() {
                if ring.len() < 3 {
                    return Err(invalid(kind, i, "fewer than three vertices"));
                }
                if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                    return Err(invalid(kind, i, "non-finite coordinate"));
                }
                check_simple_loop(ring).map_err(|r| invalid(kind, i, r))?;
                let a = signed_area(ring);
                if a == 0.0 {
                    return Err(invalid(kind, i, "zero enclosed area"));
                }
                let want_ccw = kind == LoopKind::Outer;
                if (a > 0.0) != want_ccw {
                    ring.reverse();
                }
            }
        }

        // Pairwise disjointness of loops.
        let tagged: Vec<(LoopKind, usize, &Vec<Point>)> = outer
            .iter()
            .enumerate()
            .map(|(i, r)| (LoopKind::Outer, i, r))
            .chain(holes.iter().enumerate().map(|(i, r)| (LoopKind::Hole, i, r)))
            .collect();
        for a in 0..tagged.len() {
            for b in (a + 1)..tagged.len() {
                let (kb, ib, rb) = tagged[b];
                for s in loop_segments(tagged[a].2) {
                    for t in loop_segments(rb) {
                        if boxes_overlap(&s, &t) && segments_intersect(&s, &t) {
                            return Err(invalid(kb, ib, format!("intersects {} {}", tagged[a].0, tagged[a].1)));
                        }
                    }
                }
            }
        }

        // Nesting by even-odd parity of the remaining loops.
        for (idx, &(kind, i, ring)) in tagged.iter().enumerate() {
            let probe = ring[0];
            let parity: usize = tagged
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .map(|(_, (_, _, r))| crossings(r, probe))
                .sum();
            match kind {
                LoopKind::Hole if parity.is_multiple_of(2) => {
                    return Err(invalid(kind, i, "hole lies outside every outer loop"))
                }
                LoopKind::Outer if parity % 2 == 1 => {
                    return Err(invalid(kind, i, "outer loop lies inside the region of another loop"))
                }
                _ => {}
            }
        }

        let domain = Self {
            outer_loops: outer,
            hole_loops: holes,
            slits: Vec::new(),
        };
        let slits = slits.into_iter().collect::<Vec<_>>();
        domain.check_slits(&slits)?;
        Ok(Self { slits, ..domain })
    }

    fn check_slits(&self, slits: &[Vec<Point>]) -> Result<()> {
        let loop_segs: Vec<Segment> = self.loops().flat_map(|r| loop_segments(r)).collect();
        let tol = 1e-12 * self.bbox().width().max(self.bbox().height());
        for (i, slit) in slits.iter().enumerate() {
            if slit.len() < 2 {
                return Err(invalid(LoopKind::Slit, i, "fewer than two vertices"));
            }
            let segs: Vec<Segment> = polyline_segments(slit).collect();
            if segs.iter().any(|s| s.length() == 0.0) {
                return Err(invalid(LoopKind::Slit, i, "zero-length segment"));
            }
            for a in 0..segs.len() {
                for b in (a + 2)..segs.len() {
                    if segments_intersect(&segs[a], &segs[b]) {
                        return Err(invalid(LoopKind::Slit, i, "self-intersecting polyline"));
                    }
                }
            }
            let first = slit[0];
            let last = *slit.last().unwrap();
            for (si, s) in segs.iter().enumerate() {
                let mid = Point::new(0.5 * (s.a.x + s.b.x), 0.5 * (s.a.y + s.b.y));
                if !self.contains(mid) {
                    return Err(invalid(LoopKind::Slit, i, format!("segment {si} leaves the domain")));
                }
                for e in &loop_segs {
                    if !boxes_overlap(s, e) || !segments_intersect(s, e) {
                        continue;
                    }
                    let touches_first = si == 0 && e.dist_to(first) <= tol;
                    let touches_last = si + 1 == segs.len() && e.dist_to(last) <= tol;
                    let interior_hit = if touches_first || touches_last {
                        // the far end must stay off this edge
                        let other = if touches_first { s.b } else { s.a };
                        e.dist_to(other) <= tol
                    } else {
                        true
                    };
                    if interior_hit {
                        return Err(invalid(
                            LoopKind::Slit,
                            i,
                            "crosses a boundary loop away from its endpoints",
                        ));
                    }
                }
            }
            for (j, other) in slits.iter().enumerate().take(i) {
                for s in &segs {
                    for t in polyline_segments(other) {
                        if segments_intersect(s, &t) {
                            return Err(invalid(LoopKind::Slit, i, format!("intersects slit {j}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_file(file: DomainFile) -> Result<Self> {
        Self::new(file.outer, file.holes, file.slits)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> DomainFile {
        DomainFile {
            outer: self.outer_loops.clone(),
            holes: self.hole_loops.clone(),
            slits: self.slits.clone(),
        }
    }

    pub fn outer_loops(&self) -> &[Vec<Point>] {
        &self.outer_loops
    }

    pub fn hole_loops(&self) -> &[Vec<Point>] {
        &self.hole_loops
    }

    pub fn slits(&self) -> &[Vec<Point>] {
        &self.slits
    }

    pub fn hole_count(&self) -> usize {
        self.hole_loops.len()
    }

    pub fn loops(&self) -> impl Iterator<Item = &Vec<Point>> {
        self.outer_loops.iter().chain(self.hole_loops.iter())
    }

    /// Every loop edge followed by every slit segment.
    pub fn boundary_segments(&self) -> Vec<Segment> {
        self.loops()
            .flat_map(|r| loop_segments(r))
            .chain(self.slits.iter().flat_map(|s| polyline_segments(s)))
            .collect()
    }

    pub fn slit_segments(&self) -> Vec<Segment> {
        self.slits.iter().flat_map(|s| polyline_segments(s)).collect()
    }

    /// Even-odd membership of the polygon-with-holes (slits ignored, edges outside).
    pub fn contains(&self, p: Point) -> bool {
        let mut parity = 0;
        for ring in self.loops() {
            for s in loop_segments(ring) {
                if s.dist2_to(p) == 0.0 {
                    return false;
                }
            }
            parity += crossings(ring, p);
        }
        parity % 2 == 1
    }

    pub fn measure(&self) -> MeasureReport {
        let area: f64 = self.loops().map(|r| signed_area(r)).sum();
        let perimeter: f64 = self.loops().map(|r| loop_length(r)).sum();
        let slit_length = self.slits.iter().fold(0.0, |acc, s| acc + polyline_length(s));
        let boundary_h1 = perimeter + slit_length;
        MeasureReport {
            area,
            perimeter,
            boundary_h1,
            slit_length,
            pk_lower: boundary_h1,
            pk_upper: perimeter + 2.0 * slit_length,
        }
    }

    pub fn bbox(&self) -> BoundingBox {
        bbox_of(self.outer_loops.iter().flatten().copied())
    }

    /// Largest distance between two outer-loop vertices.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point> = self.outer_loops.iter().flatten().copied().collect();
        let mut best = 0.0f64;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                best = best.max(p.dist(*q));
            }
        }
        best
    }

    pub fn scaled(&self, t: f64) -> Self {
        let map = |v: &Vec<Vec<Point>>| -> Vec<Vec<Point>> {
            v.iter().map(|r| r.iter().map(|p| p.scaled(t)).collect()).collect()
        };
        Self {
            outer_loops: map(&self.outer_loops),
            hole_loops: map(&self.hole_loops),
            slits: map(&self.slits),
        }
    }

    pub fn translated(&self, by: Point) -> Self {
        let map = |v: &Vec<Vec<Point>>| -> Vec<Vec<Point>> {
            v.iter().map(|r| r.iter().map(|p| *p + by).collect()).collect()
        };
        Self {
            outer_loops: map(&self.outer_loops),
            hole_loops: map(&self.hole_loops),
            slits: map(&self.slits),
        }
    }

    /// Narrowest clearance a raster must resolve: loop-to-loop, slit-to-loop,
    /// slit-to-slit and necks within a single loop, capped by the smallest
    /// loop extent.
    pub fn feature_clearance(&self) -> f64 {
        let mut clearance = f64::INFINITY;
        let loops: Vec<&Vec<Point>> = self.loops().collect();
        for ring in &loops {
            let b = bbox_of(ring.iter().copied());
            clearance = clearance.min(b.width().min(b.height()));
            clearance = clearance.min(self_clearance(ring));
        }
        for a in 0..loops.len() {
            for b in (a + 1)..loops.len() {
                for s in loop_segments(loops[a]) {
                    for t in loop_segments(loops[b]) {
                        clearance = clearance.min(s.dist_to_segment(&t));
                    }
                }
            }
        }
        let tol = 1e-12 * self.bbox().width().max(self.bbox().height());
        for (i, slit) in self.slits.iter().enumerate() {
            let segs: Vec<Segment> = polyline_segments(slit).collect();
            for ring in &loops {
                let touched =
                    loop_segments(ring).any(|e| e.dist_to(slit[0]) <= tol || e.dist_to(*slit.last().unwrap()) <= tol);
                if touched {
                    continue;
                }
                for s in &segs {
                    for e in loop_segments(ring) {
                        clearance = clearance.min(s.dist_to_segment(&e));
                    }
                }
            }
            for other in &self.slits[..i] {
                for s in &segs {
                    for t in polyline_segments(other) {
                        clearance = clearance.min(s.dist_to_segment(&t));
                    }
                }
            }
        }
        clearance
    }
}

/// Smallest distance between two edges of a loop whose connecting boundary
/// arc is much longer than the gap (a neck or corridor).
fn self_clearance(ring: &[Point]) -> f64 {
    let segs: Vec<Segment> = loop_segments(ring).collect();
    let n = segs.len();
    let mut arc = Vec::with_capacity(n + 1);
    arc.push(0.0);
    for s in &segs {
        arc.push(arc.last().unwrap() + s.length());
    }
    let total = arc[n];
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let d = segs[i].dist_to_segment(&segs[j]);
            if d >= best {
                continue;
            }
            let along = arc[j] - arc[i + 1];
            let around = total - arc[j + 1] + arc[i];
            if along.min(around) > 3.0 * d {
                best = d;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(x0: f64, y0: f64, side: f64) -> Vec<Point> {
        vec![
            Point::new(x0, y0),
            Point::new(x0 + side, y0),
            Point::new(x0 + side, y0 + side),
            Point::new(x0, y0 + side),
        ]
    }

    fn ngon(r: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| Point::polar(r, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect()
    }

    #[test]
    fn unit_square_measures() {
        let d = PlanarDomain::new(vec![square(0.0, 0.0, 1.0)], vec![], vec![]).unwrap();
        let m = d.measure();
        assert_eq!(m.area, 1.0);
        assert_eq!(m.perimeter, 4.0);
        assert_eq!(m.boundary_h1, 4.0);
        assert_eq!(m.pk_lower, 4.0);
        assert_eq!(m.pk_upper, 4.0);
    }

    #[test]
    fn disc_with_radial_slit() {
        let slit = vec![Point::new(0.1, 0.0), Point::new(1.0, 0.0)];
        let d = PlanarDomain::new(vec![ngon(1.0, 256)], vec![], vec![slit]).unwrap();
        let m = d.measure();
        let tau = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(m.area, std::f64::consts::PI, max_relative = 2e-4);
        assert_relative_eq!(m.perimeter, tau, max_relative = 1e-4);
        assert_relative_eq!(m.slit_length, 0.9, epsilon = 1e-12);
        assert_relative_eq!(m.boundary_h1, m.perimeter + 0.9, epsilon = 1e-12);
        assert_relative_eq!(m.pk_lower, m.perimeter + 0.9, epsilon = 1e-12);
        assert_relative_eq!(m.pk_upper, m.perimeter + 1.8, epsilon = 1e-12);
    }

    #[test]
    fn orientation_is_normalized() {
        let mut cw = square(0.0, 0.0, 4.0);
        cw.reverse();
        let hole = square(1.0, 1.0, 1.0);
        let d = PlanarDomain::new(vec![cw], vec![hole], vec![]).unwrap();
        assert!(signed_area(&d.outer_loops()[0]) > 0.0);
        assert!(signed_area(&d.hole_loops()[0]) < 0.0);
        assert_eq!(d.measure().area, 15.0);
    }

    #[test]
    fn rejects_bow_tie() {
        let bow = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let err = PlanarDomain::new(vec![bow], vec![], vec![]).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidGeometry {
                kind: LoopKind::Outer,
                index: 0,
                ..
            }
        ));
    }

    #[test]
    fn rejects_hole_outside() {
        let err = PlanarDomain::new(vec![square(0.0, 0.0, 1.0)], vec![square(3.0, 3.0, 1.0)], vec![]).unwrap_err();
        assert!(
            matches!(
                err,
                Error::InvalidGeometry {
                    kind: LoopKind::Hole,
                    index: 0,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn rejects_crossing_slit() {
        let slit = vec![Point::new(0.5, 0.5), Point::new(2.0, 0.5)];
        let err = PlanarDomain::new(vec![square(0.0, 0.0, 1.0)], vec![], vec![slit]).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidGeometry {
                kind: LoopKind::Slit,
                ..
            }
        ));
    }

    #[test]
    fn json_roundtrip_and_field_errors() {
        let text = r#"{"outer": [[[0,0],[1,0],[1,1],[0,1]]], "slits": [[[0.25,0.5],[0.75,0.5]]]}"#;
        let d = PlanarDomain::from_json(text).unwrap();
        assert_eq!(d.slits().len(), 1);
        let back = serde_json::to_string(&d.to_file()).unwrap();
        assert_eq!(PlanarDomain::from_json(&back).unwrap(), d);
        let err = PlanarDomain::from_json(r#"{"holes": []}"#).unwrap_err();
        assert!(err.to_string().contains("outer"), "{err}");
    }

    #[test]
    fn clearance_sees_necks_and_loop_gaps() {
        let d = PlanarDomain::new(vec![square(0.0, 0.0, 4.0)], vec![square(1.0, 1.0, 1.0)], vec![]).unwrap();
        assert_relative_eq!(d.feature_clearance(), 1.0);
        let corridor = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 0.45),
            Point::new(2.0, 0.45),
            Point::new(2.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 1.0),
            Point::new(2.0, 1.0),
            Point::new(2.0, 0.55),
            Point::new(1.0, 0.55),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let d = PlanarDomain::new(vec![corridor], vec![], vec![]).unwrap();
        assert_relative_eq!(d.feature_clearance(), 0.1, epsilon = 1e-12);
        let disc = PlanarDomain::new(vec![ngon(1.0, 512)], vec![], vec![]).unwrap();
        assert!(disc.feature_clearance() > 1.9);
    }

    #[test]
    fn measures_scale() {
        let d = PlanarDomain::new(
            vec![ngon(1.0, 64)],
            vec![ngon(0.4, 32)],
            vec![vec![Point::new(0.5, 0.0), Point::new(0.9, 0.0)]],
        )
        .unwrap();
        let m = d.measure();
        for t in [0.5, 2.0, 3.0] {
            let s = d.scaled(t).measure();
            assert_relative_eq!(s.area, m.area * t * t, max_relative = 1e-12);
            assert_relative_eq!(s.perimeter, m.perimeter * t, max_relative = 1e-12);
            assert_relative_eq!(s.boundary_h1, m.boundary_h1 * t, max_relative = 1e-12);
        }
    }
}
