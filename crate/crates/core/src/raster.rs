//! Uniform-grid discretization of domains and grid topology.

use serde::{Deserialize, Serialize};

use crate::domain::{BoundingBox, PlanarDomain};
use crate::error::{Error, Result};
use crate::geometry::{segments_intersect, Point, Segment};

/// Default number of empty cells kept around the domain on each side.
pub const DEFAULT_MARGIN: usize = 4;

/// Nodes sit at integer multiples of `h`; node `(i, j)` has index `j * width + i`.
#[derive(Debug, Clone)]
pub struct RasterMask {
    h: f64,
    origin: Point,
    width: usize,
    height: usize,
    inside: Vec<bool>,
    block_right: Vec<bool>,
    block_up: Vec<bool>,
    boundary: Vec<Segment>,
    slits: Vec<Segment>,
    exact_area: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub n_components: usize,
    pub n_complement_bounded: usize,
    pub n_boundary_components: usize,
}

/// Splits a segment into pieces no longer than `max_len`.
pub(crate) fn pieces(s: &Segment, max_len: f64) -> impl Iterator<Item = Segment> + '_ {
    let n = ((s.length() / max_len).ceil() as usize).max(1);
    (0..n).map(move |k| {
        let t0 = k as f64 / n as f64;
        let t1 = (k + 1) as f64 / n as f64;
        let at = |t: f64| Point::new(s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y));
        Segment::new(at(t0), at(t1))
    })
}

impl RasterMask {
    pub fn rasterize(domain: &PlanarDomain, h: f64) -> Result<Self> {
        Self::rasterize_with_margin(domain, h, DEFAULT_MARGIN)
    }

    /// Rasterizes with `margin` empty cells on every side of the bounding box.
    pub fn rasterize_with_margin(domain: &PlanarDomain, h: f64, margin: usize) -> Result<Self> {
        let bb = domain.bbox();
        Self::rasterize_frame(domain, h, bb.inflated(margin as f64 * h))
    }

    /// Rasterizes on the smallest grid of multiples of `h` covering `frame`,
    /// which must contain the domain.
    pub fn rasterize_frame(domain: &PlanarDomain, h: f64, frame: BoundingBox) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        let clearance = domain.feature_clearance();
        if h >= clearance {
            return Err(Error::ResolutionTooCoarse { h, clearance });
        }
        // Snap with a relative slack so exact multiples of h are not pushed outward.
        let snap = 1e-9;
        let i0 = (frame.min.x / h + snap).floor() as i64;
        let j0 = (frame.min.y / h + snap).floor() as i64;
        let i1 = (frame.max.x / h - snap).ceil() as i64;
        let j1 = (frame.max.y / h - snap).ceil() as i64;
        let width = (i1 - i0 + 1) as usize;
        let height = (j1 - j0 + 1) as usize;
        let origin = Point::new(i0 as f64 * h, j0 as f64 * h);

        let loop_edges: Vec<Segment> = domain.loops().flat_map(|r| crate::geometry::loop_segments(r)).collect();
        let slits = domain.slit_segments();
        let mut inside = vec![false; width * height];

        // Even-odd scanline fill with the half-open crossing rule.
        let mut xs = Vec::new();
        for j in 0..height {
            let y = origin.y + j as f64 * h;
            xs.clear();
            for e in &loop_edges {
                if (e.a.y > y) != (e.b.y > y) {
                    xs.push(e.a.x + (y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                // nodes strictly between the two crossings are inside
                let lo = ((pair[0] - origin.x) / h).floor() as i64 + 1;
                let hi = ((pair[1] - origin.x) / h).ceil() as i64 - 1;
                for i in lo.max(0)..=hi.min(width as i64 - 1) {
                    inside[j * width + i as usize] = true;
                }
            }
        }

        let mut mask = Self {
            h,
            origin,
            width,
            height,
            inside,
            block_right: vec![false; width * height],
            block_up: vec![false; width * height],
            boundary: loop_edges.iter().chain(slits.iter()).copied().collect(),
            slits,
            exact_area: Some(domain.measure().area),
        };

        // Nodes on an edge or a slit belong to the complement.
        let eps2 = (1e-9 * h) * (1e-9 * h);
        for s in mask.boundary.clone() {
            for p in pieces(&s, 8.0 * h) {
                let near: Vec<usize> = mask.nodes_near(&p, 1).collect();
                for idx in near {
                    if mask.inside[idx] && p.dist2_to(mask.point_of(idx)) <= eps2 {
                        mask.inside[idx] = false;
                    }
                }
            }
        }

        // Adjacencies severed by slits.
        for s in mask.slits.clone() {
            for p in pieces(&s, 8.0 * h) {
                let near: Vec<usize> = mask.nodes_near(&p, 1).collect();
                for idx in near {
                    if !mask.inside[idx] {
                        continue;
                    }
                    let (i, j) = mask.coords(idx);
                    let here = mask.point_of(idx);
                    if i + 1 < width && mask.inside[idx + 1] {
                        let pair = Segment::new(here, mask.point_of(idx + 1));
                        if segments_intersect(&pair, &p) {
                            mask.block_right[idx] = true;
                        }
                    }
                    if j + 1 < height && mask.inside[idx + width] {
                        let pair = Segment::new(here, mask.point_of(idx + width));
                        if segments_intersect(&pair, &p) {
                            mask.block_up[idx] = true;
                        }
                    }
                }
            }
        }

        if !mask.inside.iter().any(|&b| b) {
            return Err(Error::EmptyMask);
        }
        Ok(mask)
    }

    /// A mask without polygon geometry, e.g. a level set of a distance field.
    /// Blocked adjacencies and slits are inherited from `parent`.
    pub fn restricted(parent: &RasterMask, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), parent.inside.len());
        let inside: Vec<bool> = parent.inside.iter().zip(keep).map(|(&a, &b)| a && b).collect();
        Self {
            inside,
            boundary: Vec::new(),
            exact_area: None,
            ..parent.clone()
        }
    }

    /// Indices of nodes inside the bounding box of `s`, grown by `pad` cells.
    pub(crate) fn nodes_near(&self, s: &Segment, pad: i64) -> impl Iterator<Item = usize> + '_ {
        let (ilo, ihi) = self.span(s.min_x(), s.max_x(), self.origin.x, self.width, pad);
        let (jlo, jhi) = self.span(s.min_y(), s.max_y(), self.origin.y, self.height, pad);
        (jlo..=jhi).flat_map(move |j| (ilo..=ihi).map(move |i| j * self.width + i))
    }

    fn span(&self, lo: f64, hi: f64, origin: f64, n: usize, pad: i64) -> (usize, usize) {
        let a = (((lo - origin) / self.h).floor() as i64 - pad).clamp(0, n as i64 - 1);
        let b = (((hi - origin) / self.h).ceil() as i64 + pad).clamp(0, n as i64 - 1);
        (a as usize, b as usize)
    }

    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn origin(&self) -> Point {
        self.origin
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn len(&self) -> usize {
        self.inside.len()
    }
    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }
    pub fn inside(&self) -> &[bool] {
        &self.inside
    }
    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }
    /// Polygon edges and slit segments (empty for derived masks).
    pub fn boundary_segments(&self) -> &[Segment] {
        &self.boundary
    }
    pub fn slit_segments(&self) -> &[Segment] {
        &self.slits
    }
    pub fn exact_area(&self) -> Option<f64> {
        self.exact_area
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + i as f64 * self.h, self.origin.y + j as f64 * self.h)
    }

    pub fn point_of(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        self.point(i, j)
    }

    /// Index of the node closest to `p`, if it falls on the grid.
    pub fn nearest_node(&self, p: Point) -> Option<usize> {
        let i = ((p.x - self.origin.x) / self.h).round();
        let j = ((p.y - self.origin.y) / self.h).round();
        if i < 0.0 || j < 0.0 || i >= self.width as f64 || j >= self.height as f64 {
            return None;
        }
        Some(self.index(i as usize, j as usize))
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn counted_area(&self) -> f64 {
        self.inside_count() as f64 * self.h * self.h
    }

    pub fn blocked_right(&self, idx: usize) -> bool {
        self.block_right[idx]
    }

    pub fn blocked_up(&self, idx: usize) -> bool {
        self.block_up[idx]
    }

    pub fn blocked_edge_count(&self) -> usize {
        self.block_right.iter().chain(&self.block_up).filter(|&&b| b).count()
    }

    /// Blocked adjacencies as node-index pairs, right neighbours first.
    pub fn blocked_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for idx in 0..self.len() {
            if self.block_right[idx] {
                out.push((idx, idx + 1));
            }
            if self.block_up[idx] {
                out.push((idx, idx + self.width));
            }
        }
        out
    }

    /// Inside 4-neighbours of an inside node that are not cut off by a slit.
    pub fn open_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(idx);
        let w = self.width;
        let cands = [
            (i + 1 < w && !self.block_right[idx]).then(|| idx + 1),
            (i > 0 && !self.block_right.get(idx.wrapping_sub(1)).copied().unwrap_or(true)).then(|| idx - 1),
            (j + 1 < self.height && !self.block_up[idx]).then(|| idx + w),
            (j > 0 && !self.block_up.get(idx.wrapping_sub(w)).copied().unwrap_or(true)).then(|| idx - w),
        ];
        cands.into_iter().flatten().filter(move |&q| self.inside[q])
    }

    /// Non-inside nodes with at least one inside 4-neighbour.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let (w, hgt) = (self.width, self.height);
        let mut out = vec![false; self.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            if self.inside[idx] {
                continue;
            }
            let (i, j) = self.coords(idx);
            *slot = (i + 1 < w && self.inside[idx + 1])
                || (i > 0 && self.inside[idx - 1])
                || (j + 1 < hgt && self.inside[idx + w])
                || (j > 0 && self.inside[idx - w]);
        }
        out
    }

    /// Non-inside nodes at the corners of cells crossed by a slit.
    pub(crate) fn slit_anchor_nodes(&self, slit: &Segment) -> Vec<usize> {
        let mut out = Vec::new();
        for p in pieces(slit, 0.5 * self.h) {
            for q in [p.a, p.b] {
                let ci = ((q.x - self.origin.x) / self.h).floor();
                let cj = ((q.y - self.origin.y) / self.h).floor();
                for (di, dj) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
                    let (i, j) = (ci + di, cj + dj);
                    if i >= 0.0 && j >= 0.0 && (i as usize) < self.width && (j as usize) < self.height {
                        let idx = self.index(i as usize, j as usize);
                        if !self.inside[idx] {
                            out.push(idx);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn topology(&self) -> TopologyReport {
        let n = self.len();
        if !self.inside.iter().any(|&b| b) {
            return TopologyReport {
                n_components: 0,
                n_complement_bounded: 0,
                n_boundary_components: 0,
            };
        }

        let mut inner = UnionFind::new(n);
        for idx in 0..n {
            if self.inside[idx] {
                for q in self.open_neighbors(idx) {
                    inner.union(idx, q);
                }
            }
        }
        let n_components = (0..n).filter(|&i| self.inside[i] && inner.find(i) == i).count();

        // Complement: 8-connected non-inside nodes plus one element per slit.
        let ns = self.slits.len();
        let mut outer = UnionFind::new(n + ns);
        let (w, hgt) = (self.width, self.height);
        for idx in 0..n {
            if self.inside[idx] {
                continue;
            }
            let (i, j) = self.coords(idx);
            for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (-1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || a >= w as i64 || b >= hgt as i64 {
                    continue;
                }
                let q = self.index(a as usize, b as usize);
                if !self.inside[q] {
                    outer.union(idx, q);
                }
            }
        }
        for (s_idx, s) in self.slits.iter().enumerate() {
            for q in self.slit_anchor_nodes(s) {
                outer.union(n + s_idx, q);
            }
            for (t_idx, t) in self.slits.iter().enumerate().take(s_idx) {
                if segments_intersect(s, t) {
                    outer.union(n + s_idx, n + t_idx);
                }
            }
        }
        let mut touches_border = vec![false; n + ns];
        for idx in 0..n {
            let (i, j) = self.coords(idx);
            if !self.inside[idx] && (i == 0 || j == 0 || i + 1 == w || j + 1 == hgt) {
                let r = outer.find(idx);
                touches_border[r] = true;
            }
        }
        let mut is_complement = vec![false; n + ns];
        for (idx, flag) in is_complement.iter_mut().enumerate() {
            *flag = idx >= n || !self.inside[idx];
        }
        let mut n_complement_bounded = 0;
        for e in 0..n + ns {
            if is_complement[e] && outer.find(e) == e && !touches_border[e] {
                n_complement_bounded += 1;
            }
        }

        // Boundary: frontier nodes (8-connected) and slits.
        let frontier = self.boundary_nodes();
        let mut bd = UnionFind::new(n + ns);
        for idx in 0..n {
            if !frontier[idx] {
                continue;
            }
            let (i, j) = self.coords(idx);
            for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (-1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || a >= w as i64 || b >= hgt as i64 {
                    continue;
                }
                let q = self.index(a as usize, b as usize);
                if frontier[q] {
                    bd.union(idx, q);
                }
            }
        }
        for (s_idx, s) in self.slits.iter().enumerate() {
            for q in self.slit_anchor_nodes(s) {
                if frontier[q] {
                    bd.union(n + s_idx, q);
                }
            }
            for (t_idx, t) in self.slits.iter().enumerate().take(s_idx) {
                if segments_intersect(s, t) {
                    bd.union(n + s_idx, n + t_idx);
                }
            }
        }
        let n_boundary_components = (0..n + ns)
            .filter(|&e| (e >= n || frontier[e]) && bd.find(e) == e)
            .count();

        TopologyReport {
            n_components,
            n_complement_bounded,
            n_boundary_components,
        }
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
