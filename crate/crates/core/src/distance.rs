//! Distance to the boundary on a raster, and a generic exact EDT.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::Segment;
use crate::raster::{pieces, RasterMask};

/// Signed distance to ∂Ω sampled at grid nodes: positive on inside nodes,
/// minus the distance to ∂Ω elsewhere (zero on edges and slits).
#[derive(Debug, Clone)]
pub struct DistanceField<'a> {
    mask: &'a RasterMask,
    d: Vec<f64>,
    /// Nodes inside or on a slit whose nearest boundary piece is that slit,
    /// so the domain continues on the far side of it.
    beside_slit: Vec<bool>,
}

impl<'a> DistanceField<'a> {
    /// Exact Euclidean distance to the polygon edges and slits when the mask
    /// carries geometry; otherwise the Euclidean distance to the nearest
    /// non-inside node.
    pub fn new(mask: &'a RasterMask) -> Result<Self> {
        if mask.inside_count() == 0 {
            return Err(Error::EmptyMask);
        }
        let n = mask.len();
        let (unsigned, beside_slit) = if mask.boundary_segments().is_empty() {
            let seeds: Vec<bool> = mask.inside().iter().map(|&b| !b).collect();
            let d = edt_sq(&seeds, mask.width(), mask.height())
                .into_iter()
                .map(|v| v.sqrt() * mask.h())
                .collect();
            (d, vec![false; n])
        } else {
            let segs = mask.boundary_segments();
            let first_slit = segs.len() - mask.slit_segments().len();
            let (d, label): (Vec<f64>, Vec<usize>) = nearest_segment(mask, segs);
            let on = 1e-9 * mask.h();
            let beside = (0..n)
                .map(|i| (mask.is_inside(i) || d[i] <= on) && label[i] >= first_slit && label[i] != usize::MAX)
                .collect();
            (d, beside)
        };
        let d = unsigned
            .into_iter()
            .zip(mask.inside())
            .map(|(v, &ins)| if ins { v } else { -v })
            .collect();
        Ok(Self { mask, d, beside_slit })
    }

    pub fn mask(&self) -> &'a RasterMask {
        self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }

    pub fn at(&self, idx: usize) -> f64 {
        self.d[idx]
    }

    pub fn beside_slit(&self) -> &[bool] {
        &self.beside_slit
    }

    /// Largest distance from an inside node to the boundary.
    pub fn inradius(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

/// Unsigned distance from every node to the nearest segment.
///
/// Exact distances are seeded in a band around each segment and the
/// nearest-segment labels are then propagated by alternating raster sweeps
/// until they stop changing.
pub fn segment_distance(mask: &RasterMask, segments: &[Segment]) -> Vec<f64> {
    nearest_segment(mask, segments).0
}

/// Distances together with the index of the nearest segment.
fn nearest_segment(mask: &RasterMask, segments: &[Segment]) -> (Vec<f64>, Vec<usize>) {
    let (w, hgt) = (mask.width(), mask.height());
    let n = w * hgt;
    let mut best = vec![f64::INFINITY; n];
    let mut label = vec![usize::MAX; n];
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let p = mask.point_of(i);
            (p.x, p.y)
        })
        .collect();

    for (sid, s) in segments.iter().enumerate() {
        for piece in pieces(s, 4.0 * mask.h()) {
            for idx in mask.nodes_near(&piece, 2) {
                let (x, y) = pts[idx];
                let d2 = s.dist2_to(crate::geometry::Point::new(x, y));
                if d2 < best[idx] {
                    best[idx] = d2;
                    label[idx] = sid;
                }
            }
        }
    }

    let adjacent = shared_endpoints(segments);
    // Neighbouring labels along a polygon are tried too: nearest-segment
    // regions of consecutive edges meet at vertices, where plain label
    // propagation can pick the wrong one.
    let relax = |idx: usize, q: usize, best: &mut [f64], label: &mut [usize]| -> bool {
        let sid = label[q];
        if sid == usize::MAX || sid == label[idx] {
            return false;
        }
        let (x, y) = pts[idx];
        let p = crate::geometry::Point::new(x, y);
        let mut changed = false;
        for cand in std::iter::once(sid).chain(adjacent[sid].iter().copied()) {
            if let Some(seg) = segments.get(cand) {
                let d2 = seg.dist2_to(p);
                if d2 < best[idx] {
                    best[idx] = d2;
                    label[idx] = cand;
                    changed = true;
                }
            }
        }
        changed
    };

    loop {
        let mut changed = false;
        for j in 0..hgt {
            for i in 0..w {
                let idx = j * w + i;
                if i > 0 {
                    changed |= relax(idx, idx - 1, &mut best, &mut label);
                }
                if j > 0 {
                    changed |= relax(idx, idx - w, &mut best, &mut label);
                    if i > 0 {
                        changed |= relax(idx, idx - w - 1, &mut best, &mut label);
                    }
                    if i + 1 < w {
                        changed |= relax(idx, idx - w + 1, &mut best, &mut label);
                    }
                }
            }
            for i in (0..w).rev() {
                let idx = j * w + i;
                if i + 1 < w {
                    changed |= relax(idx, idx + 1, &mut best, &mut label);
                }
            }
        }
        for j in (0..hgt).rev() {
            for i in (0..w).rev() {
                let idx = j * w + i;
                if i + 1 < w {
                    changed |= relax(idx, idx + 1, &mut best, &mut label);
                }
                if j + 1 < hgt {
                    changed |= relax(idx, idx + w, &mut best, &mut label);
                    if i + 1 < w {
                        changed |= relax(idx, idx + w + 1, &mut best, &mut label);
                    }
                    if i > 0 {
                        changed |= relax(idx, idx + w - 1, &mut best, &mut label);
                    }
                }
            }
            for i in 0..w {
                let idx = j * w + i;
                if i > 0 {
                    changed |= relax(idx, idx - 1, &mut best, &mut label);
                }
            }
        }
        if !changed {
            break;
        }
    }
    (best.into_iter().map(f64::sqrt).collect(), label)
}

/// For each segment, the segments sharing one of its endpoints.
fn shared_endpoints(segments: &[Segment]) -> Vec<Vec<usize>> {
    let key = |p: crate::geometry::Point| (p.x.to_bits(), p.y.to_bits());
    let mut at: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, s) in segments.iter().enumerate() {
        at.entry(key(s.a)).or_default().push(i);
        at.entry(key(s.b)).or_default().push(i);
    }
    segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut v: Vec<usize> = at[&key(s.a)]
                .iter()
                .chain(&at[&key(s.b)])
                .copied()
                .filter(|&j| j != i)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect()
}

/// Squared Euclidean distance (in node units) from every node to the nearest
/// seed, by separable lower envelopes of parabolas. Infinite when there are
/// no seeds.
pub fn edt_sq(seeds: &[bool], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(seeds.len(), width * height);
    let mut g: Vec<f64> = seeds.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    let mut col = vec![0.0; height];
    let mut out = vec![0.0; height.max(width)];
    for i in 0..width {
        for j in 0..height {
            col[j] = g[j * width + i];
        }
        edt_1d(&col, &mut out[..height]);
        for j in 0..height {
            g[j * width + i] = out[j];
        }
    }
    let mut row = vec![0.0; width];
    for j in 0..height {
        row.copy_from_slice(&g[j * width..(j + 1) * width]);
        edt_1d(&row, &mut out[..width]);
        g[j * width..(j + 1) * width].copy_from_slice(&out[..width]);
    }
    g
}

fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(p) => p,
        None => {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in (first + 1)..n {
        if !f[q].is_finite() {
            continue;
        }
        let parabola = |p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
        let mut s = parabola(v[k]);
        while s <= z[k] {
            k -= 1;
            s = parabola(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *o = dq * dq + f[p];
    }
}
