//! Hausdorff distances between point sets and co-Hausdorff distances between domains.

use crate::distance::edt_sq;
use crate::domain::PlanarDomain;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::{pieces, RasterMask};

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

fn directed(from: &[Point], to: &[Point]) -> f64 {
    let mut worst = 0.0f64;
    for p in from {
        let mut nearest = f64::INFINITY;
        for q in to {
            let dx = p.x - q.x;
            let dy = p.y - q.y;
            nearest = nearest.min(dx * dx + dy * dy);
            if nearest <= worst {
                break;
            }
        }
        worst = worst.max(nearest);
    }
    worst.sqrt()
}

/// Complement of a mask as node flags: non-inside nodes plus the nodes
/// nearest to slit samples.
pub fn complement_nodes(mask: &RasterMask) -> Vec<bool> {
    let mut out: Vec<bool> = mask.inside().iter().map(|&b| !b).collect();
    for s in mask.slit_segments() {
        for p in pieces(s, 0.5 * mask.h()) {
            for q in [p.a, p.b] {
                if let Some(idx) = mask.nearest_node(q) {
                    out[idx] = true;
                }
            }
        }
    }
    out
}

/// Hausdorff distance between two node sets on the same grid.
pub fn grid_hausdorff(a: &[bool], b: &[bool], width: usize, height: usize, h: f64) -> Result<f64> {
    if !a.iter().any(|&x| x) || !b.iter().any(|&x| x) {
        return Err(Error::EmptySet);
    }
    let da = edt_sq(a, width, height);
    let db = edt_sq(b, width, height);
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        if a[i] {
            worst = worst.max(db[i]);
        }
        if b[i] {
            worst = worst.max(da[i]);
        }
    }
    Ok(worst.sqrt() * h)
}

/// Hausdorff distance between the complements of two domains, both
/// rasterized at spacing `h` on a common frame.
///
/// The frame is the union of the bounding boxes grown by a few cells. Points
/// farther out belong to both complements and cannot change the distance, so
/// this agrees with clipping to any larger common box.
pub fn co_hausdorff_distance(a: &PlanarDomain, b: &PlanarDomain, h: f64) -> Result<f64> {
    let frame = a.bbox().union(&b.bbox()).inflated(4.0 * h);
    let ma = RasterMask::rasterize_frame(a, h, frame)?;
    let mb = RasterMask::rasterize_frame(b, h, frame)?;
    debug_assert_eq!((ma.width(), ma.height()), (mb.width(), mb.height()));
    grid_hausdorff(
        &complement_nodes(&ma),
        &complement_nodes(&mb),
        ma.width(),
        ma.height(),
        h,
    )
}

/// Co-Hausdorff distance between two masks sharing a grid.
pub fn co_hausdorff_masks(a: &RasterMask, b: &RasterMask) -> Result<f64> {
    if (a.width(), a.height(), a.origin()) != (b.width(), b.height(), b.origin()) || a.h() != b.h() {
        return Err(Error::InvalidParameter("masks must share a grid".into()));
    }
    grid_hausdorff(&complement_nodes(a), &complement_nodes(b), a.width(), a.height(), a.h())
}
