//! Interior parallel sets Ω(t) = {d > t}: area and length profiles, the
//! concavity and length bounds they satisfy, Minkowski-content estimates and
//! inner-parallel approximants.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::contour_length;
use crate::distance::DistanceField;
use crate::domain::{MeasureReport, PlanarDomain};
use crate::error::{Error, Result};
use crate::hausdorff::co_hausdorff_masks;
use crate::output::fmt_num;
use crate::raster::RasterMask;
use crate::report::{InequalityReport, Orientation, SOLVER_TOL};

/// Samples at the end of the grid excluded from pass/fail judgments: the
/// last two before ρ and ρ itself.
pub const CLIPPED_TAIL: usize = 3;

/// Relative gap between the two length estimators above which a sample is flagged.
pub const ESTIMATOR_DISCREPANCY: f64 = 0.05;

/// Smoothed indicator of `x > 0` on a grid of spacing `h`: the fraction of a
/// node's cell on the positive side of a straight level line.
fn coverage(x: f64, h: f64) -> f64 {
    (x / h + 0.5).clamp(0.0, 1.0)
}

/// Area of {d > t}, counting each node by the fraction of its cell above `t`.
pub fn level_area(values: &[f64], h: f64, t: f64) -> f64 {
    values.iter().map(|&d| coverage(d - t, h)).sum::<f64>() * h * h
}

/// As [`level_area`], but a cell beside a slit also counts the part of it
/// lying across the slit, which is inside the domain as well.
pub fn field_level_area(field: &DistanceField<'_>, t: f64) -> f64 {
    let h = field.mask().h();
    field
        .values()
        .iter()
        .zip(field.beside_slit())
        .map(|(&d, &two)| coverage(d - t, h) + if two { coverage(-d - t, h) } else { 0.0 })
        .sum::<f64>()
        * h
        * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelProfile {
    pub t: Vec<f64>,
    pub area: Vec<f64>,
    /// −A′(t) by finite differences (the primary length estimator).
    pub l_diff: Vec<f64>,
    /// Marching-squares length of the level set {d = t}.
    pub l_contour: Vec<f64>,
    /// L(t) − 2π(α−1)t with L from `l_diff`.
    pub g: Vec<f64>,
    /// Samples where the two length estimators disagree by more than 5%.
    pub flagged: Vec<bool>,
    pub rho: f64,
    pub alpha: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthEstimator {
    Difference,
    Contour,
}

impl ParallelProfile {
    pub fn compute(field: &DistanceField<'_>, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter(format!(
                "profile needs at least 16 samples, got {n}"
            )));
        }
        let mask = field.mask();
        let rho = field.inradius();
        if rho <= 0.0 {
            return Err(Error::EmptyMask);
        }
        let h = mask.h();
        let dt = rho / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let values = field.values();
        let (area, l_contour): (Vec<f64>, Vec<f64>) = t
            .par_iter()
            .map(|&ti| {
                (
                    field_level_area(field, ti),
                    contour_length(values, mask.width(), mask.height(), h, ti),
                )
            })
            .unzip();

        let mut l_diff = vec![0.0; n];
        l_diff[0] = -(-3.0 * area[0] + 4.0 * area[1] - area[2]) / (2.0 * dt);
        for i in 1..n - 1 {
            l_diff[i] = -(area[i + 1] - area[i - 1]) / (2.0 * dt);
        }
        l_diff[n - 1] = -(3.0 * area[n - 1] - 4.0 * area[n - 2] + area[n - 3]) / (2.0 * dt);

        let alpha = mask.topology().n_complement_bounded;
        let g = t
            .iter()
            .zip(&l_diff)
            .map(|(&ti, &l)| l - 2.0 * PI * (alpha as f64 - 1.0) * ti)
            .collect();
        let flagged = l_diff
            .iter()
            .zip(&l_contour)
            .enumerate()
            .map(|(i, (&a, &b))| i + CLIPPED_TAIL >= n || (a - b).abs() > ESTIMATOR_DISCREPANCY * a.abs().max(b.abs()))
            .collect();
        Ok(Self {
            t,
            area,
            l_diff,
            l_contour,
            g,
            flagged,
            rho,
            alpha,
            h,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    /// Number of leading samples used in judgments.
    pub fn retained(&self) -> usize {
        self.len().saturating_sub(CLIPPED_TAIL)
    }

    pub fn lengths(&self, which: LengthEstimator) -> &[f64] {
        match which {
            LengthEstimator::Difference => &self.l_diff,
            LengthEstimator::Contour => &self.l_contour,
        }
    }

    /// max over retained samples of |A(t) − ∫_t^ρ L| relative to A(0).
    pub fn coarea_defect(&self, which: LengthEstimator) -> f64 {
        let l = self.lengths(which);
        let n = self.len();
        let dt = self.step();
        let mut tail = vec![0.0; n];
        for i in (0..n - 1).rev() {
            tail[i] = tail[i + 1] + 0.5 * dt * (l[i] + l[i + 1]);
        }
        (0..self.retained())
            .map(|i| (self.area[i] - tail[i]).abs())
            .fold(0.0, f64::max)
            / self.area[0]
    }

    /// Largest positive jump of g over the retained samples, relative to g(0).
    pub fn g_monotonicity_defect(&self) -> f64 {
        let r = self.retained();
        let mut running_min = f64::INFINITY;
        let mut worst = 0.0f64;
        for &gi in &self.g[..r] {
            worst = worst.max(gi - running_min);
            running_min = running_min.min(gi);
        }
        worst / self.g[0].abs().max(f64::MIN_POSITIVE)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "A", "L_diff", "L_contour", "g"])?;
        for i in 0..self.len() {
            w.write_record([
                fmt_num(self.t[i]),
                fmt_num(self.area[i]),
                fmt_num(self.l_diff[i]),
                fmt_num(self.l_contour[i]),
                fmt_num(self.g[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn profile(field: &DistanceField<'_>, n: usize) -> Result<ParallelProfile> {
    ParallelProfile::compute(field, n)
}

/// Second central differences of φ(t) = −A(t) − (α−1)πt² over the retained
/// interior samples, divided by the step: how much the chord slope of φ
/// rises from one interval to the next. Zero when φ is linear.
pub fn concavity_increments(profile: &ParallelProfile) -> Vec<f64> {
    let dt = profile.step();
    let a = profile.alpha as f64 - 1.0;
    let phi: Vec<f64> = profile
        .t
        .iter()
        .zip(&profile.area)
        .map(|(&t, &area)| -area - a * PI * t * t)
        .collect();
    (1..profile.retained().saturating_sub(1))
        .map(|i| (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / dt)
        .collect()
}

/// Tolerance 10·h·L_max/ρ for the concavity increments.
pub fn concavity_tolerance(profile: &ParallelProfile) -> f64 {
    let l_max = profile.l_diff.iter().copied().fold(0.0, f64::max);
    10.0 * profile.h * l_max / profile.rho
}

/// φ is concave: no increment exceeds the tolerance.
pub fn check_nagy(profile: &ParallelProfile) -> InequalityReport {
    let worst = concavity_increments(profile)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    InequalityReport::new(
        "sz_nagy_concavity",
        "nagy_concavity",
        Orientation::AtMost,
        worst,
        0.0,
        concavity_tolerance(profile),
    )
}

/// Worst sample of L(t) ≤ P + 2·slit + 2π(k−1)t.
pub fn check_boundl(profile: &ParallelProfile, m: &MeasureReport, k: usize) -> InequalityReport {
    let p = m.relaxed_perimeter();
    let c = 2.0 * PI * (k as f64 - 1.0);
    // The bound is for t > 0; L(0) is only a one-sided difference.
    let (lhs, rhs) = worst_sample(
        (0..profile.retained())
            .filter(|&i| profile.t[i] > 0.0)
            .map(|i| (profile.l_diff[i], p + c * profile.t[i])),
    );
    InequalityReport::new(
        "level_length_bound",
        "level_length_bound",
        Orientation::AtMost,
        lhs,
        rhs,
        SOLVER_TOL * p,
    )
}

/// Worst sample of A(t) ≤ (P + 2·slit)(ρ−t) + π(k−1)(ρ−t)².
pub fn check_bounda(profile: &ParallelProfile, m: &MeasureReport, k: usize) -> InequalityReport {
    let p = m.relaxed_perimeter();
    let (lhs, rhs) = worst_sample((0..profile.retained()).map(|i| {
        let s = profile.rho - profile.t[i];
        (profile.area[i], p * s + PI * (k as f64 - 1.0) * s * s)
    }));
    InequalityReport::new(
        "parallel_area_bound",
        "parallel_area_bound",
        Orientation::AtMost,
        lhs,
        rhs,
        SOLVER_TOL * profile.area[0],
    )
}

fn worst_sample(pairs: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    pairs
        .min_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        .unwrap_or((0.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiSample {
    pub r: f64,
    /// |{d(·,∂Ω) ≤ r}| / 2r
    pub two_sided: f64,
    /// |{d(·,∂Ω) ≤ r} \ Ω| / r
    pub outer: f64,
    /// |{x ∈ Ω : d ≤ r}| / r = (1/r)∫₀^r L
    pub inner: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRadius {
    pub r: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiReport {
    pub samples: Vec<MinkowskiSample>,
    pub rejected: Vec<RejectedRadius>,
    /// Linear extrapolations of each quotient to r = 0.
    pub two_sided_limit: f64,
    pub outer_limit: f64,
    pub inner_limit: f64,
}

impl MinkowskiReport {
    /// Relative errors of the limits against H¹, P and P + 2·slit.
    pub fn relative_errors(&self, m: &MeasureReport) -> [f64; 3] {
        [
            (self.two_sided_limit - m.boundary_h1).abs() / m.boundary_h1,
            (self.outer_limit - m.perimeter).abs() / m.perimeter,
            (self.inner_limit - m.relaxed_perimeter()).abs() / m.relaxed_perimeter(),
        ]
    }
}

/// Least-squares line through `(x, y)`; returns (intercept, slope).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Finite-r tube quotients and their extrapolation to r → 0. The mask must
/// leave at least `r` of empty grid around the domain.
pub fn minkowski_estimates(field: &DistanceField<'_>, r_values: &[f64]) -> Result<MinkowskiReport> {
    let mask = field.mask();
    let h = mask.h();
    let d = field.values();
    let room = free_margin(mask);
    let on_slit: Vec<bool> = (0..mask.len())
        .map(|i| {
            d[i].abs() <= 1e-9 * h && {
                let p = mask.point_of(i);
                mask.slit_segments().iter().any(|s| s.dist_to(p) <= 1e-9 * h)
            }
        })
        .collect();

    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    for &r in r_values {
        if r <= 2.0 * h {
            rejected.push(RejectedRadius {
                r,
                reason: format!("r must exceed 2h = {}", 2.0 * h),
            });
            continue;
        }
        if r > room {
            rejected.push(RejectedRadius {
                r,
                reason: format!("grid leaves only {room} around the domain"),
            });
            continue;
        }
        let (mut inner, mut outer) = (0.0, 0.0);
        for (i, &s) in d.iter().enumerate() {
            if on_slit[i] {
                inner += 1.0;
                continue;
            }
            inner += coverage(s, h) - coverage(s - r, h);
            outer += coverage(-s, h) - coverage(-s - r, h);
        }
        let cell = h * h;
        samples.push(MinkowskiSample {
            r,
            two_sided: (inner + outer) * cell / (2.0 * r),
            outer: outer * cell / r,
            inner: inner * cell / r,
        });
    }
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two admissible radii, got {}",
            samples.len()
        )));
    }
    let rs: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let fit = |f: fn(&MinkowskiSample) -> f64| linear_fit(&rs, &samples.iter().map(f).collect::<Vec<_>>()).0;
    Ok(MinkowskiReport {
        two_sided_limit: fit(|s| s.two_sided),
        outer_limit: fit(|s| s.outer),
        inner_limit: fit(|s| s.inner),
        samples,
        rejected,
    })
}

/// Distance from the inside nodes to the nearest grid border.
fn free_margin(mask: &RasterMask) -> f64 {
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for idx in (0..mask.len()).filter(|&i| mask.is_inside(i)) {
        let (i, j) = mask.coords(idx);
        i0 = i0.min(i);
        i1 = i1.max(i);
        j0 = j0.min(j);
        j1 = j1.max(j);
    }
    let cells = i0.min(j0).min(mask.width() - 1 - i1).min(mask.height() - 1 - j1);
    cells.saturating_sub(1) as f64 * mask.h()
}

/// Ω(t) as a mask together with the quantities tracked along t → 0.
#[derive(Debug, Clone)]
pub struct InnerParallelSet {
    pub t: f64,
    pub mask: RasterMask,
    pub summary: ApproximantRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximantRow {
    pub t: f64,
    pub perimeter: f64,
    pub area: f64,
    pub inradius: f64,
    pub n_components: usize,
    pub n_complement_bounded: usize,
    pub co_hausdorff: f64,
}

/// Masks of Ω(t) for each `t` (all below the inradius), rasterized at `h`.
pub fn inner_parallel_approximants(domain: &PlanarDomain, h: f64, t_list: &[f64]) -> Result<Vec<InnerParallelSet>> {
    let mask = RasterMask::rasterize(domain, h)?;
    let field = DistanceField::new(&mask)?;
    let rho = field.inradius();
    if let Some(&t) = t_list.iter().find(|&&t| !(t > 0.0 && t < rho)) {
        return Err(Error::InvalidParameter(format!(
            "parallel distance t = {t} must lie in (0, inradius = {rho})"
        )));
    }
    let d = field.values();
    t_list
        .par_iter()
        .map(|&t| {
            let keep: Vec<bool> = d.iter().map(|&v| v > t).collect();
            let sub = RasterMask::restricted(&mask, &keep);
            let topo = sub.topology();
            let sub_field = DistanceField::new(&sub)?;
            let summary = ApproximantRow {
                t,
                perimeter: contour_length(d, mask.width(), mask.height(), h, t),
                area: field_level_area(&field, t),
                inradius: sub_field.inradius(),
                n_components: topo.n_components,
                n_complement_bounded: topo.n_complement_bounded,
                co_hausdorff: co_hausdorff_masks(&sub, &mask)?,
            };
            Ok(InnerParallelSet { t, mask: sub, summary })
        })
        .collect()
}

/// Intercept at t = 0 of the least-squares line through P(Ω(t)).
pub fn extrapolate_perimeter(sets: &[InnerParallelSet]) -> f64 {
    let ts: Vec<f64> = sets.iter().map(|s| s.t).collect();
    let ps: Vec<f64> = sets.iter().map(|s| s.summary.perimeter).collect();
    linear_fit(&ts, &ps).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn disc(n: usize) -> PlanarDomain {
        let ring = (0..n)
            .map(|i| Point::polar(1.0, std::f64::consts::TAU * i as f64 / n as f64))
            .collect();
        PlanarDomain::new(vec![ring], vec![], vec![]).unwrap()
    }

    #[test]
    fn linear_fit_recovers_line() {
        let (a, b) = linear_fit(&[1.0, 2.0, 3.0], &[5.0, 7.0, 9.0]);
        assert!((a - 3.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disc_profile_matches_closed_form() {
        let d = disc(512);
        let mask = RasterMask::rasterize(&d, 1.0 / 128.0).unwrap();
        let field = DistanceField::new(&mask).unwrap();
        let p = profile(&field, 32).unwrap();
        assert!((p.rho - 1.0).abs() < 1.5 / 128.0);
        for i in 0..p.retained() {
            let t = p.t[i];
            let a = PI * (1.0 - t) * (1.0 - t);
            assert!((p.area[i] - a).abs() < 5e-3, "A({t}) = {} vs {a}", p.area[i]);
            let l = 2.0 * PI * (1.0 - t);
            assert!(
                (p.l_diff[i] - l).abs() < 0.02 * l + 0.02,
                "L({t}) = {} vs {l}",
                p.l_diff[i]
            );
        }
        assert!(check_nagy(&p).pass);
        assert!(p.coarea_defect(LengthEstimator::Difference) < 0.01);
    }
}
