//! Torsion function −Δu = 1, u = 0 on ∂Ω, on a raster mask, and the
//! quantities built from it.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::{MeasureReport, PlanarDomain};
use crate::error::{Error, Result};
use crate::output::fmt_num;
use crate::parallel::ParallelProfile;
use crate::raster::RasterMask;

pub const DEFAULT_REL_TOL: f64 = 1e-8;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            max_iterations: 20_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TorsionSolution<'a> {
    mask: &'a RasterMask,
    /// Node values on the whole grid, zero off the inside set.
    pub u: Vec<f64>,
    pub torsion: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub h: f64,
}

impl<'a> TorsionSolution<'a> {
    pub fn mask(&self) -> &'a RasterMask {
        self.mask
    }

    pub fn max_value(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    /// CSV of `x, y, u` for every grid node in row-major order.
    pub fn write_field_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "u"])?;
        for (idx, &v) in self.u.iter().enumerate() {
            let p = self.mask.point_of(idx);
            w.write_record([fmt_num(p.x), fmt_num(p.y), fmt_num(v)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Summary of a solve without the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionSummary {
    pub h: f64,
    pub torsion: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub max_u: f64,
    pub unknowns: usize,
}

impl TorsionSolution<'_> {
    pub fn summary(&self) -> TorsionSummary {
        TorsionSummary {
            h: self.h,
            torsion: self.torsion,
            residual_norm: self.residual_norm,
            iterations: self.iterations,
            max_u: self.max_value(),
            unknowns: self.mask.inside_count(),
        }
    }
}

/// The 5-point operator 4u_p − Σ u_q on the inside nodes; neighbours that
/// are outside or cut off by a slit are Dirichlet zeros.
struct Stencil {
    nodes: Vec<usize>,
    left: Vec<u32>,
    right: Vec<u32>,
    down: Vec<u32>,
    up: Vec<u32>,
}

impl Stencil {
    fn new(mask: &RasterMask) -> Self {
        let mut id = vec![NONE; mask.len()];
        let nodes: Vec<usize> = (0..mask.len()).filter(|&i| mask.is_inside(i)).collect();
        for (k, &idx) in nodes.iter().enumerate() {
            id[idx] = k as u32;
        }
        let n = nodes.len();
        let (mut left, mut right, mut down, mut up) = (vec![NONE; n], vec![NONE; n], vec![NONE; n], vec![NONE; n]);
        let w = mask.width();
        for (k, &idx) in nodes.iter().enumerate() {
            let (i, j) = mask.coords(idx);
            if i + 1 < w && !mask.blocked_right(idx) && id[idx + 1] != NONE {
                right[k] = id[idx + 1];
                left[id[idx + 1] as usize] = k as u32;
            }
            if j + 1 < mask.height() && !mask.blocked_up(idx) && id[idx + w] != NONE {
                up[k] = id[idx + w];
                down[id[idx + w] as usize] = k as u32;
            }
        }
        Self {
            nodes,
            left,
            right,
            down,
            up,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let get = |n: u32| if n == NONE { 0.0 } else { x[n as usize] };
        for k in 0..self.len() {
            y[k] = 4.0 * x[k] - get(self.left[k]) - get(self.right[k]) - get(self.down[k]) - get(self.up[k]);
        }
    }
}

/// Modified incomplete Cholesky, MIC(0), in the row-major node order.
struct Preconditioner {
    inv_diag: Vec<f64>,
}

impl Preconditioner {
    const TAU: f64 = 0.97;
    const SIGMA: f64 = 0.25;

    fn new(s: &Stencil) -> Self {
        let n = s.len();
        let mut p = vec![0.0; n];
        for k in 0..n {
            let mut e = 4.0;
            let l = s.left[k];
            if l != NONE {
                let pl = p[l as usize];
                // the left node's right coefficient is −1; its up coefficient couples in
                let up_of_left = if s.up[l as usize] != NONE { 1.0 } else { 0.0 };
                e -= pl * pl + Self::TAU * up_of_left * pl * pl;
            }
            let d = s.down[k];
            if d != NONE {
                let pd = p[d as usize];
                let right_of_down = if s.right[d as usize] != NONE { 1.0 } else { 0.0 };
                e -= pd * pd + Self::TAU * right_of_down * pd * pd;
            }
            if e < Self::SIGMA * 4.0 {
                e = 4.0;
            }
            p[k] = 1.0 / e.sqrt();
        }
        Self { inv_diag: p }
    }

    fn apply(&self, s: &Stencil, r: &[f64], z: &mut [f64]) {
        let p = &self.inv_diag;
        let n = s.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut t = r[k];
            let l = s.left[k];
            if l != NONE {
                t += p[l as usize] * q[l as usize];
            }
            let d = s.down[k];
            if d != NONE {
                t += p[d as usize] * q[d as usize];
            }
            q[k] = t * p[k];
        }
        for k in (0..n).rev() {
            let mut t = q[k];
            let rt = s.right[k];
            if rt != NONE {
                t += p[k] * z[rt as usize];
            }
            let u = s.up[k];
            if u != NONE {
                t += p[k] * z[u as usize];
            }
            z[k] = t * p[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the discrete torsion problem by preconditioned conjugate gradients.
pub fn solve_torsion(mask: &RasterMask, rel_tol: f64) -> Result<TorsionSolution<'_>> {
    solve_torsion_with(mask, SolverOptions::with_tol(rel_tol))
}

pub fn solve_torsion_with(mask: &RasterMask, opts: SolverOptions) -> Result<TorsionSolution<'_>> {
    if !(opts.rel_tol > 0.0 && opts.rel_tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "relative tolerance must lie in (0, 1e-3], got {}",
            opts.rel_tol
        )));
    }
    let stencil = Stencil::new(mask);
    let n = stencil.len();
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let h = mask.h();
    let b = vec![h * h; n];
    let b_norm = dot(&b, &b).sqrt();
    let pre = Preconditioner::new(&stencil);

    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z = vec![0.0; n];
    pre.apply(&stencil, &r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut rel = 1.0;
    let mut iterations = 0;
    while rel > opts.rel_tol {
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual_history: history,
            });
        }
        stencil.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        history.push(rel);
        iterations += 1;
        if rel <= opts.rel_tol {
            break;
        }
        pre.apply(&stencil, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }

    let mut u = vec![0.0; mask.len()];
    for (k, &idx) in stencil.nodes.iter().enumerate() {
        u[idx] = x[k];
    }
    let torsion = h * h * x.iter().sum::<f64>();
    Ok(TorsionSolution {
        mask,
        u,
        torsion,
        residual_norm: rel,
        iterations,
        h,
    })
}

/// Torsion from solves at `h` and `h/2`, extrapolated assuming an error linear in h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    pub h: f64,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn richardson_t(domain: &PlanarDomain, h: f64, rel_tol: f64) -> Result<RichardsonEstimate> {
    let solve = |hh: f64| -> Result<f64> {
        let mask = RasterMask::rasterize(domain, hh)?;
        Ok(solve_torsion(&mask, rel_tol)?.torsion)
    };
    let (coarse, fine) = rayon::join(|| solve(h), || solve(0.5 * h));
    let (coarse, fine) = (coarse?, fine?);
    Ok(RichardsonEstimate {
        h,
        coarse,
        fine,
        extrapolated: 2.0 * fine - coarse,
    })
}

/// Dirichlet energy Σ(Δu)² over grid adjacencies, with u = 0 off the inside
/// set and both sides of a slit-blocked adjacency tied to zero.
fn dirichlet_energy(u: &[f64], mask: &RasterMask) -> f64 {
    let w = mask.width();
    let mut e = 0.0;
    for idx in 0..mask.len() {
        let (i, j) = mask.coords(idx);
        let here = if mask.is_inside(idx) { u[idx] } else { 0.0 };
        for (ok, q, blocked) in [
            (i + 1 < w, idx + 1, mask.blocked_right(idx)),
            (j + 1 < mask.height(), idx + w, mask.blocked_up(idx)),
        ] {
            if !ok {
                continue;
            }
            let there = if mask.is_inside(q) { u[q] } else { 0.0 };
            e += if blocked {
                here * here + there * there
            } else {
                (here - there) * (here - there)
            };
        }
    }
    e
}

/// Rayleigh quotient (∫u)² / ∫|∇u|² of a trial function given on grid nodes.
pub fn rayleigh_lower(u_trial: &[f64], mask: &RasterMask) -> Result<f64> {
    if u_trial.len() != mask.len() {
        return Err(Error::InvalidParameter(
            "trial function must have one value per node".into(),
        ));
    }
    let h = mask.h();
    let integral: f64 = (0..mask.len())
        .filter(|&i| mask.is_inside(i))
        .map(|i| u_trial[i])
        .sum::<f64>()
        * h
        * h;
    let energy = dirichlet_energy(u_trial, mask);
    if energy == 0.0 || integral == 0.0 {
        return Err(Error::ZeroTrial);
    }
    Ok(integral * integral / energy)
}

/// ∫₀^ρ A(t)²/L(t) dt by the trapezoid rule over the retained samples.
pub fn parallel_trial_lower(profile: &ParallelProfile) -> Result<f64> {
    let r = profile.retained();
    let dt = profile.step();
    let mut f = Vec::with_capacity(r);
    for i in 0..r {
        let (a, l) = (profile.area[i], profile.l_diff[i]);
        if l <= 0.0 {
            return Err(Error::DegenerateProfile(format!(
                "length estimate {l} at t = {} is not positive",
                profile.t[i]
            )));
        }
        f.push(a * a / l);
    }
    Ok(f.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionBounds {
    pub t_parallel_lb: f64,
    pub t_polya_lb: f64,
    pub d_k: f64,
}

/// Denominator P + 2·slit + 2π·max(k−1, 0)·ρ of the Pólya-type bound.
pub fn polya_denominator(m: &MeasureReport, rho: f64, k: usize) -> f64 {
    m.relaxed_perimeter() + 2.0 * PI * (k.saturating_sub(1)) as f64 * rho
}

pub fn torsion_bounds(m: &MeasureReport, profile: &ParallelProfile, k: usize) -> Result<TorsionBounds> {
    let d_k = polya_denominator(m, profile.rho, k);
    Ok(TorsionBounds {
        t_parallel_lb: parallel_trial_lower(profile)?,
        t_polya_lb: m.area.powi(3) / (3.0 * d_k * d_k),
        d_k,
    })
}

pub fn disc_oracle(radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "disc radius must be positive, got {radius}"
        )));
    }
    Ok(PI * radius.powi(4) / 8.0)
}

pub fn annulus_oracle(inner: f64, outer: f64) -> Result<f64> {
    if !(inner > 0.0 && inner < outer) {
        return Err(Error::InvalidParameter(format!(
            "annulus needs 0 < inner < outer, got {inner}, {outer}"
        )));
    }
    let (r2, big2) = (inner * inner, outer * outer);
    Ok(PI / 8.0 * (big2 * big2 - r2 * r2 - (big2 - r2).powi(2) / (outer / inner).ln()))
}

/// Classical series for the a×b rectangle:
/// T = (a b³ / 12)·[1 − (192 b / π⁵ a)·Σ_{n odd} tanh(nπa / 2b) / n⁵] with a ≥ b.
pub fn rectangle_oracle(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rectangle sides must be positive, got {a}, {b}"
        )));
    }
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let mut sum = 0.0;
    for n in (1..200).step_by(2) {
        let n = n as f64;
        sum += (n * PI * a / (2.0 * b)).tanh() / n.powi(5);
    }
    Ok(a * b.powi(3) / 12.0 * (1.0 - 192.0 * b / (PI.powi(5) * a) * sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_values() {
        assert!((disc_oracle(1.0).unwrap() - PI / 8.0).abs() < 1e-15);
        assert!((disc_oracle(2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((annulus_oracle(0.5, 1.0).unwrap() - 0.04947).abs() < 5e-6);
        assert!((rectangle_oracle(1.0, 1.0).unwrap() - 0.0351443).abs() < 1e-6);
        assert!(rectangle_oracle(0.0, 1.0).is_err());
        assert!(annulus_oracle(1.0, 0.5).is_err());
    }

    #[test]
    fn rejects_loose_tolerance() {
        let sq = PlanarDomain::new(
            vec![vec![
                crate::Point::new(0.0, 0.0),
                crate::Point::new(1.0, 0.0),
                crate::Point::new(1.0, 1.0),
                crate::Point::new(0.0, 1.0),
            ]],
            vec![],
            vec![],
        )
        .unwrap();
        let mask = RasterMask::rasterize(&sq, 1.0 / 16.0).unwrap();
        assert!(solve_torsion(&mask, 0.1).is_err());
        let sol = solve_torsion(&mask, 1e-10).unwrap();
        // the solver's own solution attains the discrete Rayleigh maximum
        let q = rayleigh_lower(&sol.u, &mask).unwrap();
        assert!((q - sol.torsion).abs() < 1e-9 * sol.torsion);
        let scaled: Vec<f64> = sol.u.iter().map(|v| -3.0 * v).collect();
        assert!((rayleigh_lower(&scaled, &mask).unwrap() - q).abs() < 1e-12);
    }

    #[test]
    fn capped_iterations_report_history() {
        let sq = PlanarDomain::new(
            vec![vec![
                crate::Point::new(0.0, 0.0),
                crate::Point::new(1.0, 0.0),
                crate::Point::new(1.0, 1.0),
                crate::Point::new(0.0, 1.0),
            ]],
            vec![],
            vec![],
        )
        .unwrap();
        let mask = RasterMask::rasterize(&sq, 1.0 / 64.0).unwrap();
        let err = solve_torsion_with(
            &mask,
            SolverOptions {
                rel_tol: 1e-12,
                max_iterations: 3,
            },
        )
        .unwrap_err();
        match err {
            Error::NonConvergence {
                iterations,
                residual_history,
            } => {
                assert_eq!(iterations, 3);
                assert_eq!(residual_history.len(), 3);
            }
            other => panic!("{other}"),
        }
    }
}
