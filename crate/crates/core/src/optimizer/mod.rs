//! Derivative-free minimization of F_q over star-shaped domains with circular
//! holes, and the gap to the class lower bound.

pub mod simplex;

use std::f64::consts::PI;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::PlanarDomain;
use crate::error::{Error, Result};
use crate::functionals::{self, class_lower_bound};
use crate::geometry::Point;
use crate::raster::RasterMask;
use crate::report::SOLVER_TOL;
use crate::torsion::{solve_torsion, DEFAULT_REL_TOL};

pub use simplex::{SimplexOptions, SimplexOutcome};

pub const DEFAULT_MODES: usize = 8;
pub const DEFAULT_VERTICES: usize = 512;
pub const HOLE_VERTICES: usize = 128;
/// Smallest admissible hole radius as a fraction of a₀.
pub const R_MIN_FRACTION: f64 = 0.02;
/// Objective value of an infeasible or unsolvable shape.
pub const SENTINEL: f64 = 1e6;
/// Objective grid: h = √|Ω| / DEFAULT_RESOLUTION.
pub const DEFAULT_RESOLUTION: usize = 80;

/// One objective evaluation in a run history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub index: usize,
    pub value: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub value: f64,
    pub feasible: bool,
}

impl Trial {
    pub fn feasible(value: f64) -> Self {
        Self { value, feasible: true }
    }
    pub fn infeasible() -> Self {
        Self {
            value: SENTINEL,
            feasible: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleHole {
    pub center: Point,
    pub radius: f64,
}

/// r(θ) = a₀ + Σ_{j≤J} aⱼ cos jθ + bⱼ sin jθ, plus circular holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub holes: Vec<CircleHole>,
}

impl ShapeParams {
    pub fn disc(a0: f64, modes: usize) -> Self {
        Self {
            a0,
            a: vec![0.0; modes],
            b: vec![0.0; modes],
            holes: Vec::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        let mut r = self.a0;
        for (j, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let jt = (j + 1) as f64 * theta;
            r += a * jt.cos() + b * jt.sin();
        }
        r
    }

    /// Search coordinates: (aⱼ, bⱼ) pairs then (x, y, r) per hole. F is
    /// scale invariant, so a₀ stays fixed.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.a.iter().zip(&self.b).flat_map(|(a, b)| [*a, *b]).collect();
        for h in &self.holes {
            x.extend([h.center.x, h.center.y, h.radius]);
        }
        x
    }

    pub fn with_vector(&self, x: &[f64]) -> Self {
        let j = self.modes();
        let mut out = self.clone();
        for i in 0..j {
            out.a[i] = x[2 * i];
            out.b[i] = x[2 * i + 1];
        }
        for (i, h) in out.holes.iter_mut().enumerate() {
            let o = 2 * j + 3 * i;
            *h = CircleHole {
                center: Point::new(x[o], x[o + 1]),
                radius: x[o + 2],
            };
        }
        out
    }

    /// Initial simplex edge per search coordinate.
    pub fn step_sizes(&self, fourier_step: f64) -> Vec<f64> {
        let mut s = vec![fourier_step * self.a0; 2 * self.modes()];
        for _ in &self.holes {
            s.extend([0.1 * self.a0, 0.1 * self.a0, 0.02 * self.a0]);
        }
        s
    }
}

/// A decoded shape, or the reason it is not in the search space.
#[derive(Debug, Clone)]
pub enum Decoded {
    Feasible(PlanarDomain),
    Infeasible(String),
}

fn circle(c: Point, r: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Point::new(c.x + r * t.cos(), c.y + r * t.sin())
        })
        .collect()
}

pub fn decode(params: &ShapeParams, k: usize, vertices: usize) -> Result<Decoded> {
    if !(params.a0 > 0.0 && params.a0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "a0 must be positive, got {}",
            params.a0
        )));
    }
    if params.a.len() != params.b.len() {
        return Err(Error::InvalidParameter(format!(
            "{} cosine but {} sine coefficients",
            params.a.len(),
            params.b.len()
        )));
    }
    if vertices < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 vertices, got {vertices}"
        )));
    }
    let coefficients = params.a.iter().chain(&params.b);
    let hole_values = params.holes.iter().flat_map(|h| [h.center.x, h.center.y, h.radius]);
    if !coefficients.copied().chain(hole_values).all(f64::is_finite) {
        return Ok(Decoded::Infeasible("non-finite parameter".into()));
    }
    if params.holes.len() > k {
        return Ok(Decoded::Infeasible(format!(
            "{} holes exceed k = {k}",
            params.holes.len()
        )));
    }
    let mut outer = Vec::with_capacity(vertices);
    for i in 0..vertices {
        let t = 2.0 * PI * i as f64 / vertices as f64;
        let r = params.radius_at(t);
        if r <= 0.0 {
            return Ok(Decoded::Infeasible(format!("radius {r} at angle {t}")));
        }
        outer.push(Point::polar(r, t));
    }
    let r_min = R_MIN_FRACTION * params.a0;
    let mut holes = Vec::with_capacity(params.holes.len());
    for (i, h) in params.holes.iter().enumerate() {
        if h.radius < r_min {
            return Ok(Decoded::Infeasible(format!(
                "hole {i} radius {} below {r_min}",
                h.radius
            )));
        }
        holes.push(circle(h.center, h.radius, HOLE_VERTICES));
    }
    Ok(match PlanarDomain::new(vec![outer], holes, vec![]) {
        Ok(d) => Decoded::Feasible(d),
        Err(e) => Decoded::Infeasible(e.to_string()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub q: f64,
    pub k: usize,
    /// Grid spacing is √|Ω| divided by this.
    pub resolution: usize,
    /// Extrapolate T from solves at h and h/2.
    pub richardson: bool,
    /// Minimize the relaxed upper value P_k·T^q/|Ω|^{2q+1/2} instead of F_q.
    pub relaxed: bool,
    pub vertices: usize,
    /// Grid offsets averaged per evaluation. Staircase error on a single grid
    /// jumps as the boundary crosses nodes and the search learns to exploit it.
    pub shifts: usize,
}

impl ObjectiveConfig {
    pub fn new(q: f64, k: usize) -> Self {
        Self {
            q,
            k,
            resolution: DEFAULT_RESOLUTION,
            richardson: true,
            relaxed: false,
            vertices: DEFAULT_VERTICES,
            shifts: 2,
        }
    }
}

/// F_q of a domain on a grid with h = √|Ω|/resolution, with T averaged over
/// `shifts` diagonal grid offsets.
pub fn shape_value(domain: &PlanarDomain, cfg: &ObjectiveConfig) -> Result<f64> {
    let m = domain.measure();
    let h = m.area.sqrt() / cfg.resolution as f64;
    let n = cfg.shifts.max(1);
    let mut total = 0.0;
    for s in 0..n {
        let off = h * s as f64 / n as f64;
        let shifted = domain.translated(Point::new(off, off));
        let solve = |h: f64| -> Result<f64> {
            let mask = RasterMask::rasterize(&shifted, h)?;
            Ok(solve_torsion(&mask, DEFAULT_REL_TOL)?.torsion)
        };
        total += if cfg.richardson {
            let (coarse, fine) = rayon::join(|| solve(h), || solve(0.5 * h));
            2.0 * fine? - coarse?
        } else {
            solve(h)?
        };
    }
    let v = functionals::evaluate(&m, total / n as f64, cfg.q, cfg.k)?;
    Ok(if cfg.relaxed { v.f_qk_upper } else { v.f_q })
}

pub fn objective(params: &ShapeParams, cfg: &ObjectiveConfig) -> Trial {
    let domain = match decode(params, cfg.k, cfg.vertices) {
        Ok(Decoded::Feasible(d)) => d,
        Ok(Decoded::Infeasible(why)) => {
            debug!("infeasible shape: {why}");
            return Trial::infeasible();
        }
        Err(e) => {
            warn!("bad shape parameters: {e}");
            return Trial::infeasible();
        }
    };
    match shape_value(&domain, cfg) {
        Ok(v) if v.is_finite() => Trial::feasible(v),
        Ok(v) => {
            warn!("objective is not finite ({v})");
            Trial::infeasible()
        }
        Err(e @ Error::ResolutionTooCoarse { .. }) => {
            debug!("shape too thin for the objective grid: {e}");
            Trial::infeasible()
        }
        Err(e) => {
            warn!("objective evaluation failed: {e}");
            Trial::infeasible()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub budget: usize,
    pub tol: f64,
    pub seed: u64,
    /// Initial simplex edge for Fourier coefficients, relative to a₀.
    pub fourier_step: f64,
    /// Resolution for re-evaluating finalists; None skips the pass.
    pub fine_resolution: Option<usize>,
}

impl OptimizeOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            tol: 1e-6,
            seed,
            fourier_step: 0.2,
            fine_resolution: Some(2 * DEFAULT_RESOLUTION),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalist {
    pub params: ShapeParams,
    pub coarse_value: f64,
    pub fine_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineCheck {
    pub resolution: usize,
    pub finalists: Vec<Finalist>,
    /// Index into `finalists` of the lowest fine value.
    pub best: usize,
}

impl FineCheck {
    pub fn best_value(&self) -> f64 {
        self.finalists[self.best].fine_value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub objective: ObjectiveConfig,
    pub options: OptimizeOptions,
    pub initial: ShapeParams,
    pub initial_value: f64,
    pub best: ShapeParams,
    pub best_value: f64,
    pub history: Vec<Evaluation>,
    pub restarts: usize,
    pub fine: Option<FineCheck>,
    /// Class lower bound for (q, k).
    pub bound: f64,
    /// Best value minus the bound, using the fine value when there is one.
    pub gap: f64,
    /// Feasible evaluations more than the solver tolerance below the bound.
    pub bound_violations: Vec<usize>,
}

impl OptimizationRun {
    /// The value the run stands by: fine when re-evaluated, else coarse.
    pub fn reported_value(&self) -> f64 {
        self.fine.as_ref().map_or(self.best_value, FineCheck::best_value)
    }

    pub fn reported_params(&self) -> &ShapeParams {
        self.fine.as_ref().map_or(&self.best, |f| &f.finalists[f.best].params)
    }

    /// Running minimum of the feasible history values.
    pub fn running_best(&self) -> Vec<f64> {
        running_best(&self.history)
    }

    pub fn search_dimension(&self) -> usize {
        self.initial.to_vector().len()
    }
}

pub fn running_best(history: &[Evaluation]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    history
        .iter()
        .map(|e| {
            if e.feasible {
                best = best.min(e.value);
            }
            best
        })
        .collect()
}

pub fn minimize(init: &ShapeParams, cfg: &ObjectiveConfig, opts: &OptimizeOptions) -> Result<OptimizationRun> {
    functionals::check_exponent(cfg.q)?;
    if cfg.resolution < 4 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 4, got {}",
            cfg.resolution
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let x0 = init.to_vector();
    let dim = x0.len();
    if opts.budget > 0 && opts.budget < 50 * dim {
        warn!(
            "budget {} is below 50 evaluations per search dimension ({dim})",
            opts.budget
        );
    }
    let f = |x: &[f64]| objective(&init.with_vector(x), cfg);
    let outcome = simplex::minimize(
        &f,
        &x0,
        &SimplexOptions {
            budget: opts.budget,
            tol: opts.tol,
            step: init.step_sizes(opts.fourier_step),
            seed: opts.seed,
            stall_iterations: 30 * dim.max(1),
            idle_restarts: 3,
        },
    );
    let Some((best_x, best_value)) = outcome.best else {
        return Err(Error::NoFeasiblePoint {
            budget: opts.budget,
            history: outcome.history,
        });
    };
    let initial_value = outcome.history[0].value;

    let bound = class_lower_bound(cfg.q, cfg.k);
    let floor = bound * (1.0 - SOLVER_TOL);
    let bound_violations = outcome
        .history
        .iter()
        .filter(|e| e.feasible && e.value < floor)
        .map(|e| e.index)
        .collect::<Vec<_>>();
    if !bound_violations.is_empty() {
        warn!(
            "{} feasible evaluations fall below the class bound {bound}",
            bound_violations.len()
        );
    }

    let fine = match opts.fine_resolution {
        Some(resolution) => {
            let mut pts = vec![x0.clone()];
            for p in outcome.finalists.iter().chain(std::iter::once(&best_x)) {
                if !pts.contains(p) {
                    pts.push(p.clone());
                }
            }
            let fine_cfg = ObjectiveConfig { resolution, ..*cfg };
            let finalists: Vec<Finalist> = pts
                .par_iter()
                .map(|x| {
                    let params = init.with_vector(x);
                    Finalist {
                        coarse_value: f(x).value,
                        fine_value: objective(&params, &fine_cfg).value,
                        params,
                    }
                })
                .collect();
            let best = (0..finalists.len())
                .min_by(|&i, &j| finalists[i].fine_value.total_cmp(&finalists[j].fine_value))
                .unwrap_or(0);
            Some(FineCheck {
                resolution,
                finalists,
                best,
            })
        }
        None => None,
    };
    let reported = fine.as_ref().map_or(best_value, FineCheck::best_value);

    Ok(OptimizationRun {
        objective: *cfg,
        options: *opts,
        initial: init.clone(),
        initial_value,
        best: init.with_vector(&best_x),
        best_value,
        history: outcome.history,
        restarts: outcome.restarts,
        fine,
        bound,
        gap: reported - bound,
        bound_violations,
    })
}

/// Continues a run from its best point with `extra` more evaluations. The
/// continuation draws a fresh seed from the original seed and the history
/// length, so resuming the same artifact twice gives the same result.
pub fn resume(run: &OptimizationRun, extra: usize) -> Result<OptimizationRun> {
    let opts = OptimizeOptions {
        budget: extra,
        seed: run.options.seed ^ (run.history.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ..run.options
    };
    let next = minimize(&run.best, &run.objective, &opts)?;
    let offset = run.history.len();
    let mut history = run.history.clone();
    history.extend(next.history.iter().map(|e| Evaluation {
        index: e.index + offset,
        ..e.clone()
    }));
    let (best, best_value) = if next.best_value < run.best_value {
        (next.best.clone(), next.best_value)
    } else {
        (run.best.clone(), run.best_value)
    };
    let mut bound_violations = run.bound_violations.clone();
    bound_violations.extend(next.bound_violations.iter().map(|i| i + offset));
    let fine = match (&run.fine, next.fine) {
        (Some(old), Some(new)) if old.best_value() <= new.best_value() => Some(old.clone()),
        (_, new) => new,
    };
    let reported = fine.as_ref().map_or(best_value, FineCheck::best_value);
    Ok(OptimizationRun {
        options: OptimizeOptions {
            budget: run.options.budget + extra,
            ..run.options
        },
        initial: run.initial.clone(),
        initial_value: run.initial_value,
        best,
        best_value,
        history,
        restarts: run.restarts + next.restarts + 1,
        fine,
        gap: reported - run.bound,
        bound_violations,
        ..next
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub seed: u64,
    pub k0: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub q: f64,
    pub budget: usize,
    pub rows: Vec<ProbeRow>,
    /// Seeds for which the k = 2 run ended at or below the k = 0 run.
    pub holds: usize,
}

/// Best values with k = 0 and k = 2 under equal budgets. Both start from the
/// same disc; the k = 2 run adds two small holes on a diameter.
pub fn k_monotonicity_probe(
    q: f64,
    budget: usize,
    seeds: &[u64],
    resolution: usize,
    fine_resolution: Option<usize>,
) -> Result<ProbeReport> {
    let disc = ShapeParams::disc(1.0, DEFAULT_MODES);
    let mut holed = disc.clone();
    for x in [-0.4, 0.4] {
        holed.holes.push(CircleHole {
            center: Point::new(x, 0.0),
            radius: 0.05,
        });
    }
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let opts = OptimizeOptions {
            fine_resolution,
            ..OptimizeOptions::new(budget, seed)
        };
        let run = |init: &ShapeParams, k: usize| -> Result<f64> {
            let cfg = ObjectiveConfig {
                resolution,
                ..ObjectiveConfig::new(q, k)
            };
            Ok(minimize(init, &cfg, &opts)?.reported_value())
        };
        rows.push(ProbeRow {
            seed,
            k0: run(&disc, 0)?,
            k2: run(&holed, 2)?,
        });
    }
    let holds = rows.iter().filter(|r| r.k2 <= r.k0).count();
    Ok(ProbeReport { q, budget, rows, holds })
}
