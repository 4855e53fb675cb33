//! Nelder–Mead search with restarts on stagnation.
//!
//! Points proposed together (the starting simplex, a shrink) are evaluated
//! in parallel; every accept/reject decision is taken sequentially in a fixed
//! order, so a run depends only on the objective and the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Evaluation, Trial};

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Relative spread of simplex values below which a cycle has converged.
    pub tol: f64,
    /// Initial edge length along each coordinate.
    pub step: Vec<f64>,
    pub seed: u64,
    /// Iterations without a new best before the simplex is rebuilt.
    pub stall_iterations: usize,
    /// Consecutive cycles without a relative gain above `tol` that end the run.
    pub idle_restarts: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub history: Vec<Evaluation>,
    /// Best feasible point and value, if any point was feasible.
    pub best: Option<(Vec<f64>, f64)>,
    /// The best point at the end of each cycle, oldest first, without repeats.
    pub finalists: Vec<Vec<f64>>,
    pub restarts: usize,
}

struct Search<'a, F> {
    f: &'a F,
    budget: usize,
    history: Vec<Evaluation>,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: Fn(&[f64]) -> Trial + Sync> Search<'_, F> {
    fn remaining(&self) -> usize {
        self.budget - self.history.len()
    }

    /// Evaluates as many of `points` as the budget allows, in parallel.
    fn batch(&mut self, points: Vec<Vec<f64>>) -> Vec<(Vec<f64>, f64)> {
        let take = points.len().min(self.remaining());
        let pts: Vec<Vec<f64>> = points.into_iter().take(take).collect();
        let trials: Vec<Trial> = pts.par_iter().map(|p| (self.f)(p)).collect();
        pts.into_iter().zip(trials).map(|(p, t)| self.record(p, t)).collect()
    }

    fn one(&mut self, p: Vec<f64>) -> Option<(Vec<f64>, f64)> {
        if self.remaining() == 0 {
            return None;
        }
        let t = (self.f)(&p);
        Some(self.record(p, t))
    }

    fn record(&mut self, p: Vec<f64>, t: Trial) -> (Vec<f64>, f64) {
        self.history.push(Evaluation {
            index: self.history.len(),
            value: t.value,
            feasible: t.feasible,
        });
        if t.feasible && self.best.as_ref().is_none_or(|(_, b)| t.value < *b) {
            self.best = Some((p.clone(), t.value));
        }
        (p, t.value)
    }
}

fn combine(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    // a + s·(b − a)
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

pub fn minimize<F>(f: &F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: Fn(&[f64]) -> Trial + Sync,
{
    let n = x0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut s = Search {
        f,
        budget: opts.budget,
        history: Vec::new(),
        best: None,
    };
    let mut finalists: Vec<Vec<f64>> = Vec::new();
    let mut restarts = 0;
    let mut idle = 0;

    let Some(start) = s.one(x0.to_vec()) else {
        return SimplexOutcome {
            history: s.history,
            best: None,
            finalists,
            restarts,
        };
    };
    let mut centre = start;

    while s.remaining() > 0 {
        let cycle_start = s.best.as_ref().map(|b| b.1);
        // Simplex around the centre with seeded edge signs. Later cycles also
        // draw shorter edges so they do not retrace the collapsed one.
        let vertices: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut p = centre.0.clone();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let scale = if restarts == 0 { 1.0 } else { rng.random_range(0.5..1.0) };
                p[i] += sign * scale * opts.step[i];
                p
            })
            .collect();
        let mut simplex = vec![centre.clone()];
        simplex.extend(s.batch(vertices));
        if simplex.len() < n + 1 {
            break;
        }

        let mut since_best = 0;
        let mut best_in_cycle = f64::INFINITY;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (lo, hi) = (simplex[0].1, simplex[n].1);
            if lo < best_in_cycle {
                best_in_cycle = lo;
                since_best = 0;
            } else {
                since_best += 1;
            }
            if (hi - lo).abs() <= opts.tol * lo.abs().max(1e-300) || since_best >= opts.stall_iterations {
                break;
            }
            if s.remaining() == 0 {
                break;
            }

            let mut centroid = vec![0.0; n];
            for (p, _) in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / n as f64;
                }
            }
            let worst = simplex[n].0.clone();
            let Some(r) = s.one(combine(&centroid, &worst, -1.0)) else {
                break;
            };
            if r.1 < lo {
                let Some(e) = s.one(combine(&centroid, &worst, -2.0)) else {
                    simplex[n] = r;
                    break;
                };
                simplex[n] = if e.1 < r.1 { e } else { r };
                continue;
            }
            if r.1 < simplex[n - 1].1 {
                simplex[n] = r;
                continue;
            }
            let contracted = if r.1 < hi {
                s.one(combine(&centroid, &r.0, 0.5))
            } else {
                s.one(combine(&centroid, &worst, 0.5))
            };
            let Some(c) = contracted else { break };
            if c.1 < r.1.min(hi) {
                simplex[n] = c;
                continue;
            }
            let best = simplex[0].0.clone();
            let shrunk: Vec<Vec<f64>> = simplex[1..].iter().map(|(p, _)| combine(&best, p, 0.5)).collect();
            let done = s.batch(shrunk);
            let complete = done.len() == n;
            for (slot, v) in simplex[1..].iter_mut().zip(done) {
                *slot = v;
            }
            if !complete {
                break;
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        centre = s.best.clone().unwrap_or_else(|| simplex[0].clone());
        if !finalists.contains(&centre.0) {
            finalists.push(centre.0.clone());
        }
        let gained = match (cycle_start, s.best.as_ref()) {
            (Some(before), Some((_, after))) => before - after > opts.tol * before.abs(),
            (None, Some(_)) => true,
            _ => false,
        };
        idle = if gained { 0 } else { idle + 1 };
        if idle >= opts.idle_restarts || s.remaining() == 0 {
            break;
        }
        restarts += 1;
    }

    SimplexOutcome {
        history: s.history,
        best: s.best,
        finalists,
        restarts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(budget: usize, n: usize) -> SimplexOptions {
        SimplexOptions {
            budget,
            tol: 1e-10,
            step: vec![0.5; n],
            seed: 3,
            stall_iterations: 200,
            idle_restarts: 3,
        }
    }

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| Trial::feasible((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2));
        let out = minimize(&f, &[0.0, 0.0], &opts(2000, 2));
        let (x, v) = out.best.unwrap();
        assert!(v < 1e-8, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-3 && (x[1] + 2.0).abs() < 1e-3);
        assert!(out.history.len() <= 2000);
    }

    #[test]
    fn rosenbrock_with_penalty_region() {
        // Infeasible outside the disc of radius 3.
        let f = |x: &[f64]| {
            if x[0] * x[0] + x[1] * x[1] > 9.0 {
                Trial::infeasible()
            } else {
                Trial::feasible(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
            }
        };
        let out = minimize(&f, &[-1.2, 1.0], &opts(3000, 2));
        assert!(out.best.unwrap().1 < 1e-6);
    }

    #[test]
    fn budget_is_respected_and_deterministic() {
        let f = |x: &[f64]| Trial::feasible(x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>().sqrt());
        let a = minimize(&f, &[0.0; 5], &opts(137, 5));
        let b = minimize(&f, &[0.0; 5], &opts(137, 5));
        assert_eq!(a.history.len(), 137);
        assert_eq!(a.history, b.history);
        let zero = minimize(&f, &[0.0; 5], &opts(0, 5));
        assert!(zero.best.is_none() && zero.history.is_empty());
    }
}
