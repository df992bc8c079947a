//! Derivative-free minimization by linear approximation on a simplex
//! (Powell's COBYLA, unconstrained form).
//!
//! The method keeps `n + 1` interpolation points. Their values define a
//! linear model, and each iteration steps to the boundary of a trust region
//! along the model's steepest descent. One vertex is then swapped for the
//! trial point. `rho` is the resolution and only shrinks, from `rhobeg` to
//! `rhoend`. `delta >= rho` is the working trust radius: it grows after very
//! successful steps and shrinks after poor ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CobylaConfig {
    pub rhobeg: f64,
    pub rhoend: f64,
    /// Objective evaluation budget.
    pub max_evals: usize,
}

impl Default for CobylaConfig {
    fn default() -> Self {
        Self {
            rhobeg: 0.5,
            rhoend: 1e-6,
            max_evals: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CobylaResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_evals: usize,
}

// Trust-radius update thresholds and factors.
const ETA1: f64 = 0.1;
const ETA2: f64 = 0.7;
const SHRINK: f64 = 0.5;
const EXPAND: f64 = 2.0;
// Simplex acceptability, relative to delta.
const MIN_HEIGHT: f64 = 0.25;
const MAX_EDGE: f64 = 2.1;

struct Budget<F> {
    objective: F,
    max: usize,
    used: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

enum Eval {
    Value(f64),
    Exhausted,
}

impl<F: FnMut(&[f64]) -> f64> Budget<F> {
    fn eval(&mut self, x: &[f64]) -> Result<Eval> {
        if self.used >= self.max {
            return Ok(Eval::Exhausted);
        }
        let f = (self.objective)(x);
        self.used += 1;
        if !f.is_finite() {
            return Err(Error::OptimizerFailure {
                reason: format!("objective returned {f}"),
                best_x: self.best_x.clone(),
                best_f: self.best_f,
                n_evals: self.used,
            });
        }
        if f < self.best_f || self.used == 1 {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
        Ok(Eval::Value(f))
    }

    fn finish(self) -> CobylaResult {
        CobylaResult {
            x: self.best_x,
            f: self.best_f,
            n_evals: self.used,
        }
    }
}

/// Simplex stored as a base vertex plus `n` displacements.
struct Simplex {
    base: Vec<f64>,
    fbase: f64,
    disp: Vec<Vec<f64>>,
    fvals: Vec<f64>,
}

impl Simplex {
    fn n(&self) -> usize {
        self.base.len()
    }

    fn point(&self, d: &[f64]) -> Vec<f64> {
        self.base.iter().zip(d).map(|(b, v)| b + v).collect()
    }

    /// Moves the base to the lowest vertex.
    fn rebase(&mut self) {
        let Some((k, &fk)) = self.fvals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) else {
            return;
        };
        if fk >= self.fbase {
            return;
        }
        let dk = self.disp[k].clone();
        self.base = self.point(&dk);
        for (i, d) in self.disp.iter_mut().enumerate() {
            if i == k {
                d.iter_mut().for_each(|v| *v = -*v);
            } else {
                d.iter_mut().zip(&dk).for_each(|(v, s)| *v -= s);
            }
        }
        self.fvals[k] = self.fbase;
        self.fbase = fk;
    }

    /// Inverse of the matrix whose rows are the displacements.
    fn inverse(&self) -> Option<DMatrix<f64>> {
        let n = self.n();
        DMatrix::from_fn(n, n, |r, c| self.disp[r][c]).try_inverse()
    }

    /// Replaces the base vertex by `base + d`, dropping the old base.
    fn shift_base(&mut self, d: &[f64], f: f64) {
        self.base = self.point(d);
        self.fbase = f;
        for v in &mut self.disp {
            v.iter_mut().zip(d).for_each(|(a, b)| *a -= b);
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Minimizes `objective` from `x0`. Returns the best point evaluated.
pub fn cobyla_minimize<F>(objective: F, x0: &[f64], cfg: &CobylaConfig) -> Result<CobylaResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidInput("need at least one variable".into()));
    }
    if !(cfg.rhoend > 0.0 && cfg.rhobeg > cfg.rhoend) {
        return Err(Error::InvalidInput(format!(
            "need 0 < rhoend < rhobeg, got rhobeg={} rhoend={}",
            cfg.rhobeg, cfg.rhoend
        )));
    }
    if cfg.max_evals == 0 {
        return Err(Error::InvalidInput("evaluation budget must be at least 1".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite starting point".into()));
    }

    let mut budget = Budget {
        objective,
        max: cfg.max_evals,
        used: 0,
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
    };
    let mut rho = cfg.rhobeg;
    let mut delta = rho;

    let Eval::Value(f0) = budget.eval(x0)? else {
        unreachable!("budget is at least one evaluation")
    };
    let mut sim = Simplex {
        base: x0.to_vec(),
        fbase: f0,
        disp: Vec::with_capacity(n),
        fvals: Vec::with_capacity(n),
    };
    for j in 0..n {
        let mut d = vec![0.0; n];
        d[j] = rho;
        match budget.eval(&sim.point(&d))? {
            Eval::Value(f) => {
                sim.disp.push(d);
                sim.fvals.push(f);
            }
            Eval::Exhausted => return Ok(budget.finish()),
        }
    }

    loop {
        sim.rebase();
        let Some(inv) = sim.inverse() else {
            // Degenerate simplex: rebuild it around the base.
            for j in 0..n {
                let mut d = vec![0.0; n];
                d[j] = delta;
                match budget.eval(&sim.point(&d))? {
                    Eval::Value(f) => {
                        sim.disp[j] = d;
                        sim.fvals[j] = f;
                    }
                    Eval::Exhausted => return Ok(budget.finish()),
                }
            }
            continue;
        };

        // Linear model gradient: disp · g = f_j - f_base.
        let df = DVector::from_iterator(n, sim.fvals.iter().map(|f| f - sim.fbase));
        let grad = &inv * df;
        let gnorm = grad.norm();

        let mut bad_step = true;
        let delta_used = delta;
        if gnorm > 0.0 && gnorm.is_finite() {
            let step: Vec<f64> = grad.iter().map(|g| -delta * g / gnorm).collect();
            let predicted = delta * gnorm;
            let trial = sim.point(&step);
            let f_new = match budget.eval(&trial)? {
                Eval::Value(f) => f,
                Eval::Exhausted => return Ok(budget.finish()),
            };
            let ratio = (sim.fbase - f_new) / predicted;
            let improved = f_new < sim.fbase;

            // Lagrange coefficients of the trial point w.r.t. the vertices.
            let step_v = DVector::from_column_slice(&step);
            let lambda = inv.transpose() * &step_v;
            let weight = |dsq: f64| (dsq / (delta * delta)).max(1.0);
            let mut scores: Vec<f64> = (0..n)
                .map(|j| {
                    let dsq = if improved { dist_sq(&sim.disp[j], &step) } else { norm(&sim.disp[j]).powi(2) };
                    weight(dsq) * lambda[j].abs()
                })
                .collect();
            if improved {
                let base_lagrange = 1.0 - lambda.sum();
                scores.push(weight(delta * delta) * base_lagrange.abs());
            }
            let (jdrop, top) = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, &s)| (j, s))
                .expect("n >= 1");
            if improved || top > 1.0 {
                if jdrop == n {
                    sim.shift_base(&step, f_new);
                } else {
                    sim.disp[jdrop] = step;
                    sim.fvals[jdrop] = f_new;
                }
            }

            delta = if ratio <= ETA1 {
                SHRINK * delta
            } else if ratio <= ETA2 {
                delta.max(SHRINK * delta)
            } else {
                (SHRINK * delta).max(EXPAND * delta_used)
            };
            if delta <= 1.5 * rho {
                delta = rho;
            }
            bad_step = ratio <= ETA1;
        }

        if !bad_step {
            continue;
        }

        // Column j of the inverse is normal to the face opposite vertex j;
        // 1/|column| is that vertex's height above the face.
        sim.rebase();
        let Some(inv) = sim.inverse() else { continue };
        let heights: Vec<f64> = (0..n).map(|j| 1.0 / inv.column(j).norm()).collect();
        let edges: Vec<f64> = sim.disp.iter().map(|d| norm(d)).collect();
        let geo = (0..n)
            .filter(|&j| edges[j] > MAX_EDGE * delta)
            .max_by(|&a, &b| edges[a].total_cmp(&edges[b]))
            .or_else(|| {
                (0..n)
                    .filter(|&j| heights[j] < MIN_HEIGHT * delta)
                    .min_by(|&a, &b| heights[a].total_cmp(&heights[b]))
            });

        if let Some(j) = geo {
            // Move vertex j along the normal of its opposite face.
            let col = inv.column(j);
            let cn = col.norm();
            let df = DVector::from_iterator(n, sim.fvals.iter().map(|f| f - sim.fbase));
            let grad = &inv * df;
            let mut d: Vec<f64> = col.iter().map(|c| delta * c / cn).collect();
            if d.iter().zip(grad.iter()).map(|(a, b)| a * b).sum::<f64>() > 0.0 {
                d.iter_mut().for_each(|v| *v = -*v);
            }
            match budget.eval(&sim.point(&d))? {
                Eval::Value(f) => {
                    sim.disp[j] = d;
                    sim.fvals[j] = f;
                }
                Eval::Exhausted => return Ok(budget.finish()),
            }
        } else if delta_used <= rho {
            if rho <= cfg.rhoend {
                return Ok(budget.finish());
            }
            rho *= 0.5;
            if rho <= 1.5 * cfg.rhoend {
                rho = cfg.rhoend;
            }
            delta = (SHRINK * delta).max(rho);
        }
    }
}
