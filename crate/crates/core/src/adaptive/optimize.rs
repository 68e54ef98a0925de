//! BFGS over the free parameters of an [`Objective`].

use std::sync::Mutex;

use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::HagerZhangLineSearch;
use argmin::solver::quasinewton::BFGS;
use serde::{Deserialize, Serialize};

use super::objective::Objective;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Stop once the gradient 2-norm falls below this.
    pub gtol: f64,
    pub max_iterations: u64,
    /// Hard cap on objective evaluations.
    pub max_evaluations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { gtol: 1e-8, max_iterations: 2000, max_evaluations: 10_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Optimum {
    pub params: Vec<f64>,
    pub energy: f64,
    pub gradient_norm: f64,
    pub evaluations: usize,
}

struct Cache {
    last: Option<(Vec<f64>, f64, Vec<f64>)>,
    best: Option<(Vec<f64>, f64, Vec<f64>)>,
    evaluations: usize,
}

struct Problem<'a, 'b> {
    objective: &'a Objective<'b>,
    cache: &'a Mutex<Cache>,
    max_evaluations: usize,
}

impl Problem<'_, '_> {
    fn eval(&self, x: &[f64]) -> std::result::Result<(f64, Vec<f64>), argmin::core::Error> {
        let mut cache = self.cache.lock().expect("unpoisoned");
        if let Some((p, e, g)) = &cache.last {
            if p.as_slice() == x {
                return Ok((*e, g.clone()));
            }
        }
        if cache.evaluations >= self.max_evaluations {
            return Err(argmin::core::Error::msg("evaluation budget exhausted"));
        }
        cache.evaluations += 1;
        let ev = self.objective.evaluate(x)?;
        let entry = (x.to_vec(), ev.energy, ev.gradient);
        if cache.best.as_ref().map_or(true, |b| entry.1 < b.1) {
            cache.best = Some(entry.clone());
        }
        let out = (entry.1, entry.2.clone());
        cache.last = Some(entry);
        Ok(out)
    }
}

impl CostFunction for Problem<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(x)?.0)
    }
}

impl Gradient for Problem<'_, '_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;
    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.eval(x)?.1)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Minimizes from `start`. Line-search breakdowns and budget exhaustion return
/// the best point seen; only a failure at the starting point is an error.
pub fn minimize(objective: &Objective<'_>, start: &[f64], config: &OptimizerConfig) -> Result<Optimum> {
    let cache = Mutex::new(Cache { last: None, best: None, evaluations: 0 });
    let problem = Problem { objective, cache: &cache, max_evaluations: config.max_evaluations };
    let (e0, g0) = problem.eval(start).map_err(|e| Error::Domain(e.to_string()))?;
    if start.is_empty() || norm(&g0) < config.gtol {
        return Ok(Optimum { params: start.to_vec(), energy: e0, gradient_norm: norm(&g0), evaluations: 1 });
    }
    let n = start.len();
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let solver = BFGS::new(HagerZhangLineSearch::new())
        .with_tolerance_grad(config.gtol)
        .and_then(|s| s.with_tolerance_cost(0.0))
        .map_err(|e| Error::Config(e.to_string()))?;
    // A run that stops with an error (line-search breakdown, budget) still leaves its best point in the cache.
    let _ = Executor::new(problem, solver)
        .configure(|s| s.param(start.to_vec()).inv_hessian(eye).max_iters(config.max_iterations))
        .run();
    let cache = cache.into_inner().expect("unpoisoned");
    let (params, energy, gradient) = cache.best.expect("start point evaluated");
    Ok(Optimum { params, energy, gradient_norm: norm(&gradient), evaluations: cache.evaluations })
}
