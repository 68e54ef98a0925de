//! Rayleigh-quotient objective over a sequence of generator steps, with
//! reverse-mode gradients.
//!
//! The state is `phi = S_L ... S_1 |ref>` where each step is either an
//! exponential `exp(theta tau)` or a linear factor `1 + sum_u theta_u tau_u`.
//! With `xi = (H - E) phi / <phi|phi>`, every parameter derivative has the form
//! `2 Re <xi_j | d S_j / d theta | psi_j>` where `xi_j` is `xi` pulled back
//! through the later steps.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim::{CompiledOperator, Generator, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    /// Index into the free parameter vector.
    Free(usize),
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Exp { generator: usize, param: Param },
    Linear { terms: Vec<(usize, Param)> },
}

impl Step {
    fn params(&self) -> Vec<Param> {
        match self {
            Step::Exp { param, .. } => vec![*param],
            Step::Linear { terms } => terms.iter().map(|t| t.1).collect(),
        }
    }
}

fn value(p: Param, x: &[f64]) -> f64 {
    match p {
        Param::Free(i) => x[i],
        Param::Fixed(t) => t,
    }
}

/// Energy, gradient, and the quantities the adaptive loops reuse.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub energy: f64,
    pub gradient: Vec<f64>,
    /// `sqrt(<H^2> - <H>^2)` in the normalized final state.
    pub delta_h: f64,
    pub norm_sqr: f64,
    /// Intermediate states `psi_0 = ref, ..., psi_L = phi`.
    pub states: Vec<StateVector>,
    /// Pulled-back residuals `xi_j` for `j >= first` (earlier entries unused).
    pub adjoints: Vec<StateVector>,
}

pub struct Objective<'a> {
    pub h: &'a CompiledOperator,
    pub generators: &'a [Generator],
    pub steps: &'a [Step],
    pub reference: &'a StateVector,
    pub n_free: usize,
}

impl Objective<'_> {
    fn forward(&self, x: &[f64]) -> Result<Vec<StateVector>> {
        let mut states = Vec::with_capacity(self.steps.len() + 1);
        states.push(self.reference.clone());
        for step in self.steps {
            let psi = states.last().expect("nonempty");
            let next = match step {
                Step::Exp { generator, param } => self.generators[*generator].apply_exp(value(*param, x), psi)?,
                Step::Linear { terms } => {
                    let mut out = psi.clone();
                    for &(g, p) in terms {
                        let t = value(p, x);
                        if t != 0.0 {
                            out.axpy(C64::new(t, 0.0), &self.generators[g].apply(psi)?);
                        }
                    }
                    out
                }
            };
            states.push(next);
        }
        Ok(states)
    }

    /// Energy and gradient; adjoints are kept down to step index `keep_from`.
    pub fn evaluate_keeping(&self, x: &[f64], keep_from: usize) -> Result<Evaluation> {
        if x.len() != self.n_free {
            return Err(Error::Dimension { expected: self.n_free, actual: x.len() });
        }
        let states = self.forward(x)?;
        let phi = states.last().expect("nonempty");
        let norm_sqr = phi.norm_sqr();
        if !(norm_sqr > 1e-300) || !norm_sqr.is_finite() {
            return Err(Error::Domain("ansatz state has zero norm".into()));
        }
        let h_phi = self.h.apply(phi)?;
        let energy = phi.inner(&h_phi).re / norm_sqr;
        let mut xi = h_phi;
        xi.axpy(C64::new(-energy, 0.0), phi);
        let delta_h = xi.norm() / norm_sqr.sqrt();
        let mut xi = xi.scaled(1.0 / norm_sqr);

        let first_free = self
            .steps
            .iter()
            .position(|s| s.params().iter().any(|p| matches!(p, Param::Free(_))))
            .unwrap_or(self.steps.len());
        let stop = first_free.min(keep_from);
        let mut gradient = vec![0.0; self.n_free];
        let mut adjoints = vec![phi.zeros_like(); self.steps.len() + 1];
        adjoints[self.steps.len()] = xi.clone();
        for j in (stop..self.steps.len()).rev() {
            match &self.steps[j] {
                Step::Exp { generator, param } => {
                    let g = &self.generators[*generator];
                    if let Param::Free(i) = param {
                        gradient[*i] += 2.0 * xi.inner(&g.apply(&states[j + 1])?).re;
                    }
                    xi = g.apply_exp(-value(*param, x), &xi)?;
                }
                Step::Linear { terms } => {
                    let mut back = xi.clone();
                    for &(gi, p) in terms {
                        let g = &self.generators[gi];
                        if let Param::Free(i) = p {
                            gradient[i] += 2.0 * xi.inner(&g.apply(&states[j])?).re;
                        }
                        let t = value(p, x);
                        if t != 0.0 {
                            back.axpy(C64::new(-t, 0.0), &g.apply(&xi)?);
                        }
                    }
                    xi = back;
                }
            }
            adjoints[j] = xi.clone();
        }
        if !energy.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::Domain("non-finite energy or gradient".into()));
        }
        Ok(Evaluation { energy, gradient, delta_h, norm_sqr, states, adjoints })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        self.evaluate_keeping(x, self.steps.len())
    }
}

/// Derivative of the objective with respect to a factor `1 + theta tau_u`
/// (equivalently `exp(theta tau_u)`) inserted before step `position`, at `theta = 0`.
pub fn insertion_gradients(eval: &Evaluation, position: usize, candidates: &[Generator]) -> Result<Vec<f64>> {
    let psi = &eval.states[position];
    let xi = &eval.adjoints[position];
    candidates.par_iter().map(|g| Ok(2.0 * xi.inner(&g.apply(psi)?).re)).collect()
}
