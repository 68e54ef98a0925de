use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{insertion_gradients, Evaluation, Objective, Param, Step};
use super::optimize::{minimize, OptimizerConfig};
use crate::chem::OperatorPool;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::sim::{CompiledOperator, Generator, ReferenceState, StateVector};

/// Residual gradients below this magnitude count as zero.
pub const STALL_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFlavor {
    /// Product of exponentials.
    Adapt,
    /// Product of first-order factors `1 + sum theta tau`.
    Adaft,
}

impl fmt::Display for AnsatzFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnsatzFlavor::Adapt => "adapt",
            AnsatzFlavor::Adaft => "adaft",
        })
    }
}

impl FromStr for AnsatzFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adapt" => Ok(AnsatzFlavor::Adapt),
            "adaft" => Ok(AnsatzFlavor::Adaft),
            other => Err(Error::Config(format!("unknown ansatz flavor `{other}`"))),
        }
    }
}

/// One iteration's worth of `(pool index, theta)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub ops: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzState {
    pub flavor: AnsatzFlavor,
    pub layers: Vec<Layer>,
    pub reference: ReferenceState,
}

impl AnsatzState {
    pub fn new(flavor: AnsatzFlavor, reference: ReferenceState) -> Self {
        AnsatzState { flavor, layers: Vec::new(), reference }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.ops.len()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.ops.iter().map(|o| o.1)).collect()
    }

    pub fn set_params(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_params() {
            return Err(Error::Dimension { expected: self.n_params(), actual: x.len() });
        }
        let mut it = x.iter();
        for layer in &mut self.layers {
            for op in &mut layer.ops {
                op.1 = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Steps with every parameter free, numbered in layer order.
    pub fn steps(&self) -> Vec<Step> {
        let mut next = 0;
        let mut free = || {
            next += 1;
            Param::Free(next - 1)
        };
        let mut steps = Vec::new();
        for layer in &self.layers {
            match self.flavor {
                AnsatzFlavor::Adapt => {
                    for &(g, _) in &layer.ops {
                        steps.push(Step::Exp { generator: g, param: free() });
                    }
                }
                AnsatzFlavor::Adaft => {
                    steps.push(Step::Linear { terms: layer.ops.iter().map(|&(g, _)| (g, free())).collect() });
                }
            }
        }
        steps
    }

    /// Unnormalized ansatz state.
    pub fn prepare(&self, pool: &CompiledPool) -> Result<StateVector> {
        let reference = StateVector::from_reference(pool.n_qubits, &self.reference)?;
        let steps = self.steps();
        let h = CompiledOperator::new(&PauliSum::zero(pool.n_qubits));
        let obj = Objective {
            h: &h,
            generators: &pool.generators,
            steps: &steps,
            reference: &reference,
            n_free: self.n_params(),
        };
        Ok(obj.evaluate_keeping(&self.params(), steps.len())?.states.pop().expect("nonempty"))
    }
}

/// Pool generators compiled for statevector work.
#[derive(Clone, Debug)]
pub struct CompiledPool {
    pub n_qubits: usize,
    pub generators: Vec<Generator>,
    pub labels: Vec<String>,
}

impl CompiledPool {
    pub fn new(pool: &OperatorPool) -> Result<Self> {
        let generators = pool.generators.par_iter().map(|g| Generator::new(g.clone())).collect::<Result<_>>()?;
        Ok(CompiledPool { n_qubits: pool.n_qubits, generators, labels: pool.labels.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on `delta_H` (Hartree).
    pub epsilon: f64,
    /// Operators added per iteration.
    pub d: usize,
    pub max_iterations: usize,
    pub flavor: AnsatzFlavor,
    pub optimizer: OptimizerConfig,
    /// Residual gradients within this relative distance of the largest are ties,
    /// resolved toward the lowest pool index.
    pub tie_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-3,
            d: 1,
            max_iterations: 200,
            flavor: AnsatzFlavor::Adaft,
            optimizer: OptimizerConfig::default(),
            tie_tolerance: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::Config("tie_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub selected: Vec<String>,
    pub energy: f64,
    pub error_vs_exact: Option<f64>,
    pub delta_h: f64,
    pub n_params: usize,
    /// `|R|` of the sweep that chose this iteration's operators.
    pub residual_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIterations,
    /// Every residual gradient vanished while `delta_H` stayed above threshold.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub ansatz: AnsatzState,
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    pub reference_energy: f64,
    pub energy: f64,
    pub delta_h: f64,
}

/// Picks `d` indices by descending `|r|`; near-ties go to the lowest index.
pub fn select_operators(r: &[f64], d: usize, tie_tolerance: f64) -> Vec<usize> {
    let mut taken = vec![false; r.len()];
    let mut out = Vec::with_capacity(d);
    for _ in 0..d.min(r.len()) {
        let best = r.iter().enumerate().filter(|(i, _)| !taken[*i]).map(|(_, v)| v.abs()).fold(0.0f64, f64::max);
        let pick = (0..r.len())
            .find(|&i| !taken[i] && r[i].abs() >= best * (1.0 - tie_tolerance))
            .expect("at least one candidate remains");
        taken[pick] = true;
        out.push(pick);
    }
    out
}

/// `R_u = <psi|[H, tau_u]|psi>` for a normalized `psi`.
pub fn residual_gradients(h: &PauliSum, state: &StateVector, pool: &OperatorPool) -> Result<Vec<f64>> {
    if (state.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::Contract("residual gradients need a normalized state".into()));
    }
    let h_psi = CompiledOperator::new(h).apply(state)?;
    pool.generators.par_iter().map(|g| Ok(2.0 * h_psi.inner(&CompiledOperator::new(g).apply(state)?).re)).collect()
}

/// Energy (Rayleigh quotient) and its gradient with respect to every ansatz parameter.
pub fn energy_and_gradient(
    params: &[f64],
    ansatz: &AnsatzState,
    h: &PauliSum,
    pool: &OperatorPool,
) -> Result<(f64, Vec<f64>)> {
    let compiled = CompiledPool::new(pool)?;
    let reference = StateVector::from_reference(pool.n_qubits, &ansatz.reference)?;
    let op = CompiledOperator::new(h);
    let steps = ansatz.steps();
    let obj = Objective {
        h: &op,
        generators: &compiled.generators,
        steps: &steps,
        reference: &reference,
        n_free: ansatz.n_params(),
    };
    let ev = obj.evaluate(params)?;
    Ok((ev.energy, ev.gradient))
}

/// Everything a run needs, compiled once.
pub struct Problem {
    pub h: CompiledOperator,
    pub pool: CompiledPool,
    pub reference: ReferenceState,
    pub reference_state: StateVector,
}

impl Problem {
    pub fn new(h: &PauliSum, pool: &OperatorPool, reference: &ReferenceState) -> Result<Self> {
        if h.n_qubits() != pool.n_qubits {
            return Err(Error::Dimension { expected: h.n_qubits(), actual: pool.n_qubits });
        }
        if !h.is_hermitian(1e-10 * h.one_norm().max(1.0)) {
            return Err(Error::Contract("Hamiltonian is not Hermitian".into()));
        }
        Ok(Problem {
            h: CompiledOperator::new(h),
            pool: CompiledPool::new(pool)?,
            reference: reference.clone(),
            reference_state: StateVector::from_reference(h.n_qubits(), reference)?,
        })
    }

    pub(crate) fn objective<'a>(&'a self, steps: &'a [Step], n_free: usize) -> Objective<'a> {
        Objective { h: &self.h, generators: &self.pool.generators, steps, reference: &self.reference_state, n_free }
    }
}

fn optimizer_error(iteration: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Optimizer { .. } => e,
        other => Error::Optimizer { iteration, message: other.to_string() },
    }
}

/// Adaptive loop: select by residual gradient, append, re-optimize all parameters.
pub fn run(
    h: &PauliSum,
    pool: &OperatorPool,
    reference: &ReferenceState,
    config: &SolverConfig,
    exact_energy: Option<f64>,
) -> Result<RunOutcome> {
    run_problem(&Problem::new(h, pool, reference)?, config, exact_energy)
}

pub fn run_problem(problem: &Problem, config: &SolverConfig, exact_energy: Option<f64>) -> Result<RunOutcome> {
    config.validate()?;
    let mut ansatz = AnsatzState::new(config.flavor, problem.reference.clone());
    let mut steps: Vec<Step> = Vec::new();
    let mut x: Vec<f64> = Vec::new();
    let mut eval: Evaluation = problem.objective(&steps, 0).evaluate(&x)?;
    let reference_energy = eval.energy;
    let mut records = Vec::new();
    let status = loop {
        if eval.delta_h < config.epsilon {
            break RunStatus::Converged;
        }
        if records.len() >= config.max_iterations {
            break RunStatus::MaxIterations;
        }
        let iteration = records.len() + 1;
        let r = insertion_gradients(&eval, steps.len(), &problem.pool.generators)?;
        let residual_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r.iter().all(|v| v.abs() < STALL_THRESHOLD) {
            break RunStatus::Stalled;
        }
        let chosen = select_operators(&r, config.d, config.tie_tolerance);
        ansatz.layers.push(Layer { ops: chosen.iter().map(|&u| (u, 0.0)).collect() });
        x.resize(x.len() + chosen.len(), 0.0);
        steps = ansatz.steps();

        let obj = problem.objective(&steps, x.len());
        let opt = minimize(&obj, &x, &config.optimizer).map_err(optimizer_error(iteration))?;
        x = opt.params;
        eval = obj.evaluate(&x).map_err(optimizer_error(iteration))?;
        ansatz.set_params(&x)?;
        records.push(IterationRecord {
            iteration,
            selected: chosen.iter().map(|&u| problem.pool.labels[u].clone()).collect(),
            energy: eval.energy,
            error_vs_exact: exact_energy.map(|e| eval.energy - e),
            delta_h: eval.delta_h,
            n_params: x.len(),
            residual_norm,
        });
    };
    Ok(RunOutcome { ansatz, records, status, reference_energy, energy: eval.energy, delta_h: eval.delta_h })
}

/// `iteration,energy,error_vs_exact,delta_H,n_params,selected_labels`; labels are `;`-joined.
pub fn records_to_csv(records: &[IterationRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["iteration", "energy", "error_vs_exact", "delta_H", "n_params", "selected_labels"]).map_err(io)?;
    for r in records {
        w.write_record([
            r.iteration.to_string(),
            r.energy.to_string(),
            r.error_vs_exact.map(|e| e.to_string()).unwrap_or_default(),
            r.delta_h.to_string(),
            r.n_params.to_string(),
            r.selected.join(";"),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
