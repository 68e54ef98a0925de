//! ADAPT-FT: a fixed-size ADAPT state paired with an effective Hamiltonian
//! dressed by first-order factors `D = 1 + sum_u theta_u tau_u`.
//!
//! Each accepted factor sits between the ansatz and the factors accepted
//! before it, so after `m` iterations the state seen by the bare Hamiltonian
//! is `D_1 D_2 ... D_m |Psi>` and `H'_m = D_m^+ H'_{m-1} D_m`.

use serde::{Deserialize, Serialize};

use crate::adaptive::{
    insertion_gradients, minimize, run_problem, select_operators, AnsatzFlavor, AnsatzState, OptimizerConfig, Param,
    Problem, SolverConfig, Step, STALL_THRESHOLD,
};
use crate::chem::OperatorPool;
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, DEFAULT_THRESHOLD};
use crate::sim::ReferenceState;

/// Default hard cap on tracked effective-Hamiltonian terms.
pub const DEFAULT_TERM_CAP: usize = 200_000;

/// `(1 + sum theta tau)^+ H (1 + sum theta tau)`, simplified at `threshold`.
pub fn dress(h: &PauliSum, generators: &[PauliSum], thetas: &[f64], threshold: f64) -> Result<PauliSum> {
    if generators.len() != thetas.len() {
        return Err(Error::Contract(format!("{} generators but {} angles", generators.len(), thetas.len())));
    }
    let n = h.n_qubits();
    let mut g = PauliSum::zero(n);
    for (tau, &theta) in generators.iter().zip(thetas) {
        if tau.n_qubits() != n {
            return Err(Error::Dimension { expected: n, actual: tau.n_qubits() });
        }
        if !tau.is_anti_hermitian(1e-12 * tau.one_norm().max(1.0)) {
            return Err(Error::Contract("dressing generator is not anti-Hermitian".into()));
        }
        g = g.add(&tau.scale_real(theta))?;
    }
    // With G^+ = -G: H' = H + HG - GH - GHG.
    let hg = h.mul_with_threshold(&g, 0.0)?;
    let gh = g.mul_with_threshold(h, 0.0)?;
    let ghg = g.mul_with_threshold(&hg, 0.0)?;
    Ok(h.add(&hg)?.sub(&gh)?.sub(&ghg)?.simplify(threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transformation {
    pub generators: Vec<usize>,
    pub labels: Vec<String>,
    pub thetas: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DressedHamiltonian {
    pub base: PauliSum,
    /// Symbolic `H'_m`; absent when tracking is off or the term cap was hit.
    pub current: Option<PauliSum>,
    pub transformations: Vec<Transformation>,
    /// Term count after each tracked iteration.
    pub term_counts: Vec<usize>,
}

impl DressedHamiltonian {
    pub fn growth_factor(&self) -> Option<f64> {
        let last = *self.term_counts.last()?;
        Some(last as f64 / self.base.term_count().max(1) as f64)
    }

    /// Line-format dump preceded by `#` header lines.
    pub fn dump(&self) -> Option<String> {
        let current = self.current.as_ref()?;
        let mut out = format!("# n_qubits {}\n# base_terms {}\n", current.n_qubits(), self.base.term_count());
        for (i, (t, count)) in self.transformations.iter().zip(&self.term_counts).enumerate() {
            let thetas: Vec<String> = t.thetas.iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&format!(
                "# iteration {} terms {} growth {:.4} labels {} thetas {}\n",
                i + 1,
                count,
                *count as f64 / self.base.term_count().max(1) as f64,
                t.labels.join(";"),
                thetas.join(",")
            ));
        }
        out.push_str(&current.to_text());
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtConfig {
    /// Parameter budget of the ADAPT state.
    pub k: usize,
    /// Operators per dressing factor.
    pub d: usize,
    /// Dressing iterations.
    pub m: usize,
    pub epsilon: f64,
    pub optimizer: OptimizerConfig,
    pub tie_tolerance: f64,
    pub threshold: f64,
    /// Build `H'` symbolically alongside the statevector energies.
    pub track_hamiltonian: bool,
    pub term_cap: usize,
}

impl Default for FtConfig {
    fn default() -> Self {
        FtConfig {
            k: 5,
            d: 5,
            m: 1,
            epsilon: 1e-3,
            optimizer: OptimizerConfig::default(),
            tie_tolerance: 1e-6,
            threshold: DEFAULT_THRESHOLD,
            track_hamiltonian: false,
            term_cap: DEFAULT_TERM_CAP,
        }
    }
}

impl FtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) || !(self.threshold >= 0.0) {
            return Err(Error::Config("epsilon must be positive and threshold non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtRecord {
    /// 0 is the bare ADAPT state.
    pub iteration: usize,
    pub selected: Vec<String>,
    pub energy: f64,
    pub error_vs_exact: Option<f64>,
    pub delta_h: f64,
    /// Live ansatz parameters.
    pub n_params: usize,
    pub n_terms: Option<usize>,
    pub growth_factor: Option<f64>,
    /// `|<Psi|H'|Psi> - <D Psi|H|D Psi>|`, when `H'` is tracked.
    pub identity_gap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FtStatus {
    Completed,
    Converged,
    Stalled,
    TermCapExceeded,
}

#[derive(Clone, Debug)]
pub struct FtOutcome {
    pub dressed: DressedHamiltonian,
    pub ansatz: AnsatzState,
    pub records: Vec<FtRecord>,
    pub status: FtStatus,
}

impl FtOutcome {
    /// Energy after `m` dressing iterations; runs that stop early keep their last energy.
    pub fn energy_at(&self, m: usize) -> f64 {
        self.records[m.min(self.records.len() - 1)].energy
    }

    /// Ansatz parameter count is the same in every dressing iteration.
    pub fn fixed_depth_holds(&self) -> bool {
        self.records.iter().all(|r| r.n_params == self.records[0].n_params)
    }
}

pub fn run_adapt_ft(
    h: &PauliSum,
    pool: &OperatorPool,
    reference: &ReferenceState,
    config: &FtConfig,
    exact_energy: Option<f64>,
) -> Result<FtOutcome> {
    config.validate()?;
    let problem = Problem::new(h, pool, reference)?;
    let adapt = SolverConfig {
        epsilon: config.epsilon,
        d: 1,
        max_iterations: config.k,
        flavor: AnsatzFlavor::Adapt,
        optimizer: config.optimizer,
        tie_tolerance: config.tie_tolerance,
    };
    let stage = run_problem(&problem, &adapt, exact_energy)?;
    let mut ansatz = stage.ansatz;
    let n_live = ansatz.n_params();
    let ansatz_steps = ansatz.steps();
    let position = ansatz_steps.len();
    let mut x = ansatz.params();

    let mut dressed = DressedHamiltonian {
        base: h.clone(),
        current: config.track_hamiltonian.then(|| h.clone()),
        transformations: Vec::new(),
        term_counts: Vec::new(),
    };
    let mut records = vec![FtRecord {
        iteration: 0,
        selected: Vec::new(),
        energy: stage.energy,
        error_vs_exact: exact_energy.map(|e| stage.energy - e),
        delta_h: stage.delta_h,
        n_params: n_live,
        n_terms: Some(h.term_count()),
        growth_factor: Some(1.0),
        identity_gap: None,
    }];
    // Frozen factors in application order: newest first.
    let mut frozen: Vec<Step> = Vec::new();
    let mut status = FtStatus::Completed;
    for iteration in 1..=config.m {
        let steps: Vec<Step> = ansatz_steps.iter().cloned().chain(frozen.iter().cloned()).collect();
        let eval = problem.objective(&steps, n_live).evaluate_keeping(&x, position)?;
        if eval.delta_h < config.epsilon {
            status = FtStatus::Converged;
            break;
        }
        let r = insertion_gradients(&eval, position, &problem.pool.generators)?;
        if r.iter().all(|v| v.abs() < STALL_THRESHOLD) {
            status = FtStatus::Stalled;
            break;
        }
        let chosen = select_operators(&r, config.d, config.tie_tolerance);
        let factor =
            Step::Linear { terms: chosen.iter().enumerate().map(|(i, &u)| (u, Param::Free(n_live + i))).collect() };
        let steps: Vec<Step> =
            ansatz_steps.iter().cloned().chain(std::iter::once(factor)).chain(frozen.iter().cloned()).collect();
        let mut start = x.clone();
        start.resize(n_live + chosen.len(), 0.0);
        let obj = problem.objective(&steps, start.len());
        let wrap = |e: Error| Error::Optimizer { iteration, message: e.to_string() };
        let opt = minimize(&obj, &start, &config.optimizer).map_err(wrap)?;
        let eval = obj.evaluate(&opt.params).map_err(wrap)?;
        x = opt.params[..n_live].to_vec();
        let thetas = opt.params[n_live..].to_vec();
        ansatz.set_params(&x)?;
        frozen.insert(
            0,
            Step::Linear { terms: chosen.iter().zip(&thetas).map(|(&u, &t)| (u, Param::Fixed(t))).collect() },
        );
        let labels: Vec<String> = chosen.iter().map(|&u| problem.pool.labels[u].clone()).collect();
        dressed.transformations.push(Transformation {
            generators: chosen.clone(),
            labels: labels.clone(),
            thetas: thetas.clone(),
        });

        let mut record = FtRecord {
            iteration,
            selected: labels,
            energy: eval.energy,
            error_vs_exact: exact_energy.map(|e| eval.energy - e),
            delta_h: eval.delta_h,
            n_params: n_live,
            n_terms: None,
            growth_factor: None,
            identity_gap: None,
        };
        if let Some(current) = dressed.current.take() {
            let gens: Vec<PauliSum> = chosen.iter().map(|&u| problem.pool.generators[u].operator().clone()).collect();
            let next = dress(&current, &gens, &thetas, config.threshold)?;
            let terms = next.term_count();
            if terms > config.term_cap {
                status = FtStatus::TermCapExceeded;
                records.push(record);
                break;
            }
            let psi = &eval.states[position];
            let symbolic = crate::sim::CompiledOperator::new(&next).braket(psi)?.re / eval.norm_sqr;
            record.identity_gap = Some((symbolic - eval.energy).abs());
            record.n_terms = Some(terms);
            record.growth_factor = Some(terms as f64 / h.term_count().max(1) as f64);
            dressed.term_counts.push(terms);
            dressed.current = Some(next);
        }
        records.push(record);
    }
    Ok(FtOutcome { dressed, ansatz, records, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliString, C64};

    fn sum(n: usize, terms: &[(&str, C64)]) -> PauliSum {
        PauliSum::from_terms(n, terms.iter().map(|(s, c)| (s.parse::<PauliString>().unwrap(), *c))).unwrap()
    }

    #[test]
    fn zero_angles_leave_h_unchanged() {
        let h = sum(2, &[("Z0", C64::new(0.4, 0.0)), ("X0 X1", C64::new(-0.2, 0.0))]);
        let g = sum(2, &[("X0 Y1", C64::new(0.0, 1.0))]);
        assert_eq!(dress(&h, &[g], &[0.0], DEFAULT_THRESHOLD).unwrap(), h);
    }

    #[test]
    fn rejects_hermitian_generator() {
        let h = sum(1, &[("Z0", C64::new(1.0, 0.0))]);
        let g = sum(1, &[("X0", C64::new(1.0, 0.0))]);
        assert!(matches!(dress(&h, &[g], &[0.1], 0.0), Err(Error::Contract(_))));
        assert!(dress(&h, &[], &[0.1], 0.0).is_err());
    }

    #[test]
    fn single_string_dressing_closed_form() {
        // (1 - t iY) Z (1 + t iY) = (1 - t^2) Z + 2t X on one qubit.
        let h = sum(1, &[("Z0", C64::new(1.0, 0.0))]);
        let g = sum(1, &[("Y0", C64::new(0.0, 1.0))]);
        let t = 0.3;
        let out = dress(&h, &[g], &[t], 0.0).unwrap();
        assert!((out.coeff(&"Z0".parse().unwrap()).re - (1.0 - t * t)).abs() < 1e-15);
        assert!((out.coeff(&"X0".parse().unwrap()).re - 2.0 * t).abs() < 1e-15);
        assert_eq!(out.term_count(), 2);
    }
}
