//! Variational layer: operator pools, adaptive and fixed ansätze, parameter
//! optimization, and CNOT resource counting.

pub mod adapt;
pub mod gga;
pub mod optimize;
pub mod overlap;
pub mod pool;

pub use adapt::{adapt_vqe, fixed_ansatz_vqe, mb_adapt_step};
pub use gga::gga_vqe;
pub use optimize::{optimize_parameters, OptimizeOptions, OptimizeOutcome};
pub use overlap::{overlap_adapt, overlap_adapt_result};
pub use pool::{build_pool, build_pool_sized, cubic_scale, OperatorPool, PoolKind};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mps::{mps_matrix_element, Mpo, MpsState};
use crate::partitioned::{
    partition_hamiltonian, partitioned_expectation, partitioned_gradient, PartitionedHamiltonian,
};
use crate::pauli::PauliSum;
use crate::sv::{sampled_expectation_sparse, DenseState, GateOp, SparseState};

/// Which state representation carries the circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    Dense,
    Sparse,
    Mps { cutoff: f64, max_bond: usize },
    Partitioned { eta: u32, cutoff: f64 },
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Sparse => "sparse",
            Backend::Mps { .. } => "mps",
            Backend::Partitioned { .. } => "partitioned",
        }
    }
}

/// A reference determinant plus an ordered list of (pool generator, angle)
/// steps. With all angles zero the circuit reproduces the reference exactly.
#[derive(Clone, Debug)]
pub struct AnsatzCircuit {
    pub n_qubits: usize,
    /// Occupation bitmask of the reference determinant.
    pub reference: u64,
    pub pool: OperatorPool,
    pub steps: Vec<(usize, f64)>,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize, reference: u64, pool: OperatorPool) -> Self {
        AnsatzCircuit { n_qubits, reference, pool, steps: Vec::new() }
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.steps.iter().map(|&(_, t)| t).collect()
    }

    pub fn set_thetas(&mut self, thetas: &[f64]) {
        for (step, &t) in self.steps.iter_mut().zip(thetas) {
            step.1 = t;
        }
    }

    pub fn step_labels(&self) -> Vec<String> {
        self.steps
            .iter()
            .map(|&(g, _)| self.pool.labels[g].clone())
            .collect()
    }
}

/// First-order product-form rotations for `exp(theta G)`, term by term in
/// the generator's canonical order (exact whenever the terms commute).
pub fn generator_gates(g: &PauliSum, theta: f64) -> Result<Vec<GateOp>> {
    let mut gates = Vec::with_capacity(g.n_terms());
    for (c, p) in g.iter() {
        if c.re.abs() > 1e-12 {
            return Err(Error::NotHermitian(c.re.abs()));
        }
        let (bare, phase) = p.split_phase();
        let r = (c * phase).im;
        gates.push(GateOp::PauliRotation { axis: bare, theta: -2.0 * r * theta });
    }
    Ok(gates)
}

/// Backend-tagged circuit state.
#[derive(Clone, Debug)]
pub enum EngineState {
    Dense(DenseState),
    Sparse(SparseState),
    Mps(MpsState),
}

impl EngineState {
    fn apply_gate(&mut self, g: &GateOp) -> Result<()> {
        match self {
            EngineState::Dense(s) => s.apply_gate(g),
            EngineState::Sparse(s) => s.apply_gate(g),
            EngineState::Mps(s) => s.apply_gate(g),
        }
    }

    pub fn to_sparse(&self) -> SparseState {
        match self {
            EngineState::Dense(s) => s.to_sparse(),
            EngineState::Sparse(s) => s.clone(),
            EngineState::Mps(s) => s.to_dense().to_sparse(),
        }
    }
}

/// Precomputed per-run evaluation plan: the Hamiltonian in whatever
/// representations the backend needs.
pub struct EvalPlan {
    pub backend: Backend,
    pub h: PauliSum,
    mpo: Option<Mpo>,
    part: Option<PartitionedHamiltonian>,
    /// Shot-noise mode: (shots, seed); None means exact expectations.
    pub shots: Option<(u64, u64)>,
}

impl EvalPlan {
    pub fn new(h: &PauliSum, backend: Backend) -> Result<EvalPlan> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian(h.hermiticity_defect()));
        }
        let h = h.clone().canonicalized();
        let mpo = match backend {
            Backend::Mps { .. } => Some(Mpo::from_pauli_sum(&h)),
            _ => None,
        };
        let part = match backend {
            Backend::Partitioned { eta, .. } => Some(partition_hamiltonian(&h, eta)?),
            _ => None,
        };
        Ok(EvalPlan { backend, h, mpo, part, shots: None })
    }

    pub fn with_shots(mut self, shots: Option<(u64, u64)>) -> Self {
        self.shots = shots;
        self
    }

    pub fn prepare(&self, ansatz: &AnsatzCircuit) -> Result<EngineState> {
        let n = ansatz.n_qubits;
        let mut state = match self.backend {
            Backend::Dense => EngineState::Dense(DenseState::basis_state(n, ansatz.reference)),
            Backend::Sparse | Backend::Partitioned { .. } => {
                EngineState::Sparse(SparseState::basis_state(n, ansatz.reference))
            }
            Backend::Mps { cutoff, max_bond } => {
                let mut m = MpsState::basis_state(n, ansatz.reference);
                m.cutoff = cutoff;
                m.max_bond = if cutoff == 0.0 { usize::MAX } else { max_bond };
                EngineState::Mps(m)
            }
        };
        for &(gen, theta) in &ansatz.steps {
            if theta == 0.0 {
                continue;
            }
            for gate in generator_gates(&ansatz.pool.generators[gen], theta)? {
                state.apply_gate(&gate)?;
            }
        }
        Ok(state)
    }

    /// ⟨ψ|H|ψ⟩; `op_id` keys the shot-noise RNG stream when sampling.
    pub fn energy(&self, state: &EngineState, op_id: u64) -> Result<f64> {
        if let Some((shots, seed)) = self.shots {
            let s = state.to_sparse();
            let call_seed = seed.wrapping_add(op_id.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            return sampled_expectation_sparse(&s, &self.h, shots, call_seed);
        }
        match (state, self.backend) {
            (EngineState::Dense(s), _) => s.expectation(&self.h),
            (EngineState::Sparse(s), Backend::Partitioned { cutoff, .. }) => {
                partitioned_expectation(s, self.part.as_ref().expect("plan built"), cutoff)
            }
            (EngineState::Sparse(s), _) => s.expectation(&self.h),
            (EngineState::Mps(s), _) => {
                mps_matrix_element(s, self.mpo.as_ref().expect("plan built"), s)
                    .map(|v| v.re)
            }
        }
    }

    /// ADAPT gradient ⟨ψ|[H,G]|ψ⟩ for one anti-Hermitian generator.
    pub fn gradient(&self, state: &EngineState, g: &PauliSum, op_id: u64) -> Result<f64> {
        if let Some((shots, seed)) = self.shots {
            let comm = self.h.commutator(g)?.canonicalized();
            if comm.is_empty() {
                return Ok(0.0);
            }
            let s = state.to_sparse();
            let call_seed = seed.wrapping_add(op_id.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            return sampled_expectation_sparse(&s, &comm, shots, call_seed);
        }
        match (state, self.backend) {
            (EngineState::Sparse(s), Backend::Partitioned { .. }) => {
                partitioned_gradient(s, self.part.as_ref().expect("plan built"), g)
            }
            (EngineState::Dense(s), _) => {
                let hpsi = s.apply_pauli_sum(&self.h)?;
                let gpsi = s.apply_pauli_sum(g)?;
                Ok(2.0 * hpsi.inner(&gpsi).re)
            }
            (EngineState::Sparse(s), _) => {
                let hpsi = s.apply_pauli_sum(&self.h)?;
                let gpsi = s.apply_pauli_sum(g)?;
                Ok(2.0 * hpsi.inner(&gpsi).re)
            }
            (EngineState::Mps(s), _) => {
                let comm = self.h.commutator(g)?.canonicalized();
                if comm.is_empty() {
                    return Ok(0.0);
                }
                let mpo = Mpo::from_pauli_sum(&comm);
                Ok(mps_matrix_element(s, &mpo, s)?.re)
            }
        }
    }

    /// Full pool sweep, parallel over generators with a fixed result order.
    pub fn pool_gradients(
        &self,
        state: &EngineState,
        pool: &OperatorPool,
        op_id_base: u64,
    ) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        // Precompute H|psi> once for the state-vector paths.
        let hpsi: Option<SparseState> = match (state, self.backend, self.shots) {
            (EngineState::Sparse(s), Backend::Sparse, None) => Some(s.apply_pauli_sum(&self.h)?),
            _ => None,
        };
        pool.generators
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                if let (Some(hp), EngineState::Sparse(s)) = (&hpsi, state) {
                    let gpsi = s.apply_pauli_sum(g)?;
                    Ok(2.0 * hp.inner(&gpsi).re)
                } else {
                    self.gradient(state, g, op_id_base + i as u64)
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub max_gradient: f64,
    pub selected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VqeResult {
    pub method: String,
    pub backend: String,
    pub energy: f64,
    pub thetas: Vec<f64>,
    pub operators: Vec<String>,
    pub trace: Vec<IterationRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cnots_qubit: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cnots_qeb: Option<u64>,
    pub n_energy_evals: u64,
    pub n_gradient_evals: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

/// ADAPT-style run options shared by the adaptive methods.
#[derive(Clone, Debug)]
pub struct VqeOptions {
    pub reference: u64,
    /// Stop when max |gradient| falls below this (Hartree).
    pub eps_grad: f64,
    pub max_iterations: usize,
    /// Operators appended per iteration (MB-ADAPT batching; 1 = plain ADAPT).
    pub batch_size: usize,
    pub shots: Option<u64>,
    pub seed: u64,
    pub optimize: OptimizeOptions,
}

impl Default for VqeOptions {
    fn default() -> Self {
        VqeOptions {
            reference: 0,
            eps_grad: 1e-3,
            max_iterations: 200,
            batch_size: 1,
            shots: None,
            seed: 0,
            optimize: OptimizeOptions::default(),
        }
    }
}

/// CNOT decomposition convention for resource counting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnotDecomposition {
    /// Each weight-w Pauli rotation costs 2(w-1) CNOTs.
    Qubit,
    /// Qubit-excitation circuits: single 2, double 13.
    Qeb,
}

/// Total CNOT cost of an ansatz under the chosen decomposition.
pub fn count_cnots(ansatz: &AnsatzCircuit, decomposition: CnotDecomposition) -> Result<u64> {
    let mut total = 0u64;
    for &(gen, _) in &ansatz.steps {
        let g = &ansatz.pool.generators[gen];
        match decomposition {
            CnotDecomposition::Qubit => {
                // One weight-w Pauli rotation per selected operator (the
                // qubit-pool realization of the same excitation sequence).
                let support: u64 = g
                    .iter()
                    .map(|(_, p)| {
                        let b = p.split_phase().0;
                        b.x_mask() | b.z_mask()
                    })
                    .fold(0, |a, m| a | m);
                total += (2 * u64::from(support.count_ones())).saturating_sub(2);
            }
            CnotDecomposition::Qeb => {
                let support: u64 = g
                    .iter()
                    .map(|(_, p)| {
                        let b = p.split_phase().0;
                        b.x_mask() | b.z_mask()
                    })
                    .fold(0, |a, m| a | m);
                total += match support.count_ones() {
                    1 | 2 => 2,
                    4 => 13,
                    w => {
                        return Err(Error::Invalid(format!(
                            "no QEB circuit for support width {w}"
                        )))
                    }
                };
            }
        }
    }
    Ok(total)
}

/// Fixed trotterized UCCSD circuit: all singles, then all doubles, one
/// first-order exponential each, angles initialized to zero.
pub fn tuccsd_ansatz(m: &crate::chemistry::MolecularIntegrals) -> Result<AnsatzCircuit> {
    let pool = build_pool(PoolKind::FermionicSD, m)?;
    let reference = crate::chemistry::hf_reference(m)?;
    let mut ansatz = AnsatzCircuit::new(reference.n_spin_orbitals, reference.occupation, pool);
    // Pool enumeration already lists singles before doubles.
    for i in 0..ansatz.pool.len() {
        ansatz.steps.push((i, 0.0));
    }
    Ok(ansatz)
}

/// Convenience: expectation of an arbitrary ansatz setting, used by tests.
pub fn ansatz_energy(ansatz: &AnsatzCircuit, plan: &EvalPlan) -> Result<f64> {
    let state = plan.prepare(ansatz)?;
    plan.energy(&state, 0)
}
