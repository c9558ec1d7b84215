//! ADAPT-VQE and its batched (MB-ADAPT) variant.

use crate::error::Result;
use crate::pauli::PauliSum;

use super::{
    count_cnots, optimize_parameters, AnsatzCircuit, CnotDecomposition, EvalPlan,
    IterationRecord, OperatorPool, PoolKind, VqeOptions, VqeResult,
};

/// Top-k selection by |gradient| with the deterministic (|g| desc, index asc)
/// tie-break. k = 1 is plain ADAPT selection.
pub fn mb_adapt_step(gradients: &[f64], batch_size: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gradients.len()).collect();
    order.sort_by(|&a, &b| {
        gradients[b]
            .abs()
            .total_cmp(&gradients[a].abs())
            .then(a.cmp(&b))
    });
    order.truncate(batch_size.max(1));
    order
}

/// Grow an ansatz operator-by-operator (or batch-by-batch), re-optimizing all
/// angles after each append, until the largest pool gradient falls below
/// `eps_grad` or the iteration cap is reached.
pub fn adapt_vqe(
    h: &PauliSum,
    pool: &OperatorPool,
    backend: super::Backend,
    opts: &VqeOptions,
) -> Result<VqeResult> {
    let plan = EvalPlan::new(h, backend)?.with_shots(opts.shots.map(|s| (s, opts.seed)));
    let mut ansatz = AnsatzCircuit::new(h.n_qubits(), opts.reference, pool.clone());
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut n_energy_evals = 0u64;
    let mut n_gradient_evals = 0u64;
    let mut flag = None;

    let state = plan.prepare(&ansatz)?;
    let mut energy = plan.energy(&state, 0)?;
    n_energy_evals += 1;

    for iteration in 0..opts.max_iterations {
        let state = plan.prepare(&ansatz)?;
        let grads = plan.pool_gradients(&state, pool, (iteration as u64) << 20)?;
        n_gradient_evals += grads.len() as u64;
        let selected = mb_adapt_step(&grads, opts.batch_size);
        let max_grad = grads[selected[0]].abs();
        if max_grad < opts.eps_grad {
            break;
        }
        for &idx in &selected {
            ansatz.steps.push((idx, 0.0));
        }
        let outcome = optimize_parameters(&ansatz, &plan, &opts.optimize)?;
        n_energy_evals += outcome.n_energy_evals;
        let iter_flag = if outcome.budget_exhausted {
            flag = Some("optimizer budget exhausted".to_string());
            Some("optimizer budget exhausted".to_string())
        } else {
            None
        };
        ansatz.set_thetas(&outcome.thetas);
        energy = outcome.energy;
        trace.push(IterationRecord {
            iteration,
            energy,
            max_gradient: max_grad,
            selected: selected
                .iter()
                .map(|&i| pool.labels[i].clone())
                .collect(),
            flag: iter_flag,
        });
    }

    let cnots_qubit = count_cnots(&ansatz, CnotDecomposition::Qubit).ok();
    let cnots_qeb = match pool.kind {
        PoolKind::Qeb | PoolKind::FermionicSD => {
            count_cnots(&ansatz, CnotDecomposition::Qeb).ok()
        }
        _ => None,
    };
    Ok(VqeResult {
        method: if opts.batch_size > 1 { "mb-adapt" } else { "adapt" }.to_string(),
        backend: backend.name().to_string(),
        energy,
        thetas: ansatz.thetas(),
        operators: ansatz.step_labels(),
        trace,
        cnots_qubit,
        cnots_qeb,
        n_energy_evals,
        n_gradient_evals,
        flag,
    })
}

/// Optimize a fixed ansatz (e.g. tUCCSD) without growing it.
pub fn fixed_ansatz_vqe(
    h: &PauliSum,
    ansatz: &AnsatzCircuit,
    backend: super::Backend,
    opts: &VqeOptions,
) -> Result<VqeResult> {
    let plan = EvalPlan::new(h, backend)?.with_shots(opts.shots.map(|s| (s, opts.seed)));
    let outcome = optimize_parameters(ansatz, &plan, &opts.optimize)?;
    let mut optimized = ansatz.clone();
    optimized.set_thetas(&outcome.thetas);
    Ok(VqeResult {
        method: "tuccsd".to_string(),
        backend: backend.name().to_string(),
        energy: outcome.energy,
        thetas: outcome.thetas,
        operators: optimized.step_labels(),
        trace: Vec::new(),
        cnots_qubit: count_cnots(&optimized, CnotDecomposition::Qubit).ok(),
        cnots_qeb: count_cnots(&optimized, CnotDecomposition::Qeb).ok(),
        n_energy_evals: outcome.n_energy_evals,
        n_gradient_evals: 0,
        flag: outcome
            .budget_exhausted
            .then(|| "optimizer budget exhausted".to_string()),
    })
}
