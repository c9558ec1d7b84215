//! Overlap-guided adaptive state preparation: grow an ansatz that maximizes
//! |<target|psi>| instead of minimizing an energy.

use num_complex::Complex64;

use crate::error::Result;
use crate::sv::SparseState;

use super::{AnsatzCircuit, IterationRecord, OperatorPool, OptimizeOptions, VqeResult};

/// Result of one overlap-ADAPT run.
#[derive(Debug, Clone)]
pub struct OverlapResult {
    pub overlap: f64,
    pub thetas: Vec<f64>,
    pub operators: Vec<String>,
    pub trace: Vec<IterationRecord>,
    pub flag: Option<String>,
}

fn prepare_sparse(ansatz: &AnsatzCircuit) -> Result<SparseState> {
    let mut state = SparseState::basis_state(ansatz.n_qubits, ansatz.reference);
    for &(idx, theta) in &ansatz.steps {
        if theta == 0.0 {
            continue;
        }
        for gate in super::generator_gates(&ansatz.pool.generators[idx], theta)? {
            state.apply_gate(&gate)?;
        }
    }
    Ok(state)
}

fn overlap_objective(ansatz: &AnsatzCircuit, target: &SparseState) -> Result<(f64, Complex64)> {
    let psi = prepare_sparse(ansatz)?;
    let ov = target.inner(&psi);
    Ok((1.0 - ov.norm_sqr(), ov))
}

fn numeric_gradient(
    ansatz: &AnsatzCircuit,
    target: &SparseState,
    step: f64,
) -> Result<(Vec<f64>, u64)> {
    let mut probe = ansatz.clone();
    let thetas = ansatz.thetas();
    let mut grad = vec![0.0; thetas.len()];
    let mut evals = 0u64;
    for k in 0..thetas.len() {
        let mut plus = thetas.clone();
        plus[k] += step;
        probe.set_thetas(&plus);
        let (fp, _) = overlap_objective(&probe, target)?;
        let mut minus = thetas.clone();
        minus[k] -= step;
        probe.set_thetas(&minus);
        let (fm, _) = overlap_objective(&probe, target)?;
        grad[k] = (fp - fm) / (2.0 * step);
        evals += 2;
    }
    probe.set_thetas(&thetas);
    Ok((grad, evals))
}

/// Minimize f(theta) = 1 - |<target|psi>|^2 over all current angles with the
/// same BFGS machinery as the energy path, but driven by finite differences on
/// the overlap objective.
fn optimize_overlap(
    ansatz: &mut AnsatzCircuit,
    target: &SparseState,
    opts: &OptimizeOptions,
) -> Result<(f64, bool)> {
    let n = ansatz.steps.len();
    if n == 0 {
        let (f, _) = overlap_objective(ansatz, target)?;
        return Ok((f, false));
    }
    let mut thetas = ansatz.thetas();
    let mut hinv = vec![vec![0.0; n]; n];
    for (k, row) in hinv.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    ansatz.set_thetas(&thetas);
    let (mut f, _) = overlap_objective(ansatz, target)?;
    let mut evals = 1u64;
    let (mut grad, e) = numeric_gradient(ansatz, target, opts.fd_step)?;
    evals += e;
    let mut budget_exhausted = false;

    for _ in 0..500 {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < opts.eps_grad {
            break;
        }
        if evals >= opts.max_evals {
            budget_exhausted = true;
            break;
        }
        let mut dir = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                dir[i] -= hinv[i][j] * grad[j];
            }
        }
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            for (k, row) in hinv.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if j == k { 1.0 } else { 0.0 };
                }
            }
            for k in 0..n {
                dir[k] = -grad[k];
            }
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut new_thetas = thetas.clone();
        let mut new_f = f;
        while step > 1e-12 {
            for k in 0..n {
                new_thetas[k] = thetas[k] + step * dir[k];
            }
            ansatz.set_thetas(&new_thetas);
            let (ft, _) = overlap_objective(ansatz, target)?;
            evals += 1;
            if ft <= f + 1e-4 * step * slope {
                new_f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        ansatz.set_thetas(&new_thetas);
        let (new_grad, e) = numeric_gradient(ansatz, target, opts.fd_step)?;
        evals += e;
        let s: Vec<f64> = (0..n).map(|k| new_thetas[k] - thetas[k]).collect();
        let y: Vec<f64> = (0..n).map(|k| new_grad[k] - grad[k]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let mut hy = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    hy[i] += hinv[i][j] * y[j];
                }
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let c1 = (sy + yhy) / (sy * sy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        thetas = new_thetas;
        f = new_f;
        grad = new_grad;
    }
    ansatz.set_thetas(&thetas);
    Ok((f, budget_exhausted))
}

/// Grow an ansatz toward `target`. At each iteration the pool operator with
/// the largest overlap gradient
///
///   d/dtheta |<t|exp(theta G)|psi>|^2 at theta = 0  =  2 Re(<t|G|psi> <psi|t>)
///
/// is appended and all angles are re-optimized jointly. Stops when the overlap
/// reaches `1 - tol`, the gradient stalls, or the iteration cap is hit.
pub fn overlap_adapt(
    target: &SparseState,
    pool: &OperatorPool,
    reference: u64,
    tol: f64,
    max_iterations: usize,
    opt: &OptimizeOptions,
) -> Result<OverlapResult> {
    let n_qubits = target.n_qubits();
    let mut ansatz = AnsatzCircuit::new(n_qubits, reference, pool.clone());
    let mut trace = Vec::new();
    let mut flag = None;

    let (mut f, mut ov) = overlap_objective(&ansatz, target)?;
    for iteration in 0..max_iterations {
        if f <= tol {
            break;
        }
        let psi = prepare_sparse(&ansatz)?;
        let mut best = (0usize, 0.0f64);
        for (i, g) in pool.generators.iter().enumerate() {
            let gpsi = psi.apply_pauli_sum(g)?;
            let t_g_psi = target.inner(&gpsi);
            let grad = 2.0 * (t_g_psi * ov.conj()).re;
            if grad.abs() > best.1.abs() {
                best = (i, grad);
            }
        }
        if best.1.abs() < 1e-10 {
            flag = Some("overlap gradient stalled".to_string());
            break;
        }
        ansatz.steps.push((best.0, 0.0));
        let (new_f, exhausted) = optimize_overlap(&mut ansatz, target, opt)?;
        if exhausted {
            flag = Some("optimizer budget exhausted".to_string());
        }
        f = new_f;
        let (_, new_ov) = overlap_objective(&ansatz, target)?;
        ov = new_ov;
        trace.push(IterationRecord {
            iteration,
            energy: f,
            max_gradient: best.1.abs(),
            selected: vec![pool.labels[best.0].clone()],
            flag: None,
        });
    }

    Ok(OverlapResult {
        overlap: (1.0 - f).max(0.0).sqrt(),
        thetas: ansatz.thetas(),
        operators: ansatz.step_labels(),
        trace,
        flag,
    })
}

/// Convenience wrapper shaping an overlap run like a `VqeResult` (energy slot
/// holds the final objective value 1 - |overlap|^2).
pub fn overlap_adapt_result(
    target: &SparseState,
    pool: &OperatorPool,
    reference: u64,
    tol: f64,
    max_iterations: usize,
    opt: &OptimizeOptions,
) -> Result<VqeResult> {
    let r = overlap_adapt(target, pool, reference, tol, max_iterations, opt)?;
    Ok(VqeResult {
        method: "overlap-adapt".to_string(),
        backend: "sparse".to_string(),
        energy: 1.0 - r.overlap * r.overlap,
        thetas: r.thetas,
        operators: r.operators,
        trace: r.trace,
        cnots_qubit: None,
        cnots_qeb: None,
        n_energy_evals: 0,
        n_gradient_evals: 0,
        flag: r.flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vqe::{build_pool_sized, PoolKind};
    use num_complex::Complex64;

    #[test]
    fn bell_state_single_rotation() {
        // |Phi+> = (|00> + |11>)/sqrt(2), pool = {i Y0 X1}. One rotation in
        // the {|00>, |11>} plane reaches the target exactly at theta = -pi/4.
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let target = crate::sv::DenseState::from_amplitudes(2, vec![amp, zero, zero, amp])
            .unwrap()
            .to_sparse();
        let yx = crate::pauli::PauliString::from_label("YX").unwrap();
        let g = crate::pauli::PauliSum::from_terms(2, vec![(Complex64::i(), yx)]).unwrap();
        let pool = OperatorPool {
            kind: PoolKind::Qubit,
            generators: vec![g],
            labels: vec!["iYX".to_string()],
        };
        let r = overlap_adapt(&target, &pool, 0, 1e-10, 20, &Default::default()).unwrap();
        assert!(r.overlap > 1.0 - 1e-6, "overlap {}", r.overlap);
        assert_eq!(r.thetas.len(), 1);
        assert!(
            (r.thetas[0].abs() - std::f64::consts::FRAC_PI_4).abs() < 1e-5,
            "theta {}",
            r.thetas[0]
        );
    }

    #[test]
    fn already_prepared_target_needs_no_steps() {
        let target = SparseState::basis_state(3, 0b101);
        let pool = build_pool_sized(PoolKind::MinimalComplete, 3, 1, false).unwrap();
        let r = overlap_adapt(&target, &pool, 0b101, 1e-12, 10, &Default::default()).unwrap();
        assert!(r.operators.is_empty());
        assert!(r.overlap > 1.0 - 1e-12);
    }
}
