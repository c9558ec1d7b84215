//! Greedy gate-by-gate assembly: pick the pool operator whose exactly
//! interpolated one-parameter landscape reaches the lowest energy, freeze its
//! angle at that minimum, and repeat.
//!
//! For a generator G with G^3 = -lambda^2 G the energy along exp(theta G) is a
//! two-harmonic trigonometric polynomial in phi = lambda * theta:
//!
//!   E(phi) = a0 + a1 cos(phi) + b1 sin(phi) + a2 cos(2 phi) + b2 sin(2 phi)
//!
//! so five samples at phi in {0, +-pi/2, +-pi/4} determine it exactly.

use crate::error::{Error, Result};
use crate::pauli::PauliSum;

use super::{
    count_cnots, cubic_scale, AnsatzCircuit, Backend, CnotDecomposition, EngineState, EvalPlan,
    IterationRecord, OperatorPool, VqeOptions, VqeResult,
};

/// Coefficients of the interpolated landscape.
#[derive(Debug, Clone, Copy)]
pub struct Landscape {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Landscape {
    /// Solve the 5x5 system from samples at phi = 0, pi/2, -pi/2, pi/4, -pi/4.
    pub fn fit(e0: f64, ep2: f64, em2: f64, ep4: f64, em4: f64) -> Self {
        let rt2 = std::f64::consts::SQRT_2;
        let b1 = 0.5 * (ep2 - em2);
        let s = ep2 + em2; // 2 a0 - 2 a2
        let p = ep4 + em4; // 2 a0 + sqrt(2) a1
        let d = ep4 - em4; // sqrt(2) b1 + 2 b2
        let b2 = 0.5 * (d - rt2 * b1);
        let a0 = (e0 + 0.5 * s - p / rt2) / (2.0 - rt2);
        let a1 = rt2 * (0.5 * p - a0);
        let a2 = a0 - 0.5 * s;
        Landscape { a0, a1, b1, a2, b2 }
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.a0
            + self.a1 * phi.cos()
            + self.b1 * phi.sin()
            + self.a2 * (2.0 * phi).cos()
            + self.b2 * (2.0 * phi).sin()
    }

    fn derivative(&self, phi: f64) -> f64 {
        -self.a1 * phi.sin() + self.b1 * phi.cos() - 2.0 * self.a2 * (2.0 * phi).sin()
            + 2.0 * self.b2 * (2.0 * phi).cos()
    }

    fn second_derivative(&self, phi: f64) -> f64 {
        -self.a1 * phi.cos() - self.b1 * phi.sin() - 4.0 * self.a2 * (2.0 * phi).cos()
            - 4.0 * self.b2 * (2.0 * phi).sin()
    }

    /// Global minimum over one period, by dense sampling plus Newton polish.
    pub fn minimize(&self) -> (f64, f64) {
        let n = 720;
        let mut best_phi = 0.0;
        let mut best_e = self.value(0.0);
        for k in 0..n {
            let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let e = self.value(phi);
            if e < best_e {
                best_e = e;
                best_phi = phi;
            }
        }
        let mut phi = best_phi;
        for _ in 0..30 {
            let d2 = self.second_derivative(phi);
            if d2 <= 0.0 {
                break;
            }
            let step = self.derivative(phi) / d2;
            phi -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        let e = self.value(phi);
        if e <= best_e {
            (phi, e)
        } else {
            (best_phi, best_e)
        }
    }
}

fn energy_with_extra(
    plan: &EvalPlan,
    base: &EngineState,
    generator: &PauliSum,
    theta: f64,
    op_id: u64,
) -> Result<f64> {
    let mut state = base.clone();
    for gate in super::generator_gates(generator, theta)? {
        state.apply_gate(&gate)?;
    }
    plan.energy(&state, op_id)
}

/// Greedy grow-and-freeze VQE. Every pool generator must satisfy the cubic
/// closure G^3 = -lambda^2 G; otherwise the exact interpolation is invalid and
/// the run is rejected up front.
pub fn gga_vqe(
    h: &PauliSum,
    pool: &OperatorPool,
    backend: Backend,
    opts: &VqeOptions,
) -> Result<VqeResult> {
    let lambdas: Vec<f64> = pool
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let _ = g;
            cubic_scale(&pool.generators[i]).ok_or(Error::BadGgaGenerator(i))
        })
        .collect::<Result<_>>()?;

    let plan = EvalPlan::new(h, backend)?.with_shots(opts.shots.map(|s| (s, opts.seed)));
    let mut ansatz = AnsatzCircuit::new(h.n_qubits(), opts.reference, pool.clone());
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut n_energy_evals = 0u64;

    let state = plan.prepare(&ansatz)?;
    let mut energy = plan.energy(&state, 0)?;
    n_energy_evals += 1;

    for iteration in 0..opts.max_iterations {
        let base = plan.prepare(&ansatz)?;
        let mut best: Option<(usize, f64, f64)> = None; // (index, theta, energy)
        for (i, g) in pool.generators.iter().enumerate() {
            let lam = lambdas[i];
            let id = ((iteration as u64) << 24) | ((i as u64) << 4);
            let quarter = std::f64::consts::FRAC_PI_2 / lam;
            let eighth = std::f64::consts::FRAC_PI_4 / lam;
            let ep2 = energy_with_extra(&plan, &base, g, quarter, id + 1)?;
            let em2 = energy_with_extra(&plan, &base, g, -quarter, id + 2)?;
            let ep4 = energy_with_extra(&plan, &base, g, eighth, id + 3)?;
            let em4 = energy_with_extra(&plan, &base, g, -eighth, id + 4)?;
            n_energy_evals += 4;
            let fit = Landscape::fit(energy, ep2, em2, ep4, em4);
            let (phi, e_min) = fit.minimize();
            let better = match best {
                None => true,
                Some((_, _, e)) => e_min < e,
            };
            if better {
                best = Some((i, phi / lam, e_min));
            }
        }
        let (idx, theta, e_min) = best.expect("non-empty pool");
        let improvement = energy - e_min;
        if improvement < opts.eps_grad {
            break;
        }
        ansatz.steps.push((idx, theta));
        energy = e_min;
        trace.push(IterationRecord {
            iteration,
            energy,
            max_gradient: improvement,
            selected: vec![pool.labels[idx].clone()],
            flag: None,
        });
    }

    Ok(VqeResult {
        method: "gga".to_string(),
        backend: backend.name().to_string(),
        energy,
        thetas: ansatz.thetas(),
        operators: ansatz.step_labels(),
        trace,
        cnots_qubit: count_cnots(&ansatz, CnotDecomposition::Qubit).ok(),
        cnots_qeb: None,
        n_energy_evals,
        n_gradient_evals: 0,
        flag: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fit_recovers_known_coefficients() {
        let truth = Landscape { a0: 0.3, a1: -1.1, b1: 0.7, a2: 0.25, b2: -0.4 };
        let fit = Landscape::fit(
            truth.value(0.0),
            truth.value(std::f64::consts::FRAC_PI_2),
            truth.value(-std::f64::consts::FRAC_PI_2),
            truth.value(std::f64::consts::FRAC_PI_4),
            truth.value(-std::f64::consts::FRAC_PI_4),
        );
        assert_abs_diff_eq!(fit.a0, truth.a0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.a1, truth.a1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.b1, truth.b1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.a2, truth.a2, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.b2, truth.b2, epsilon = 1e-12);
    }

    #[test]
    fn minimize_finds_global_minimum() {
        let l = Landscape { a0: 0.0, a1: 1.0, b1: 0.0, a2: 0.0, b2: 0.0 };
        let (phi, e) = l.minimize();
        assert_abs_diff_eq!(phi.abs(), std::f64::consts::PI, epsilon = 1e-8);
        assert_abs_diff_eq!(e, -1.0, epsilon = 1e-12);
    }
}
