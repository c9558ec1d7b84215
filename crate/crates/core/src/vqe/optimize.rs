//! BFGS parameter optimization over ansatz angles.
//!
//! Gradients use the two-point parameter-shift rule when a generator is a
//! single Pauli term (G² = -r²·I holds symbolically), central finite
//! differences otherwise.

use crate::error::Result;
use crate::pauli::PauliSum;

use super::{AnsatzCircuit, EvalPlan};

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    /// Stop when the gradient's max norm falls below this.
    pub eps_grad: f64,
    /// Total energy-evaluation budget.
    pub max_evals: u64,
    /// Central finite-difference step for multi-term generators.
    pub fd_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { eps_grad: 1e-7, max_evals: 20_000, fd_step: 1e-5 }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub thetas: Vec<f64>,
    pub energy: f64,
    pub n_energy_evals: u64,
    /// Set when the evaluation budget ran out before convergence.
    pub budget_exhausted: bool,
}

/// Shift scale r for the parameter-shift rule, if one exists: requires a
/// single-term generator i·r·P, for which E(θ ± π/(4r)) gives the exact
/// derivative.
fn shift_scale(g: &PauliSum) -> Option<f64> {
    if g.n_terms() != 1 {
        return None;
    }
    let (c, _) = g.iter().next()?;
    if c.re.abs() > 1e-12 {
        return None;
    }
    let r = c.im.abs();
    if r < 1e-15 {
        None
    } else {
        Some(r)
    }
}

struct Evaluator<'a> {
    ansatz: AnsatzCircuit,
    plan: &'a EvalPlan,
    n_evals: u64,
    op_counter: u64,
}

impl<'a> Evaluator<'a> {
    fn energy(&mut self, thetas: &[f64]) -> Result<f64> {
        self.ansatz.set_thetas(thetas);
        let state = self.plan.prepare(&self.ansatz)?;
        self.n_evals += 1;
        self.op_counter += 1;
        self.plan.energy(&state, self.op_counter)
    }

    /// Parameter-shift / central-FD gradient, one component per step.
    fn gradient(&mut self, thetas: &[f64], opts: &OptimizeOptions) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; thetas.len()];
        for k in 0..thetas.len() {
            let gen = &self.ansatz.pool.generators[self.ansatz.steps[k].0].clone();
            let mut plus = thetas.to_vec();
            let mut minus = thetas.to_vec();
            if let Some(r) = shift_scale(gen) {
                let s = std::f64::consts::FRAC_PI_4 / r;
                plus[k] += s;
                minus[k] -= s;
                grad[k] = r * (self.energy(&plus)? - self.energy(&minus)?);
            } else {
                plus[k] += opts.fd_step;
                minus[k] -= opts.fd_step;
                grad[k] = (self.energy(&plus)? - self.energy(&minus)?) / (2.0 * opts.fd_step);
            }
        }
        Ok(grad)
    }
}

/// Minimize the ansatz energy over its angles with BFGS and a backtracking
/// line search; budget exhaustion returns best-seen with a flag.
pub fn optimize_parameters(
    ansatz: &AnsatzCircuit,
    plan: &EvalPlan,
    opts: &OptimizeOptions,
) -> Result<OptimizeOutcome> {
    let n = ansatz.steps.len();
    let mut ev = Evaluator {
        ansatz: ansatz.clone(),
        plan,
        n_evals: 0,
        op_counter: 0x0907 << 32,
    };
    let mut x = ansatz.thetas();
    let mut f = ev.energy(&x)?;
    if n == 0 {
        return Ok(OptimizeOutcome {
            thetas: x,
            energy: f,
            n_energy_evals: ev.n_evals,
            budget_exhausted: false,
        });
    }
    let mut g = ev.gradient(&x, opts)?;
    // Inverse-Hessian approximation, dense row-major identity.
    let mut hinv = vec![0.0f64; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let (mut best_x, mut best_f) = (x.clone(), f);
    let mut exhausted = false;
    for _ in 0..500 {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax < opts.eps_grad {
            break;
        }
        if ev.n_evals >= opts.max_evals {
            exhausted = true;
            break;
        }
        // d = -Hinv g
        let mut d = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += hinv[i * n + j] * g[j];
            }
            d[i] = -s;
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // Reset a non-descent direction to steepest descent.
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
                d[i] = -g[i];
            }
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        // Backtracking Armijo search.
        let mut step = 1.0;
        let mut xn;
        let mut fn_;
        loop {
            xn = x.iter().zip(&d).map(|(a, b)| a + step * b).collect::<Vec<_>>();
            fn_ = ev.energy(&xn)?;
            if fn_ <= f + 1e-4 * step * slope || step < 1e-12 {
                break;
            }
            if ev.n_evals >= opts.max_evals {
                exhausted = true;
                break;
            }
            step *= 0.5;
        }
        if exhausted || step < 1e-12 {
            if fn_ < best_f {
                best_f = fn_;
                best_x = xn;
            }
            if step < 1e-12 {
                break;
            }
            continue;
        }
        let gn = ev.gradient(&xn, opts)?;
        // BFGS update.
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            // Hinv = (I - rho s yT) Hinv (I - rho y sT) + rho s sT
            let mut hy = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    hy[i] += hinv[i * n + j] * y[j];
                }
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }
        x = xn;
        f = fn_;
        g = gn;
        if f < best_f {
            best_f = f;
            best_x = x.clone();
        }
    }
    Ok(OptimizeOutcome {
        thetas: best_x,
        energy: best_f,
        n_energy_evals: ev.n_evals,
        budget_exhausted: exhausted,
    })
}
