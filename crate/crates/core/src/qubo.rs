//! QUBO problems and the QUBO -> Ising mapping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::IsingModel;

/// `min_{x in {0,1}^N} x^T Q x` with symmetric `Q`. Off-diagonal couplings are
/// counted twice by the quadratic form, as usual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuboProblem {
    pub n: usize,
    /// Dense symmetric matrix, row-major `n x n`.
    pub q: Vec<Vec<f64>>,
    /// Optional site positions (angstrom) carried through the hydration pipeline.
    #[serde(default)]
    pub site_positions: Vec<[f64; 3]>,
}

impl QuboProblem {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        let n = q.len();
        if n == 0 {
            return Err(Error::Invalid("QUBO must have N >= 1".into()));
        }
        let mut defect = 0.0f64;
        for i in 0..n {
            if q[i].len() != n {
                return Err(Error::Invalid("QUBO matrix must be square".into()));
            }
            for j in 0..n {
                defect = defect.max((q[i][j] - q[j][i]).abs());
            }
        }
        if defect > 1e-12 {
            return Err(Error::AsymmetricQubo(defect));
        }
        Ok(QuboProblem { n, q, site_positions: Vec::new() })
    }

    /// Cost `x^T Q x` of an assignment given as a bitmask.
    pub fn cost(&self, x: u64) -> f64 {
        let mut c = 0.0;
        for i in 0..self.n {
            if x >> i & 1 == 0 {
                continue;
            }
            for j in 0..self.n {
                if x >> j & 1 == 1 {
                    c += self.q[i][j];
                }
            }
        }
        c
    }
}

/// Substitute `x_i = (1 - z_i)/2`; the resulting Ising energy over z in
/// {-1,+1}^N equals the QUBO cost for the corresponding x, offset included.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingModel {
    let n = q.n;
    let mut constant = 0.0;
    let mut linear = vec![0.0; n];
    let mut quadratic = vec![vec![0.0; n]; n];
    for i in 0..n {
        // Q_ii x_i = Q_ii (1 - z_i)/2
        constant += q.q[i][i] / 2.0;
        linear[i] -= q.q[i][i] / 2.0;
        for j in (i + 1)..n {
            // (Q_ij + Q_ji) x_i x_j = 2 Q_ij (1-z_i)(1-z_j)/4
            let w = q.q[i][j]; // == q.q[j][i]
            constant += w / 2.0;
            linear[i] -= w / 2.0;
            linear[j] -= w / 2.0;
            quadratic[i][j] += w / 2.0;
        }
    }
    IsingModel { n_spins: n, constant, linear, quadratic }
}
