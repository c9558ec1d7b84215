//! Reversible Markov chains, their Szegedy quantization, and amplitude
//! estimation of stationary averages.

use ndarray::{Array1, Array2};
use ndarray_linalg::Eig;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::sv::{sample, tree_sum, GateOp};

/// A finite Markov chain with known stationary distribution and a bounded
/// observable `f: states -> [0, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovChainSpec {
    pub d: usize,
    /// Row-stochastic transition matrix, row-major.
    pub p: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub f: Vec<f64>,
}

impl MarkovChainSpec {
    pub fn new(p: Vec<Vec<f64>>, pi: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        let d = p.len();
        if d == 0 || pi.len() != d || f.len() != d {
            return Err(Error::Invalid("chain fields must share one dimension".into()));
        }
        for (row, r) in p.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Invalid("P must be square".into()));
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > 1e-12 || r.iter().any(|&v| v < 0.0) {
                return Err(Error::NotStochastic { row, sum });
            }
        }
        // pi P = pi
        for y in 0..d {
            let v: f64 = (0..d).map(|x| pi[x] * p[x][y]).sum();
            if (v - pi[y]).abs() > 1e-10 {
                return Err(Error::Invalid(format!(
                    "pi is not stationary (component {y}: {v} vs {})",
                    pi[y]
                )));
            }
        }
        if f.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Invalid("f values must lie in [0, 1]".into()));
        }
        Ok(MarkovChainSpec { d, p, pi, f })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MarkovChainSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        MarkovChainSpec::new(raw.p, raw.pi, raw.f)
    }

    /// Largest detailed-balance residual `|pi_x P_xy - pi_y P_yx|`.
    pub fn balance_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for x in 0..self.d {
            for y in 0..self.d {
                r = r.max((self.pi[x] * self.p[x][y] - self.pi[y] * self.p[y][x]).abs());
            }
        }
        r
    }

    /// Exact stationary average of f.
    pub fn mean(&self) -> f64 {
        self.pi.iter().zip(&self.f).map(|(p, f)| p * f).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainAnalysis {
    /// 1 - |second largest eigenvalue| of P.
    pub delta: f64,
    pub reversible: bool,
}

pub fn analyze_chain(c: &MarkovChainSpec) -> Result<ChainAnalysis> {
    let d = c.d;
    let mut m = Array2::<f64>::zeros((d, d));
    for x in 0..d {
        for y in 0..d {
            m[[x, y]] = c.p[x][y];
        }
    }
    let (eigs, _) = m
        .eig()
        .map_err(|e| Error::Invalid(format!("eigendecomposition failed: {e}")))?;
    let mut mags: Vec<f64> = eigs.iter().map(|e| e.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let second = if mags.len() > 1 { mags[1] } else { 0.0 };
    Ok(ChainAnalysis {
        delta: 1.0 - second,
        reversible: c.balance_residual() <= 1e-10,
    })
}

/// The Szegedy walk operator over the edge register |x>|y>, stored densely.
/// Basis index = x * d + y, so the y register occupies the low qubits.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    pub n_register_qubits: usize,
    pub matrix: Array2<Complex64>,
}

impl WalkOperator {
    pub fn apply(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        self.matrix.dot(v)
    }

    /// Max-norm deviation of W^dagger W from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.matrix.nrows();
        let wd = self.matrix.t().mapv(|v| v.conj()).dot(&self.matrix);
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((wd[[i, j]] - Complex64::new(want, 0.0)).norm());
            }
        }
        defect
    }

    /// The coherent stationary edge state `sum_xy sqrt(pi_x P_xy) |x,y>`.
    pub fn stationary_edge_state(c: &MarkovChainSpec) -> Array1<Complex64> {
        let d = c.d;
        let mut v = Array1::<Complex64>::zeros(d * d);
        for x in 0..d {
            for y in 0..d {
                v[x * d + y] = Complex64::new((c.pi[x] * c.p[x][y]).sqrt(), 0.0);
            }
        }
        v
    }
}

/// Generic Szegedy quantization `W = (2 Pi_B - 1)(2 Pi_A - 1)` where Pi_A
/// projects on span{|x>|p_x>} and Pi_B on span{|q_y>|y>} with
/// q_y = sum_x sqrt(P_yx) |x>. Requires detailed balance and d a power of 2.
pub fn szegedy_walk(c: &MarkovChainSpec) -> Result<WalkOperator> {
    let residual = c.balance_residual();
    if residual > 1e-10 {
        return Err(Error::NotReversible(residual));
    }
    let d = c.d;
    if !d.is_power_of_two() {
        return Err(Error::Invalid(format!(
            "state count {d} is not a power of two; pad the chain first"
        )));
    }
    let w = d.trailing_zeros() as usize;
    let dim = d * d;
    // Orthonormal frames: a_x = |x> |p_x>, b_y = |q_y> |y>.
    let mut pa = Array2::<Complex64>::zeros((dim, dim));
    let mut pb = Array2::<Complex64>::zeros((dim, dim));
    for x in 0..d {
        let amp: Vec<f64> = (0..d).map(|y| c.p[x][y].sqrt()).collect();
        for y1 in 0..d {
            for y2 in 0..d {
                pa[[x * d + y1, x * d + y2]] += Complex64::new(amp[y1] * amp[y2], 0.0);
            }
        }
    }
    for y in 0..d {
        let amp: Vec<f64> = (0..d).map(|x| c.p[y][x].sqrt()).collect();
        for x1 in 0..d {
            for x2 in 0..d {
                pb[[x1 * d + y, x2 * d + y]] += Complex64::new(amp[x1] * amp[x2], 0.0);
            }
        }
    }
    let eye = Array2::<Complex64>::eye(dim);
    let ra = pa.mapv(|v| v * 2.0) - &eye;
    let rb = pb.mapv(|v| v * 2.0) - &eye;
    Ok(WalkOperator { n_register_qubits: 2 * w, matrix: rb.dot(&ra) })
}

/// Uniformly-controlled Ry cascade preparing `sum_x sqrt(pi_x) |x>` on
/// ceil(log2 d) qubits (most significant qubit rotated first).
pub fn prepare_stationary(c: &MarkovChainSpec) -> Result<Vec<GateOp>> {
    let w = c.d.next_power_of_two().trailing_zeros().max(1) as usize;
    let mut probs = vec![0.0f64; 1 << w];
    probs[..c.d].copy_from_slice(&c.pi);
    let mut gates = Vec::new();
    // Rotate qubit w-1 down to 0; the multiplexor for qubit t is controlled
    // by the higher qubits t+1..w-1.
    for t in (0..w).rev() {
        let n_controls = w - 1 - t;
        let mut angles = vec![0.0f64; 1 << n_controls];
        for (ctrl, angle) in angles.iter_mut().enumerate() {
            // Probability mass of states whose high bits equal `ctrl`,
            // split by the value of bit t.
            let mut mass0 = 0.0;
            let mut mass1 = 0.0;
            for x in 0..(1usize << w) {
                if x >> (t + 1) == ctrl {
                    if x >> t & 1 == 0 {
                        mass0 += probs[x];
                    } else {
                        mass1 += probs[x];
                    }
                }
            }
            let total = mass0 + mass1;
            if total > 0.0 {
                *angle = 2.0 * (mass1 / total).sqrt().asin();
            }
        }
        multiplexed_ry(&angles, t, &mut gates);
    }
    Ok(gates)
}

/// Recursive decomposition of a uniformly-controlled Ry into plain Ry and
/// CNOT gates. `angles[ctrl]` is indexed by the control bits read at qubits
/// target+1, target+2, ... (LSB first).
fn multiplexed_ry(angles: &[f64], target: usize, out: &mut Vec<GateOp>) {
    if angles.len() == 1 {
        if angles[0] != 0.0 {
            out.push(GateOp::ry(angles[0], target));
        }
        return;
    }
    let half = angles.len() / 2;
    let control = target + 1 + half.trailing_zeros() as usize;
    // Ry(a) if control 0, Ry(b) if control 1 == CNOT-conjugated halves with
    // angles (a+b)/2 and (a-b)/2.
    let lo: Vec<f64> = (0..half).map(|i| (angles[i] + angles[i + half]) / 2.0).collect();
    let hi: Vec<f64> = (0..half).map(|i| (angles[i] - angles[i + half]) / 2.0).collect();
    multiplexed_ry(&lo, target, out);
    out.push(GateOp::Cnot { control, target });
    multiplexed_ry(&hi, target, out);
    out.push(GateOp::Cnot { control, target });
}

/// Histogram of amplitude-estimation outcomes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanEstimate {
    /// (estimate sin^2(pi k / 2^m), shot count), sorted by estimate.
    pub histogram: Vec<(f64, u64)>,
    /// Exact stationary mean for reference.
    pub exact_mean: f64,
    /// Probability that the marking ancilla reads 1 after one preparation.
    pub preparation_probability: f64,
}

/// Noiseless phase-outcome distribution of the amplitude-estimation circuit:
/// QPE with m bits over the Grover operator `Q = A S_0 A^dagger S_chi`, where
/// `A` prepares `sum_x sqrt(pi_x) |x> (sqrt(1-f_x)|0> + sqrt(f_x)|1>)`.
pub fn amplitude_estimation_phase_distribution(
    c: &MarkovChainSpec,
    m_bits: u32,
) -> Result<Vec<f64>> {
    let w = c.d.next_power_of_two().trailing_zeros().max(1) as usize;
    let dim = 1usize << (w + 1);
    // A |0> as a dense vector: state register low qubits, ancilla on top.
    let mut a0 = Array1::<Complex64>::zeros(dim);
    for x in 0..c.d {
        let root = c.pi[x].sqrt();
        a0[x] = Complex64::new(root * (1.0 - c.f[x]).sqrt(), 0.0);
        a0[x | 1 << w] = Complex64::new(root * c.f[x].sqrt(), 0.0);
    }
    // Dense A: extend A|0> to a unitary by greedy Gram-Schmidt, skipping
    // basis vectors that fall inside the span already collected.
    let a = extend_to_unitary(&a0);
    // Q = A S0 A^dagger S_chi.
    let adag = a.t().mapv(|v| v.conj());
    let mut s0 = Array2::<Complex64>::eye(dim);
    s0[[0, 0]] = Complex64::new(-1.0, 0.0);
    let mut schi = Array2::<Complex64>::eye(dim);
    for i in 0..dim {
        if i >> w & 1 == 1 {
            schi[[i, i]] = Complex64::new(-1.0, 0.0);
        }
    }
    let q = a.dot(&s0).dot(&adag).dot(&schi).mapv(|v| -v);
    // Textbook QPE: |psi_final(j)> = 2^-m sum_k exp(-2 pi i j k / 2^m) Q^k A|0>.
    let big_m = 1usize << m_bits;
    let mut powers = Vec::with_capacity(big_m);
    let mut cur = a0.clone();
    for _ in 0..big_m {
        powers.push(cur.clone());
        cur = q.dot(&cur);
    }
    let mut out = vec![0.0f64; big_m];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = Array1::<Complex64>::zeros(dim);
        for (k, psi) in powers.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (j * k) as f64 / big_m as f64;
            let ph = Complex64::from_polar(1.0, phase);
            acc.zip_mut_with(psi, |a, b| *a += ph * b);
        }
        let norms: Vec<f64> = acc.iter().map(|v| v.norm_sqr()).collect();
        *slot = tree_sum(&norms) / (big_m * big_m) as f64;
    }
    Ok(out)
}

/// Sampled amplitude estimation of `E_pi(f)`. Phase outcomes k map to the
/// estimate sin^2(pi k / 2^m); k and 2^m - k land on the same estimate.
pub fn estimate_mean(
    c: &MarkovChainSpec,
    m_bits: u32,
    shots: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    let dist = amplitude_estimation_phase_distribution(c, m_bits)?;
    let probs: Vec<(u64, f64)> = dist
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as u64, p))
        .collect();
    let hist = sample(&probs, shots, seed, 0xae)?;
    let big_m = 1u64 << m_bits;
    let mut merged: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
    for (k, count) in hist {
        let key = if k == 0 { 0 } else { k.min(big_m - k) };
        *merged.entry(key).or_insert(0) += count;
    }
    let histogram = merged
        .into_iter()
        .map(|(k, count)| {
            let est = (std::f64::consts::PI * k as f64 / big_m as f64).sin().powi(2);
            (est, count)
        })
        .collect();
    Ok(MeanEstimate {
        histogram,
        exact_mean: c.mean(),
        preparation_probability: c.mean(),
    })
}

/// Unitary whose first column is `first` (assumed normalized); remaining
/// columns come from orthonormalizing computational basis vectors.
fn extend_to_unitary(first: &Array1<Complex64>) -> Array2<Complex64> {
    let dim = first.len();
    let mut cols: Vec<Array1<Complex64>> = vec![first.clone()];
    for i in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut cand = Array1::<Complex64>::zeros(dim);
        cand[i] = Complex64::new(1.0, 0.0);
        for c in &cols {
            let proj: Complex64 = c.iter().zip(cand.iter()).map(|(a, b)| a.conj() * b).sum();
            cand.zip_mut_with(c, |x, y| *x -= proj * y);
        }
        let norm = cand.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cand.mapv_inplace(|v| v / norm);
            cols.push(cand);
        }
    }
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    for (j, c) in cols.iter().enumerate() {
        m.column_mut(j).assign(c);
    }
    m
}

/// Time-average of f along one simulated trajectory started from a
/// pi-distributed state; deterministic per seed.
pub fn classical_mcmc_mean(c: &MarkovChainSpec, steps: usize, seed: u64) -> f64 {
    assert!(steps >= 1);
    let mut rng = derive_rng(seed, 0x3c);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, weights: &[f64]| -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    };
    let mut state = draw(&mut rng, &c.pi);
    let mut total = 0.0;
    for _ in 0..steps {
        total += c.f[state];
        state = draw(&mut rng, &c.p[state]);
    }
    total / steps as f64
}

/// Apply a fixed qubit permutation to basis indices: output bit `i` takes
/// the value of input bit `perm[i]`.
pub fn permute_qubits(index: u64, perm: &[usize]) -> u64 {
    let mut out = 0u64;
    for (i, &source) in perm.iter().enumerate() {
        if index >> source & 1 == 1 {
            out |= 1 << i;
        }
    }
    out
}

/// The lazy hypercube walk on 2^bits states: stay with probability 1/2, else
/// flip a uniformly random bit. Uniform stationary distribution.
pub fn lazy_hypercube_chain(bits: usize, f: Vec<f64>) -> Result<MarkovChainSpec> {
    let d = 1usize << bits;
    let mut p = vec![vec![0.0; d]; d];
    for (x, row) in p.iter_mut().enumerate() {
        row[x] = 0.5;
        for b in 0..bits {
            row[x ^ (1 << b)] = 0.5 / bits as f64;
        }
    }
    MarkovChainSpec::new(p, vec![1.0 / d as f64; d], f)
}
