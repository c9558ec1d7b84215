//! Dense and sparse state-vector emulation: gate application, Pauli-rotation
//! exponentials, expectation values, shot sampling, and Trotterized time
//! evolution.
//!
//! The sparse representation stores only amplitudes above
//! [`SPARSITY_THRESHOLD`] and never materializes the dense 2^n vector; all
//! kernels cost `O(terms * nonzeros)`.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::rng::derive_rng;

/// Amplitudes below this magnitude are dropped from sparse states.
pub const SPARSITY_THRESHOLD: f64 = 1e-14;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct DenseState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct SparseState {
    n_qubits: usize,
    entries: HashMap<u64, Complex64>,
}

/// Elementary circuit operation.
#[derive(Clone, Debug)]
pub enum GateOp {
    /// Arbitrary single-qubit unitary; checked for unitarity on construction.
    OneQubit { u: [[Complex64; 2]; 2], target: usize },
    Cnot { control: usize, target: usize },
    /// `exp(-i theta P / 2)` for a phase-free Pauli string P.
    PauliRotation { axis: PauliString, theta: f64 },
}

fn unitarity_defect(u: &[[Complex64; 2]; 2]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = ZERO;
            for k in 0..2 {
                s += u[k][i].conj() * u[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((s - target).norm());
        }
    }
    d
}

impl GateOp {
    pub fn one_qubit(u: [[Complex64; 2]; 2], target: usize) -> Result<Self> {
        let d = unitarity_defect(&u);
        if d > 1e-12 {
            return Err(Error::NotUnitary(d));
        }
        Ok(GateOp::OneQubit { u, target })
    }

    pub fn x(target: usize) -> Self {
        GateOp::OneQubit {
            u: [[ZERO, Complex64::new(1.0, 0.0)], [Complex64::new(1.0, 0.0), ZERO]],
            target,
        }
    }

    pub fn h(target: usize) -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        GateOp::OneQubit { u: [[s, s], [s, -s]], target }
    }

    pub fn rx(theta: f64, target: usize) -> Self {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, -(theta / 2.0).sin());
        GateOp::OneQubit { u: [[c, s], [s, c]], target }
    }

    pub fn ry(theta: f64, target: usize) -> Self {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new((theta / 2.0).sin(), 0.0);
        GateOp::OneQubit { u: [[c, -s], [s, c]], target }
    }

    pub fn rz(theta: f64, target: usize) -> Self {
        let em = Complex64::from_polar(1.0, -theta / 2.0);
        let ep = Complex64::from_polar(1.0, theta / 2.0);
        GateOp::OneQubit { u: [[em, ZERO], [ZERO, ep]], target }
    }

    /// Inverse gate.
    pub fn dagger(&self) -> GateOp {
        match self {
            GateOp::OneQubit { u, target } => GateOp::OneQubit {
                u: [
                    [u[0][0].conj(), u[1][0].conj()],
                    [u[0][1].conj(), u[1][1].conj()],
                ],
                target: *target,
            },
            GateOp::Cnot { .. } => self.clone(),
            GateOp::PauliRotation { axis, theta } => {
                GateOp::PauliRotation { axis: *axis, theta: -theta }
            }
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= n_qubits {
                Err(Error::QubitOutOfRange { index: q, n_qubits })
            } else {
                Ok(())
            }
        };
        match self {
            GateOp::OneQubit { target, .. } => check(*target),
            GateOp::Cnot { control, target } => {
                check(*control)?;
                check(*target)?;
                if control == target {
                    return Err(Error::Invalid("CNOT control equals target".into()));
                }
                Ok(())
            }
            GateOp::PauliRotation { axis, .. } => {
                if axis.n_qubits() != n_qubits {
                    return Err(Error::WidthMismatch(axis.n_qubits(), n_qubits));
                }
                Ok(())
            }
        }
    }
}

impl DenseState {
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        let mut amps = vec![ZERO; 1usize << n_qubits];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        DenseState { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Invalid("amplitude vector length != 2^n".into()));
        }
        Ok(DenseState { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, rhs: &DenseState) -> Complex64 {
        self.amps
            .iter()
            .zip(&rhs.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_gate(&mut self, g: &GateOp) -> Result<()> {
        g.validate(self.n_qubits)?;
        match g {
            GateOp::OneQubit { u, target } => {
                let bit = 1usize << *target;
                for b in 0..self.amps.len() {
                    if b & bit != 0 {
                        continue;
                    }
                    let a0 = self.amps[b];
                    let a1 = self.amps[b | bit];
                    self.amps[b] = u[0][0] * a0 + u[0][1] * a1;
                    self.amps[b | bit] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
            GateOp::Cnot { control, target } => {
                let cbit = 1usize << *control;
                let tbit = 1usize << *target;
                for b in 0..self.amps.len() {
                    if b & cbit != 0 && b & tbit == 0 {
                        self.amps.swap(b, b | tbit);
                    }
                }
            }
            GateOp::PauliRotation { axis, theta } => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let mis = Complex64::new(0.0, -(theta / 2.0).sin());
                let x = axis.x_mask();
                let mut out = vec![ZERO; self.amps.len()];
                for b in 0..self.amps.len() as u64 {
                    let src = b ^ x;
                    let (_, f) = axis.apply_to_basis(src);
                    out[b as usize] = c * self.amps[b as usize] + mis * f * self.amps[src as usize];
                }
                self.amps = out;
            }
        }
        Ok(())
    }

    /// `h |psi>` (unnormalized).
    pub fn apply_pauli_sum(&self, h: &PauliSum) -> Result<DenseState> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch(h.n_qubits(), self.n_qubits));
        }
        let mut out = vec![ZERO; self.amps.len()];
        for &(coeff, x, z) in h.raw_terms() {
            let p = PauliString::from_masks(self.n_qubits, x, z);
            for b in 0..self.amps.len() as u64 {
                let a = self.amps[b as usize];
                if a == ZERO {
                    continue;
                }
                let (to, f) = p.apply_to_basis(b);
                out[to as usize] += coeff * f * a;
            }
        }
        DenseState::from_amplitudes(self.n_qubits, out)
    }

    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        let defect = h.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        let per_term: Vec<f64> = h
            .raw_terms()
            .iter()
            .map(|&(coeff, x, z)| {
                let p = PauliString::from_masks(self.n_qubits, x, z);
                let mut acc = ZERO;
                for b in 0..self.amps.len() as u64 {
                    let a = self.amps[b as usize];
                    if a == ZERO {
                        continue;
                    }
                    let (to, f) = p.apply_to_basis(b);
                    acc += self.amps[to as usize].conj() * f * a;
                }
                (coeff * acc).re
            })
            .collect();
        Ok(tree_sum(&per_term))
    }

    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(b, a)| (b as u64, a.norm_sqr()))
            .collect()
    }

    pub fn to_sparse(&self) -> SparseState {
        let entries = self
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() >= SPARSITY_THRESHOLD)
            .map(|(b, a)| (b as u64, *a))
            .collect();
        SparseState { n_qubits: self.n_qubits, entries }
    }
}

impl SparseState {
    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        let mut entries = HashMap::new();
        entries.insert(index, Complex64::new(1.0, 0.0));
        SparseState { n_qubits, entries }
    }

    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.entries.get(&index).copied().unwrap_or(ZERO)
    }

    /// Entries sorted by basis index.
    pub fn sorted_entries(&self) -> Vec<(u64, Complex64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(&b, &a)| (b, a)).collect();
        v.sort_by_key(|&(b, _)| b);
        v
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.sorted_entries().iter().map(|(_, a)| a.norm_sqr()).collect();
        tree_sum(&sq).sqrt()
    }

    pub fn inner(&self, rhs: &SparseState) -> Complex64 {
        let (small, big) = if self.entries.len() <= rhs.entries.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut terms: Vec<(u64, Complex64)> = small
            .entries
            .iter()
            .filter_map(|(&b, &a)| big.entries.get(&b).map(|&c| (b, a, c)))
            .map(|(b, a, c)| {
                if std::ptr::eq(small, self) {
                    (b, a.conj() * c)
                } else {
                    (b, c.conj() * a)
                }
            })
            .collect();
        terms.sort_by_key(|&(b, _)| b);
        let vals: Vec<Complex64> = terms.into_iter().map(|(_, v)| v).collect();
        tree_sum_c(&vals)
    }

    pub fn scale(&mut self, f: f64) {
        for a in self.entries.values_mut() {
            *a *= f;
        }
    }

    fn prune(&mut self) {
        self.entries.retain(|_, a| a.norm() >= SPARSITY_THRESHOLD);
    }

    pub fn apply_gate(&mut self, g: &GateOp) -> Result<()> {
        g.validate(self.n_qubits)?;
        match g {
            GateOp::OneQubit { u, target } => {
                let bit = 1u64 << *target;
                let mut out: HashMap<u64, Complex64> =
                    HashMap::with_capacity(self.entries.len() * 2);
                for (&b, &a) in &self.entries {
                    let v = ((b & bit) != 0) as usize;
                    let b0 = b & !bit;
                    let b1 = b | bit;
                    let c0 = u[0][v] * a;
                    let c1 = u[1][v] * a;
                    if c0 != ZERO {
                        *out.entry(b0).or_insert(ZERO) += c0;
                    }
                    if c1 != ZERO {
                        *out.entry(b1).or_insert(ZERO) += c1;
                    }
                }
                self.entries = out;
            }
            GateOp::Cnot { control, target } => {
                let cbit = 1u64 << *control;
                let tbit = 1u64 << *target;
                let mut out = HashMap::with_capacity(self.entries.len());
                for (&b, &a) in &self.entries {
                    let to = if b & cbit != 0 { b ^ tbit } else { b };
                    out.insert(to, a);
                }
                self.entries = out;
            }
            GateOp::PauliRotation { axis, theta } => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let mis = Complex64::new(0.0, -(theta / 2.0).sin());
                let x = axis.x_mask();
                let mut out: HashMap<u64, Complex64> =
                    HashMap::with_capacity(self.entries.len() * 2);
                for (&b, &a) in &self.entries {
                    let (to, f) = axis.apply_to_basis(b);
                    *out.entry(b).or_insert(ZERO) += c * a;
                    debug_assert_eq!(to, b ^ x);
                    *out.entry(to).or_insert(ZERO) += mis * f * a;
                }
                self.entries = out;
            }
        }
        self.prune();
        Ok(())
    }

    /// SpMSpV kernel: `h |psi>` (unnormalized). Output support is contained in
    /// the union of the per-term permuted input supports.
    pub fn apply_pauli_sum(&self, h: &PauliSum) -> Result<SparseState> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch(h.n_qubits(), self.n_qubits));
        }
        let mut out: HashMap<u64, Complex64> = HashMap::with_capacity(self.entries.len());
        for &(coeff, x, z) in h.raw_terms() {
            let p = PauliString::from_masks(self.n_qubits, x, z);
            for (&b, &a) in &self.entries {
                let (to, f) = p.apply_to_basis(b);
                *out.entry(to).or_insert(ZERO) += coeff * f * a;
            }
        }
        out.retain(|_, a| a.norm() >= SPARSITY_THRESHOLD);
        Ok(SparseState { n_qubits: self.n_qubits, entries: out })
    }

    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        let defect = h.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        let per_term: Vec<f64> = h
            .raw_terms()
            .iter()
            .map(|&(coeff, x, z)| {
                let p = PauliString::from_masks(self.n_qubits, x, z);
                let mut vals: Vec<(u64, Complex64)> = Vec::with_capacity(self.entries.len());
                for (&b, &a) in &self.entries {
                    let (to, f) = p.apply_to_basis(b);
                    if let Some(&c) = self.entries.get(&to) {
                        vals.push((b, c.conj() * f * a));
                    }
                }
                vals.sort_by_key(|&(b, _)| b);
                let v: Vec<Complex64> = vals.into_iter().map(|(_, v)| v).collect();
                (coeff * tree_sum_c(&v)).re
            })
            .collect();
        Ok(tree_sum(&per_term))
    }

    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        self.sorted_entries()
            .into_iter()
            .map(|(b, a)| (b, a.norm_sqr()))
            .collect()
    }

    pub fn to_dense(&self) -> DenseState {
        let mut amps = vec![ZERO; 1usize << self.n_qubits];
        for (&b, &a) in &self.entries {
            amps[b as usize] = a;
        }
        DenseState { n_qubits: self.n_qubits, amps }
    }
}

/// Deterministic pairwise-tree reduction; bit-identical regardless of how the
/// inputs were produced, as long as their order is fixed.
pub fn tree_sum(vals: &[f64]) -> f64 {
    match vals.len() {
        0 => 0.0,
        1 => vals[0],
        n => {
            let mid = n / 2;
            tree_sum(&vals[..mid]) + tree_sum(&vals[mid..])
        }
    }
}

pub fn tree_sum_c(vals: &[Complex64]) -> Complex64 {
    match vals.len() {
        0 => ZERO,
        1 => vals[0],
        n => {
            let mid = n / 2;
            tree_sum_c(&vals[..mid]) + tree_sum_c(&vals[mid..])
        }
    }
}

/// i.i.d. sampling from |amplitude|^2, deterministic per seed.
/// Returns a histogram basis index -> count.
pub fn sample(probs: &[(u64, f64)], shots: u64, seed: u64, op_id: u64) -> Result<HashMap<u64, u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let total: f64 = probs.iter().map(|&(_, p)| p).sum();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &(b, p) in probs {
        acc += p / total;
        cdf.push((b, acc));
    }
    let mut rng = derive_rng(seed, op_id);
    let mut hist: HashMap<u64, u64> = HashMap::new();
    for _ in 0..shots {
        let r: f64 = rng.gen();
        let i = cdf.partition_point(|&(_, c)| c < r).min(cdf.len() - 1);
        *hist.entry(cdf[i].0).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Basis-rotation gates taking Pauli term P to a Z-string on its support.
pub(crate) fn rotation_to_z_basis(n: usize, x: u64, z: u64) -> Vec<GateOp> {
    let mut gates = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for q in 0..n {
        match ((x >> q) & 1, (z >> q) & 1) {
            (1, 0) => gates.push(GateOp::h(q)),
            (1, 1) => {
                // H S^dag maps Y to Z.
                gates.push(GateOp::OneQubit {
                    u: [
                        [Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
                        [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
                    ],
                    target: q,
                });
            }
            _ => {}
        }
    }
    gates
}

/// Per-term basis-rotated shot estimation of `<psi|h|psi>`. Unbiased; each
/// term is measured independently with its own rotated copy of the state.
pub fn sampled_expectation_sparse(
    state: &SparseState,
    h: &PauliSum,
    shots_per_term: u64,
    seed: u64,
) -> Result<f64> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let n = state.n_qubits();
    let mut total = 0.0;
    for (op_id, &(coeff, x, z)) in h.raw_terms().iter().enumerate() {
        if x == 0 && z == 0 {
            total += coeff.re;
            continue;
        }
        let mut rotated = state.clone();
        for g in rotation_to_z_basis(n, x, z) {
            rotated.apply_gate(&g)?;
        }
        let support = x | z;
        let hist = sample(&rotated.probabilities(), shots_per_term, seed, op_id as u64)?;
        let mut mean = 0.0;
        for (b, count) in hist {
            let sign = if (b & support).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            mean += sign * count as f64;
        }
        total += coeff.re * mean / shots_per_term as f64;
    }
    Ok(total)
}

/// First-order Trotter evolution under a time-dependent Hamiltonian, with
/// H sampled at the midpoint of each step.
pub fn trotter_evolve_sparse(
    state: &mut SparseState,
    schedule: &dyn Fn(f64) -> PauliSum,
    total_time: f64,
    steps: usize,
) -> Result<()> {
    assert!(steps >= 1);
    let dt = total_time / steps as f64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) * dt;
        let h = schedule(t);
        for &(coeff, x, z) in h.raw_terms() {
            if x == 0 && z == 0 {
                continue; // global phase
            }
            let axis = PauliString::from_masks(state.n_qubits(), x, z);
            state.apply_gate(&GateOp::PauliRotation { axis, theta: 2.0 * coeff.re * dt })?;
        }
    }
    Ok(())
}

pub fn trotter_evolve_dense(
    state: &mut DenseState,
    schedule: &dyn Fn(f64) -> PauliSum,
    total_time: f64,
    steps: usize,
) -> Result<()> {
    assert!(steps >= 1);
    let dt = total_time / steps as f64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) * dt;
        let h = schedule(t);
        for &(coeff, x, z) in h.raw_terms() {
            if x == 0 && z == 0 {
                continue;
            }
            let axis = PauliString::from_masks(state.n_qubits(), x, z);
            state.apply_gate(&GateOp::PauliRotation { axis, theta: 2.0 * coeff.re * dt })?;
        }
    }
    Ok(())
}

/// State dump: one line per nonzero, `index<tab>re<tab>im`, sorted by index.
pub fn dump_state(entries: &[(u64, Complex64)]) -> String {
    let mut out = String::new();
    for &(b, a) in entries {
        out.push_str(&format!("{b}\t{:.16e}\t{:.16e}\n", a.re, a.im));
    }
    out
}
