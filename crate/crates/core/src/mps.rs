//! Matrix-product-state backend with SVD truncation, plus matrix-product
//! operators for expectation values.
//!
//! Site i carries qubit i (bit i of a basis index). Site tensors are
//! (left bond, physical = 2, right bond); MPO tensors add an output/input
//! physical pair. The state keeps a mixed-canonical gauge: everything left of
//! `center` is left-orthogonal, everything right of it right-orthogonal.

use ndarray::{Array1, Array2, Array3, Array4};
use ndarray_linalg::SVD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::sv::{DenseState, GateOp};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const DEFAULT_CUTOFF: f64 = 1e-12;
pub const DEFAULT_MAX_BOND: usize = 256;

#[derive(Clone, Debug)]
pub struct MpsState {
    n_qubits: usize,
    tensors: Vec<Array3<Complex64>>,
    pub max_bond: usize,
    /// Relative singular-value threshold (relative to the largest value at
    /// each split).
    pub cutoff: f64,
    /// Running sum of discarded squared singular values.
    pub accumulated_truncation_error: f64,
    center: usize,
}

fn svd_full(m: &Array2<Complex64>) -> Result<(Array2<Complex64>, Array1<f64>, Array2<Complex64>)> {
    let (u, s, vt) = m
        .svd(true, true)
        .map_err(|e| Error::Invalid(format!("SVD failed: {e}")))?;
    Ok((u.unwrap(), s, vt.unwrap()))
}

/// Number of singular values to keep and the squared weight discarded.
fn truncation_rank(s: &Array1<f64>, cutoff: f64, max_bond: usize) -> (usize, f64) {
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let mut k = s.iter().filter(|&&v| v > cutoff * smax).count();
    k = k.clamp(1, max_bond.max(1)).min(s.len());
    let err: f64 = s.iter().skip(k).map(|v| v * v).sum();
    (k, err)
}

impl MpsState {
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        let tensors = (0..n_qubits)
            .map(|q| {
                let mut t = Array3::zeros((1, 2, 1));
                t[(0, ((index >> q) & 1) as usize, 0)] = ONE;
                t
            })
            .collect();
        MpsState {
            n_qubits,
            tensors,
            max_bond: DEFAULT_MAX_BOND,
            cutoff: DEFAULT_CUTOFF,
            accumulated_truncation_error: 0.0,
            center: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        (0..self.n_qubits.saturating_sub(1))
            .map(|i| self.tensors[i].shape()[2])
            .collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn tensor(&self, site: usize) -> &Array3<Complex64> {
        &self.tensors[site]
    }

    /// Decompose a dense state by sweeping SVDs left to right.
    pub fn from_dense(state: &DenseState, cutoff: f64, max_bond: usize) -> Self {
        let n = state.n_qubits();
        if n == 0 {
            let mut s = MpsState::zero_state(0);
            s.cutoff = cutoff;
            s.max_bond = max_bond;
            return s;
        }
        let mut tensors = Vec::with_capacity(n);
        let mut err = 0.0;
        // rest[(l, c)] with column bits holding qubits i.. (qubit i at LSB).
        let mut rest =
            Array2::from_shape_fn((1, 1 << n), |(_, c)| state.amplitudes()[c]);
        for i in 0..n {
            let chi = rest.shape()[0];
            let half = rest.shape()[1] / 2;
            let m = Array2::from_shape_fn((chi * 2, half), |(row, col)| {
                rest[(row / 2, (row % 2) + 2 * col)]
            });
            if i == n - 1 {
                tensors.push(
                    Array3::from_shape_fn((chi, 2, 1), |(l, s, _)| m[(l * 2 + s, 0)]),
                );
                break;
            }
            let (u, s, vt) = svd_full(&m).expect("SVD of finite matrix");
            let (k, e) = truncation_rank(&s, cutoff, max_bond);
            err += e;
            tensors.push(Array3::from_shape_fn((chi, 2, k), |(l, p, r)| {
                u[(l * 2 + p, r)]
            }));
            rest = Array2::from_shape_fn((k, half), |(r, c)| s[r] * vt[(r, c)]);
        }
        MpsState {
            n_qubits: n,
            tensors,
            max_bond,
            cutoff,
            accumulated_truncation_error: err,
            center: n - 1,
        }
    }

    pub fn to_dense(&self) -> DenseState {
        let mut acc = Array2::from_elem((1, 1), ONE); // (2^i, chi)
        for (i, t) in self.tensors.iter().enumerate() {
            let (l, _, r) = (t.shape()[0], 2, t.shape()[2]);
            let rows = 1usize << i;
            let mut next = Array2::zeros((rows * 2, r));
            for b in 0..rows {
                for s in 0..2 {
                    for rr in 0..r {
                        let mut v = ZERO;
                        for ll in 0..l {
                            v += acc[(b, ll)] * t[(ll, s, rr)];
                        }
                        next[(b + (s << i), rr)] = v;
                    }
                }
            }
            acc = next;
        }
        let amps: Vec<Complex64> = acc.column(0).to_vec();
        DenseState::from_amplitudes(self.n_qubits, amps).expect("square amplitude table")
    }

    pub fn norm(&self) -> f64 {
        // With a consistent gauge only the center tensor matters, but compute
        // the full transfer product so the answer is right regardless.
        let mut env = Array2::from_elem((1, 1), ONE);
        for t in &self.tensors {
            let (l, _, r) = (t.shape()[0], 2, t.shape()[2]);
            let mut next = Array2::zeros((r, r));
            for a in 0..r {
                for b in 0..r {
                    let mut v = ZERO;
                    for s in 0..2 {
                        for la in 0..l {
                            for lb in 0..l {
                                v += t[(la, s, a)].conj() * env[(la, lb)] * t[(lb, s, b)];
                            }
                        }
                    }
                    next[(a, b)] = v;
                }
            }
            env = next;
        }
        env[(0, 0)].re.max(0.0).sqrt()
    }

    pub fn inner(&self, rhs: &MpsState) -> Result<Complex64> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::WidthMismatch(self.n_qubits, rhs.n_qubits));
        }
        let mut env = Array2::from_elem((1, 1), ONE);
        for (a, b) in self.tensors.iter().zip(&rhs.tensors) {
            let (la, ra) = (a.shape()[0], a.shape()[2]);
            let (lb, rb) = (b.shape()[0], b.shape()[2]);
            let mut next = Array2::zeros((ra, rb));
            for i in 0..ra {
                for j in 0..rb {
                    let mut v = ZERO;
                    for s in 0..2 {
                        for x in 0..la {
                            for y in 0..lb {
                                v += a[(x, s, i)].conj() * env[(x, y)] * b[(y, s, j)];
                            }
                        }
                    }
                    next[(i, j)] = v;
                }
            }
            env = next;
        }
        Ok(env[(0, 0)])
    }

    /// Shift site `c` left-orthogonal, pushing weight into site c+1.
    fn push_right(&mut self, c: usize) {
        let t = &self.tensors[c];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let m = Array2::from_shape_fn((l * 2, r), |(row, col)| t[(row / 2, row % 2, col)]);
        let (u, s, vt) = svd_full(&m).expect("gauge SVD");
        let k = s.len().min(l * 2).min(r);
        self.tensors[c] =
            Array3::from_shape_fn((l, 2, k), |(a, p, b)| u[(a * 2 + p, b)]);
        let next = &self.tensors[c + 1];
        let (nl, nr) = (next.shape()[0], next.shape()[2]);
        debug_assert_eq!(nl, r);
        let mut out = Array3::zeros((k, 2, nr));
        for a in 0..k {
            for p in 0..2 {
                for b in 0..nr {
                    let mut v = ZERO;
                    for j in 0..nl {
                        v += s[a] * vt[(a, j)] * next[(j, p, b)];
                    }
                    out[(a, p, b)] = v;
                }
            }
        }
        self.tensors[c + 1] = out;
    }

    /// Shift site `c` right-orthogonal, pushing weight into site c-1.
    fn push_left(&mut self, c: usize) {
        let t = &self.tensors[c];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let m = Array2::from_shape_fn((l, 2 * r), |(row, col)| t[(row, col / r, col % r)]);
        let (u, s, vt) = svd_full(&m).expect("gauge SVD");
        let k = s.len().min(l).min(2 * r);
        self.tensors[c] =
            Array3::from_shape_fn((k, 2, r), |(a, p, b)| vt[(a, p * r + b)]);
        let prev = &self.tensors[c - 1];
        let (pl, pr) = (prev.shape()[0], prev.shape()[2]);
        debug_assert_eq!(pr, l);
        let mut out = Array3::zeros((pl, 2, k));
        for a in 0..pl {
            for p in 0..2 {
                for b in 0..k {
                    let mut v = ZERO;
                    for j in 0..pr {
                        v += prev[(a, p, j)] * u[(j, b)] * s[b];
                    }
                    out[(a, p, b)] = v;
                }
            }
        }
        self.tensors[c - 1] = out;
    }

    pub fn move_center(&mut self, site: usize) {
        while self.center < site {
            self.push_right(self.center);
            self.center += 1;
        }
        while self.center > site {
            self.push_left(self.center);
            self.center -= 1;
        }
    }

    fn apply_one_qubit(&mut self, u: &[[Complex64; 2]; 2], q: usize) {
        let t = &self.tensors[q];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let mut out = Array3::zeros((l, 2, r));
        for a in 0..l {
            for b in 0..r {
                for sp in 0..2 {
                    out[(a, sp, b)] = u[sp][0] * t[(a, 0, b)] + u[sp][1] * t[(a, 1, b)];
                }
            }
        }
        self.tensors[q] = out;
    }

    /// Apply a 4x4 unitary on sites (q, q+1); combined physical index has
    /// qubit q as its low bit. Splits the merged tensor with a truncated SVD.
    fn apply_two_adjacent(&mut self, u4: &[[Complex64; 4]; 4], q: usize) {
        self.move_center(q);
        let a = self.tensors[q].clone();
        let b = self.tensors[q + 1].clone();
        let (l, mid) = (a.shape()[0], a.shape()[2]);
        let r = b.shape()[2];
        // theta[(l, s0), (s1, r)] after the gate.
        let mut theta = Array2::zeros((l * 2, 2 * r));
        for la in 0..l {
            for rb in 0..r {
                let mut amp = [ZERO; 4];
                for s0 in 0..2 {
                    for s1 in 0..2 {
                        let mut v = ZERO;
                        for m in 0..mid {
                            v += a[(la, s0, m)] * b[(m, s1, rb)];
                        }
                        amp[s0 | (s1 << 1)] = v;
                    }
                }
                for kout in 0..4 {
                    let mut v = ZERO;
                    for kin in 0..4 {
                        v += u4[kout][kin] * amp[kin];
                    }
                    let (s0, s1) = (kout & 1, kout >> 1);
                    theta[(la * 2 + s0, s1 * r + rb)] = v;
                }
            }
        }
        let (u, s, vt) = svd_full(&theta).expect("gate SVD");
        let (k, err) = truncation_rank(&s, self.cutoff, self.max_bond);
        self.accumulated_truncation_error += err;
        self.tensors[q] = Array3::from_shape_fn((l, 2, k), |(a_, p, b_)| u[(a_ * 2 + p, b_)]);
        self.tensors[q + 1] =
            Array3::from_shape_fn((k, 2, r), |(a_, p, b_)| s[a_] * vt[(a_, p * r + b_)]);
        self.center = q + 1;
    }

    fn apply_swap(&mut self, q: usize) {
        let mut swap = [[ZERO; 4]; 4];
        for kin in 0..4usize {
            let kout = ((kin & 1) << 1) | (kin >> 1);
            swap[kout][kin] = ONE;
        }
        self.apply_two_adjacent(&swap, q);
    }

    /// Apply a 4x4 unitary on arbitrary sites via adjacent-SWAP routing:
    /// `hi` is walked down next to `lo`, the gate runs, the walk is undone.
    fn apply_two_routed(&mut self, u4: &[[Complex64; 4]; 4], lo: usize, hi: usize) {
        debug_assert!(lo < hi);
        for q in (lo + 1..hi).rev() {
            self.apply_swap(q);
        }
        self.apply_two_adjacent(u4, lo);
        for q in lo + 1..hi {
            self.apply_swap(q);
        }
    }

    pub fn apply_gate(&mut self, g: &GateOp) -> Result<()> {
        match g {
            GateOp::OneQubit { u, target } => {
                if *target >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: *target,
                        n_qubits: self.n_qubits,
                    });
                }
                self.apply_one_qubit(u, *target);
                Ok(())
            }
            GateOp::Cnot { control, target } => {
                if *control >= self.n_qubits || *target >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: (*control).max(*target),
                        n_qubits: self.n_qubits,
                    });
                }
                if control == target {
                    return Err(Error::Invalid("CNOT control equals target".into()));
                }
                let (lo, hi) = (*control.min(target), *control.max(target));
                // Bit 0 of the combined index is the lower site.
                let cbit = usize::from(*control > *target);
                let tbit = 1 - cbit;
                let mut u4 = [[ZERO; 4]; 4];
                for kin in 0..4usize {
                    let kout = if (kin >> cbit) & 1 == 1 { kin ^ (1 << tbit) } else { kin };
                    u4[kout][kin] = ONE;
                }
                self.apply_two_routed(&u4, lo, hi);
                Ok(())
            }
            GateOp::PauliRotation { axis, theta } => self.apply_pauli_rotation(axis, *theta),
        }
    }

    /// exp(-i theta P / 2) as basis changes + CNOT parity chain + Rz.
    fn apply_pauli_rotation(&mut self, axis: &PauliString, theta: f64) -> Result<()> {
        if axis.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch(axis.n_qubits(), self.n_qubits));
        }
        let (bare, phase) = axis.split_phase();
        let theta = if (phase - ONE).norm() < 1e-12 {
            theta
        } else if (phase + ONE).norm() < 1e-12 {
            -theta
        } else {
            return Err(Error::NotHermitian(phase.im.abs()));
        };
        let support: Vec<usize> = (0..self.n_qubits)
            .filter(|q| (bare.x_mask() | bare.z_mask()) >> q & 1 == 1)
            .collect();
        if support.is_empty() {
            // Global phase e^{-i theta/2}.
            let f = Complex64::from_polar(1.0, -theta / 2.0);
            if self.n_qubits == 0 {
                return Ok(());
            }
            self.tensors[0].mapv_inplace(|v| v * f);
            return Ok(());
        }
        let basis = crate::sv::rotation_to_z_basis(self.n_qubits, bare.x_mask(), bare.z_mask());
        for g in &basis {
            self.apply_gate(g)?;
        }
        for w in support.windows(2) {
            self.apply_gate(&GateOp::Cnot { control: w[0], target: w[1] })?;
        }
        self.apply_gate(&GateOp::rz(theta, *support.last().unwrap()))?;
        for w in support.windows(2).rev() {
            self.apply_gate(&GateOp::Cnot { control: w[0], target: w[1] })?;
        }
        for g in &basis {
            self.apply_gate(&g.dagger())?;
        }
        Ok(())
    }

    /// Text dump: one shape header per site followed by the flattened tensor
    /// in the `index<TAB>re<TAB>im` state-dump format.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (i, t) in self.tensors.iter().enumerate() {
            let sh = t.shape();
            let _ = writeln!(out, "# site {} dims {} {} {}", i, sh[0], sh[1], sh[2]);
            for (j, v) in t.iter().enumerate() {
                let _ = writeln!(out, "{}\t{:.17e}\t{:.17e}", j, v.re, v.im);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Mpo {
    n_qubits: usize,
    /// (left, physical out, physical in, right) per site.
    tensors: Vec<Array4<Complex64>>,
}

fn pauli_site_matrix(x: u64, z: u64, q: usize) -> [[Complex64; 2]; 2] {
    let i = Complex64::new(0.0, 1.0);
    match ((x >> q) & 1, (z >> q) & 1) {
        (0, 0) => [[ONE, ZERO], [ZERO, ONE]],
        (1, 0) => [[ZERO, ONE], [ONE, ZERO]],
        (0, 1) => [[ONE, ZERO], [ZERO, -ONE]],
        _ => [[ZERO, -i], [i, ZERO]],
    }
}

impl Mpo {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        (0..self.n_qubits.saturating_sub(1))
            .map(|i| self.tensors[i].shape()[3])
            .collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Exact MPO: one bond channel per Pauli term, coefficient folded into
    /// the first site.
    pub fn from_pauli_sum(h: &PauliSum) -> Mpo {
        let n = h.n_qubits();
        let terms: Vec<(Complex64, PauliString)> = h.iter().collect();
        let t = terms.len().max(1);
        if n == 0 {
            return Mpo { n_qubits: 0, tensors: Vec::new() };
        }
        let mut tensors = Vec::with_capacity(n);
        for site in 0..n {
            let (l, r) = match (site, n - 1) {
                (0, last) if last == 0 => (1, 1),
                (0, _) => (1, t),
                (s, last) if s == last => (t, 1),
                _ => (t, t),
            };
            let mut w = Array4::zeros((l, 2, 2, r));
            for (k, (coeff, p)) in terms.iter().enumerate() {
                let (bare, phase) = p.split_phase();
                let m = pauli_site_matrix(bare.x_mask(), bare.z_mask(), site);
                let scale = if site == 0 { coeff * phase } else { ONE };
                let (a, b) = (if site == 0 { 0 } else { k }, if site == n - 1 { 0 } else { k });
                for so in 0..2 {
                    for si in 0..2 {
                        w[(a, so, si, b)] += scale * m[so][si];
                    }
                }
            }
            tensors.push(w);
        }
        Mpo { n_qubits: n, tensors }
    }

    /// SVD-compress the bonds. Returns the accumulated bound on the operator
    /// norm of the discarded part (sum over bonds of the Frobenius weight of
    /// dropped singular values).
    pub fn compress(&mut self, cutoff: f64, max_bond: usize) -> f64 {
        let n = self.n_qubits;
        if n < 2 {
            return 0.0;
        }
        // Left-to-right gauge sweep (no truncation)...
        for site in 0..n - 1 {
            let t = &self.tensors[site];
            let (l, r) = (t.shape()[0], t.shape()[3]);
            let m = Array2::from_shape_fn((l * 4, r), |(row, col)| {
                t[(row / 4, (row / 2) % 2, row % 2, col)]
            });
            let (u, s, vt) = svd_full(&m).expect("MPO SVD");
            let k = s.len().min(l * 4).min(r);
            self.tensors[site] = Array4::from_shape_fn((l, 2, 2, k), |(a, so, si, b)| {
                u[(a * 4 + so * 2 + si, b)]
            });
            let next = &self.tensors[site + 1];
            let nr = next.shape()[3];
            let mut out = Array4::zeros((k, 2, 2, nr));
            for a in 0..k {
                for so in 0..2 {
                    for si in 0..2 {
                        for b in 0..nr {
                            let mut v = ZERO;
                            for j in 0..r {
                                v += s[a] * vt[(a, j)] * next[(j, so, si, b)];
                            }
                            out[(a, so, si, b)] = v;
                        }
                    }
                }
            }
            self.tensors[site + 1] = out;
        }
        // ...then right-to-left with truncation.
        let mut bound = 0.0;
        for site in (1..n).rev() {
            let t = &self.tensors[site];
            let (l, r) = (t.shape()[0], t.shape()[3]);
            let m = Array2::from_shape_fn((l, 4 * r), |(row, col)| {
                t[(row, col / (2 * r), (col / r) % 2, col % r)]
            });
            let (u, s, vt) = svd_full(&m).expect("MPO SVD");
            let (k, err) = truncation_rank(&s, cutoff, max_bond);
            bound += err.sqrt();
            self.tensors[site] = Array4::from_shape_fn((k, 2, 2, r), |(a, so, si, b)| {
                vt[(a, so * 2 * r + si * r + b)]
            });
            let prev = &self.tensors[site - 1];
            let pl = prev.shape()[0];
            let mut out = Array4::zeros((pl, 2, 2, k));
            for a in 0..pl {
                for so in 0..2 {
                    for si in 0..2 {
                        for b in 0..k {
                            let mut v = ZERO;
                            for j in 0..l {
                                v += prev[(a, so, si, j)] * u[(j, b)] * s[b];
                            }
                            out[(a, so, si, b)] = v;
                        }
                    }
                }
            }
            self.tensors[site - 1] = out;
        }
        bound
    }
}

/// Exact contraction of <psi|H|psi> over the MPS/MPO/MPS sandwich.
pub fn mps_expectation(state: &MpsState, h: &Mpo) -> Result<f64> {
    let v = mps_matrix_element(state, h, state)?;
    Ok(v.re)
}

/// <bra|H|ket> by transfer contraction, matmul-shaped for speed.
pub fn mps_matrix_element(bra: &MpsState, h: &Mpo, ket: &MpsState) -> Result<Complex64> {
    if bra.n_qubits != h.n_qubits || ket.n_qubits != h.n_qubits {
        return Err(Error::WidthMismatch(bra.n_qubits, h.n_qubits));
    }
    if h.n_qubits == 0 {
        return Ok(ONE);
    }
    // env[(lb, lo, lk)] flattened as ((lb * lo), lk).
    let mut env = Array2::from_elem((1, 1), ONE);
    let mut dims = (1usize, 1usize, 1usize);
    for site in 0..h.n_qubits {
        let a = &bra.tensors[site];
        let w = &h.tensors[site];
        let k = &ket.tensors[site];
        let (lk, rk) = (k.shape()[0], k.shape()[2]);
        let (lb, lo) = (a.shape()[0], w.shape()[0]);
        let (rb, ro) = (a.shape()[2], w.shape()[3]);
        debug_assert_eq!(dims, (lb, lo, lk));
        // T1[(lb*lo), (s, rk)] = env . ket
        let kmat = Array2::from_shape_fn((lk, 2 * rk), |(x, c)| k[(x, c / rk, c % rk)]);
        let t1 = env.dot(&kmat); // (lb*lo, 2*rk)
        // T2[(lb, rk), (so, ro)] = sum_{lo, si} T1 W
        let mut t1p = Array2::zeros((lb * rk, lo * 2));
        for b in 0..lb {
            for o in 0..lo {
                for si in 0..2 {
                    for rkx in 0..rk {
                        t1p[(b * rk + rkx, o * 2 + si)] = t1[(b * lo + o, si * rk + rkx)];
                    }
                }
            }
        }
        let wmat = Array2::from_shape_fn((lo * 2, 2 * ro), |(row, col)| {
            w[(row / 2, col / ro, row % 2, col % ro)]
        });
        let t2 = t1p.dot(&wmat); // (lb*rk, 2*ro)
        // env'[(rb*ro), rk] = sum_{lb, so} conj(bra) T2
        let mut t2p = Array2::zeros((lb * 2, ro * rk));
        for b in 0..lb {
            for so in 0..2 {
                for o in 0..ro {
                    for rkx in 0..rk {
                        t2p[(b * 2 + so, o * rk + rkx)] = t2[(b * rk + rkx, so * ro + o)];
                    }
                }
            }
        }
        let bmat = Array2::from_shape_fn((rb, lb * 2), |(r, c)| a[(c / 2, c % 2, r)].conj());
        let envf = bmat.dot(&t2p); // (rb, ro*rk)
        let mut envn = Array2::zeros((rb * ro, rk));
        for r in 0..rb {
            for o in 0..ro {
                for rkx in 0..rk {
                    envn[(r * ro + o, rkx)] = envf[(r, o * rk + rkx)];
                }
            }
        }
        env = envn;
        dims = (rb, ro, rk);
    }
    Ok(env[(0, 0)])
}
